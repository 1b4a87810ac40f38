//! Brute-force reference implementations used as ground truth in tests.
//!
//! Everything here is re-derived from the policy definitions with plain
//! vectors and full scans, sharing no mechanics with the optimized queue
//! or policy code, so that agreement between the two is evidence rather
//! than tautology. Costs are likewise charged event by event instead of
//! through the closed forms. Intended for small instances only.

use crate::config::{DeviceParams, PolicyParams};
use crate::metrics::{EventCounters, MetricsError};
use crate::policy::{PolicyKind, SimEvent};
use crate::trace::{Op, PageId};

/// One page's state in a naive recency list.
#[derive(Clone, Copy, Debug)]
pub struct NaiveEntry {
    pub page: PageId,
    pub read_count: u64,
    pub write_count: u64,
}

impl NaiveEntry {
    fn fresh(page: PageId) -> Self {
        NaiveEntry {
            page,
            read_count: 0,
            write_count: 0,
        }
    }
}

/// A recency list as a plain vector, most-recent first.
#[derive(Clone, Debug, Default)]
pub struct NaiveTier {
    pub entries: Vec<NaiveEntry>,
}

impl NaiveTier {
    pub fn rank_of(&self, page: PageId) -> Option<usize> {
        self.entries.iter().position(|e| e.page == page)
    }

    fn move_to_front(&mut self, rank: usize) {
        let e = self.entries.remove(rank);
        self.entries.insert(0, e);
    }
}

/// Result of a reference simulation.
pub struct OracleRun {
    /// Event batches, one per access, in canonical order.
    pub events: Vec<Vec<SimEvent>>,
    pub counters: EventCounters,
    /// Final NVM recency state (two-queue runs only), most-recent first.
    pub nvm_final: Vec<NaiveEntry>,
}

impl OracleRun {
    fn record(events: Vec<Vec<SimEvent>>) -> OracleRun {
        Self::record_with_nvm(events, Vec::new())
    }

    fn record_with_nvm(events: Vec<Vec<SimEvent>>, nvm_final: Vec<NaiveEntry>) -> OracleRun {
        let counters = tally(&events);
        OracleRun {
            events,
            counters,
            nvm_final,
        }
    }
}

/// Counts events with a straight per-variant tally.
fn tally(log: &[Vec<SimEvent>]) -> EventCounters {
    let mut c = EventCounters {
        n_total: log.len() as u64,
        ..EventCounters::default()
    };
    for event in log.iter().flatten() {
        match event {
            SimEvent::HitDram(Op::Read) => c.n_hit_dram_read += 1,
            SimEvent::HitDram(Op::Write) => c.n_hit_dram_write += 1,
            SimEvent::HitNvm(Op::Read) => c.n_hit_nvm_read += 1,
            SimEvent::HitNvm(Op::Write) => c.n_hit_nvm_write += 1,
            SimEvent::FaultToDram => {
                c.n_miss += 1;
                c.n_fault_to_dram += 1;
            }
            SimEvent::FaultToNvm => {
                c.n_miss += 1;
                c.n_fault_to_nvm += 1;
            }
            SimEvent::MigrateNvmToDram => c.n_mig_nvm_to_dram += 1,
            SimEvent::MigrateDramToNvm => c.n_mig_dram_to_nvm += 1,
            SimEvent::EvictToDisk => c.n_evict_to_disk += 1,
        }
    }
    c
}

/// Runs the reference simulation of a policy over a page-level trace.
///
/// `dram_cap`/`nvm_cap` are the hybrid tier capacities; the single-tier
/// baselines use the sum, mirroring the optimized construction.
pub fn oracle_simulate(
    trace: &[(Op, PageId)],
    policy: PolicyKind,
    dram_cap: usize,
    nvm_cap: usize,
    params: &PolicyParams,
) -> OracleRun {
    match policy {
        PolicyKind::DramLru => simulate_single(trace, dram_cap + nvm_cap, true),
        PolicyKind::NvmLru => simulate_single(trace, dram_cap + nvm_cap, false),
        PolicyKind::ClockDwf => simulate_clock_dwf(trace, dram_cap, nvm_cap),
        PolicyKind::TwoLru => simulate_two_lru(trace, dram_cap, nvm_cap, params),
    }
}

fn simulate_single(trace: &[(Op, PageId)], capacity: usize, dram: bool) -> OracleRun {
    let mut list: Vec<PageId> = Vec::new();
    let mut log = Vec::with_capacity(trace.len());
    for &(op, page) in trace {
        let mut batch = Vec::new();
        if let Some(rank) = list.iter().position(|&p| p == page) {
            list.remove(rank);
            list.insert(0, page);
            batch.push(if dram {
                SimEvent::HitDram(op)
            } else {
                SimEvent::HitNvm(op)
            });
        } else {
            batch.push(if dram {
                SimEvent::FaultToDram
            } else {
                SimEvent::FaultToNvm
            });
            if list.len() == capacity {
                list.pop();
                batch.push(SimEvent::EvictToDisk);
            }
            list.insert(0, page);
        }
        log.push(batch);
    }
    OracleRun::record(log)
}

fn simulate_two_lru(
    trace: &[(Op, PageId)],
    dram_cap: usize,
    nvm_cap: usize,
    params: &PolicyParams,
) -> OracleRun {
    let (read_len, write_len) = params.region_sizes(nvm_cap);
    let mut dram: Vec<PageId> = Vec::new();
    let mut nvm = NaiveTier::default();
    let mut log = Vec::with_capacity(trace.len());

    for &(op, page) in trace {
        let mut batch = Vec::new();
        if let Some(rank) = dram.iter().position(|&p| p == page) {
            dram.remove(rank);
            dram.insert(0, page);
            batch.push(SimEvent::HitDram(op));
        } else if let Some(rank) = nvm.rank_of(page) {
            nvm.move_to_front(rank);
            // Literal housekeeping: zero the counter of whatever page now
            // sits at each boundary position.
            if nvm.entries.len() > read_len {
                nvm.entries[read_len].read_count = 0;
            }
            if nvm.entries.len() > write_len {
                nvm.entries[write_len].write_count = 0;
            }
            let within_read = rank < read_len;
            let within_write = rank < write_len;
            let migrate = match op {
                Op::Read => {
                    nvm.entries[0].read_count = if within_read {
                        nvm.entries[0].read_count + 1
                    } else {
                        1
                    };
                    nvm.entries[0].read_count > params.read_threshold
                }
                Op::Write => {
                    nvm.entries[0].write_count = if within_write {
                        nvm.entries[0].write_count + 1
                    } else {
                        1
                    };
                    nvm.entries[0].write_count > params.write_threshold
                }
            };
            if migrate {
                nvm.entries.remove(0);
                batch.push(SimEvent::HitDram(op));
                batch.push(SimEvent::MigrateNvmToDram);
                if dram.len() == dram_cap {
                    let victim = dram.pop().expect("full DRAM is non-empty");
                    batch.push(SimEvent::MigrateDramToNvm);
                    if nvm.entries.len() == nvm_cap {
                        nvm.entries.pop();
                        batch.push(SimEvent::EvictToDisk);
                    }
                    nvm.entries.insert(0, NaiveEntry::fresh(victim));
                }
                dram.insert(0, page);
            } else {
                batch.push(SimEvent::HitNvm(op));
            }
        } else {
            batch.push(SimEvent::FaultToDram);
            if dram.len() == dram_cap {
                let victim = dram.pop().expect("full DRAM is non-empty");
                batch.push(SimEvent::MigrateDramToNvm);
                if nvm.entries.len() == nvm_cap {
                    nvm.entries.pop();
                    batch.push(SimEvent::EvictToDisk);
                }
                nvm.entries.insert(0, NaiveEntry::fresh(victim));
            }
            dram.insert(0, page);
        }
        log.push(batch);
    }
    OracleRun::record_with_nvm(log, nvm.entries)
}

#[derive(Clone, Copy)]
struct NaiveFrame {
    page: PageId,
    ref_bit: bool,
    write_freq: u64,
}

/// Frames plus a hand; membership and free slots found by full scans.
struct NaiveClock {
    frames: Vec<Option<NaiveFrame>>,
    hand: usize,
}

impl NaiveClock {
    fn new(capacity: usize) -> Self {
        NaiveClock {
            frames: vec![None; capacity],
            hand: 0,
        }
    }

    fn len(&self) -> usize {
        self.frames.iter().filter(|f| f.is_some()).count()
    }

    fn is_full(&self) -> bool {
        self.len() == self.frames.len()
    }

    fn find(&self, page: PageId) -> Option<usize> {
        self.frames
            .iter()
            .position(|f| matches!(f, Some(fr) if fr.page == page))
    }

    fn insert(&mut self, page: PageId, write_freq: u64) {
        let slot = self
            .frames
            .iter()
            .position(|f| f.is_none())
            .expect("a frame is free");
        self.frames[slot] = Some(NaiveFrame {
            page,
            ref_bit: true,
            write_freq,
        });
    }

    fn remove(&mut self, page: PageId) {
        let slot = self.find(page).expect("page is resident");
        self.frames[slot] = None;
    }

    fn evict_classic(&mut self) -> PageId {
        loop {
            let i = self.hand;
            self.hand = (self.hand + 1) % self.frames.len();
            if let Some(frame) = self.frames[i].as_mut() {
                if frame.ref_bit {
                    frame.ref_bit = false;
                } else {
                    let page = frame.page;
                    self.frames[i] = None;
                    return page;
                }
            }
        }
    }

    fn evict_read_dominant(&mut self) -> PageId {
        loop {
            for _ in 0..self.frames.len() {
                let i = self.hand;
                self.hand = (self.hand + 1) % self.frames.len();
                if let Some(frame) = self.frames[i].as_mut() {
                    if frame.ref_bit {
                        frame.ref_bit = false;
                    } else if frame.write_freq == 0 {
                        let page = frame.page;
                        self.frames[i] = None;
                        return page;
                    }
                }
            }
            for frame in self.frames.iter_mut().flatten() {
                frame.write_freq /= 2;
            }
        }
    }
}

fn simulate_clock_dwf(trace: &[(Op, PageId)], dram_cap: usize, nvm_cap: usize) -> OracleRun {
    let mut dram = NaiveClock::new(dram_cap);
    let mut nvm = NaiveClock::new(nvm_cap);
    let mut log = Vec::with_capacity(trace.len());

    for &(op, page) in trace {
        let mut batch = Vec::new();
        if let Some(slot) = dram.find(page) {
            let frame = dram.frames[slot].as_mut().expect("slot occupied");
            frame.ref_bit = true;
            if op == Op::Write {
                frame.write_freq += 1;
            }
            batch.push(SimEvent::HitDram(op));
        } else if let Some(slot) = nvm.find(page) {
            if op == Op::Read {
                nvm.frames[slot].as_mut().expect("slot occupied").ref_bit = true;
                batch.push(SimEvent::HitNvm(Op::Read));
            } else {
                nvm.remove(page);
                batch.push(SimEvent::HitDram(Op::Write));
                batch.push(SimEvent::MigrateNvmToDram);
                if dram.is_full() {
                    let victim = dram.evict_read_dominant();
                    batch.push(SimEvent::MigrateDramToNvm);
                    if nvm.is_full() {
                        nvm.evict_classic();
                        batch.push(SimEvent::EvictToDisk);
                    }
                    nvm.insert(victim, 0);
                }
                dram.insert(page, 1);
            }
        } else if !dram.is_full() {
            batch.push(SimEvent::FaultToDram);
            dram.insert(page, if op == Op::Write { 1 } else { 0 });
        } else if op == Op::Read {
            batch.push(SimEvent::FaultToNvm);
            if nvm.is_full() {
                nvm.evict_classic();
                batch.push(SimEvent::EvictToDisk);
            }
            nvm.insert(page, 0);
        } else {
            batch.push(SimEvent::FaultToDram);
            let victim = dram.evict_read_dominant();
            batch.push(SimEvent::MigrateDramToNvm);
            if nvm.is_full() {
                nvm.evict_classic();
                batch.push(SimEvent::EvictToDisk);
            }
            nvm.insert(victim, 0);
            dram.insert(page, 1);
        }
        log.push(batch);
    }
    OracleRun::record(log)
}

/// Charges every logged event its latency and energy and returns the
/// per-access means `(amat_ns, appr_nj)`.
pub fn oracle_accumulate_costs(
    log: &[Vec<SimEvent>],
    d: &DeviceParams,
    page_factor: u64,
) -> Result<(f64, f64), MetricsError> {
    if log.is_empty() {
        return Err(MetricsError::Empty);
    }
    let pf = page_factor as f64;
    let mut time_ns = 0.0;
    let mut energy_nj = 0.0;
    for event in log.iter().flatten() {
        match event {
            SimEvent::HitDram(Op::Read) => {
                time_ns += d.dram.t_read_ns;
                energy_nj += d.dram.e_read_nj;
            }
            SimEvent::HitDram(Op::Write) => {
                time_ns += d.dram.t_write_ns;
                energy_nj += d.dram.e_write_nj;
            }
            SimEvent::HitNvm(Op::Read) => {
                time_ns += d.nvm.t_read_ns;
                energy_nj += d.nvm.e_read_nj;
            }
            SimEvent::HitNvm(Op::Write) => {
                time_ns += d.nvm.t_write_ns;
                energy_nj += d.nvm.e_write_nj;
            }
            SimEvent::FaultToDram => {
                time_ns += d.t_disk_ns;
                energy_nj += pf * d.dram.e_write_nj;
            }
            SimEvent::FaultToNvm => {
                time_ns += d.t_disk_ns;
                energy_nj += pf * d.nvm.e_write_nj;
            }
            SimEvent::MigrateNvmToDram => {
                time_ns += pf * (d.nvm.t_read_ns + d.dram.t_write_ns);
                energy_nj += pf * (d.nvm.e_read_nj + d.dram.e_write_nj);
            }
            SimEvent::MigrateDramToNvm => {
                time_ns += pf * (d.dram.t_read_ns + d.nvm.t_write_ns);
                energy_nj += pf * (d.dram.e_read_nj + d.nvm.e_write_nj);
            }
            SimEvent::EvictToDisk => {}
        }
    }
    let n = log.len() as f64;
    Ok((time_ns / n, energy_nj / n))
}
