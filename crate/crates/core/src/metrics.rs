//! Aggregation of policy events and the closed-form cost models.
//!
//! Probabilities are count ratios over the processed accesses. The mean
//! access time is the five-term sum of hit latencies, the disk penalty for
//! faults (page fills ride on DMA, so only the disk delay is visible), and
//! both migration directions priced at `page_factor` transactions each.
//! Dynamic energy per request prices hits, the page write into memory on a
//! fault, and both migration directions. Static power is prorated over
//! requests using the time the memory spent serving them.

use serde::Serialize;

use crate::config::DeviceParams;
use crate::policy::SimEvent;
use crate::trace::Op;

const BYTES_PER_GB: f64 = (1u64 << 30) as f64;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("an access batch must contain exactly one hit or fault event (got {0})")]
    PrimaryCount(usize),
    #[error("metric undefined: no accesses were counted")]
    Empty,
    #[error("metric undefined: elapsed time is zero")]
    ZeroElapsed,
}

/// Tallies of every costed event over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EventCounters {
    pub n_total: u64,
    pub n_hit_dram_read: u64,
    pub n_hit_dram_write: u64,
    pub n_hit_nvm_read: u64,
    pub n_hit_nvm_write: u64,
    pub n_miss: u64,
    pub n_fault_to_dram: u64,
    pub n_fault_to_nvm: u64,
    pub n_mig_nvm_to_dram: u64,
    pub n_mig_dram_to_nvm: u64,
    pub n_evict_to_disk: u64,
}

impl EventCounters {
    /// Folds one access's event batch into the tallies.
    ///
    /// Rejects batches that do not contain exactly one hit/fault event;
    /// that always indicates a policy bug.
    pub fn accumulate(&mut self, events: &[SimEvent]) -> Result<(), MetricsError> {
        let primaries = events.iter().filter(|e| e.is_primary()).count();
        if primaries != 1 {
            return Err(MetricsError::PrimaryCount(primaries));
        }
        for event in events {
            match event {
                SimEvent::HitDram(Op::Read) => self.n_hit_dram_read += 1,
                SimEvent::HitDram(Op::Write) => self.n_hit_dram_write += 1,
                SimEvent::HitNvm(Op::Read) => self.n_hit_nvm_read += 1,
                SimEvent::HitNvm(Op::Write) => self.n_hit_nvm_write += 1,
                SimEvent::FaultToDram => {
                    self.n_miss += 1;
                    self.n_fault_to_dram += 1;
                }
                SimEvent::FaultToNvm => {
                    self.n_miss += 1;
                    self.n_fault_to_nvm += 1;
                }
                SimEvent::MigrateNvmToDram => self.n_mig_nvm_to_dram += 1,
                SimEvent::MigrateDramToNvm => self.n_mig_dram_to_nvm += 1,
                SimEvent::EvictToDisk => self.n_evict_to_disk += 1,
            }
        }
        self.n_total += 1;
        Ok(())
    }

    /// Associative, commutative merge for counters from parallel runs.
    pub fn merge(&mut self, other: &EventCounters) {
        self.n_total += other.n_total;
        self.n_hit_dram_read += other.n_hit_dram_read;
        self.n_hit_dram_write += other.n_hit_dram_write;
        self.n_hit_nvm_read += other.n_hit_nvm_read;
        self.n_hit_nvm_write += other.n_hit_nvm_write;
        self.n_miss += other.n_miss;
        self.n_fault_to_dram += other.n_fault_to_dram;
        self.n_fault_to_nvm += other.n_fault_to_nvm;
        self.n_mig_nvm_to_dram += other.n_mig_nvm_to_dram;
        self.n_mig_dram_to_nvm += other.n_mig_dram_to_nvm;
        self.n_evict_to_disk += other.n_evict_to_disk;
    }

    pub fn hits(&self) -> u64 {
        self.n_hit_dram_read + self.n_hit_dram_write + self.n_hit_nvm_read + self.n_hit_nvm_write
    }
}

/// Busy time of the memory: the sum of every access's latency
/// contribution. This is the default time base for prorating static power.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SimClock {
    total_request_time_ns: f64,
}

impl SimClock {
    pub fn new() -> Self {
        SimClock::default()
    }

    /// A clock pinned to a fixed elapsed time, used when a configured
    /// request rate replaces the busy-time base.
    pub fn from_elapsed_seconds(seconds: f64) -> Self {
        SimClock {
            total_request_time_ns: seconds * 1e9,
        }
    }

    pub fn advance(&mut self, events: &[SimEvent], device: &DeviceParams, page_factor: u64) {
        for event in events {
            self.total_request_time_ns += event_latency_ns(*event, device, page_factor);
        }
    }

    pub fn total_ns(&self) -> f64 {
        self.total_request_time_ns
    }

    pub fn elapsed_seconds(&self) -> f64 {
        self.total_request_time_ns * 1e-9
    }
}

/// Latency contribution of one event, in nanoseconds.
pub fn event_latency_ns(event: SimEvent, d: &DeviceParams, page_factor: u64) -> f64 {
    let pf = page_factor as f64;
    match event {
        SimEvent::HitDram(Op::Read) => d.dram.t_read_ns,
        SimEvent::HitDram(Op::Write) => d.dram.t_write_ns,
        SimEvent::HitNvm(Op::Read) => d.nvm.t_read_ns,
        SimEvent::HitNvm(Op::Write) => d.nvm.t_write_ns,
        // The page fill overlaps the disk transfer; only the disk is seen.
        SimEvent::FaultToDram | SimEvent::FaultToNvm => d.t_disk_ns,
        SimEvent::MigrateNvmToDram => pf * (d.nvm.t_read_ns + d.dram.t_write_ns),
        SimEvent::MigrateDramToNvm => pf * (d.dram.t_read_ns + d.nvm.t_write_ns),
        SimEvent::EvictToDisk => 0.0,
    }
}

/// Dynamic energy contribution of one event, in nanojoules.
pub fn event_energy_nj(event: SimEvent, d: &DeviceParams, page_factor: u64) -> f64 {
    let pf = page_factor as f64;
    match event {
        SimEvent::HitDram(Op::Read) => d.dram.e_read_nj,
        SimEvent::HitDram(Op::Write) => d.dram.e_write_nj,
        SimEvent::HitNvm(Op::Read) => d.nvm.e_read_nj,
        SimEvent::HitNvm(Op::Write) => d.nvm.e_write_nj,
        // Disk reads cost no memory energy; the page write into memory does.
        SimEvent::FaultToDram => pf * d.dram.e_write_nj,
        SimEvent::FaultToNvm => pf * d.nvm.e_write_nj,
        SimEvent::MigrateNvmToDram => pf * (d.nvm.e_read_nj + d.dram.e_write_nj),
        SimEvent::MigrateDramToNvm => pf * (d.dram.e_read_nj + d.nvm.e_write_nj),
        SimEvent::EvictToDisk => 0.0,
    }
}

/// Mean access time per request with its additive breakdown, nanoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AmatBreakdown {
    pub hit_dram: f64,
    pub hit_nvm: f64,
    pub miss: f64,
    pub mig_to_dram: f64,
    pub mig_to_nvm: f64,
    pub total: f64,
}

/// Dynamic energy per request with its additive breakdown, nanojoules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ApprBreakdown {
    pub hit_dram: f64,
    pub hit_nvm: f64,
    pub fault_to_dram: f64,
    pub fault_to_nvm: f64,
    pub mig_to_dram: f64,
    pub mig_to_nvm: f64,
    pub total: f64,
}

/// NVM write traffic split by source, in memory transactions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct NvmWriteBreakdown {
    /// Write requests served by NVM.
    pub requests: u64,
    /// Page writes from DRAM-to-NVM migrations.
    pub migrations: u64,
    /// Page writes from faults filled into NVM.
    pub faults: u64,
    pub total: u64,
}

/// Evaluates the mean access time model over final counters.
pub fn compute_amat(
    c: &EventCounters,
    d: &DeviceParams,
    page_factor: u64,
) -> Result<AmatBreakdown, MetricsError> {
    if c.n_total == 0 {
        return Err(MetricsError::Empty);
    }
    let n = c.n_total as f64;
    let pf = page_factor as f64;
    let hit_dram = (c.n_hit_dram_read as f64 * d.dram.t_read_ns
        + c.n_hit_dram_write as f64 * d.dram.t_write_ns)
        / n;
    let hit_nvm = (c.n_hit_nvm_read as f64 * d.nvm.t_read_ns
        + c.n_hit_nvm_write as f64 * d.nvm.t_write_ns)
        / n;
    let miss = c.n_miss as f64 * d.t_disk_ns / n;
    let mig_to_dram = c.n_mig_nvm_to_dram as f64 * pf * (d.nvm.t_read_ns + d.dram.t_write_ns) / n;
    let mig_to_nvm = c.n_mig_dram_to_nvm as f64 * pf * (d.dram.t_read_ns + d.nvm.t_write_ns) / n;
    Ok(AmatBreakdown {
        hit_dram,
        hit_nvm,
        miss,
        mig_to_dram,
        mig_to_nvm,
        total: hit_dram + hit_nvm + miss + mig_to_dram + mig_to_nvm,
    })
}

/// Evaluates the dynamic energy-per-request model over final counters.
pub fn compute_appr_dynamic(
    c: &EventCounters,
    d: &DeviceParams,
    page_factor: u64,
) -> Result<ApprBreakdown, MetricsError> {
    if c.n_total == 0 {
        return Err(MetricsError::Empty);
    }
    let n = c.n_total as f64;
    let pf = page_factor as f64;
    let hit_dram = (c.n_hit_dram_read as f64 * d.dram.e_read_nj
        + c.n_hit_dram_write as f64 * d.dram.e_write_nj)
        / n;
    let hit_nvm = (c.n_hit_nvm_read as f64 * d.nvm.e_read_nj
        + c.n_hit_nvm_write as f64 * d.nvm.e_write_nj)
        / n;
    let fault_to_dram = c.n_fault_to_dram as f64 * pf * d.dram.e_write_nj / n;
    let fault_to_nvm = c.n_fault_to_nvm as f64 * pf * d.nvm.e_write_nj / n;
    let mig_to_dram = c.n_mig_nvm_to_dram as f64 * pf * (d.nvm.e_read_nj + d.dram.e_write_nj) / n;
    let mig_to_nvm = c.n_mig_dram_to_nvm as f64 * pf * (d.dram.e_read_nj + d.nvm.e_write_nj) / n;
    Ok(ApprBreakdown {
        hit_dram,
        hit_nvm,
        fault_to_dram,
        fault_to_nvm,
        mig_to_dram,
        mig_to_nvm,
        total: hit_dram + hit_nvm + fault_to_dram + fault_to_nvm + mig_to_dram + mig_to_nvm,
    })
}

/// Static power prorated per request, nanojoules.
///
/// Capacity-proportional background power (watts) times the elapsed time,
/// spread over all counted requests. With the busy-time clock this equals
/// static watts times the mean access time, so sparse request streams pay
/// a larger static share.
pub fn compute_static_power(
    dram_pages: u64,
    nvm_pages: u64,
    d: &DeviceParams,
    page_size: u64,
    c: &EventCounters,
    clock: &SimClock,
) -> Result<f64, MetricsError> {
    if c.n_total == 0 {
        return Err(MetricsError::Empty);
    }
    let elapsed = clock.elapsed_seconds();
    if elapsed <= 0.0 {
        return Err(MetricsError::ZeroElapsed);
    }
    let dram_gb = (dram_pages * page_size) as f64 / BYTES_PER_GB;
    let nvm_gb = (nvm_pages * page_size) as f64 / BYTES_PER_GB;
    let watts = dram_gb * d.dram.static_j_per_gb_s + nvm_gb * d.nvm.static_j_per_gb_s;
    Ok(watts * elapsed * 1e9 / c.n_total as f64)
}

/// Splits NVM write traffic by source, in memory transactions.
pub fn nvm_write_breakdown(c: &EventCounters, page_factor: u64) -> NvmWriteBreakdown {
    let requests = c.n_hit_nvm_write;
    let migrations = page_factor * c.n_mig_dram_to_nvm;
    let faults = page_factor * c.n_fault_to_nvm;
    NvmWriteBreakdown {
        requests,
        migrations,
        faults,
        total: requests + migrations + faults,
    }
}
