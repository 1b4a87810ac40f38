//! Two-queue placement scheme with counter-thresholded migration.
//!
//! Both tiers run unmodified LRU. The NVM queue additionally keeps read and
//! write counters for its top positions (see [`LruQueue`]): a hit inside
//! the tracked region increments the matching counter, a hit below it
//! restarts the counter at 1, and a counter strictly above its threshold
//! migrates the page to DRAM. Page faults always fill DRAM; the DRAM LRU
//! victim is demoted to the front of the NVM queue with fresh counters.

use crate::config::PolicyParams;
use crate::lru_queue::LruQueue;
use crate::policy::{Policy, PolicyKind, SimEvent};
use crate::trace::{Op, PageId};

pub struct TwoLru {
    dram: LruQueue,
    nvm: LruQueue,
    read_region: usize,
    write_region: usize,
    read_threshold: u64,
    write_threshold: u64,
}

impl TwoLru {
    pub fn new(dram_pages: usize, nvm_pages: usize, params: &PolicyParams) -> Self {
        let (read_region, write_region) = params.region_sizes(nvm_pages);
        TwoLru {
            dram: LruQueue::new(dram_pages),
            nvm: LruQueue::with_regions(nvm_pages, read_region, write_region),
            read_region,
            write_region,
            read_threshold: params.read_threshold,
            write_threshold: params.write_threshold,
        }
    }

    /// NVM residency, most-recent first, with `(page, read, write)`
    /// counters. Inspection only.
    pub fn nvm_snapshot(&self) -> Vec<(PageId, u64, u64)> {
        self.nvm
            .pages_mru_to_lru()
            .into_iter()
            .map(|p| {
                let (r, w) = self.nvm.counters_of(p).expect("page is resident");
                (p, r, w)
            })
            .collect()
    }

    /// Counter-region lengths of the NVM queue, `(read, write)`.
    pub fn nvm_region_lens(&self) -> (usize, usize) {
        (self.read_region, self.write_region)
    }

    /// Demotes DRAM's LRU victim to the front of the NVM queue, evicting
    /// NVM's tail to disk if NVM is out of frames.
    fn demote_dram_victim(&mut self, events: &mut Vec<SimEvent>) {
        let victim = self.dram.evict().expect("full DRAM is non-empty");
        events.push(SimEvent::MigrateDramToNvm);
        if self.nvm.is_full() {
            self.nvm.evict().expect("full NVM is non-empty");
            events.push(SimEvent::EvictToDisk);
        }
        self.nvm.insert(victim).expect("capacity was freed");
    }
}

impl Policy for TwoLru {
    fn on_access(&mut self, op: Op, page: PageId, events: &mut Vec<SimEvent>) {
        if self.dram.contains(page) {
            self.dram.touch(page).expect("page is resident");
            events.push(SimEvent::HitDram(op));
        } else if self.nvm.contains(page) {
            let info = self.nvm.touch(page).expect("page is resident");
            let migrate = match op {
                Op::Read => {
                    let count = self
                        .nvm
                        .record_read(page, info.in_read_region)
                        .expect("page is resident");
                    count > self.read_threshold
                }
                Op::Write => {
                    let count = self
                        .nvm
                        .record_write(page, info.in_write_region)
                        .expect("page is resident");
                    count > self.write_threshold
                }
            };
            if migrate {
                // The page moves to DRAM and the triggering request is
                // served at its destination.
                self.nvm.remove(page).expect("page is resident");
                events.push(SimEvent::HitDram(op));
                events.push(SimEvent::MigrateNvmToDram);
                if self.dram.is_full() {
                    self.demote_dram_victim(events);
                }
                self.dram.insert(page).expect("capacity was freed");
            } else {
                events.push(SimEvent::HitNvm(op));
            }
        } else {
            events.push(SimEvent::FaultToDram);
            if self.dram.is_full() {
                self.demote_dram_victim(events);
            }
            self.dram.insert(page).expect("capacity was freed");
        }
    }

    fn reset(&mut self) {
        self.dram = LruQueue::new(self.dram.capacity());
        self.nvm = LruQueue::with_regions(self.nvm.capacity(), self.read_region, self.write_region);
    }

    fn kind(&self) -> PolicyKind {
        PolicyKind::TwoLru
    }

    fn occupancy(&self) -> (usize, usize) {
        (self.dram.len(), self.nvm.len())
    }
}
