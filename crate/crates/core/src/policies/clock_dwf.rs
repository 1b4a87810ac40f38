//! Two-clock placement scheme that keeps NVM free of request writes.
//!
//! Each tier runs a clock over its frames. Write faults and write hits on
//! NVM-resident pages place the page in DRAM; read faults fill NVM — except
//! that while DRAM still has free frames, every fault fills DRAM first. The
//! DRAM victim scan prefers pages that were never written: referenced pages
//! get a second chance, and if every candidate has a nonzero write count,
//! all counts are halved and the scan repeats.

use std::collections::HashMap;

use crate::policy::{Policy, PolicyKind, SimEvent};
use crate::trace::{Op, PageId};

#[derive(Clone, Copy, Debug)]
struct ClockEntry {
    page: PageId,
    ref_bit: bool,
    write_freq: u64,
}

/// One tier's frames under a clock hand.
///
/// New pages fill the lowest-numbered empty frame; the hand sweeps frame
/// order and skips empty frames.
pub struct ClockTier {
    slots: Vec<Option<ClockEntry>>,
    index: HashMap<PageId, usize>,
    free: Vec<usize>,
    hand: usize,
    len: usize,
}

impl ClockTier {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "clock capacity must be >= 1");
        ClockTier {
            slots: (0..capacity).map(|_| None).collect(),
            index: HashMap::with_capacity(capacity),
            free: (0..capacity).rev().collect(),
            hand: 0,
            len: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.slots.len()
    }

    pub fn contains(&self, page: PageId) -> bool {
        self.index.contains_key(&page)
    }

    /// Inserts a page with its reference bit set (it was just accessed).
    pub fn insert(&mut self, page: PageId, write_freq: u64) {
        assert!(!self.is_full(), "insert into full clock tier");
        assert!(!self.contains(page), "page already resident");
        let slot = self.free.pop().expect("free slot exists");
        self.slots[slot] = Some(ClockEntry {
            page,
            ref_bit: true,
            write_freq,
        });
        self.index.insert(page, slot);
        self.len += 1;
    }

    /// Marks a hit: sets the reference bit, optionally bumping the write count.
    pub fn note_hit(&mut self, page: PageId, written: bool) {
        let &slot = self.index.get(&page).expect("page is resident");
        let entry = self.slots[slot].as_mut().expect("slot occupied");
        entry.ref_bit = true;
        if written {
            entry.write_freq += 1;
        }
    }

    /// Removes a specific resident page.
    pub fn remove(&mut self, page: PageId) {
        let slot = self.index.remove(&page).expect("page is resident");
        self.slots[slot] = None;
        self.free.push(slot);
        self.len -= 1;
    }

    /// Classic clock eviction: referenced frames get a second chance; the
    /// first unreferenced frame is removed and returned.
    pub fn take_clock_victim(&mut self) -> PageId {
        assert!(!self.is_empty(), "victim scan on empty tier");
        loop {
            let i = self.hand;
            self.hand = (self.hand + 1) % self.slots.len();
            if let Some(entry) = self.slots[i].as_mut() {
                if entry.ref_bit {
                    entry.ref_bit = false;
                } else {
                    let page = entry.page;
                    self.remove(page);
                    return page;
                }
            }
        }
    }

    /// Write-aware eviction for the DRAM tier: among unreferenced frames,
    /// the first with a zero write count is taken. Referenced frames get
    /// their bit cleared and are skipped. If a full sweep finds no
    /// candidate, every write count is halved and the sweep repeats.
    pub fn take_read_dominant_victim(&mut self) -> PageId {
        assert!(!self.is_empty(), "victim scan on empty tier");
        loop {
            let mut visited = 0;
            while visited < self.slots.len() {
                let i = self.hand;
                self.hand = (self.hand + 1) % self.slots.len();
                visited += 1;
                if let Some(entry) = self.slots[i].as_mut() {
                    if entry.ref_bit {
                        entry.ref_bit = false;
                    } else if entry.write_freq == 0 {
                        let page = entry.page;
                        self.remove(page);
                        return page;
                    }
                }
            }
            for entry in self.slots.iter_mut().flatten() {
                entry.write_freq /= 2;
            }
        }
    }

    #[cfg(test)]
    fn set_state(&mut self, page: PageId, ref_bit: bool, write_freq: u64) {
        let &slot = self.index.get(&page).expect("page is resident");
        let entry = self.slots[slot].as_mut().expect("slot occupied");
        entry.ref_bit = ref_bit;
        entry.write_freq = write_freq;
    }
}

pub struct ClockDwf {
    dram: ClockTier,
    nvm: ClockTier,
}

impl ClockDwf {
    pub fn new(dram_pages: usize, nvm_pages: usize) -> Self {
        ClockDwf {
            dram: ClockTier::new(dram_pages),
            nvm: ClockTier::new(nvm_pages),
        }
    }

    /// Moves the DRAM victim into NVM, evicting from NVM first if needed.
    fn displace_dram_victim(&mut self, events: &mut Vec<SimEvent>) {
        let victim = self.dram.take_read_dominant_victim();
        events.push(SimEvent::MigrateDramToNvm);
        if self.nvm.is_full() {
            self.nvm.take_clock_victim();
            events.push(SimEvent::EvictToDisk);
        }
        self.nvm.insert(victim, 0);
    }
}

impl Policy for ClockDwf {
    fn on_access(&mut self, op: Op, page: PageId, events: &mut Vec<SimEvent>) {
        if self.dram.contains(page) {
            self.dram.note_hit(page, op == Op::Write);
            events.push(SimEvent::HitDram(op));
        } else if self.nvm.contains(page) {
            if op == Op::Read {
                self.nvm.note_hit(page, false);
                events.push(SimEvent::HitNvm(Op::Read));
            } else {
                // Write hit in NVM: the page moves to DRAM and the request
                // is served there.
                self.nvm.remove(page);
                events.push(SimEvent::HitDram(Op::Write));
                events.push(SimEvent::MigrateNvmToDram);
                if self.dram.is_full() {
                    self.displace_dram_victim(events);
                }
                self.dram.insert(page, 1);
            }
        } else if !self.dram.is_full() {
            // While DRAM has free frames every fault fills DRAM, whatever
            // the request type.
            events.push(SimEvent::FaultToDram);
            self.dram.insert(page, if op == Op::Write { 1 } else { 0 });
        } else if op == Op::Read {
            events.push(SimEvent::FaultToNvm);
            if self.nvm.is_full() {
                self.nvm.take_clock_victim();
                events.push(SimEvent::EvictToDisk);
            }
            self.nvm.insert(page, 0);
        } else {
            events.push(SimEvent::FaultToDram);
            self.displace_dram_victim(events);
            self.dram.insert(page, 1);
        }
    }

    fn reset(&mut self) {
        self.dram = ClockTier::new(self.dram.capacity());
        self.nvm = ClockTier::new(self.nvm.capacity());
    }

    fn kind(&self) -> PolicyKind {
        PolicyKind::ClockDwf
    }

    fn occupancy(&self) -> (usize, usize) {
        (self.dram.len(), self.nvm.len())
    }
}
