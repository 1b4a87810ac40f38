//! Single-tier LRU baseline over an all-DRAM or all-NVM memory.

use crate::lru_queue::LruQueue;
use crate::policy::{Policy, PolicyKind, SimEvent};
use crate::trace::{Op, PageId};

/// Which device the single tier is made of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Dram,
    Nvm,
}

pub struct SingleTierLru {
    tier: Tier,
    queue: LruQueue,
}

impl SingleTierLru {
    pub fn new(tier: Tier, capacity: usize) -> Self {
        SingleTierLru {
            tier,
            queue: LruQueue::new(capacity),
        }
    }

    fn hit_event(&self, op: Op) -> SimEvent {
        match self.tier {
            Tier::Dram => SimEvent::HitDram(op),
            Tier::Nvm => SimEvent::HitNvm(op),
        }
    }

    fn fault_event(&self) -> SimEvent {
        match self.tier {
            Tier::Dram => SimEvent::FaultToDram,
            Tier::Nvm => SimEvent::FaultToNvm,
        }
    }
}

impl Policy for SingleTierLru {
    fn on_access(&mut self, op: Op, page: PageId, events: &mut Vec<SimEvent>) {
        if self.queue.contains(page) {
            self.queue.touch(page).expect("page is resident");
            events.push(self.hit_event(op));
        } else {
            events.push(self.fault_event());
            if self.queue.is_full() {
                self.queue.evict().expect("full queue is non-empty");
                events.push(SimEvent::EvictToDisk);
            }
            self.queue.insert(page).expect("capacity was freed");
        }
    }

    fn reset(&mut self) {
        self.queue = LruQueue::new(self.queue.capacity());
    }

    fn kind(&self) -> PolicyKind {
        match self.tier {
            Tier::Dram => PolicyKind::DramLru,
            Tier::Nvm => PolicyKind::NvmLru,
        }
    }

    fn occupancy(&self) -> (usize, usize) {
        match self.tier {
            Tier::Dram => (self.queue.len(), 0),
            Tier::Nvm => (0, self.queue.len()),
        }
    }
}
