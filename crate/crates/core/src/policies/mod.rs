//! Concrete placement policies: the single-tier LRU baselines, the
//! two-clock write-filtering scheme, and the two-queue threshold-migration
//! scheme.

mod clock_dwf;
mod single_lru;
mod two_lru;

pub use clock_dwf::{ClockDwf, ClockTier};
pub use single_lru::{SingleTierLru, Tier};
pub use two_lru::TwoLru;
