//! The policy interface and the costed-event vocabulary shared by all
//! placement policies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{Capacities, PolicyParams};
use crate::policies::{ClockDwf, SingleTierLru, Tier, TwoLru};
use crate::trace::{Op, PageId};

/// One costed action taken while serving an access.
///
/// Every processed access yields exactly one `Hit*` or `Fault*` event;
/// migration and disk-eviction events only accompany that access. Within a
/// batch, events are ordered: hit/fault first, then `MigrateNvmToDram`,
/// then `MigrateDramToNvm`, then `EvictToDisk`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimEvent {
    /// Request served by DRAM.
    HitDram(Op),
    /// Request served by NVM.
    HitNvm(Op),
    /// Page fault filled from disk into DRAM.
    FaultToDram,
    /// Page fault filled from disk into NVM.
    FaultToNvm,
    /// Resident page copied NVM -> DRAM.
    MigrateNvmToDram,
    /// Resident page copied DRAM -> NVM.
    MigrateDramToNvm,
    /// Page dropped from memory to the (unmodeled) disk.
    EvictToDisk,
}

impl SimEvent {
    /// True for the one-per-access hit/fault events.
    pub fn is_primary(&self) -> bool {
        matches!(
            self,
            SimEvent::HitDram(_)
                | SimEvent::HitNvm(_)
                | SimEvent::FaultToDram
                | SimEvent::FaultToNvm
        )
    }
}

/// The selectable placement policies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Single-tier LRU over an all-DRAM memory.
    DramLru,
    /// Single-tier LRU over an all-NVM memory.
    NvmLru,
    /// Two-clock scheme: write hits in NVM force migration to DRAM.
    ClockDwf,
    /// Two-queue scheme with counter-thresholded NVM->DRAM migration.
    TwoLru,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::DramLru,
        PolicyKind::NvmLru,
        PolicyKind::ClockDwf,
        PolicyKind::TwoLru,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::DramLru => "dram_lru",
            PolicyKind::NvmLru => "nvm_lru",
            PolicyKind::ClockDwf => "clock_dwf",
            PolicyKind::TwoLru => "two_lru",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown policy `{0}` (expected dram_lru, nvm_lru, clock_dwf, or two_lru)")]
pub struct UnknownPolicy(String);

impl FromStr for PolicyKind {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dram_lru" => Ok(PolicyKind::DramLru),
            "nvm_lru" => Ok(PolicyKind::NvmLru),
            "clock_dwf" => Ok(PolicyKind::ClockDwf),
            "two_lru" => Ok(PolicyKind::TwoLru),
            other => Err(UnknownPolicy(other.to_string())),
        }
    }
}

/// Behavioral contract of a placement policy.
///
/// Policies are deterministic: the same access sequence with the same
/// parameters produces the same event sequence. A policy never fills a
/// tier beyond its capacity.
pub trait Policy {
    /// Serves one access, appending its events to `events` in canonical
    /// order. The caller clears the buffer between accesses.
    fn on_access(&mut self, op: Op, page: PageId, events: &mut Vec<SimEvent>);

    /// Restores the freshly-constructed state.
    fn reset(&mut self);

    fn kind(&self) -> PolicyKind;

    /// Pages currently resident per tier, `(dram, nvm)`.
    fn occupancy(&self) -> (usize, usize);
}

/// Builds a policy instance over the given tier capacities.
///
/// The single-tier baselines occupy the whole memory (`dram + nvm` pages)
/// in their one tier, mirroring how a homogeneous main memory of the same
/// total size would be provisioned.
pub fn build_policy(kind: PolicyKind, caps: Capacities, params: &PolicyParams) -> Box<dyn Policy> {
    let total = caps.total() as usize;
    match kind {
        PolicyKind::DramLru => Box::new(SingleTierLru::new(Tier::Dram, total)),
        PolicyKind::NvmLru => Box::new(SingleTierLru::new(Tier::Nvm, total)),
        PolicyKind::ClockDwf => Box::new(ClockDwf::new(
            caps.dram_pages as usize,
            caps.nvm_pages as usize,
        )),
        PolicyKind::TwoLru => Box::new(TwoLru::new(
            caps.dram_pages as usize,
            caps.nvm_pages as usize,
            params,
        )),
    }
}
