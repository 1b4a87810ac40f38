//! Trace-driven simulator for hybrid DRAM-NVM main memory.
//!
//! The crate models a two-tier main memory (fast, volatile DRAM next to a
//! slower, denser non-volatile memory) in front of a disk backing store. A
//! pluggable page-placement policy decides where pages live and when they
//! migrate between tiers; every action a policy takes is priced by
//! closed-form latency and energy models so that policies can be compared
//! on mean access time, dynamic energy per request, prorated static power,
//! and NVM write traffic.

pub mod config;
pub mod experiment;
pub mod lru_queue;
pub mod metrics;
pub mod oracle;
pub mod policies;
pub mod policy;
pub mod report;
pub mod sim;
pub mod trace;

mod kv;

pub use config::{DeviceParams, LayoutConfig, PolicyParams, SimConfig};
pub use policy::{Policy, PolicyKind, SimEvent};
pub use trace::{MemoryAccess, Op, PageId};
