//! Shared helpers for the integration suites: randomized small instances
//! and a driver that runs a policy while collecting its event log.
#![allow(dead_code)] // each test binary uses a different subset

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use hybridmem::config::{Capacities, PolicyParams, THRESHOLD_INF};
use hybridmem::metrics::EventCounters;
use hybridmem::policy::{build_policy, PolicyKind, SimEvent};
use hybridmem::trace::{generate_synthetic, Op, PageId, SyntheticSpec};

pub struct RandomInstance {
    pub trace: Vec<(Op, PageId)>,
    pub caps: Capacities,
    pub params: PolicyParams,
}

/// A random small instance: a synthetic trace over a few dozen pages and
/// tier capacities totalling at most 64 pages.
pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dram = rng.random_range(1..=8u64);
    let nvm = rng.random_range(1..=56u64);
    let n_pages = rng.random_range(2..=96u64);
    let n_accesses = if rng.random_bool(0.1) {
        rng.random_range(2_000..=10_000u64)
    } else {
        rng.random_range(100..=2_000u64)
    };
    let readperc = rng.random_range(0.05..=1.0f64);
    let writeperc = rng.random_range(readperc..=1.0f64);
    let threshold = |rng: &mut ChaCha12Rng| {
        if rng.random_bool(0.1) {
            THRESHOLD_INF
        } else {
            rng.random_range(1..=6u64)
        }
    };
    let read_threshold = threshold(&mut rng);
    let write_threshold = threshold(&mut rng);
    let spec = SyntheticSpec {
        n_accesses,
        n_pages,
        hot_fraction: rng.random_range(0.05..=1.0),
        hot_access_fraction: rng.random_range(0.3..=1.0),
        read_ratio: rng.random_range(0.0..=1.0),
        seed: rng.random(),
    };
    let mut trace = Vec::with_capacity(n_accesses as usize);
    generate_synthetic(&spec, 4096, |a| trace.push((a.op, a.page(4096)))).expect("spec is valid");
    RandomInstance {
        trace,
        caps: Capacities {
            dram_pages: dram,
            nvm_pages: nvm,
        },
        params: PolicyParams {
            readperc,
            writeperc,
            read_threshold,
            write_threshold,
        },
    }
}

/// Runs the optimized policy over a page-level trace, returning the
/// per-access event log and accumulated counters.
pub fn run_policy(
    kind: PolicyKind,
    caps: Capacities,
    params: &PolicyParams,
    trace: &[(Op, PageId)],
) -> (Vec<Vec<SimEvent>>, EventCounters) {
    let mut policy = build_policy(kind, caps, params);
    let mut log = Vec::with_capacity(trace.len());
    let mut counters = EventCounters::default();
    let mut events = Vec::with_capacity(4);
    for &(op, page) in trace {
        events.clear();
        policy.on_access(op, page, &mut events);
        counters
            .accumulate(&events)
            .expect("policy emits exactly one hit or fault per access");
        log.push(events.clone());
    }
    (log, counters)
}

pub fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
