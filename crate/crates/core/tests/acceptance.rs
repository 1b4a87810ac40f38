//! Acceptance suite. Each test exercises one release criterion end to end
//! and prints a PASS line (visible with `--nocapture`); a failed assert
//! marks the criterion failed.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::{random_instance, relative_close, run_policy};
use hybridmem::config::{Capacities, PolicyParams, SimConfig, THRESHOLD_INF};
use hybridmem::experiment::{run_experiment, Baselines, ExperimentPlan, PlanRun, PlanTrace};
use hybridmem::metrics::{
    compute_amat, compute_appr_dynamic, compute_static_power, EventCounters, SimClock,
};
use hybridmem::oracle::{oracle_accumulate_costs, oracle_simulate};
use hybridmem::policy::PolicyKind;
use hybridmem::report::{emit_report, RunReport};
use hybridmem::sim::{run_simulation, RunInput};
use hybridmem::trace::{write_trace, Op, SyntheticSpec, TraceSource};
use hybridmem::DeviceParams;

const TRIALS: u64 = 1000;

/// Criterion 1: on >= 1000 randomized small instances, every policy's
/// event stream, counters, and metrics match the independent oracle.
#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    for seed in 0..TRIALS {
        let inst = random_instance(seed);
        for kind in PolicyKind::ALL {
            let (log, counters) = run_policy(kind, inst.caps, &inst.params, &inst.trace);
            let reference = oracle_simulate(
                &inst.trace,
                kind,
                inst.caps.dram_pages as usize,
                inst.caps.nvm_pages as usize,
                &inst.params,
            );
            for (i, (got, want)) in log.iter().zip(&reference.events).enumerate() {
                assert_eq!(got, want, "seed {seed}, policy {kind}, access {i}");
            }
            assert_eq!(log.len(), reference.events.len());
            assert_eq!(counters, reference.counters, "seed {seed}, policy {kind}");

            let device = DeviceParams::default();
            let amat = compute_amat(&counters, &device, 64).unwrap().total;
            let appr = compute_appr_dynamic(&counters, &device, 64).unwrap().total;
            let (ref_amat, ref_appr) =
                oracle_accumulate_costs(&reference.events, &device, 64).unwrap();
            assert!(
                relative_close(amat, ref_amat, 1e-9),
                "seed {seed}, policy {kind}: amat {amat} vs oracle {ref_amat}"
            );
            assert!(
                relative_close(appr, ref_appr, 1e-9),
                "seed {seed}, policy {kind}: appr {appr} vs oracle {ref_appr}"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "oracle sweep took {elapsed:?} (budget 60 s)"
    );
    println!(
        "criterion 1 (oracle equivalence, {TRIALS} traces x 4 policies, {:.1?}): PASS",
        elapsed
    );
}

/// Criterion 2: per-event cost accumulation equals the closed forms on
/// every run of the criterion-1 corpus, to 1e-9 relative.
#[test]
fn criterion_2_closed_form_consistency() {
    let device = DeviceParams::default();
    for seed in 0..TRIALS {
        let inst = random_instance(seed);
        for kind in PolicyKind::ALL {
            let (log, counters) = run_policy(kind, inst.caps, &inst.params, &inst.trace);
            // Route one: walk the event log charging each event its cost.
            let (walked_amat, walked_appr) = oracle_accumulate_costs(&log, &device, 64).unwrap();
            // Route two: the closed forms over final counters.
            let amat = compute_amat(&counters, &device, 64).unwrap();
            let appr = compute_appr_dynamic(&counters, &device, 64).unwrap();
            assert!(
                relative_close(walked_amat, amat.total, 1e-9),
                "seed {seed}, policy {kind}: {walked_amat} vs {}",
                amat.total
            );
            assert!(
                relative_close(walked_appr, appr.total, 1e-9),
                "seed {seed}, policy {kind}: {walked_appr} vs {}",
                appr.total
            );
            // The busy-time clock is the same accumulation.
            let mut clock = SimClock::new();
            for batch in &log {
                clock.advance(batch, &device, 64);
            }
            let clock_amat = clock.total_ns() / counters.n_total as f64;
            assert!(relative_close(clock_amat, amat.total, 1e-9));
        }
    }
    println!("criterion 2 (per-event costs equal closed forms): PASS");
}

/// Criterion 3: the device-table spot values reproduce exactly.
#[test]
fn criterion_3_device_table_spot_values() {
    let device = DeviceParams::default();
    // All-DRAM-read run costs exactly the DRAM read latency.
    let c = EventCounters {
        n_total: 100,
        n_hit_dram_read: 100,
        ..EventCounters::default()
    };
    assert_eq!(compute_amat(&c, &device, 64).unwrap().total, 50.0);
    // All-NVM-write run costs exactly the NVM write energy.
    let c = EventCounters {
        n_total: 100,
        n_hit_nvm_write: 100,
        ..EventCounters::default()
    };
    assert_eq!(compute_appr_dynamic(&c, &device, 64).unwrap().total, 32.0);
    // One GB busy for one second over 1e9 requests: 1 nJ/request as DRAM,
    // a tenth of that as NVM.
    let c = EventCounters {
        n_total: 1_000_000_000,
        n_hit_dram_read: 1_000_000_000,
        ..EventCounters::default()
    };
    let clock = SimClock::from_elapsed_seconds(1.0);
    let dram = compute_static_power(262_144, 0, &device, 4096, &c, &clock).unwrap();
    let nvm = compute_static_power(0, 262_144, &device, 4096, &c, &clock).unwrap();
    assert_eq!(dram, 1.0);
    assert_eq!(nvm, 0.1);
    assert_eq!(dram, 10.0 * nvm);
    println!("criterion 3 (device-table spot values): PASS");
}

/// Criterion 4: structural claims hold on every run — the two-clock
/// scheme never serves a write from NVM, and the two-queue scheme never
/// faults into NVM.
#[test]
fn criterion_4_structural_claims() {
    for seed in 0..TRIALS {
        let inst = random_instance(seed);
        let (_, clock_counters) =
            run_policy(PolicyKind::ClockDwf, inst.caps, &inst.params, &inst.trace);
        assert_eq!(
            clock_counters.n_hit_nvm_write, 0,
            "seed {seed}: clock_dwf served a write from NVM"
        );
        let (_, two_counters) =
            run_policy(PolicyKind::TwoLru, inst.caps, &inst.params, &inst.trace);
        assert_eq!(
            two_counters.n_fault_to_nvm, 0,
            "seed {seed}: two_lru faulted into NVM"
        );
    }
    println!("criterion 4 (structural claims on {TRIALS} runs): PASS");
}

fn hybrid_run(policy: PolicyKind, spec: SyntheticSpec) -> RunReport {
    let config = SimConfig {
        policy,
        ..SimConfig::default()
    };
    run_simulation(&RunInput {
        run_id: policy.to_string(),
        source: TraceSource::Synthetic(spec),
        config,
        warmup_frac: 0.0,
    })
    .unwrap()
}

/// Criterion 5: on a write-hot working set about twice the DRAM size, the
/// two-queue scheme cuts total NVM writes versus the two-clock scheme by
/// at least 30%, and the two-clock scheme writes NVM more than an
/// NVM-only memory does.
#[test]
fn criterion_5_nvm_write_reduction() {
    // Footprint 10000 pages -> memory 7500, DRAM 750; hot set 1500 pages.
    let spec = SyntheticSpec {
        n_accesses: 1_000_000,
        n_pages: 10_000,
        hot_fraction: 0.15,
        hot_access_fraction: 0.9,
        read_ratio: 0.3,
        seed: 20_240_531,
    };
    let two = hybrid_run(PolicyKind::TwoLru, spec.clone());
    let clock = hybrid_run(PolicyKind::ClockDwf, spec.clone());
    let nvm_only = hybrid_run(PolicyKind::NvmLru, spec);
    let (two_w, clock_w, nvm_w) = (
        two.nvm_writes.total,
        clock.nvm_writes.total,
        nvm_only.nvm_writes.total,
    );
    assert!(
        (two_w as f64) <= 0.7 * clock_w as f64,
        "two_lru wrote {two_w}, clock_dwf wrote {clock_w}: reduction below 30%"
    );
    assert!(
        clock_w > nvm_w,
        "clock_dwf wrote {clock_w}, nvm-only wrote {nvm_w}"
    );
    println!(
        "criterion 5 (nvm writes: two_lru {two_w} <= 0.7 * clock_dwf {clock_w}; \
         clock_dwf > nvm-only {nvm_w}): PASS"
    );
}

/// Criterion 6: for DRAM-only runs on high-locality workloads spanning
/// read ratios 0.5..=1.0, the static share of total power stays in a
/// broad 40-90% band and is the majority for read-dominant workloads.
#[test]
fn criterion_6_static_power_share() {
    // (read_ratio, footprint pages, hot access fraction) chosen to span
    // the band; locality is high so misses stay rare.
    let workloads = [
        (0.5, 800, 0.999),
        (0.6, 1500, 0.999),
        (0.7, 2500, 0.9995),
        (0.8, 1200, 0.999),
        (0.9, 2000, 0.999),
        (1.0, 3000, 0.999),
    ];
    for (read_ratio, n_pages, hot_access_fraction) in workloads {
        let spec = SyntheticSpec {
            n_accesses: 1_000_000,
            n_pages,
            hot_fraction: 0.05,
            hot_access_fraction,
            read_ratio,
            seed: 7_777 + n_pages,
        };
        let report = hybrid_run(PolicyKind::DramLru, spec);
        let power = &report.power_nj_per_req;
        let share = power.static_power / power.total;
        assert!(
            (0.4..=0.9).contains(&share),
            "read_ratio {read_ratio}: static share {share:.3} outside 40-90%"
        );
        if read_ratio >= 0.75 {
            assert!(
                share > 0.5,
                "read-dominant workload (rr {read_ratio}) has minority static share {share:.3}"
            );
        }
        println!("  read_ratio {read_ratio}: static share {share:.3}");
    }
    println!("criterion 6 (DRAM-only static power share in band): PASS");
}

/// Criterion 7: infinite thresholds never migrate; with thresholds of 1 a
/// hammered NVM-resident page migrates exactly once.
#[test]
fn criterion_7_degenerate_thresholds() {
    // Infinite thresholds: zero promotions on the randomized corpus.
    let inf = PolicyParams {
        read_threshold: THRESHOLD_INF,
        write_threshold: THRESHOLD_INF,
        ..PolicyParams::default()
    };
    for seed in 0..200 {
        let inst = random_instance(seed);
        let (_, counters) = run_policy(PolicyKind::TwoLru, inst.caps, &inf, &inst.trace);
        assert_eq!(counters.n_mig_nvm_to_dram, 0, "seed {seed}");
    }
    // Thresholds of 1: demote page 0 to NVM, then hammer it. The second
    // tracked read exceeds the threshold; afterwards it lives in DRAM, so
    // exactly one promotion ever happens.
    let one = PolicyParams {
        readperc: 1.0,
        writeperc: 1.0,
        read_threshold: 1,
        write_threshold: 1,
    };
    let caps = Capacities {
        dram_pages: 1,
        nvm_pages: 2,
    };
    let mut trace = vec![(Op::Read, 0), (Op::Read, 1)];
    trace.extend(std::iter::repeat_n((Op::Read, 0), 100));
    let (_, counters) = run_policy(PolicyKind::TwoLru, caps, &one, &trace);
    assert_eq!(counters.n_mig_nvm_to_dram, 1);
    println!("criterion 7 (degenerate thresholds): PASS");
}

/// Criterion 8: running the same plan twice produces byte-identical
/// CSV and JSON outputs.
#[test]
fn criterion_8_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // One real trace file in the mix.
    let trace_path = dir.path().join("hot.trace");
    let mut accesses = Vec::new();
    hybridmem::trace::generate_synthetic(
        &SyntheticSpec {
            n_accesses: 3_000,
            n_pages: 90,
            hot_fraction: 0.3,
            hot_access_fraction: 0.8,
            read_ratio: 0.55,
            seed: 99,
        },
        4096,
        |a| accesses.push(a),
    )
    .unwrap();
    let mut file = std::fs::File::create(&trace_path).unwrap();
    write_trace(&mut file, accesses).unwrap();

    let synthetic = SyntheticSpec {
        n_accesses: 5_000,
        n_pages: 150,
        hot_fraction: 0.2,
        hot_access_fraction: 0.9,
        read_ratio: 0.4,
        seed: 5,
    };
    let run = |id: &str, policy: PolicyKind, trace: PlanTrace| PlanRun {
        run_id: id.to_string(),
        trace,
        policy: Some(policy.to_string()),
        overrides: BTreeMap::new(),
        warmup_frac: 0.0,
    };
    let plan = ExperimentPlan {
        config: None,
        runs: vec![
            run(
                "dram",
                PolicyKind::DramLru,
                PlanTrace::Synthetic(synthetic.clone()),
            ),
            run(
                "nvm",
                PolicyKind::NvmLru,
                PlanTrace::Synthetic(synthetic.clone()),
            ),
            run(
                "clock",
                PolicyKind::ClockDwf,
                PlanTrace::Synthetic(synthetic.clone()),
            ),
            run("two", PolicyKind::TwoLru, PlanTrace::Synthetic(synthetic)),
            run("two_file", PolicyKind::TwoLru, PlanTrace::File(trace_path)),
        ],
        baselines: Baselines {
            dram_only_baseline: Some("dram".to_string()),
            nvm_only_baseline: Some("nvm".to_string()),
            clock_dwf_baseline: Some("clock".to_string()),
        },
    };

    let mut emitted = Vec::new();
    for attempt in 0..2 {
        let outcome = run_experiment(&plan).unwrap();
        assert!(outcome.failures.is_empty());
        let out = dir.path().join(format!("out{attempt}"));
        let paths = emit_report(&outcome.reports, &outcome.rows, &out).unwrap();
        emitted.push(
            paths
                .into_iter()
                .map(|p| std::fs::read(p).unwrap())
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(emitted[0], emitted[1], "outputs differ between runs");
    println!("criterion 8 (byte-identical outputs): PASS");
}
