//! Drives one policy over one trace and evaluates every model on the
//! result.
//!
//! A run makes two passes over its source: the first counts accesses and
//! distinct pages to size the tiers, the second feeds the policy and
//! accumulates events. An optional warm-up prefix is processed by the
//! policy but excluded from every metric.

use serde::Serialize;

use crate::config::{derive_capacities, ConfigError, SimConfig};
use crate::metrics::{
    compute_amat, compute_appr_dynamic, compute_static_power, nvm_write_breakdown, EventCounters,
    MetricsError, SimClock,
};
use crate::policy::{build_policy, PolicyKind};
use crate::report::{PowerBreakdown, RunReport};
use crate::trace::{TraceError, TraceSource, TraceStats};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("trace: {0}")]
    Trace(#[from] TraceError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("trace contains no accesses")]
    EmptyTrace,
    #[error("warmup fraction {0} must be in [0, 1)")]
    BadWarmup(f64),
    #[error("policy bug while accumulating events: {0}")]
    Internal(MetricsError),
}

/// Everything needed to execute one simulation run.
pub struct RunInput {
    pub run_id: String,
    pub source: TraceSource,
    pub config: SimConfig,
    /// Leading fraction of the trace excluded from metrics.
    pub warmup_frac: f64,
}

/// Tier sizes a run actually used. Single-tier baselines put the whole
/// memory in their one tier.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EffectiveCapacities {
    pub dram_pages: u64,
    pub nvm_pages: u64,
}

pub fn run_simulation(input: &RunInput) -> Result<RunReport, SimError> {
    let cfg = &input.config;
    cfg.validate()?;
    if !(0.0..1.0).contains(&input.warmup_frac) {
        return Err(SimError::BadWarmup(input.warmup_frac));
    }
    let page_size = cfg.layout.page_size;

    // Pass 1: footprint for capacity sizing.
    let stats: TraceStats = input.source.for_each(page_size, |_| {})?;
    if stats.accesses == 0 {
        return Err(SimError::EmptyTrace);
    }
    let caps = derive_capacities(stats.distinct_pages, &cfg.layout)?;
    let effective = match cfg.policy {
        PolicyKind::DramLru => EffectiveCapacities {
            dram_pages: caps.total(),
            nvm_pages: 0,
        },
        PolicyKind::NvmLru => EffectiveCapacities {
            dram_pages: 0,
            nvm_pages: caps.total(),
        },
        PolicyKind::ClockDwf | PolicyKind::TwoLru => EffectiveCapacities {
            dram_pages: caps.dram_pages,
            nvm_pages: caps.nvm_pages,
        },
    };

    // Pass 2: simulate and accumulate.
    let mut policy = build_policy(cfg.policy, caps, &cfg.params);
    let warmup_cut = (input.warmup_frac * stats.accesses as f64).floor() as u64;
    let mut counters = EventCounters::default();
    let mut clock = SimClock::new();
    let mut events = Vec::with_capacity(4);
    let mut seen = 0u64;
    let mut bug: Option<MetricsError> = None;
    input.source.for_each(page_size, |access| {
        if bug.is_some() {
            return;
        }
        events.clear();
        policy.on_access(access.op, access.page(page_size), &mut events);
        if seen >= warmup_cut {
            if let Err(e) = counters.accumulate(&events) {
                bug = Some(e);
                return;
            }
            clock.advance(&events, &cfg.device, cfg.layout.page_factor);
        }
        seen += 1;
    })?;
    if let Some(e) = bug {
        return Err(SimError::Internal(e));
    }
    if counters.n_total == 0 {
        return Err(SimError::EmptyTrace);
    }

    let amat = compute_amat(&counters, &cfg.device, cfg.layout.page_factor)?;
    let appr = compute_appr_dynamic(&counters, &cfg.device, cfg.layout.page_factor)?;
    let static_clock = match cfg.requests_per_second {
        Some(rate) => SimClock::from_elapsed_seconds(counters.n_total as f64 / rate),
        None => clock,
    };
    let static_nj = compute_static_power(
        effective.dram_pages,
        effective.nvm_pages,
        &cfg.device,
        page_size,
        &counters,
        &static_clock,
    )?;
    let nvm_writes = nvm_write_breakdown(&counters, cfg.layout.page_factor);
    let power = PowerBreakdown::assemble(static_nj, &appr);

    Ok(RunReport {
        run_id: input.run_id.clone(),
        policy: cfg.policy.to_string(),
        trace: input.source.to_string(),
        config: cfg.clone(),
        warmup_frac: input.warmup_frac,
        trace_accesses: stats.accesses,
        distinct_pages: stats.distinct_pages,
        dram_pages: effective.dram_pages,
        nvm_pages: effective.nvm_pages,
        counters,
        amat_ns: amat,
        appr_nj: appr,
        static_nj_per_req: static_nj,
        power_nj_per_req: power,
        nvm_writes,
        lifetime_vs_baseline: None,
    })
}
