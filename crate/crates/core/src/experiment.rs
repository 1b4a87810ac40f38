//! Batch experiment driver: a plan of runs, optional baselines, and the
//! normalized comparison table.
//!
//! Plans are JSON documents. Each run names a trace source (a file path or
//! an inline synthetic spec), a policy, and per-run config overrides. The
//! optional baselines drive normalization: power and mean access time
//! against the DRAM-only run, NVM writes against the NVM-only run, and
//! mean access time additionally against the two-clock run when one is
//! named. Runs execute in parallel; outputs are ordered by run id.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{ConfigError, SimConfig};
use crate::report::{report_rows, ReportRow, RunReport};
use crate::sim::{run_simulation, RunInput, SimError};
use crate::trace::{SyntheticSpec, TraceSource};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("cannot read plan: {0}")]
    Io(#[from] std::io::Error),
    #[error("plan is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("plan: {0}")]
    Invalid(String),
    #[error("baseline `{id}` ({role}) did not produce a report")]
    BaselineFailed { role: &'static str, id: String },
    #[error("config: {0}")]
    Config(#[from] ConfigError),
}

/// Trace source as written in a plan.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanTrace {
    File(PathBuf),
    Synthetic(SyntheticSpec),
}

/// One planned run.
#[derive(Clone, Debug, Deserialize)]
pub struct PlanRun {
    pub run_id: String,
    pub trace: PlanTrace,
    /// Policy name; falls back to the base config's policy.
    #[serde(default)]
    pub policy: Option<String>,
    /// Config overrides as `key -> value` strings.
    #[serde(default)]
    pub overrides: BTreeMap<String, String>,
    #[serde(default)]
    pub warmup_frac: f64,
}

/// Baseline run ids used for normalization.
#[derive(Clone, Debug, Default, Deserialize)]
pub struct Baselines {
    #[serde(default)]
    pub dram_only_baseline: Option<String>,
    #[serde(default)]
    pub nvm_only_baseline: Option<String>,
    #[serde(default)]
    pub clock_dwf_baseline: Option<String>,
}

/// A parsed experiment plan.
#[derive(Clone, Debug, Deserialize)]
pub struct ExperimentPlan {
    /// Base config file applied to every run before its overrides.
    #[serde(default)]
    pub config: Option<PathBuf>,
    pub runs: Vec<PlanRun>,
    #[serde(default)]
    pub baselines: Baselines,
}

impl ExperimentPlan {
    /// Loads a plan, resolving relative paths against the plan's directory.
    pub fn load(path: &Path) -> Result<ExperimentPlan, ExperimentError> {
        let text = fs::read_to_string(path)?;
        let mut plan: ExperimentPlan = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if let Some(cfg) = plan.config.take() {
            plan.config = Some(resolve(base, cfg));
        }
        for run in &mut plan.runs {
            if let PlanTrace::File(p) = &mut run.trace {
                *p = resolve(base, p.clone());
            }
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.runs.is_empty() {
            return Err(ExperimentError::Invalid("plan has no runs".to_string()));
        }
        let mut seen = HashSet::new();
        for run in &self.runs {
            if !seen.insert(run.run_id.as_str()) {
                return Err(ExperimentError::Invalid(format!(
                    "duplicate run_id `{}`",
                    run.run_id
                )));
            }
        }
        for (role, id) in [
            ("dram_only_baseline", &self.baselines.dram_only_baseline),
            ("nvm_only_baseline", &self.baselines.nvm_only_baseline),
            ("clock_dwf_baseline", &self.baselines.clock_dwf_baseline),
        ] {
            if let Some(id) = id {
                if !seen.contains(id.as_str()) {
                    return Err(ExperimentError::Invalid(format!(
                        "{role} `{id}` does not name a run"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// A run that could not be completed; the rest of the plan proceeds.
#[derive(Debug)]
pub struct RunFailure {
    pub run_id: String,
    pub error: SimError,
}

/// All outputs of a plan execution.
pub struct ExperimentOutcome {
    /// Successful reports, ordered by run id.
    pub reports: Vec<RunReport>,
    /// Comparison rows, sorted for byte-stable emission.
    pub rows: Vec<ReportRow>,
    /// Runs that failed (the others are unaffected).
    pub failures: Vec<RunFailure>,
}

/// Executes every run in the plan and assembles the comparison table.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutcome, ExperimentError> {
    plan.validate()?;
    let base_config = match &plan.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };

    let inputs: Vec<RunInput> = plan
        .runs
        .iter()
        .map(|run| build_input(run, &base_config))
        .collect::<Result<_, _>>()?;

    let results: Vec<Result<RunReport, SimError>> = inputs.par_iter().map(run_simulation).collect();

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (input, result) in inputs.iter().zip(results) {
        match result {
            Ok(report) => reports.push(report),
            Err(error) => failures.push(RunFailure {
                run_id: input.run_id.clone(),
                error,
            }),
        }
    }
    reports.sort_by(|a, b| a.run_id.cmp(&b.run_id));

    annotate_lifetime(&mut reports, &plan.baselines)?;
    let rows = comparison_rows(&reports, &plan.baselines)?;
    Ok(ExperimentOutcome {
        reports,
        rows,
        failures,
    })
}

fn build_input(run: &PlanRun, base: &SimConfig) -> Result<RunInput, ExperimentError> {
    let mut config = base.clone();
    for (key, value) in &run.overrides {
        config.apply_kv(key, value, 0)?;
    }
    if let Some(policy) = &run.policy {
        config.policy = policy
            .parse()
            .map_err(|e| ExperimentError::Invalid(format!("run `{}`: {e}", run.run_id)))?;
    }
    config.validate()?;
    let source = match &run.trace {
        PlanTrace::File(path) => TraceSource::File(path.clone()),
        PlanTrace::Synthetic(spec) => TraceSource::Synthetic(spec.clone()),
    };
    Ok(RunInput {
        run_id: run.run_id.clone(),
        source,
        config,
        warmup_frac: run.warmup_frac,
    })
}

fn find_baseline<'a>(
    reports: &'a [RunReport],
    role: &'static str,
    id: &Option<String>,
) -> Result<Option<&'a RunReport>, ExperimentError> {
    match id {
        None => Ok(None),
        Some(id) => reports
            .iter()
            .find(|r| &r.run_id == id)
            .map(Some)
            .ok_or_else(|| ExperimentError::BaselineFailed {
                role,
                id: id.clone(),
            }),
    }
}

fn annotate_lifetime(
    reports: &mut [RunReport],
    baselines: &Baselines,
) -> Result<(), ExperimentError> {
    let baseline_total =
        match find_baseline(reports, "nvm_only_baseline", &baselines.nvm_only_baseline)? {
            Some(b) => b.nvm_writes.total,
            None => return Ok(()),
        };
    for report in reports.iter_mut() {
        if report.nvm_writes.total > 0 {
            report.lifetime_vs_baseline =
                Some(baseline_total as f64 / report.nvm_writes.total as f64);
        }
    }
    Ok(())
}

/// Raw rows for every report, plus normalized values where a baseline
/// applies: `normalized_value * baseline_total == value`.
fn comparison_rows(
    reports: &[RunReport],
    baselines: &Baselines,
) -> Result<Vec<ReportRow>, ExperimentError> {
    let dram = find_baseline(reports, "dram_only_baseline", &baselines.dram_only_baseline)?;
    let nvm = find_baseline(reports, "nvm_only_baseline", &baselines.nvm_only_baseline)?;
    let clock = find_baseline(reports, "clock_dwf_baseline", &baselines.clock_dwf_baseline)?;

    let mut rows = Vec::new();
    for report in reports {
        for row in report_rows(report) {
            let mut emitted = false;
            let mut emit = |baseline: Option<&RunReport>, total: Option<f64>| {
                if let (Some(b), Some(total)) = (baseline, total) {
                    if total != 0.0 {
                        rows.push(ReportRow {
                            normalized_to: Some(b.run_id.clone()),
                            normalized_value: Some(row.value / total),
                            ..row.clone()
                        });
                        emitted = true;
                    }
                }
            };
            match row.metric.as_str() {
                "power_nj_per_req" => {
                    emit(dram, dram.map(|b| b.power_nj_per_req.total));
                }
                "amat_ns" => {
                    emit(dram, dram.map(|b| b.amat_ns.total));
                    emit(clock, clock.map(|b| b.amat_ns.total));
                }
                "nvm_writes" => {
                    emit(nvm, nvm.map(|b| b.nvm_writes.total as f64));
                }
                _ => {}
            }
            if !emitted {
                rows.push(row);
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.run_id, &a.metric, &a.component, &a.normalized_to).cmp(&(
            &b.run_id,
            &b.metric,
            &b.component,
            &b.normalized_to,
        ))
    });
    Ok(rows)
}
