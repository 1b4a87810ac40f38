//! Run reports and their serialized forms.
//!
//! Reports serialize to JSON (one document carrying the config echo and
//! all breakdowns) and to CSV rows keyed by run, metric, and component.
//! Output is bit-stable for identical inputs: rows are sorted, and every
//! float is rounded to six significant digits before formatting.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::SimConfig;
use crate::metrics::{AmatBreakdown, ApprBreakdown, EventCounters, NvmWriteBreakdown};

/// Per-request power with the figure-style grouping.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PowerBreakdown {
    /// Prorated static power, nJ per request.
    #[serde(rename = "static")]
    pub static_power: f64,
    /// Hit-service dynamic energy, nJ per request.
    pub dynamic: f64,
    /// Page-fill energy of faults, nJ per request.
    pub fault: f64,
    /// Migration energy in both directions, nJ per request.
    pub migration: f64,
    pub total: f64,
}

impl PowerBreakdown {
    pub fn assemble(static_nj: f64, appr: &ApprBreakdown) -> Self {
        let dynamic = appr.hit_dram + appr.hit_nvm;
        let fault = appr.fault_to_dram + appr.fault_to_nvm;
        let migration = appr.mig_to_dram + appr.mig_to_nvm;
        PowerBreakdown {
            static_power: static_nj,
            dynamic,
            fault,
            migration,
            total: static_nj + dynamic + fault + migration,
        }
    }
}

/// Everything measured about one run, with the resolved config echoed.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub run_id: String,
    pub policy: String,
    pub trace: String,
    pub config: SimConfig,
    pub warmup_frac: f64,
    pub trace_accesses: u64,
    pub distinct_pages: u64,
    pub dram_pages: u64,
    pub nvm_pages: u64,
    pub counters: EventCounters,
    pub amat_ns: AmatBreakdown,
    pub appr_nj: ApprBreakdown,
    pub static_nj_per_req: f64,
    pub power_nj_per_req: PowerBreakdown,
    pub nvm_writes: NvmWriteBreakdown,
    /// NVM lifetime relative to a reference run (its writes over ours).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifetime_vs_baseline: Option<f64>,
}

/// One CSV row of the comparison table.
#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub run_id: String,
    pub policy: String,
    pub trace: String,
    pub metric: String,
    pub component: String,
    pub value: f64,
    pub normalized_to: Option<String>,
    pub normalized_value: Option<f64>,
}

/// Rounds to six significant digits; report output goes through this so
/// byte-level diffs are stable across implementations.
pub fn round_sig6(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let magnitude = v.abs().log10().floor();
    let scale = 10f64.powi(5 - magnitude as i32);
    (v * scale).round() / scale
}

fn fmt_value(v: f64) -> String {
    let r = round_sig6(v);
    // Avoid "-0" noise from rounding tiny negatives.
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

/// The raw (unnormalized) rows of one report, in the documented metric
/// and component order.
pub fn report_rows(report: &RunReport) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    let mut push = |metric: &str, component: &str, value: f64| {
        rows.push(ReportRow {
            run_id: report.run_id.clone(),
            policy: report.policy.clone(),
            trace: report.trace.clone(),
            metric: metric.to_string(),
            component: component.to_string(),
            value,
            normalized_to: None,
            normalized_value: None,
        });
    };
    let a = &report.amat_ns;
    push("amat_ns", "hit_dram", a.hit_dram);
    push("amat_ns", "hit_nvm", a.hit_nvm);
    push("amat_ns", "miss", a.miss);
    push("amat_ns", "mig_to_dram", a.mig_to_dram);
    push("amat_ns", "mig_to_nvm", a.mig_to_nvm);
    push("amat_ns", "total", a.total);
    let e = &report.appr_nj;
    push("appr_nj", "hit_dram", e.hit_dram);
    push("appr_nj", "hit_nvm", e.hit_nvm);
    push("appr_nj", "fault_to_dram", e.fault_to_dram);
    push("appr_nj", "fault_to_nvm", e.fault_to_nvm);
    push("appr_nj", "mig_to_dram", e.mig_to_dram);
    push("appr_nj", "mig_to_nvm", e.mig_to_nvm);
    push("appr_nj", "total", e.total);
    push("static_nj_per_req", "total", report.static_nj_per_req);
    let p = &report.power_nj_per_req;
    push("power_nj_per_req", "static", p.static_power);
    push("power_nj_per_req", "dynamic", p.dynamic);
    push("power_nj_per_req", "fault", p.fault);
    push("power_nj_per_req", "migration", p.migration);
    push("power_nj_per_req", "total", p.total);
    let w = &report.nvm_writes;
    push("nvm_writes", "requests", w.requests as f64);
    push("nvm_writes", "migrations", w.migrations as f64);
    push("nvm_writes", "faults", w.faults as f64);
    push("nvm_writes", "total", w.total as f64);
    rows
}

/// Writes the comparison table as CSV with the documented column set.
pub fn write_csv<W: Write>(mut w: W, rows: &[ReportRow]) -> io::Result<()> {
    writeln!(
        w,
        "run_id,policy,trace,metric,component,value,normalized_to,normalized_value"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.run_id,
            r.policy,
            r.trace,
            r.metric,
            r.component,
            fmt_value(r.value),
            r.normalized_to.as_deref().unwrap_or(""),
            r.normalized_value.map(fmt_value).unwrap_or_default()
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    runs: &'a [RunReport],
    comparison: &'a [ReportRow],
}

/// Writes one JSON document holding all reports and the comparison table.
pub fn write_json<W: Write>(w: W, reports: &[RunReport], rows: &[ReportRow]) -> io::Result<()> {
    let runs: Vec<RunReport> = reports.iter().map(rounded_report).collect();
    let rows: Vec<ReportRow> = rows
        .iter()
        .map(|r| ReportRow {
            value: round_sig6(r.value),
            normalized_value: r.normalized_value.map(round_sig6),
            ..r.clone()
        })
        .collect();
    let doc = JsonDoc {
        runs: &runs,
        comparison: &rows,
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

/// Emits `report.json` and `report.csv` under `dir`, returning the paths.
pub fn emit_report(
    reports: &[RunReport],
    rows: &[ReportRow],
    dir: &Path,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json_path = dir.join("report.json");
    let csv_path = dir.join("report.csv");
    let mut json = Vec::new();
    write_json(&mut json, reports, rows)?;
    json.push(b'\n');
    std::fs::write(&json_path, json)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, rows)?;
    std::fs::write(&csv_path, csv)?;
    Ok(vec![json_path, csv_path])
}

fn rounded_report(r: &RunReport) -> RunReport {
    let mut out = r.clone();
    let a = &mut out.amat_ns;
    for v in [
        &mut a.hit_dram,
        &mut a.hit_nvm,
        &mut a.miss,
        &mut a.mig_to_dram,
        &mut a.mig_to_nvm,
        &mut a.total,
    ] {
        *v = round_sig6(*v);
    }
    let e = &mut out.appr_nj;
    for v in [
        &mut e.hit_dram,
        &mut e.hit_nvm,
        &mut e.fault_to_dram,
        &mut e.fault_to_nvm,
        &mut e.mig_to_dram,
        &mut e.mig_to_nvm,
        &mut e.total,
    ] {
        *v = round_sig6(*v);
    }
    out.static_nj_per_req = round_sig6(out.static_nj_per_req);
    let p = &mut out.power_nj_per_req;
    for v in [
        &mut p.static_power,
        &mut p.dynamic,
        &mut p.fault,
        &mut p.migration,
        &mut p.total,
    ] {
        *v = round_sig6(*v);
    }
    out.lifetime_vs_baseline = out.lifetime_vs_baseline.map(round_sig6);
    out
}
