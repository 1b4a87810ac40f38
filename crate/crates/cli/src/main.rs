//! Command-line driver: single simulations, plan-driven comparisons, and
//! synthetic trace generation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hybridmem::experiment::{run_experiment, ExperimentPlan};
use hybridmem::report::{emit_report, report_rows, RunReport};
use hybridmem::sim::{run_simulation, RunInput};
use hybridmem::trace::{generate_synthetic, parse_synthetic_spec_str, TraceSource};
use hybridmem::{PolicyKind, SimConfig};

#[derive(Parser)]
#[command(
    name = "hybridmem",
    version,
    about = "Trace-driven hybrid DRAM-NVM memory simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one policy over one trace file and emit its report.
    Simulate {
        /// Config file (`key = value` lines); defaults apply if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Trace file (`R <addr>` / `W <addr>` lines).
        #[arg(long)]
        trace: PathBuf,
        /// Policy: dram_lru, nvm_lru, clock_dwf, or two_lru.
        #[arg(long)]
        policy: Option<PolicyKind>,
        /// Output directory for report.json and report.csv.
        #[arg(long)]
        out: PathBuf,
        /// Leading fraction of the trace excluded from metrics.
        #[arg(long, default_value_t = 0.0)]
        warmup_frac: f64,
    },
    /// Execute an experiment plan (JSON) and emit the comparison table.
    Compare {
        #[arg(long)]
        plan: PathBuf,
        /// Output directory for report.json and report.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic trace file from a spec.
    GenTrace {
        /// Synthetic spec file (`key = value` lines).
        #[arg(long)]
        spec: PathBuf,
        /// Output trace file.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            config,
            trace,
            policy,
            out,
            warmup_frac,
        } => simulate(config, trace, policy, out, warmup_frac),
        Command::Compare { plan, out } => compare(plan, out),
        Command::GenTrace { spec, out, seed } => gen_trace(spec, out, seed),
    }
}

fn simulate(
    config: Option<PathBuf>,
    trace: PathBuf,
    policy: Option<PolicyKind>,
    out: PathBuf,
    warmup_frac: f64,
) -> Result<()> {
    let mut cfg = match &config {
        Some(path) => {
            SimConfig::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => SimConfig::default(),
    };
    if let Some(policy) = policy {
        cfg.policy = policy;
    }
    let input = RunInput {
        run_id: cfg.policy.to_string(),
        source: TraceSource::File(trace),
        config: cfg,
        warmup_frac,
    };
    let report = run_simulation(&input).context("simulation failed")?;
    print_summary(&report);
    let rows = report_rows(&report);
    let paths = emit_report(std::slice::from_ref(&report), &rows, &out)?;
    for path in paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn compare(plan_path: PathBuf, out: PathBuf) -> Result<()> {
    let plan = ExperimentPlan::load(&plan_path)
        .with_context(|| format!("loading {}", plan_path.display()))?;
    let outcome = run_experiment(&plan).context("experiment failed")?;
    for report in &outcome.reports {
        print_summary(report);
    }
    let paths = emit_report(&outcome.reports, &outcome.rows, &out)?;
    for path in paths {
        println!("wrote {}", path.display());
    }
    if !outcome.failures.is_empty() {
        for failure in &outcome.failures {
            eprintln!("run `{}` failed: {}", failure.run_id, failure.error);
        }
        bail!(
            "{} of {} runs failed",
            outcome.failures.len(),
            plan.runs.len()
        );
    }
    Ok(())
}

fn gen_trace(spec_path: PathBuf, out: PathBuf, seed: Option<u64>) -> Result<()> {
    let text = std::fs::read_to_string(&spec_path)
        .with_context(|| format!("reading {}", spec_path.display()))?;
    let (mut spec, page_size) = parse_synthetic_spec_str(&text)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut writer = BufWriter::new(file);
    let mut io_error = None;
    let stats = generate_synthetic(&spec, page_size, |access| {
        if io_error.is_some() {
            return;
        }
        let op = match access.op {
            hybridmem::Op::Read => 'R',
            hybridmem::Op::Write => 'W',
        };
        if let Err(e) = writeln!(writer, "{} {:#x}", op, access.address) {
            io_error = Some(e);
        }
    })?;
    if let Some(e) = io_error {
        return Err(e).with_context(|| format!("writing {}", out.display()));
    }
    writer.flush()?;
    println!(
        "wrote {} accesses over {} pages to {}",
        stats.accesses,
        stats.distinct_pages,
        out.display()
    );
    Ok(())
}

fn print_summary(report: &RunReport) {
    println!(
        "{}: policy {} on {} ({} accesses, {} pages; dram {} / nvm {} pages)",
        report.run_id,
        report.policy,
        report.trace,
        report.trace_accesses,
        report.distinct_pages,
        report.dram_pages,
        report.nvm_pages
    );
    println!(
        "  amat {:.3} ns | dynamic {:.3} nJ/req | static {:.3} nJ/req | nvm writes {}",
        report.amat_ns.total,
        report.appr_nj.total,
        report.static_nj_per_req,
        report.nvm_writes.total
    );
}
