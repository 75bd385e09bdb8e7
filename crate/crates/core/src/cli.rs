//! Command-line front end: `simulate`, `verify` and `sweep`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::dynamics::{simulate, Mutation, Policy};
use crate::error::{Error, Result};
use crate::fluid;
use crate::io;
use crate::par::{self, Execution};
use crate::primitives::sample_trace;
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "FLUIDQ_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fluidq", version, about = "Coupled SJF/SRPT/FIFO queue simulation and fluid-limit checks")]
pub struct Cli {
    /// TOML run configuration; the built-in canonical model when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: FLUIDQ_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Suppress summary lines on stdout.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one trace and write its timeline and summary.
    Simulate(SimulateArgs),
    /// Run the pathwise checkers over a seed matrix.
    Verify(VerifyArgs),
    /// Fluid-scale comparison of SJF and SRPT over r and replicates.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// sjf, srpt, fifo or all.
    #[arg(long)]
    pub policy: Option<String>,
    /// Scale index (>= 1).
    #[arg(long)]
    pub r: Option<f64>,
    /// Replicate number within the scale.
    #[arg(long)]
    pub replicate: Option<u64>,
    /// Base seed (overrides `model.base_seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check only this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, hide = true, default_value = "none")]
    pub mutant: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Base seed (overrides `model.base_seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidDistribution(_)
        | Error::InfiniteMean { .. }
        | Error::InvalidConfig(_)
        | Error::Supercritical { .. }
        | Error::Parse(_) => EXIT_CONFIG,
        _ => EXIT_INTERNAL,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| match e {
            Error::Io { .. } => Error::InvalidConfig(e.to_string()),
            other => other,
        })?,
        None => RunConfig::canonical(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if cli.quiet {
        cfg.output.verbosity = 0;
    }
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV}={v} is not a thread count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidConfig("thread count must be >= 1".into()));
        }
        par::configure_threads(n);
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(&mut cfg, a),
        Command::Verify(a) => cmd_verify(&mut cfg, a, exec),
        Command::Sweep(a) => cmd_sweep(&mut cfg, a, exec),
    }
}

fn parse_policies(s: &str) -> Result<Vec<Policy>> {
    if s.eq_ignore_ascii_case("all") {
        Ok(Policy::ALL.to_vec())
    } else {
        Ok(vec![s.parse()?])
    }
}

fn cmd_simulate(cfg: &mut RunConfig, a: &SimulateArgs) -> Result<i32> {
    if let Some(s) = a.seed {
        cfg.model.base_seed = s;
    }
    if let Some(r) = a.r {
        cfg.simulate.r = r;
    }
    if let Some(k) = a.replicate {
        cfg.simulate.replicate = k;
    }
    let policies = match &a.policy {
        Some(p) => parse_policies(p)?,
        None => vec![cfg.simulate.policy],
    };
    cfg.validate()?;
    let (r, k) = (cfg.simulate.r, cfg.simulate.replicate);
    let rho = cfg.model.traffic_intensity().ok();
    let trace = sample_trace(&cfg.model, r, k)?;
    let horizon = r * cfg.model.horizon;
    for policy in policies {
        let tl = simulate(&trace, horizon, policy)?;
        let stem = format!("{}_r{}_rep{k}", policy.name(), r);
        let dir = &cfg.output.dir;
        io::write_atomic(&dir.join(format!("timeline_{stem}.csv")), io::timeline_csv(&tl).as_bytes())?;
        let summary = io::SimulationSummary::new(&tl, k, rho);
        io::write_atomic(&dir.join(format!("summary_{stem}.json")), summary.to_json().as_bytes())?;
        if cfg.output.verbosity > 0 {
            println!(
                "{policy}: {} jobs, {} completed, mean queue length {:.4}, final workload {:.4}",
                summary.jobs_total, summary.completions, summary.mean_queue_length, summary.final_workload
            );
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(cfg: &mut RunConfig, a: &VerifyArgs, exec: Execution) -> Result<i32> {
    let mutation: Mutation = a.mutant.parse()?;
    if let Some(s) = a.seed {
        cfg.verify.seeds = vec![s];
    }
    cfg.validate()?;
    let outcomes = verify::run_matrix(&cfg.verify, mutation, exec)?;
    let path = cfg.output.dir.join("verify_report.csv");
    io::write_atomic(&path, io::verify_csv(&outcomes).as_bytes())?;
    let failing: Vec<_> = outcomes.iter().filter(|o| !o.pass()).collect();
    if cfg.output.verbosity > 0 {
        println!("verify: {} traces, {} failing -> {}", outcomes.len(), failing.len(), path.display());
        for o in failing.iter().take(10) {
            let names: Vec<&str> = o.reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
            println!("  {} rho={} seed={}: {}", o.variant.name(), o.rho, o.seed, names.join(", "));
        }
    }
    Ok(if failing.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_sweep(cfg: &mut RunConfig, a: &SweepArgs, exec: Execution) -> Result<i32> {
    if let Some(s) = a.seed {
        cfg.model.base_seed = s;
    }
    cfg.validate()?;
    let results = fluid::sweep(&cfg.model, &cfg.sweep, exec)?;
    let dir: &Path = &cfg.output.dir;
    io::write_atomic(&dir.join("sweep.csv"), io::sweep_csv(&results, cfg.output.timings).as_bytes())?;
    for cell in &cfg.sweep.plot_cells {
        let (_, profile) = fluid::evaluate_cell(&cfg.model, &cfg.sweep, cell.r, cell.replicate, true)?;
        let name = format!("plot_r{}_rep{}.csv", cell.r, cell.replicate);
        io::write_atomic(&dir.join(name), io::profile_csv(&profile).as_bytes())?;
    }
    if cfg.output.verbosity > 0 {
        println!("{:>8} {:>12} {:>14} {:>10} {:>10}", "r", "prohorov", "below_frontier", "low_mass", "load_dev");
        for s in fluid::summarize(&results) {
            println!(
                "{:>8} {:>12.6} {:>14.6} {:>10.6} {:>10.6}",
                s.r, s.sup_prohorov, s.sup_below_frontier, s.low_mass, s.load_dev
            );
        }
        if !fluid::below_frontier_consistent(&results) {
            println!("warning: SJF and SRPT below-frontier work disagree");
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["fluidq", "simulate", "--policy", "all", "--out", "x", "--threads", "2"]).unwrap();
        assert_eq!(cli.out, Some(PathBuf::from("x")));
        assert_eq!(cli.threads, Some(2));
        assert!(matches!(cli.command, Command::Simulate(SimulateArgs { policy: Some(ref p), .. }) if p == "all"));
    }

    #[test]
    fn policy_list() {
        assert_eq!(parse_policies("ALL").unwrap().len(), 3);
        assert_eq!(parse_policies("fifo").unwrap(), vec![Policy::Fifo]);
        assert!(parse_policies("lifo").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::Supercritical { rho: 1.5 }), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::TraceMismatch), EXIT_INTERNAL);
        assert_eq!(run(["fluidq", "bogus"]), EXIT_CONFIG);
    }
}
