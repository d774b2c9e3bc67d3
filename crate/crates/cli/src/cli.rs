//! Argument parsing and command dispatch for the `dyncover` binary.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dyncover_core::workloads::{lb_domset, lb_setcover, random_ds, random_sc, Workload};

use crate::bench::{bench, render, BenchOptions};
use crate::replay::{run, verify, RunOptions, VerifyOptions};
use crate::{format, CliError, EngineChoice, Parsed};

#[derive(Debug, Parser)]
#[command(name = "dyncover", version, about = "Dynamic set cover and dominating set replay")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a workload and write per-step metrics plus a summary.
    Run {
        workload: PathBuf,
        /// Metrics file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        /// Leave out wall-time fields so repeated runs compare equal.
        #[arg(long)]
        no_timing: bool,
    },
    /// Replay a workload checking every invariant and, on small instances,
    /// the approximation bound.
    Verify {
        workload: PathBuf,
        /// Report file; stdout when omitted.
        #[arg(short, long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, default_value_t = 1)]
        verify_every: u64,
        /// Skip the comparison against the exhaustive optimum.
        #[arg(long)]
        no_approx: bool,
    },
    /// Write a generated workload.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Workload file; stdout when omitted.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Time the engine over a ladder of random set cover instances.
    Bench {
        #[arg(long, default_value_t = 10)]
        min_log: u32,
        #[arg(long, default_value_t = 16)]
        max_log: u32,
        #[arg(long, default_value_t = 4)]
        f: u32,
        #[arg(long = "cost-ratio", default_value_t = 16.0)]
        c: f64,
        #[arg(long, default_value_t = 2)]
        ops_per_element: u32,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also replay with exact counters and report their refresh count.
        #[arg(long)]
        compare_exact: bool,
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    /// Level base; overrides --eps.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Refresh every counter on every change.
    #[arg(long)]
    pub exact_counters: bool,
    /// Skip the rise cascade at this step, to exercise the checks.
    #[arg(long, value_name = "STEP")]
    pub inject_fault: Option<u64>,
}

impl EngineArgs {
    fn choice(&self) -> Result<EngineChoice, CliError> {
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps < 0.4) {
                return Err(CliError::Params(format!("invalid parameters: eps {eps} outside (0, 0.4)")));
            }
        }
        Ok(EngineChoice { eps: self.eps, beta: self.beta, exact_counters: self.exact_counters })
    }
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Random set system with element churn.
    RandomSc {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        f: u32,
        #[arg(long = "cost-ratio", default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        ops: usize,
        #[arg(long, default_value_t = 0.4)]
        churn: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random graph with edge churn.
    RandomDs {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        delta: u32,
        #[arg(long = "cost-ratio", default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        ops: usize,
        #[arg(long, default_value_t = 0.4)]
        churn: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Insertion sequence forcing many set cover level changes.
    LbSc {
        #[arg(long)]
        q: u32,
    },
    /// Deletion sequence forcing many dominating set level changes.
    LbDs {
        #[arg(long)]
        q: u32,
    },
}

fn generate(kind: &GenKind) -> Result<Workload, CliError> {
    let w = match *kind {
        GenKind::RandomSc { n, m, f, c, ops, churn, seed } => random_sc(n, m, f, c, ops, churn, seed),
        GenKind::RandomDs { n, delta, c, ops, churn, seed } => random_ds(n, delta, c, ops, churn, seed),
        GenKind::LbSc { q } => lb_setcover(q),
        GenKind::LbDs { q } => lb_domset(q),
    };
    w.map_err(|e| CliError::Params(e.to_string()))
}

fn load(path: &Path) -> Result<Parsed, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    format::parse(&text).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write + Send>, CliError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout()),
    })
}

/// Where a fault dump goes: next to the output file, or in the working
/// directory.
fn dump_path(output: Option<&Path>) -> PathBuf {
    match output {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".dump");
            PathBuf::from(s)
        }
        None => PathBuf::from("dyncover-fault.dump"),
    }
}

/// Replay errors name the workload by tag; point them at the file instead.
fn at_file(e: CliError, path: &Path) -> CliError {
    match e {
        CliError::Parse { source, .. } => CliError::Parse { path: path.display().to_string(), source },
        other => other,
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { workload, output, engine, no_timing } => {
            let parsed = load(&workload)?;
            let opts = RunOptions { engine: engine.choice()?, timing: !no_timing, inject_fault: engine.inject_fault };
            let summary = run(&parsed, &opts, open_out(output.as_deref())?, &dump_path(output.as_deref()))
                .map_err(|e| at_file(e, &workload))?;
            for w in summary.warnings {
                eprintln!("{w}");
            }
            Ok(())
        }
        Command::Verify { workload, report, engine, verify_every, no_approx } => {
            let parsed = load(&workload)?;
            let opts = VerifyOptions {
                engine: engine.choice()?,
                verify_every,
                approx: !no_approx,
                inject_fault: engine.inject_fault,
            };
            let mut out = io::BufWriter::new(open_out(report.as_deref())?);
            let outcome =
                verify(&parsed, &opts, &mut out, &dump_path(report.as_deref())).map_err(|e| at_file(e, &workload))?;
            out.flush()?;
            for w in &outcome.warnings {
                eprintln!("{w}");
            }
            match outcome.first_failing_step {
                Some(step) => Err(CliError::Violation { step }),
                None => Ok(()),
            }
        }
        Command::Gen { kind, output } => {
            let text = format::to_text(&generate(&kind)?);
            open_out(output.as_deref())?.write_all(text.as_bytes())?;
            Ok(())
        }
        Command::Bench { min_log, max_log, f, c, ops_per_element, eps, seed, compare_exact, no_timing } => {
            if cfg!(debug_assertions) && !no_timing {
                eprintln!("warning: debug build, timings are not representative (build with --release)");
            }
            if !(eps > 0.0 && eps < 0.4) {
                return Err(CliError::Params(format!("invalid parameters: eps {eps} outside (0, 0.4)")));
            }
            let opts = BenchOptions {
                min_log,
                max_log,
                f,
                c_ratio: c,
                ops_per_element,
                eps,
                seed,
                compare_exact,
                timing: !no_timing,
                ..BenchOptions::default()
            };
            let report = bench(&opts)?;
            print!("{}", render(&report, opts.timing));
            Ok(())
        }
    }
}
