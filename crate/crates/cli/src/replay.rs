//! `run` and `verify`: replay a parsed workload through the engine.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use dyncover_core::engine::Engine;
use dyncover_core::oracle::{approx_verdict, brute_force_opt, check_all, Slack, BRUTE_FORCE_MAX_SETS};
use dyncover_core::workloads::AnyEngine;
use dyncover_core::{EngineOptions, Error, Totals};

use crate::metrics::{step_record, summary_block, Sink};
use crate::{CliError, EngineChoice, Parsed};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub engine: EngineChoice,
    /// Emit wall-time fields.
    pub timing: bool,
    /// Skip the rise cascade of this step.
    pub inject_fault: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub totals: Totals,
    pub counter_refreshes: u64,
    pub warnings: Vec<String>,
}

fn build(
    parsed: &Parsed,
    choice: &EngineChoice,
    inject_fault: Option<u64>,
) -> Result<(AnyEngine, Vec<String>), CliError> {
    let w = &parsed.workload;
    let (params, warning) = choice.params(w)?;
    let options = EngineOptions { exact_counters: choice.exact_counters };
    let mut eng = w.build(params, options).map_err(|e| CliError::Params(e.to_string()))?;
    if let Some(step) = inject_fault {
        eng.engine_mut().inject_skip_cascade(step);
    }
    Ok((eng, warning.into_iter().collect()))
}

/// Map an engine error on op `k`: faults dump state and exit 3, anything else
/// is an invalid op in the input.
fn op_error(parsed: &Parsed, k: usize, e: Error, engine: &Engine, dump: &Path) -> CliError {
    let step = engine.step_clock() + 1;
    match e {
        Error::Fault(_) => {
            let text = state_dump(engine, step, &e);
            if let Err(io) = std::fs::write(dump, text) {
                return CliError::Io(io);
            }
            CliError::Fault { step, msg: e.to_string(), dump: dump.to_path_buf() }
        }
        _ => CliError::Parse {
            path: parsed.workload.tag.clone(),
            source: crate::ParseError { line: parsed.op_lines.get(k).copied().unwrap_or(0), msg: e.to_string() },
        },
    }
}

fn state_dump(engine: &Engine, step: u64, e: &Error) -> String {
    let mut s = String::new();
    writeln!(s, "step={step} error=\"{e}\"").unwrap();
    writeln!(
        s,
        "n_active={} cover_cost={} next_global_reset={}",
        engine.n_active(),
        engine.cover_cost(),
        engine.next_global_reset()
    )
    .unwrap();
    writeln!(s, "totals={:?}", engine.totals()).unwrap();
    let lv = engine.levels();
    let ledger = engine.ledger();
    for j in 0..=ledger.top() {
        let (d, c) = (ledger.dirt(j), ledger.cost(j));
        if d != 0.0 || c != 0.0 {
            writeln!(s, "level={j} dirt={d} cost={c} sets={} elements={}", ledger.sets(j), ledger.elements(j)).unwrap();
        }
    }
    writeln!(s, "dirty={}", ledger.is_dirty(lv)).unwrap();
    for p in engine.cover() {
        writeln!(s, "pair set={} level={} cost={} members={:?}", p.set, p.level, p.cost, p.members).unwrap();
    }
    s
}

/// Replay every op, streaming one record per update and the summary block
/// to `out`. A hard fault writes a state dump to `dump`.
pub fn run(
    parsed: &Parsed,
    opts: &RunOptions,
    out: Box<dyn Write + Send>,
    dump: &Path,
) -> Result<RunSummary, CliError> {
    let (mut eng, warnings) = build(parsed, &opts.engine, opts.inject_fault)?;
    let sink = Sink::new(out);
    let started = Instant::now();
    for (k, &op) in parsed.workload.ops.iter().enumerate() {
        let t0 = opts.timing.then(Instant::now);
        let report = eng.apply(op).map_err(|e| op_error(parsed, k, e, eng.engine(), dump))?;
        sink.send(step_record(&report, t0.map(|t| t.elapsed().as_nanos())));
    }
    let wall = opts.timing.then(|| started.elapsed().as_nanos());
    let totals = eng.engine().totals();
    let counter_refreshes = eng.engine().counter_refreshes();
    for line in summary_block(&totals, counter_refreshes, wall) {
        sink.send(line);
    }
    sink.finish()?;
    Ok(RunSummary { totals, counter_refreshes, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub engine: EngineChoice,
    /// Check every this many steps; reset steps and the last step are always
    /// checked.
    pub verify_every: u64,
    /// Compare against the exhaustive optimum when the instance is small.
    pub approx: bool,
    pub inject_fault: Option<u64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { engine: EngineChoice::default(), verify_every: 1, approx: true, inject_fault: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub pass: bool,
    pub first_failing_step: Option<u64>,
    pub checkpoints: u64,
    pub approx_checks: u64,
    /// Largest `cost / bound` seen at an approximation check.
    pub worst_bound_use: f64,
    /// Largest `cost / (opt ln n)` once `ln n >= 1/eps`.
    pub worst_headline_ratio: Option<f64>,
    pub totals: Totals,
    pub counter_refreshes: u64,
    pub warnings: Vec<String>,
}

/// `(cost, members)` of every coverer under the current incidences.
fn current_sets(engine: &Engine) -> Vec<(f64, Vec<u32>)> {
    let mut sets: Vec<(f64, Vec<u32>)> =
        (0..engine.num_coverers() as u32).map(|s| (engine.cost(s), Vec::new())).collect();
    for x in 0..engine.num_items() as u32 {
        for s in engine.coverers_of(x) {
            sets[s as usize].1.push(x);
        }
    }
    sets
}

/// Replay with `check_all` at checkpoints (strict with exact counters,
/// counter slack otherwise) and, for instances of at most
/// `BRUTE_FORCE_MAX_SETS` sets, the approximation check against the
/// exhaustive optimum. Writes a report to `report` and stops at the first
/// failing checkpoint.
pub fn verify(
    parsed: &Parsed,
    opts: &VerifyOptions,
    report: &mut dyn Write,
    dump: &Path,
) -> Result<VerifyOutcome, CliError> {
    if opts.verify_every == 0 {
        return Err(CliError::Params("invalid parameters: verify_every must be at least 1".into()));
    }
    let (mut eng, mut warnings) = build(parsed, &opts.engine, opts.inject_fault)?;
    let slack = if opts.engine.exact_counters { Slack::Strict } else { Slack::Counters };
    let mut approx = opts.approx;
    if approx && parsed.workload.header.m as usize > BRUTE_FORCE_MAX_SETS {
        warnings.push(format!(
            "warning: {} sets is above the exhaustive search limit of {BRUTE_FORCE_MAX_SETS}, approximation check disabled",
            parsed.workload.header.m
        ));
        approx = false;
    }
    for w in &warnings {
        writeln!(report, "# {w}")?;
    }
    let mut out = VerifyOutcome {
        pass: true,
        first_failing_step: None,
        checkpoints: 0,
        approx_checks: 0,
        worst_bound_use: 0.0,
        worst_headline_ratio: None,
        totals: Totals::default(),
        counter_refreshes: 0,
        warnings,
    };
    let ops = &parsed.workload.ops;
    for (k, &op) in ops.iter().enumerate() {
        let r = eng.apply(op).map_err(|e| op_error(parsed, k, e, eng.engine(), dump))?;
        let due = r.step % opts.verify_every == 0 || !r.resets.is_empty() || k + 1 == ops.len();
        if !due {
            continue;
        }
        out.checkpoints += 1;
        let engine = eng.engine();
        let v = check_all(engine, slack);
        for x in &v.violations {
            writeln!(
                report,
                "violation step={} kind={} ids={:?} level={} observed={} threshold={}",
                r.step,
                x.kind.name(),
                x.ids,
                x.level.map_or("-".to_string(), |l| l.to_string()),
                x.observed,
                x.threshold
            )?;
        }
        let mut failed = !v.is_clean();
        if approx {
            let sets = current_sets(engine);
            let refs: Vec<(f64, &[u32])> = sets.iter().map(|(c, m)| (*c, m.as_slice())).collect();
            let active: Vec<u32> = (0..engine.num_items() as u32).filter(|&x| engine.item_level(x).is_some()).collect();
            let opt = brute_force_opt(&active, &refs).map_err(|e| CliError::Params(e.to_string()))?;
            let cost = engine.cover_cost();
            let verdict = approx_verdict(engine.levels(), cost, opt, engine.n_active());
            out.approx_checks += 1;
            if verdict.bound > 0.0 {
                out.worst_bound_use = out.worst_bound_use.max(cost / verdict.bound);
            }
            if let Some(h) = verdict.headline_ratio {
                out.worst_headline_ratio = Some(out.worst_headline_ratio.map_or(h, |w: f64| w.max(h)));
            }
            if !verdict.pass {
                writeln!(report, "approx_fail step={} cost={cost} opt={opt} bound={}", r.step, verdict.bound)?;
                failed = true;
            }
        }
        if failed {
            out.pass = false;
            out.first_failing_step = Some(r.step);
            break;
        }
    }
    out.totals = eng.engine().totals();
    out.counter_refreshes = eng.engine().counter_refreshes();
    match out.first_failing_step {
        Some(step) => writeln!(report, "verdict=FAIL first_failing_step={step} checkpoints={}", out.checkpoints)?,
        None => writeln!(
            report,
            "verdict=PASS checkpoints={} approx_checks={} worst_bound_use={}",
            out.checkpoints, out.approx_checks, out.worst_bound_use
        )?,
    }
    Ok(out)
}
