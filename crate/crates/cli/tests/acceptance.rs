//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dyncover::bench::{bench, BenchOptions};
use dyncover::{verify, EngineChoice, Parsed, VerifyOptions};
use dyncover_core::greedy::{greedy_cover, CandidateSet, ResidualInstance};
use dyncover_core::oracle::{check_all, naive_bucket_greedy, Slack};
use dyncover_core::workloads::{lb_domset, lb_setcover, random_ds, random_sc, Workload};
use dyncover_core::{EngineOptions, Levels, Params, UpdateOp};

struct Line {
    pass: bool,
    name: &'static str,
    detail: String,
}

fn parsed(w: Workload) -> Parsed {
    Parsed { workload: w, op_lines: Vec::new() }
}

fn verify_quiet(w: Workload, eps: f64, every: u64, approx: bool, exact: bool) -> dyncover::VerifyOutcome {
    let opts = VerifyOptions {
        engine: EngineChoice { eps: Some(eps), beta: None, exact_counters: exact },
        verify_every: every,
        approx,
        inject_fault: None,
    };
    let tag = w.tag.clone();
    verify(&parsed(w), &opts, &mut std::io::sink(), std::path::Path::new("acceptance-fault.dump"))
        .unwrap_or_else(|e| panic!("{tag}: {e}"))
}

const MATRIX_EPS: [f64; 3] = [0.1, 0.2, 0.39];
const MATRIX_C: [f64; 2] = [1.0, 16.0];
const MATRIX_N: u32 = 200;
const MATRIX_F: u32 = 5;
const MATRIX_OPS: usize = 10_000;
// check_all every 5 steps and at every reset step
const MATRIX_EVERY: u64 = 5;

struct Telemetry {
    worst_changes: f64,
    worst_recourse: f64,
    worst_refresh: f64,
}

/// Invariant matrix plus the amortized telemetry read off the same runs.
fn matrix() -> (Line, Line, Line) {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut tel = Telemetry { worst_changes: 0.0, worst_recourse: 0.0, worst_refresh: 0.0 };
    for dom in [false, true] {
        for seed in 0..20u64 {
            for eps in MATRIX_EPS {
                for c in MATRIX_C {
                    let w = if dom {
                        random_ds(MATRIX_N, MATRIX_F, c, MATRIX_OPS, 0.4, seed).unwrap()
                    } else {
                        random_sc(MATRIX_N, 120, MATRIX_F, c, MATRIX_OPS, 0.4, seed).unwrap()
                    };
                    let label = format!("{} seed={seed} eps={eps} C={c}", if dom { "DS" } else { "SC" });
                    let out = verify_quiet(w, eps, MATRIX_EVERY, false, false);
                    runs += 1;
                    if let Some(step) = out.first_failing_step {
                        failures.push(format!("{label} step {step}"));
                    }
                    let t = out.totals;
                    let ops = t.ops.max(1) as f64;
                    let ln_n = f64::from(MATRIX_N).ln();
                    let changes = t.level_changes as f64 / ops;
                    let recourse = t.recourse as f64 / ops;
                    let refresh = out.counter_refreshes as f64 / t.level_changes.max(1) as f64;
                    let (b_changes, b_recourse, b_refresh) =
                        (50.0 * eps.powi(-3) * ln_n, 50.0 * eps.powi(-4) * (1.0 + c.log2()), 50.0 * eps.powi(-2));
                    tel.worst_changes = tel.worst_changes.max(changes / b_changes);
                    tel.worst_recourse = tel.worst_recourse.max(recourse / b_recourse);
                    tel.worst_refresh = tel.worst_refresh.max(refresh / b_refresh);
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let invariants = Line {
        pass: failures.is_empty(),
        name: "invariant suite",
        detail: format!(
            "{runs} runs ({{SC,DS}} x 20 seeds x eps {{0.1,0.2,0.39}} x C {{1,16}}, n={MATRIX_N}, f/Delta={MATRIX_F}, {MATRIX_OPS} ops, checked every {MATRIX_EVERY} steps and at resets), {} failing{} in {secs:.1}s",
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    };
    let telemetry = Line {
        pass: tel.worst_changes <= 1.0 && tel.worst_recourse <= 1.0,
        name: "amortized-bounds telemetry",
        detail: format!(
            "worst level changes/op at {:.4} of 50 eps^-3 ln n, worst recourse/op at {:.4} of 50 eps^-4 (1 + log2 C)",
            tel.worst_changes, tel.worst_recourse
        ),
    };
    let refresh = Line {
        pass: tel.worst_refresh <= 1.0,
        name: "update-time substitute (counter refreshes)",
        detail: format!(
            "worst counter refreshes per level change at {:.4} of 50 eps^-2 over the matrix",
            tel.worst_refresh
        ),
    };
    (invariants, telemetry, refresh)
}

fn approximation() -> Line {
    let started = Instant::now();
    let mut failures = Vec::new();
    let (mut checks, mut worst, mut headline) = (0u64, 0.0f64, None::<f64>);
    for seed in 0..10u64 {
        for eps in [0.1, 0.3] {
            let w = random_sc(40, 12, 4, 8.0, 2000, 0.4, 1000 + seed).unwrap();
            let out = verify_quiet(w, eps, 1, true, false);
            checks += out.approx_checks;
            worst = worst.max(out.worst_bound_use);
            if let Some(h) = out.worst_headline_ratio {
                headline = Some(headline.map_or(h, |x| x.max(h)));
            }
            if let Some(step) = out.first_failing_step {
                failures.push(format!("seed={seed} eps={eps} step {step}"));
            }
        }
    }
    Line {
        pass: failures.is_empty() && checks == 20 * 2000,
        name: "approximation bound",
        detail: format!(
            "{checks} steps (12 sets, 40 elements, 10 seeds x eps {{0.1,0.3}}): cost < OPT beta^4 (ln n + 1) everywhere, worst use {worst:.3} of the bound; headline cost/(OPT ln n) {} (not asserted); {} failing in {:.1}s",
            headline.map_or("not reached (ln n < 1/eps)".to_string(), |h| format!("{h:.3}")),
            failures.len(),
            started.elapsed().as_secs_f64()
        ),
    }
}

fn replay_totals(w: &Workload) -> (u64, Vec<(UpdateOp, u64)>) {
    let mut eng = w.build(w.params_with_beta(SQRT_2).unwrap(), EngineOptions::default()).unwrap();
    let per: Vec<(UpdateOp, u64)> = w.ops.iter().map(|&op| (op, eng.apply(op).unwrap().level_changes)).collect();
    (eng.engine().totals().level_changes, per)
}

fn lower_bound_sc() -> Line {
    let mut parts = Vec::new();
    let mut pass = true;
    for q in [4u32, 5, 6] {
        let w = lb_setcover(q).unwrap();
        let n = 1u64 << q;
        let bound = n / 2 * (u64::from(q) - 1);
        let (total, _) = replay_totals(&w);
        pass &= total >= bound;
        parts.push(format!("q={q}: {total} >= {bound}"));
    }
    Line {
        pass,
        name: "lower bound (set cover)",
        detail: format!("total level changes at beta = sqrt 2, {}", parts.join(", ")),
    }
}

fn lower_bound_ds() -> Line {
    let mut per_deletion = Vec::new();
    for q in [3u32, 4, 5] {
        let w = lb_domset(q).unwrap();
        let (_, per) = replay_totals(&w);
        let dels: Vec<u64> = per.iter().filter(|(op, _)| matches!(op, UpdateOp::DeleteEdge(..))).map(|p| p.1).collect();
        per_deletion.push((q, dels.iter().sum::<u64>() as f64 / dels.len() as f64));
    }
    let pass = per_deletion.windows(2).all(|w| w[1].1 > w[0].1);
    let parts: Vec<String> = per_deletion.iter().map(|(q, x)| format!("q={q}: {x:.3}")).collect();
    Line {
        pass,
        name: "lower bound (dominating set)",
        detail: format!("level changes per edge deletion at beta = sqrt 2 grow with q: {}", parts.join(", ")),
    }
}

fn oracle_equivalence() -> Line {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut runs = 0;
    for seed in 0..5u64 {
        for dom in [false, true] {
            let w = if dom {
                random_ds(60, 5, 16.0, 5000, 0.4, 500 + seed).unwrap()
            } else {
                random_sc(80, 50, 5, 16.0, 5000, 0.4, 500 + seed).unwrap()
            };
            let eps = [0.1, 0.2, 0.39][seed as usize % 3];
            let params = w.params(eps).unwrap();
            let mut eng = w.build(params, EngineOptions { exact_counters: true }).unwrap();
            let mut reference = w.reference(params).unwrap();
            runs += 1;
            for (k, &op) in w.ops.iter().enumerate() {
                let r = eng.apply(op).unwrap();
                let rr = reference.apply(op).unwrap();
                let resets: Vec<_> = r.resets.iter().map(|x| (x.kind, x.i_crit)).collect();
                let why = if resets != rr.resets {
                    Some("reset points")
                } else if eng.engine().cover() != reference.cover() {
                    Some("cover")
                } else if !check_all(eng.engine(), Slack::Strict).is_clean() {
                    Some("strict invariants")
                } else {
                    None
                };
                if let Some(why) = why {
                    failures.push(format!("{} seed={seed} op {k}: {why}", w.tag));
                    break;
                }
            }
        }
    }
    Line {
        pass: failures.is_empty(),
        name: "oracle equivalence",
        detail: format!(
            "{runs} runs ({{SC,DS}} x 5 seeds x 5000 ops) exact-counter engine vs reference: identical covers and reset points, strict invariants every step; {} failing{} in {:.1}s",
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default(),
            started.elapsed().as_secs_f64()
        ),
    }
}

fn greedy_equivalence() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut mismatches = 0;
    for k in 0..100u32 {
        let eps = [0.1, 0.2, 0.39][k as usize % 3];
        let lv = Levels::new(Params::new(eps, 256, 16.0).unwrap());
        let n_items = rng.gen_range(1..=120u32);
        let n_sets = rng.gen_range(1..=50u32);
        let mut sets: Vec<CandidateSet> = (0..n_sets)
            .map(|id| {
                let size = rng.gen_range(1..=n_items.min(20));
                let mut members: Vec<u32> = (0..size).map(|_| rng.gen_range(0..n_items)).collect();
                members.sort_unstable();
                members.dedup();
                CandidateSet { id: id * 2, cost: 16f64.powf(-rng.gen::<f64>()), members }
            })
            .collect();
        // every item needs a candidate
        for x in 0..n_items {
            if !sets.iter().any(|s| s.members.contains(&x)) {
                let s = rng.gen_range(0..sets.len());
                sets[s].members.push(x);
                sets[s].members.sort_unstable();
            }
        }
        let inst = ResidualInstance { items: (0..n_items).map(|x| x * 3).collect(), sets };
        if greedy_cover(&lv, &inst).unwrap() != naive_bucket_greedy(&lv, &inst).unwrap() {
            mismatches += 1;
        }
    }
    Line {
        pass: mismatches == 0,
        name: "greedy equivalence",
        detail: format!(
            "bucket greedy vs naive argmin on 100 random residual instances (<= 50 sets): {mismatches} mismatches"
        ),
    }
}

fn bench_slope() -> Line {
    let opts = BenchOptions { min_log: 10, max_log: 13, compare_exact: true, ..BenchOptions::default() };
    let r = bench(&opts).unwrap();
    let fewer = r.rows.iter().all(|row| row.counter_refreshes < row.exact_refreshes.unwrap());
    Line {
        pass: fewer,
        name: "update-time substitute (bench ladder)",
        detail: format!(
            "n = 2^10..2^13: time vs ops f log n exponent {} and ns/op per log2 n {} (informational); lazy refreshes below exact on every rung: {fewer}",
            r.exponent.map_or("-".into(), |x| format!("{x:.3}")),
            r.per_op_slope.map_or("-".into(), |x| format!("{x:.1}")),
        ),
    }
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let started = Instant::now();
    let (invariants, telemetry, refresh) = matrix();
    let lines = [
        invariants,
        approximation(),
        lower_bound_sc(),
        lower_bound_ds(),
        telemetry,
        oracle_equivalence(),
        greedy_equivalence(),
        refresh,
        bench_slope(),
    ];
    let mut failed = 0;
    for l in &lines {
        println!("[{}] {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
        failed += usize::from(!l.pass);
    }
    println!(
        "acceptance: {} of {} passed in {:.1}s",
        lines.len() - failed,
        lines.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
