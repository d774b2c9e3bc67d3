//! Ground truth for tests and the verify command: exhaustive optimum, a full
//! invariant audit recomputed from scratch, the approximation verdict, a naive
//! greedy and an independent reference engine.

mod reference;

use alloc::vec;
use alloc::vec::Vec;

use crate::engine::{Engine, NONE};
use crate::greedy::{Pick, ResidualInstance};
use crate::levels::Levels;
use crate::Error;

pub use reference::{RefStep, ReferenceEngine};

/// Largest family the exhaustive optimum accepts.
pub const BRUTE_FORCE_MAX_SETS: usize = 22;

/// Minimum cost of a sub-family covering `elements`, by exhaustive search
/// with cost pruning. `sets[i] = (cost, members)`. Infinite when infeasible.
pub fn brute_force_opt(elements: &[u32], sets: &[(f64, &[u32])]) -> Result<f64, Error> {
    if sets.len() > BRUTE_FORCE_MAX_SETS {
        return Err(Error::TooManySets { sets: sets.len(), limit: BRUTE_FORCE_MAX_SETS });
    }
    if elements.is_empty() {
        return Ok(0.0);
    }
    let mut index = elements.to_vec();
    index.sort_unstable();
    index.dedup();
    let words = index.len().div_ceil(64);
    let mask_of = |members: &[u32]| {
        let mut m = vec![0u64; words];
        for e in members {
            if let Ok(i) = index.binary_search(e) {
                m[i / 64] |= 1 << (i % 64);
            }
        }
        m
    };
    let masks: Vec<Vec<u64>> = sets.iter().map(|(_, m)| mask_of(m)).collect();
    let mut full = vec![0u64; words];
    for i in 0..index.len() {
        full[i / 64] |= 1 << (i % 64);
    }
    // suffix[i]: union of sets i.. for a quick feasibility cut
    let mut suffix = vec![vec![0u64; words]; sets.len() + 1];
    for i in (0..sets.len()).rev() {
        for w in 0..words {
            suffix[i][w] = suffix[i + 1][w] | masks[i][w];
        }
    }
    let costs: Vec<f64> = sets.iter().map(|s| s.0).collect();
    let mut best = f64::INFINITY;
    let mut covered = vec![0u64; words];
    search(0, &mut covered, 0.0, &masks, &suffix, &full, &costs, &mut best);
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn search(
    i: usize,
    covered: &mut Vec<u64>,
    cost: f64,
    masks: &[Vec<u64>],
    suffix: &[Vec<u64>],
    full: &[u64],
    costs: &[f64],
    best: &mut f64,
) {
    if cost >= *best {
        return;
    }
    if covered.iter().zip(full).all(|(c, f)| c == f) {
        *best = cost;
        return;
    }
    if i == masks.len() || covered.iter().zip(&suffix[i]).zip(full).any(|((c, s), f)| (c | s) != *f) {
        return;
    }
    let adds = masks[i].iter().zip(covered.iter()).any(|(m, c)| m & !c != 0);
    if adds {
        let saved = covered.clone();
        for (c, m) in covered.iter_mut().zip(&masks[i]) {
            *c |= m;
        }
        search(i + 1, covered, cost + costs[i], masks, suffix, full, costs, best);
        *covered = saved;
    }
    search(i + 1, covered, cost, masks, suffix, full, costs, best);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxVerdict {
    pub pass: bool,
    /// `opt * beta^4 * (ln n + 1)`.
    pub bound: f64,
    /// `cost / (opt * ln n)`, reported once `ln n >= 1/eps`.
    pub headline_ratio: Option<f64>,
}

/// Whether `cover_cost < opt * beta^4 * (ln n + 1)`.
pub fn approx_verdict(levels: &Levels, cover_cost: f64, opt: f64, n_active: u32) -> ApproxVerdict {
    let n = n_active.max(1) as f64;
    let ln_n = libm::log(n);
    let bound = opt * levels.pow(4) * (ln_n + 1.0);
    let pass = if opt == 0.0 { cover_cost == 0.0 } else { cover_cost < bound + 1e-9 };
    let headline_ratio = (opt > 0.0 && ln_n >= 1.0 / levels.eps()).then(|| cover_cost / (opt * ln_n));
    ApproxVerdict { pass, bound, headline_ratio }
}

/// Greedy by ratio level, recomputing every count each round. Same tie rule
/// as the bucket version.
pub fn naive_bucket_greedy(levels: &Levels, inst: &ResidualInstance) -> Result<Vec<Pick>, Error> {
    let n = inst.items.len();
    let mut coverable = vec![false; n];
    for s in &inst.sets {
        for &m in &s.members {
            coverable[m as usize] = true;
        }
    }
    if let Some(i) = coverable.iter().position(|c| !c) {
        return Err(Error::Uncoverable(inst.items[i]));
    }
    let mut covered = vec![false; n];
    let mut left = n;
    let mut picks = Vec::new();
    while left > 0 {
        let mut best: Option<(i32, u32, usize)> = None;
        for (k, s) in inst.sets.iter().enumerate() {
            let live = s.members.iter().filter(|&&m| !covered[m as usize]).count();
            if live == 0 {
                continue;
            }
            let l = levels.level_of_ratio(live as u64, s.cost)?;
            let better = match best {
                None => true,
                Some((bl, bid, _)) => l > bl || (l == bl && s.id < bid),
            };
            if better {
                best = Some((l, s.id, k));
            }
        }
        let (level, id, k) = best.expect("coverable");
        let mut members = Vec::new();
        for &m in &inst.sets[k].members {
            if !covered[m as usize] {
                covered[m as usize] = true;
                members.push(inst.items[m as usize]);
            }
        }
        left -= members.len();
        picks.push(Pick { set: id, level, members });
    }
    Ok(picks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Inv1,
    Inv2,
    Inv3,
    Cover,
    CleanDom,
    PairUpper,
    CounterStaleness,
    LedgerDrift,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::Inv1 => "INV1",
            ViolationKind::Inv2 => "INV2",
            ViolationKind::Inv3 => "INV3",
            ViolationKind::Cover => "COVER",
            ViolationKind::CleanDom => "CLEANDOM",
            ViolationKind::PairUpper => "PAIR_UPPER",
            ViolationKind::CounterStaleness => "COUNTER_STALENESS",
            ViolationKind::LedgerDrift => "LEDGER_DRIFT",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Set and/or item ids involved.
    pub ids: Vec<u32>,
    pub level: Option<i32>,
    pub observed: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    pub step: u64,
    pub violations: Vec<Violation>,
    /// Dirt if every departure counted, initial or not.
    pub dirt_all_departures: f64,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// How much counter error the audit tolerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slack {
    /// Thresholds exactly as stated.
    Strict,
    /// Add `eps * beta^j` where lazy counters can hide a positive-dirty set.
    Counters,
}

const REL_TOL: f64 = 1e-9;

fn drift(a: f64, b: f64) -> bool {
    (a - b).abs() > REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Recompute everything from scratch and check every invariant.
pub fn check_all(engine: &Engine, slack: Slack) -> ViolationReport {
    let lv = &engine.levels;
    let eps = lv.eps();
    let mut out = Vec::new();
    let mut push = |kind, ids: Vec<u32>, level, observed, threshold| {
        out.push(Violation { kind, ids, level, observed, threshold });
    };

    // Cover validity and Invariant 3, one item at a time.
    for (x, it) in engine.items.iter().enumerate() {
        let x = x as u32;
        if !it.active {
            if it.owner != NONE {
                push(ViolationKind::Cover, vec![x], None, 1.0, 0.0);
            }
            continue;
        }
        let s = it.owner;
        let owned = s != NONE
            && engine.coverers_of(x).any(|c| c == s)
            && engine.coverers[s as usize].cov.contains(&x)
            && engine.coverers[s as usize].l_cov == it.level
            && it.level >= 0;
        if !owned {
            push(ViolationKind::Cover, vec![x, s], Some(it.level), 0.0, 1.0);
        }
        for c in engine.coverers_of(x) {
            let l = engine.coverers[c as usize].l_cov;
            if l > it.level {
                push(ViolationKind::Inv3, vec![c, x], Some(l), l as f64, it.level as f64);
            }
        }
    }
    for (s, c) in engine.coverers.iter().enumerate() {
        for &x in &c.cov {
            if engine.items[x as usize].owner != s as u32 {
                push(ViolationKind::Cover, vec![s as u32, x], Some(c.l_cov), 0.0, 1.0);
            }
        }
        if c.l_cov < 0 && !c.cov.is_empty() {
            push(ViolationKind::Cover, vec![s as u32], None, c.cov.len() as f64, 0.0);
        }
    }

    // Exact N_j per coverer from item levels.
    let mut member_levels: Vec<Vec<i32>> = vec![Vec::new(); engine.coverers.len()];
    for (x, it) in engine.items.iter().enumerate() {
        if it.active {
            for c in engine.coverers_of(x as u32) {
                member_levels[c as usize].push(it.level);
            }
        }
    }
    for (s, c) in engine.coverers.iter().enumerate() {
        let s = s as u32;
        let levels_of = &mut member_levels[s as usize];
        levels_of.sort_unstable();
        let below = |j: i32| levels_of.partition_point(|&l| l < j) as f64;
        let (j_min, j_max) = c.counters.window();
        // running exact_below(j), from the per-level counts
        let mut counted = c.counters.exact_at(j_min - 1);
        for j in j_min..=j_max {
            let exact = below(j);
            let est = c.counters.cumulative(j) as f64;
            let allowed = eps * lv.pow(j);
            if (est - exact).abs() > allowed + REL_TOL {
                push(ViolationKind::CounterStaleness, vec![s], Some(j), (est - exact).abs(), allowed);
            }
            if counted as f64 != exact {
                push(ViolationKind::CounterStaleness, vec![s], Some(j), counted as f64, exact);
            }
            counted += c.counters.exact_at(j);
        }
        for j in (c.l_cov + 1).max(j_min)..=j_max + 1 {
            let exact = below(j);
            let limit = c.cost * lv.pow(j + 1);
            let hit = match slack {
                Slack::Strict => lv.reaches(exact, c.cost, j + 1),
                Slack::Counters => exact >= limit + eps * lv.pow(j),
            };
            if hit {
                push(ViolationKind::Inv1, vec![s], Some(j), exact, limit);
            }
        }
        if c.l_cov >= 0 {
            let size = c.cov.len() as f64;
            let limit = c.cost * lv.pow(c.l_cov + 2);
            let over = match slack {
                Slack::Strict => lv.reaches(size, c.cost, c.l_cov + 2),
                Slack::Counters => size >= limit + eps * lv.pow(c.l_cov + 1),
            };
            if over {
                push(ViolationKind::PairUpper, vec![s], Some(c.l_cov), size, limit);
            }
        }
    }

    for f in &engine.fresh {
        let cost = engine.coverers[f.set as usize].cost;
        let size = f.size as f64;
        let low_ok = lv.reaches(size, cost, f.level);
        let high_ok = match slack {
            Slack::Strict => !lv.reaches(size, cost, f.level + 1),
            Slack::Counters => size < cost * lv.pow(f.level + 1) + eps * lv.pow(f.level),
        };
        if !(low_ok && high_ok) {
            push(ViolationKind::CleanDom, vec![f.set], Some(f.level), size / cost, lv.pow(f.level));
        }
    }

    // Ledger reconstruction.
    let ledger = &engine.ledger;
    let top = ledger.top();
    let mut dirt = vec![0.0; top as usize + 1];
    let mut deps = vec![0u64; top as usize + 1];
    let mut dirt_all = 0.0;
    for &(l, initial) in &engine.departure_log {
        let d = 1.0 / lv.pow(l);
        dirt_all += d;
        if initial {
            dirt[l as usize] += d;
            deps[l as usize] += 1;
        }
    }
    let mut cost = vec![0.0; top as usize + 1];
    let mut sets = vec![0u64; top as usize + 1];
    for c in &engine.coverers {
        if c.l_cov >= 0 {
            cost[c.l_cov as usize] += c.cost;
            sets[c.l_cov as usize] += 1;
        }
    }
    let mut elems = vec![0u64; top as usize + 1];
    for it in &engine.items {
        if it.active && it.level >= 0 {
            elems[it.level as usize] += 1;
        }
    }
    for j in 0..=top {
        let i = j as usize;
        let checks = [
            (dirt[i], ledger.dirt(j)),
            (deps[i] as f64, ledger.departures(j) as f64),
            (cost[i], ledger.cost(j)),
            (sets[i] as f64, ledger.sets(j) as f64),
            (elems[i] as f64, ledger.elements(j) as f64),
            (engine.items_at[i].len() as f64, elems[i] as f64),
            (engine.sets_at[i].len() as f64, sets[i] as f64),
            (ledger.departures(j) as f64, libm::round(ledger.dirt(j) * lv.pow(j))),
        ];
        for (want, got) in checks {
            if drift(want, got) {
                push(ViolationKind::LedgerDrift, vec![], Some(j), got, want);
            }
        }
    }
    let d_sum: f64 = dirt.iter().sum();
    let c_sum: f64 = cost.iter().sum();
    if drift(d_sum, ledger.total_dirt()) {
        push(ViolationKind::LedgerDrift, vec![], None, ledger.total_dirt(), d_sum);
    }
    if drift(c_sum, ledger.total_cost()) {
        push(ViolationKind::LedgerDrift, vec![], None, ledger.total_cost(), c_sum);
    }

    // Invariant 2, vacuous with an empty cover.
    let limit = eps / lv.beta() * c_sum;
    if c_sum > 0.0 && d_sum >= limit {
        push(ViolationKind::Inv2, vec![], None, d_sum, limit);
    }

    ViolationReport { step: engine.step_clock, violations: out, dirt_all_departures: dirt_all }
}
