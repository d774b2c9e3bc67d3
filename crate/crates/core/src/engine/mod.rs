//! The dynamic cover engine.
//!
//! One generic core serves both problems. A *coverer* is a set (or a vertex
//! acting as dominator) and an *item* is an element (or a vertex that must be
//! dominated). Incidences link coverers to the items they may cover: static
//! for set cover, following edge updates for dominating set.
//!
//! Each update applies its primary moves, then runs the rise cascade: the
//! highest positive-dirty set among those whose counters were refreshed is
//! rebuilt one level above the dirty level, until no refreshed set is
//! positive dirty. After the cascade, a global reset runs if one is due,
//! otherwise a partial reset runs if the cover is dirty.

mod half_critical;
mod setcover;

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::counters::{highest_pd_candidate, Candidate, SetCounters, ZoneTable};
use crate::greedy::{greedy_cover, CandidateSet, ResidualInstance};
use crate::ledger::{LedgerEvent, LevelLedger};
use crate::levels::Levels;
use crate::{Error, FaultKind};

pub use half_critical::{find_highest_half_critical, naive_highest_half_critical, SearchOutcome};
pub use setcover::{SetCoverEngine, SetSystem};

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineOptions {
    /// Refresh every cumulative counter on every change instead of following
    /// the zone schedule.
    pub exact_counters: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateOp {
    Insert(u32),
    Delete(u32),
    InsertEdge(u32, u32),
    DeleteEdge(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResetKind {
    Partial,
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResetReport {
    pub kind: ResetKind,
    /// Highest reset level; `None` for a global reset.
    pub i_crit: Option<i32>,
    /// Items re-covered.
    pub u_size: u32,
    /// Candidate coverers offered to greedy.
    pub f_size: u32,
    /// `(set, level, members)` for each pair greedy created.
    pub pairs_created: Vec<(u32, i32, u32)>,
    pub evicted: Vec<u32>,
}

/// What one update did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: u64,
    pub op: UpdateOp,
    /// Item level changes, counting each activation, deactivation and reset
    /// re-cover.
    pub level_changes: u64,
    /// Coverers joining or leaving the cover.
    pub recourse: u64,
    pub rises: u32,
    /// Rises on sets not touched by an earlier rise in the same update.
    pub rise_roots: u32,
    /// Positive-dirty candidates dropped because the exact count no longer
    /// cleared the threshold.
    pub stale_skips: u32,
    /// Dominating set only: items moved to keep no dominator above their level.
    pub inv3_moves: u32,
    /// Items pulled into a pair that opened above them (fallback opens, and
    /// reset pairs above the reset range).
    pub pulled: u32,
    pub resets: Vec<ResetReport>,
    pub cover_cost: f64,
    pub cover_size: u32,
}

/// Running sums over every update so far.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Totals {
    pub ops: u64,
    pub level_changes: u64,
    pub recourse: u64,
    pub rises: u64,
    pub stale_skips: u64,
    pub pulled: u64,
    pub partial_resets: u64,
    pub global_resets: u64,
    pub max_rise_roots: u32,
    pub max_rises: u32,
    pub max_inv3_moves: u32,
    pub max_cover_size: u32,
    pub peak_level: i32,
}

/// A pair as created: recorded so freshness can be checked after the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreshPair {
    pub set: u32,
    pub level: i32,
    pub size: u32,
}

/// One pair of the current cover.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverEntry {
    pub set: u32,
    pub cost: f64,
    pub level: i32,
    /// Sorted.
    pub members: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Problem {
    SetCover,
    DomSet,
}

#[derive(Debug, Clone)]
pub(crate) struct Incidence {
    pub coverer: u32,
    pub item: u32,
    bucket: u32,
    slot: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Item {
    pub active: bool,
    pub level: i32,
    pub owner: u32,
    pub initial: bool,
    cov_slot: u32,
    reg_slot: u32,
    /// Incidence ids, one per coverer that can take this item.
    pub incs: Vec<u32>,
}

#[derive(Debug, Clone)]
pub(crate) struct Coverer {
    pub cost: f64,
    pub l_cov: i32,
    pub cov: Vec<u32>,
    reg_slot: u32,
    pub counters: SetCounters,
    /// Incidence ids by level: 0 below the window, `p + 1` for window
    /// position `p`, last above the window.
    buckets: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Default)]
struct StepAccum {
    level_changes: u64,
    recourse: u64,
    rises: u32,
    rise_roots: u32,
    stale_skips: u32,
    inv3_moves: u32,
    pulled: u32,
    resets: Vec<ResetReport>,
}

/// Shared engine state. Reached through [`SetCoverEngine`] or
/// [`crate::DomSetEngine`]; exposed read-only for the oracle.
#[derive(Debug, Clone)]
pub struct Engine {
    pub(crate) levels: Levels,
    pub(crate) problem: Problem,
    pub(crate) options: EngineOptions,
    pub(crate) coverers: Vec<Coverer>,
    pub(crate) items: Vec<Item>,
    pub(crate) incs: Vec<Incidence>,
    free_incs: Vec<u32>,
    pub(crate) items_at: Vec<Vec<u32>>,
    pub(crate) sets_at: Vec<Vec<u32>>,
    pub(crate) ledger: LevelLedger,
    /// `(level, initial)` for every departure since the last reset that
    /// cleared its level.
    pub(crate) departure_log: Vec<(i32, bool)>,
    pub(crate) fresh: Vec<FreshPair>,
    pub(crate) step_clock: u64,
    pub(crate) next_global: u64,
    pub(crate) n_active: u32,
    touched: Vec<u32>,
    touch_end: Vec<i64>,
    touched_by_rise: Vec<bool>,
    in_rise: bool,
    step: StepAccum,
    totals: Totals,
    scratch: Vec<u32>,
    skip_cascade_at: Option<u64>,
}

impl Engine {
    pub(crate) fn new(levels: Levels, problem: Problem, costs: &[f64], n_items: usize, options: EngineOptions) -> Self {
        let mut tables: BTreeMap<usize, Arc<ZoneTable>> = BTreeMap::new();
        let coverers = costs
            .iter()
            .map(|&cost| {
                let w = levels.relevant_window(cost);
                let len = (w.1 - w.0 + 1) as usize;
                let table = tables
                    .entry(len)
                    .or_insert_with(|| {
                        Arc::new(if options.exact_counters {
                            ZoneTable::exact(len)
                        } else {
                            ZoneTable::new(len, levels.eps())
                        })
                    })
                    .clone();
                Coverer {
                    cost,
                    l_cov: -1,
                    cov: Vec::new(),
                    reg_slot: NONE,
                    counters: SetCounters::new(w, table),
                    buckets: vec![Vec::new(); len + 2],
                }
            })
            .collect::<Vec<_>>();
        let items = (0..n_items)
            .map(|_| Item {
                active: false,
                level: -1,
                owner: NONE,
                initial: false,
                cov_slot: NONE,
                reg_slot: NONE,
                incs: Vec::new(),
            })
            .collect();
        let top = levels.span();
        let m = coverers.len();
        Engine {
            ledger: LevelLedger::new(top),
            items_at: vec![Vec::new(); top as usize + 1],
            sets_at: vec![Vec::new(); top as usize + 1],
            levels,
            problem,
            options,
            coverers,
            items,
            incs: Vec::new(),
            free_incs: Vec::new(),
            departure_log: Vec::new(),
            fresh: Vec::new(),
            step_clock: 0,
            next_global: 1,
            n_active: 0,
            touched: Vec::new(),
            touch_end: vec![-1; m],
            touched_by_rise: vec![false; m],
            in_rise: false,
            step: StepAccum::default(),
            totals: Totals::default(),
            scratch: vec![NONE; m],
            skip_cascade_at: None,
        }
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    pub fn options(&self) -> EngineOptions {
        self.options
    }

    pub fn ledger(&self) -> &LevelLedger {
        &self.ledger
    }

    pub fn totals(&self) -> Totals {
        self.totals
    }

    /// Updates applied so far.
    pub fn step_clock(&self) -> u64 {
        self.step_clock
    }

    pub fn next_global_reset(&self) -> u64 {
        self.next_global
    }

    pub fn n_active(&self) -> u32 {
        self.n_active
    }

    pub fn num_coverers(&self) -> usize {
        self.coverers.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn covering_level(&self, s: u32) -> i32 {
        self.coverers[s as usize].l_cov
    }

    pub fn item_level(&self, x: u32) -> Option<i32> {
        let it = &self.items[x as usize];
        it.active.then_some(it.level)
    }

    pub fn owner(&self, x: u32) -> Option<u32> {
        let it = &self.items[x as usize];
        (it.active && it.owner != NONE).then_some(it.owner)
    }

    pub fn counters(&self, s: u32) -> &SetCounters {
        &self.coverers[s as usize].counters
    }

    pub fn cost(&self, s: u32) -> f64 {
        self.coverers[s as usize].cost
    }

    /// Coverers that may take item `x`, in incidence order.
    pub fn coverers_of(&self, x: u32) -> impl Iterator<Item = u32> + '_ {
        self.items[x as usize].incs.iter().map(move |&i| self.incs[i as usize].coverer)
    }

    /// Pairs created during the last update, with their size at creation.
    pub fn fresh_pairs(&self) -> &[FreshPair] {
        &self.fresh
    }

    pub fn departure_log(&self) -> &[(i32, bool)] {
        &self.departure_log
    }

    /// Sum of counter increments over all coverers.
    pub fn counter_changes(&self) -> u64 {
        self.coverers.iter().map(|c| c.counters.changes()).sum()
    }

    /// Sum of refreshed cumulative entries over all coverers.
    pub fn counter_refreshes(&self) -> u64 {
        self.coverers.iter().map(|c| c.counters.refreshed()).sum()
    }

    pub fn cover(&self) -> Vec<CoverEntry> {
        let mut out: Vec<CoverEntry> = self
            .coverers
            .iter()
            .enumerate()
            .filter(|(_, c)| c.l_cov >= 0)
            .map(|(s, c)| {
                let mut members = c.cov.clone();
                members.sort_unstable();
                CoverEntry { set: s as u32, cost: c.cost, level: c.l_cov, members }
            })
            .collect();
        out.sort_by_key(|e| e.set);
        out
    }

    pub fn cover_cost(&self) -> f64 {
        self.ledger.total_cost()
    }

    pub fn cover_size(&self) -> u32 {
        self.sets_at.iter().map(|s| s.len() as u32).sum()
    }

    /// Test hook: skip the rise cascade of the update that will carry this
    /// step number, leaving any positive-dirty set in place.
    #[doc(hidden)]
    pub fn inject_skip_cascade(&mut self, step: u64) {
        self.skip_cascade_at = Some(step);
    }

    /// Test hook: skew one cumulative counter entry.
    #[doc(hidden)]
    pub fn inject_counter_skew(&mut self, s: u32, j: i32, delta: i64) {
        self.coverers[s as usize].counters.skew_cumulative(j, delta);
    }

    // ---- incidences and counters ----

    fn bucket_index(c: &Coverer, level: i32) -> usize {
        let (j_min, j_max) = c.counters.window();
        if level < j_min {
            0
        } else if level > j_max {
            c.buckets.len() - 1
        } else {
            (level - j_min) as usize + 1
        }
    }

    fn unplace(&mut self, inc: u32) {
        let (s, b, slot) = {
            let i = &self.incs[inc as usize];
            (i.coverer as usize, i.bucket as usize, i.slot as usize)
        };
        let bucket = &mut self.coverers[s].buckets[b];
        bucket.swap_remove(slot);
        if slot < bucket.len() {
            let moved = bucket[slot];
            self.incs[moved as usize].slot = slot as u32;
        }
        let i = &mut self.incs[inc as usize];
        i.bucket = NONE;
        i.slot = NONE;
    }

    fn place(&mut self, inc: u32, level: i32) {
        let s = self.incs[inc as usize].coverer as usize;
        let c = &mut self.coverers[s];
        let b = Self::bucket_index(c, level);
        c.buckets[b].push(inc);
        let slot = c.buckets[b].len() - 1;
        let i = &mut self.incs[inc as usize];
        i.bucket = b as u32;
        i.slot = slot as u32;
    }

    fn touch(&mut self, s: u32, end: usize) {
        let k = s as usize;
        if self.touch_end[k] < 0 {
            self.touched.push(s);
        }
        self.touch_end[k] = self.touch_end[k].max(end as i64);
        if self.in_rise {
            self.touched_by_rise[k] = true;
        }
    }

    /// Move one incidence between level buckets and tell the counters.
    fn recount_incidence(&mut self, inc: u32, old: Option<i32>, new: Option<i32>) {
        if old.is_some() {
            self.unplace(inc);
        }
        if let Some(l) = new {
            self.place(inc, l);
        }
        let s = self.incs[inc as usize].coverer;
        if let Some(end) = self.coverers[s as usize].counters.record(old, new) {
            self.touch(s, end);
        }
    }

    /// Item `x` moved from `old` to `new` (either may be `None` for
    /// activation or deactivation): update every coverer that counts it.
    fn recount(&mut self, x: u32, old: Option<i32>, new: Option<i32>) {
        for k in 0..self.items[x as usize].incs.len() {
            let inc = self.items[x as usize].incs[k];
            self.recount_incidence(inc, old, new);
        }
    }

    pub(crate) fn add_incidence(&mut self, coverer: u32, item: u32) -> u32 {
        let inc = Incidence { coverer, item, bucket: NONE, slot: NONE };
        let id = match self.free_incs.pop() {
            Some(id) => {
                self.incs[id as usize] = inc;
                id
            }
            None => {
                self.incs.push(inc);
                (self.incs.len() - 1) as u32
            }
        };
        self.items[item as usize].incs.push(id);
        let it = &self.items[item as usize];
        if it.active {
            let l = it.level;
            self.recount_incidence(id, None, Some(l));
        }
        id
    }

    pub(crate) fn find_incidence(&self, coverer: u32, item: u32) -> Option<u32> {
        self.items[item as usize].incs.iter().copied().find(|&i| self.incs[i as usize].coverer == coverer)
    }

    pub(crate) fn remove_incidence(&mut self, inc: u32) {
        let item = self.incs[inc as usize].item;
        let it = &self.items[item as usize];
        if it.active {
            let l = it.level;
            self.recount_incidence(inc, Some(l), None);
        }
        let incs = &mut self.items[item as usize].incs;
        let pos = incs.iter().position(|&i| i == inc).expect("incidence listed on its item");
        incs.remove(pos);
        self.free_incs.push(inc);
    }

    // ---- pairs ----

    fn book(&mut self, event: LedgerEvent) -> Result<(), Error> {
        self.ledger.apply(&self.levels, event)
    }

    /// Item `x` joins the pair of `s` at the pair's level.
    fn attach(&mut self, x: u32, s: u32, initial: bool) -> Result<(), Error> {
        let level = self.coverers[s as usize].l_cov;
        debug_assert!(level >= 0);
        let c = &mut self.coverers[s as usize];
        c.cov.push(x);
        let cov_slot = (c.cov.len() - 1) as u32;
        let reg = &mut self.items_at[level as usize];
        reg.push(x);
        let reg_slot = (reg.len() - 1) as u32;
        let it = &mut self.items[x as usize];
        it.owner = s;
        it.level = level;
        it.initial = initial;
        it.cov_slot = cov_slot;
        it.reg_slot = reg_slot;
        self.book(LedgerEvent::Arrival { level })
    }

    /// Item `x` leaves its pair. `dirt` is false for resets, whose levels
    /// are wiped anyway.
    fn detach(&mut self, x: u32, dirt: bool) -> Result<(), Error> {
        let (s, level, initial, cov_slot, reg_slot) = {
            let it = &self.items[x as usize];
            (it.owner, it.level, it.initial, it.cov_slot as usize, it.reg_slot as usize)
        };
        let cov = &mut self.coverers[s as usize].cov;
        cov.swap_remove(cov_slot);
        if cov_slot < cov.len() {
            let moved = cov[cov_slot];
            self.items[moved as usize].cov_slot = cov_slot as u32;
        }
        let reg = &mut self.items_at[level as usize];
        reg.swap_remove(reg_slot);
        if reg_slot < reg.len() {
            let moved = reg[reg_slot];
            self.items[moved as usize].reg_slot = reg_slot as u32;
        }
        let it = &mut self.items[x as usize];
        it.owner = NONE;
        it.cov_slot = NONE;
        it.reg_slot = NONE;
        if dirt {
            self.departure_log.push((level, initial));
        }
        self.book(LedgerEvent::Departure { level, initial: initial && dirt })
    }

    fn register_set(&mut self, s: u32, level: i32) -> Result<(), Error> {
        let reg = &mut self.sets_at[level as usize];
        reg.push(s);
        let c = &mut self.coverers[s as usize];
        c.reg_slot = (reg.len() - 1) as u32;
        c.l_cov = level;
        let cost = c.cost;
        self.totals.peak_level = self.totals.peak_level.max(level);
        self.book(LedgerEvent::SetEnter { level, cost })
    }

    fn unregister_set(&mut self, s: u32) -> Result<(), Error> {
        let (level, slot, cost) = {
            let c = &self.coverers[s as usize];
            (c.l_cov, c.reg_slot as usize, c.cost)
        };
        let reg = &mut self.sets_at[level as usize];
        reg.swap_remove(slot);
        if slot < reg.len() {
            let moved = reg[slot];
            self.coverers[moved as usize].reg_slot = slot as u32;
        }
        let c = &mut self.coverers[s as usize];
        c.l_cov = -1;
        c.reg_slot = NONE;
        self.book(LedgerEvent::SetLeave { level, cost })
    }

    /// Put `s` into the cover at `level`.
    fn open(&mut self, s: u32, level: i32) -> Result<(), Error> {
        debug_assert!(self.coverers[s as usize].l_cov < 0);
        self.step.recourse += 1;
        self.register_set(s, level)
    }

    /// Take `s` out of the cover. Its pair must be empty.
    fn close(&mut self, s: u32) -> Result<(), Error> {
        debug_assert!(self.coverers[s as usize].cov.is_empty());
        self.step.recourse += 1;
        self.unregister_set(s)
    }

    /// Highest covering coverer of `x`, ties to the lowest id.
    pub(crate) fn best_covering(&self, x: u32) -> Option<u32> {
        let mut best: Option<(i32, u32)> = None;
        for s in self.coverers_of(x) {
            let l = self.coverers[s as usize].l_cov;
            if l < 0 {
                continue;
            }
            best = match best {
                Some((bl, bs)) if bl > l || (bl == l && bs < s) => Some((bl, bs)),
                _ => Some((l, s)),
            };
        }
        best.map(|(_, s)| s)
    }

    /// Open `s` at `floor(log(1/c))` holding `x` alone, as an initial member.
    pub(crate) fn open_singleton(&mut self, s: u32, x: u32) -> Result<(), Error> {
        let level = self.levels.level_of_ratio(1, self.coverers[s as usize].cost)?;
        self.open(s, level)?;
        self.attach(x, s, true)?;
        self.fresh.push(FreshPair { set: s, level, size: 1 });
        Ok(())
    }

    // ---- item moves used by the facades ----

    /// Activate `x` and place it: the highest covering coverer takes it, or
    /// `fallback` opens a new pair.
    pub(crate) fn activate(&mut self, x: u32, fallback: u32) -> Result<(), Error> {
        self.items[x as usize].active = true;
        self.n_active += 1;
        let opened = match self.best_covering(x) {
            Some(s) => {
                self.attach(x, s, false)?;
                false
            }
            None => {
                self.open_singleton(fallback, x)?;
                true
            }
        };
        let l = self.items[x as usize].level;
        self.recount(x, None, Some(l));
        self.step.level_changes += 1;
        if opened {
            self.pull_below(fallback)?;
        }
        Ok(())
    }

    pub(crate) fn deactivate(&mut self, x: u32) -> Result<(), Error> {
        let old = self.items[x as usize].level;
        self.detach(x, true)?;
        self.recount(x, Some(old), None);
        let it = &mut self.items[x as usize];
        it.active = false;
        it.level = -1;
        self.n_active -= 1;
        self.step.level_changes += 1;
        Ok(())
    }

    /// Move active `x` into the pair of `s`.
    pub(crate) fn move_to(&mut self, x: u32, s: u32) -> Result<(), Error> {
        let old = self.items[x as usize].level;
        self.detach(x, true)?;
        self.attach(x, s, false)?;
        let new = self.items[x as usize].level;
        self.recount(x, Some(old), Some(new));
        self.step.level_changes += 1;
        Ok(())
    }

    /// Detach active `x` and give it to its highest covering coverer, or a
    /// new singleton pair of `fallback`.
    pub(crate) fn rehome(&mut self, x: u32, fallback: u32) -> Result<(), Error> {
        let old = self.items[x as usize].level;
        self.detach(x, true)?;
        let opened = match self.best_covering(x) {
            Some(s) => {
                self.attach(x, s, false)?;
                false
            }
            None => {
                self.open_singleton(fallback, x)?;
                true
            }
        };
        let new = self.items[x as usize].level;
        self.recount(x, Some(old), Some(new));
        self.step.level_changes += 1;
        if opened {
            self.pull_below(fallback)?;
        }
        Ok(())
    }

    /// A pair just opened at `floor(log(1/c))` can sit one level above items
    /// it may cover (no positive-dirty level forbids that). Move those items
    /// in, as an edge insertion would.
    fn pull_below(&mut self, s: u32) -> Result<(), Error> {
        let c = &self.coverers[s as usize];
        let last = Self::bucket_index(c, c.l_cov - 1);
        let movers: Vec<u32> = c.buckets[..=last].iter().flatten().map(|&inc| self.incs[inc as usize].item).collect();
        for x in movers {
            self.move_to(x, s)?;
            self.step.pulled += 1;
        }
        Ok(())
    }

    pub(crate) fn refresh_all(&mut self, s: u32) {
        let end = self.coverers[s as usize].counters.refresh_all();
        self.touch(s, end);
    }

    pub(crate) fn count_inv3_move(&mut self) {
        self.step.inv3_moves += 1;
    }

    // ---- update framing ----

    pub(crate) fn begin_step(&mut self) {
        for &s in &self.touched {
            self.touch_end[s as usize] = -1;
            self.touched_by_rise[s as usize] = false;
        }
        self.touched.clear();
        self.fresh.clear();
        self.step = StepAccum::default();
    }

    pub(crate) fn finish_step(&mut self, op: UpdateOp) -> Result<StepReport, Error> {
        if self.skip_cascade_at != Some(self.step_clock + 1) {
            self.cascade()?;
        }
        self.step_clock += 1;
        if self.step_clock >= self.next_global {
            let r = self.reset(None)?;
            self.step.resets.push(r);
            self.next_global = self.step_clock + u64::from(self.n_active.max(1));
        } else if let Some(r) = self.maybe_partial_reset()? {
            self.step.resets.push(r);
        }
        let step = core::mem::take(&mut self.step);
        let report = StepReport {
            step: self.step_clock,
            op,
            level_changes: step.level_changes,
            recourse: step.recourse,
            rises: step.rises,
            rise_roots: step.rise_roots,
            stale_skips: step.stale_skips,
            inv3_moves: step.inv3_moves,
            pulled: step.pulled,
            resets: step.resets,
            cover_cost: self.cover_cost(),
            cover_size: self.cover_size(),
        };
        let t = &mut self.totals;
        t.ops += 1;
        t.level_changes += report.level_changes;
        t.recourse += report.recourse;
        t.rises += u64::from(report.rises);
        t.stale_skips += u64::from(report.stale_skips);
        t.pulled += u64::from(report.pulled);
        for r in &report.resets {
            match r.kind {
                ResetKind::Partial => t.partial_resets += 1,
                ResetKind::Global => t.global_resets += 1,
            }
        }
        t.max_rise_roots = t.max_rise_roots.max(report.rise_roots);
        t.max_rises = t.max_rises.max(report.rises);
        t.max_inv3_moves = t.max_inv3_moves.max(report.inv3_moves);
        t.max_cover_size = t.max_cover_size.max(report.cover_size);
        Ok(report)
    }

    /// Reset bookkeeping after building the initial state so construction
    /// does not show up in the first update's report.
    pub(crate) fn settle(&mut self) {
        self.begin_step();
    }

    // ---- cascade ----

    fn cascade(&mut self) -> Result<(), Error> {
        loop {
            let candidates = self.touched.iter().map(|&s| {
                let c = &self.coverers[s as usize];
                Candidate {
                    set: s,
                    counters: &c.counters,
                    prefix_end: self.touch_end[s as usize] as usize,
                    l_cov: c.l_cov,
                    cost: c.cost,
                }
            });
            let Some((s, j)) = highest_pd_candidate(&self.levels, candidates) else {
                return Ok(());
            };
            let c = &self.coverers[s as usize];
            let exact = c.counters.exact_below(j + 1);
            if !self.levels.reaches(exact as f64, c.cost, j + 1) {
                self.step.stale_skips += 1;
                self.refresh_all(s);
                continue;
            }
            if !self.touched_by_rise[s as usize] {
                self.step.rise_roots += 1;
                if self.problem == Problem::SetCover && self.step.rise_roots > 1 {
                    return Err(Error::Fault(FaultKind::TooManyRiseRoots));
                }
            }
            self.local_rise(s, j + 1)?;
        }
    }

    /// Rebuild the pair of `s` at `target` from every item of `s` below
    /// `target`.
    fn local_rise(&mut self, s: u32, target: i32) -> Result<(), Error> {
        let c = &self.coverers[s as usize];
        let last = Self::bucket_index(c, target - 1);
        let gathered: Vec<u32> = c.buckets[..=last].iter().flatten().map(|&inc| self.incs[inc as usize].item).collect();
        let mut old_levels = Vec::with_capacity(gathered.len());
        for &x in &gathered {
            old_levels.push(self.items[x as usize].level);
            self.detach(x, true)?;
        }
        debug_assert!(self.coverers[s as usize].cov.is_empty(), "old pair must empty out on a rise");
        if self.coverers[s as usize].l_cov >= 0 {
            self.unregister_set(s)?;
            self.register_set(s, target)?;
        } else {
            self.open(s, target)?;
        }
        for &x in &gathered {
            self.attach(x, s, true)?;
        }
        self.in_rise = true;
        for (&x, &old) in gathered.iter().zip(&old_levels) {
            self.recount(x, Some(old), Some(target));
        }
        self.in_rise = false;
        self.step.level_changes += gathered.len() as u64;
        self.step.rises += 1;
        self.fresh.push(FreshPair { set: s, level: target, size: gathered.len() as u32 });
        Ok(())
    }

    // ---- resets ----

    fn maybe_partial_reset(&mut self) -> Result<Option<ResetReport>, Error> {
        if !self.ledger.is_dirty(&self.levels) {
            return Ok(None);
        }
        let b = self.ledger.lowest_set_level().expect("dirty implies a covering set");
        let highest_item = self.items_at.iter().rposition(|r| !r.is_empty()).unwrap_or(0) as i32;
        let highest = self.ledger.highest_set_level().unwrap_or(b).max(highest_item);
        let u = (b + self.levels.reset_depth()).max(highest).min(self.ledger.top());
        let factor = self.levels.eps() / (2.0 * self.levels.beta());
        let found =
            find_highest_half_critical(self.ledger.dirt_levels(), self.ledger.cost_levels(), b, u, factor).level;
        let i_crit = found.ok_or(Error::Fault(FaultKind::NoHalfCriticalLevel))?;
        self.reset(Some(i_crit)).map(Some)
    }

    /// Re-cover every item at a level `<= i_crit` (everything when `None`)
    /// with static greedy, after evicting every covering set up to that level.
    fn reset(&mut self, i_crit: Option<i32>) -> Result<ResetReport, Error> {
        let upto = i_crit.unwrap_or(self.ledger.top());
        let mut u: Vec<u32> = self.items_at[..=upto as usize].concat();
        u.sort_unstable();
        let mut evicted: Vec<u32> = self.sets_at[..=upto as usize].concat();
        evicted.sort_unstable();
        let old_levels: Vec<i32> = u.iter().map(|&x| self.items[x as usize].level).collect();
        for &x in &u {
            self.detach(x, false)?;
        }
        for &s in &evicted {
            self.close(s)?;
        }
        self.ledger.clear_dirt_through(upto);
        self.departure_log.retain(|&(l, _)| l > upto);

        // Candidates: every coverer of a reset item that is now out of the
        // cover, i.e. was covering at or below `upto` or not at all.
        let mut ids: Vec<u32> = Vec::new();
        for &x in &u {
            for k in 0..self.items[x as usize].incs.len() {
                let s = self.incs[self.items[x as usize].incs[k] as usize].coverer;
                if self.coverers[s as usize].l_cov < 0 && self.scratch[s as usize] == NONE {
                    self.scratch[s as usize] = 0;
                    ids.push(s);
                }
            }
        }
        ids.sort_unstable();
        for (k, &s) in ids.iter().enumerate() {
            self.scratch[s as usize] = k as u32;
        }
        let mut sets: Vec<CandidateSet> = ids
            .iter()
            .map(|&s| CandidateSet { id: s, cost: self.coverers[s as usize].cost, members: Vec::new() })
            .collect();
        for (local, &x) in u.iter().enumerate() {
            for &inc in &self.items[x as usize].incs {
                let s = self.incs[inc as usize].coverer;
                let k = self.scratch[s as usize];
                if k != NONE {
                    sets[k as usize].members.push(local as u32);
                }
            }
        }
        for &s in &ids {
            self.scratch[s as usize] = NONE;
        }
        let f_size = sets.len() as u32;
        let inst = ResidualInstance { items: u.clone(), sets };
        let picks = greedy_cover(&self.levels, &inst)?;
        let mut pairs_created = Vec::with_capacity(picks.len());
        for p in &picks {
            self.open(p.set, p.level)?;
            for &x in &p.members {
                self.attach(x, p.set, true)?;
            }
            pairs_created.push((p.set, p.level, p.members.len() as u32));
            self.fresh.push(FreshPair { set: p.set, level: p.level, size: p.members.len() as u32 });
        }
        for (&x, &old) in u.iter().zip(&old_levels) {
            let new = self.items[x as usize].level;
            self.recount(x, Some(old), Some(new));
        }
        self.step.level_changes += u.len() as u64;
        // Lazy counters can hide a positive-dirty set, which greedy then
        // places above upto + 1, over items it may cover there.
        for p in &picks {
            if p.level > upto + 1 {
                self.pull_below(p.set)?;
            }
        }
        Ok(ResetReport {
            kind: if i_crit.is_some() { ResetKind::Partial } else { ResetKind::Global },
            i_crit,
            u_size: u.len() as u32,
            f_size,
            pairs_created,
            evicted,
        })
    }
}
