//! A slow, exact reimplementation of the dynamic cover built on ordered sets.
//! Every count is recomputed when needed, so its behaviour follows directly
//! from the rules, and an exact-counter engine run must match it step by step.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::naive_bucket_greedy;
use crate::engine::{naive_highest_half_critical, CoverEntry, ResetKind, SetSystem, UpdateOp};
use crate::greedy::{CandidateSet, ResidualInstance};
use crate::levels::{Levels, Params};
use crate::Error;

/// What one reference update did.
#[derive(Debug, Clone, PartialEq)]
pub struct RefStep {
    pub step: u64,
    pub rises: u32,
    /// `(kind, i_crit)` per reset, in order.
    pub resets: Vec<(ResetKind, Option<i32>)>,
}

#[derive(Debug, Clone)]
pub struct ReferenceEngine {
    levels: Levels,
    dom_set: bool,
    cost: Vec<f64>,
    /// Items each coverer may cover.
    reach: Vec<BTreeSet<u32>>,
    /// Coverers of each item.
    coverers: Vec<BTreeSet<u32>>,
    active: Vec<bool>,
    level: Vec<i32>,
    owner: Vec<Option<u32>>,
    initial: Vec<bool>,
    l_cov: Vec<i32>,
    cov: Vec<BTreeSet<u32>>,
    dirt: Vec<f64>,
    step: u64,
    next_global: u64,
    rises: u32,
}

impl ReferenceEngine {
    fn empty(levels: Levels, costs: Vec<f64>, n_items: usize, dom_set: bool) -> Self {
        let m = costs.len();
        let top = levels.span() as usize;
        ReferenceEngine {
            levels,
            dom_set,
            cost: costs,
            reach: vec![BTreeSet::new(); m],
            coverers: vec![BTreeSet::new(); n_items],
            active: vec![false; n_items],
            level: vec![-1; n_items],
            owner: vec![None; n_items],
            initial: vec![false; n_items],
            l_cov: vec![-1; m],
            cov: vec![BTreeSet::new(); m],
            dirt: vec![0.0; top + 1],
            step: 0,
            next_global: 1,
            rises: 0,
        }
    }

    pub fn set_cover(system: &SetSystem, params: Params) -> Self {
        let mut r = Self::empty(Levels::new(params), system.costs().to_vec(), system.n_elements() as usize, false);
        for s in 0..system.n_sets() {
            for &e in system.members(s) {
                r.reach[s as usize].insert(e);
                r.coverers[e as usize].insert(s);
            }
        }
        r
    }

    /// Edgeless graph, every vertex dominating itself.
    pub fn dom_set(costs: Vec<f64>, params: Params) -> Self {
        let n = costs.len();
        let mut r = Self::empty(Levels::new(params), costs, n, true);
        for v in 0..n as u32 {
            r.reach[v as usize].insert(v);
            r.coverers[v as usize].insert(v);
        }
        for v in 0..n as u32 {
            r.active[v as usize] = true;
            r.place_new(v, v).expect("vertex dominates itself");
        }
        r.next_global = n as u64;
        r
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn cover(&self) -> Vec<CoverEntry> {
        (0..self.cost.len())
            .filter(|&s| self.l_cov[s] >= 0)
            .map(|s| CoverEntry {
                set: s as u32,
                cost: self.cost[s],
                level: self.l_cov[s],
                members: self.cov[s].iter().copied().collect(),
            })
            .collect()
    }

    pub fn cover_cost(&self) -> f64 {
        (0..self.cost.len()).filter(|&s| self.l_cov[s] >= 0).map(|s| self.cost[s]).sum()
    }

    pub fn n_active(&self) -> u32 {
        self.active.iter().filter(|&&a| a).count() as u32
    }

    fn leave(&mut self, x: u32, dirt: bool) {
        let s = self.owner[x as usize].take().expect("item has an owner");
        self.cov[s as usize].remove(&x);
        let l = self.level[x as usize];
        if dirt && self.initial[x as usize] {
            self.dirt[l as usize] += 1.0 / self.levels.pow(l);
        }
    }

    fn join(&mut self, x: u32, s: u32, initial: bool) {
        self.cov[s as usize].insert(x);
        self.owner[x as usize] = Some(s);
        self.level[x as usize] = self.l_cov[s as usize];
        self.initial[x as usize] = initial;
    }

    fn best_covering(&self, x: u32) -> Option<u32> {
        // highest level, lowest id among equals
        self.coverers[x as usize]
            .iter()
            .copied()
            .filter(|&s| self.l_cov[s as usize] >= 0)
            .min_by_key(|&s| (-self.l_cov[s as usize], s))
    }

    /// Put unowned `x` into its highest covering coverer, or open `fallback`
    /// around it.
    fn place_new(&mut self, x: u32, fallback: u32) -> Result<(), Error> {
        match self.best_covering(x) {
            Some(s) => self.join(x, s, false),
            None => {
                self.l_cov[fallback as usize] = self.levels.level_of_ratio(1, self.cost[fallback as usize])?;
                self.join(x, fallback, true);
                self.pull_below(fallback);
            }
        }
        Ok(())
    }

    /// Move every item `s` may cover from below its level into its pair.
    fn pull_below(&mut self, s: u32) {
        let l = self.l_cov[s as usize];
        let below: Vec<u32> = self.reach[s as usize]
            .iter()
            .copied()
            .filter(|&y| self.active[y as usize] && self.level[y as usize] < l)
            .collect();
        for y in below {
            self.leave(y, true);
            self.join(y, s, false);
        }
    }

    fn n_below(&self, s: usize, j: i32) -> u64 {
        self.reach[s].iter().filter(|&&x| self.active[x as usize] && self.level[x as usize] < j).count() as u64
    }

    fn highest_pd(&self) -> Option<(u32, i32)> {
        let top = self.levels.span();
        let mut best: Option<(u32, i32)> = None;
        for s in 0..self.cost.len() {
            let low = (self.l_cov[s] + 1).max(0);
            let found = (low..top).rev().find(|&j| self.levels.reaches(self.n_below(s, j) as f64, self.cost[s], j + 1));
            if let Some(j) = found {
                if best.is_none_or(|(_, bj)| j > bj) {
                    best = Some((s as u32, j));
                }
            }
        }
        best
    }

    fn rise(&mut self, s: u32, target: i32) {
        let gathered: Vec<u32> = self.reach[s as usize]
            .iter()
            .copied()
            .filter(|&x| self.active[x as usize] && self.level[x as usize] < target)
            .collect();
        for &x in &gathered {
            self.leave(x, true);
        }
        self.l_cov[s as usize] = target;
        for &x in &gathered {
            self.join(x, s, true);
        }
        self.rises += 1;
    }

    fn level_sums(&self) -> (Vec<f64>, Vec<f64>) {
        let mut cost = vec![0.0; self.dirt.len()];
        for s in 0..self.cost.len() {
            if self.l_cov[s] >= 0 {
                cost[self.l_cov[s] as usize] += self.cost[s];
            }
        }
        (self.dirt.clone(), cost)
    }

    fn reset(&mut self, upto: i32) -> Result<(), Error> {
        let u: Vec<u32> = (0..self.active.len() as u32)
            .filter(|&x| self.active[x as usize] && self.level[x as usize] <= upto)
            .collect();
        for &x in &u {
            self.leave(x, false);
        }
        for s in 0..self.cost.len() {
            if self.l_cov[s] >= 0 && self.l_cov[s] <= upto {
                debug_assert!(self.cov[s].is_empty());
                self.l_cov[s] = -1;
            }
        }
        for d in &mut self.dirt[..=upto as usize] {
            *d = 0.0;
        }
        let mut ids = BTreeSet::new();
        for &x in &u {
            ids.extend(self.coverers[x as usize].iter().copied().filter(|&s| self.l_cov[s as usize] < 0));
        }
        let sets = ids
            .iter()
            .map(|&s| CandidateSet {
                id: s,
                cost: self.cost[s as usize],
                members: u
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| self.reach[s as usize].contains(x))
                    .map(|(k, _)| k as u32)
                    .collect(),
            })
            .collect();
        let picks = naive_bucket_greedy(&self.levels, &ResidualInstance { items: u, sets })?;
        for p in &picks {
            self.l_cov[p.set as usize] = p.level;
            for &x in &p.members {
                self.join(x, p.set, true);
            }
        }
        for p in &picks {
            if p.level > upto + 1 {
                self.pull_below(p.set);
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, op: UpdateOp) -> Result<RefStep, Error> {
        self.rises = 0;
        match op {
            UpdateOp::Insert(e) => {
                if self.dom_set || e as usize >= self.active.len() {
                    return Err(Error::UnknownElement(e));
                }
                if self.active[e as usize] {
                    return Err(Error::AlreadyActive(e));
                }
                let cheapest = self.coverers[e as usize]
                    .iter()
                    .copied()
                    .min_by(|&a, &b| self.cost[a as usize].total_cmp(&self.cost[b as usize]).then(a.cmp(&b)))
                    .ok_or(Error::Uncoverable(e))?;
                self.active[e as usize] = true;
                self.place_new(e, cheapest)?;
            }
            UpdateOp::Delete(e) => {
                if self.dom_set || e as usize >= self.active.len() {
                    return Err(Error::UnknownElement(e));
                }
                if !self.active[e as usize] {
                    return Err(Error::NotActive(e));
                }
                self.leave(e, true);
                self.active[e as usize] = false;
                self.level[e as usize] = -1;
            }
            UpdateOp::InsertEdge(u, v) => {
                if !self.dom_set || u == v || self.reach[u as usize].contains(&v) {
                    return Err(Error::DuplicateEdge(u, v));
                }
                self.reach[u as usize].insert(v);
                self.reach[v as usize].insert(u);
                self.coverers[v as usize].insert(u);
                self.coverers[u as usize].insert(v);
                if self.l_cov[u as usize] > self.level[v as usize] {
                    self.leave(v, true);
                    self.join(v, u, false);
                } else if self.l_cov[v as usize] > self.level[u as usize] {
                    self.leave(u, true);
                    self.join(u, v, false);
                }
            }
            UpdateOp::DeleteEdge(u, v) => {
                if !self.dom_set || u == v || !self.reach[u as usize].contains(&v) {
                    return Err(Error::MissingEdge(u, v));
                }
                let v_in_u = self.owner[v as usize] == Some(u);
                let u_in_v = self.owner[u as usize] == Some(v);
                self.reach[u as usize].remove(&v);
                self.reach[v as usize].remove(&u);
                self.coverers[v as usize].remove(&u);
                self.coverers[u as usize].remove(&v);
                for (x, moved) in [(v, v_in_u), (u, u_in_v)] {
                    if moved {
                        self.leave(x, true);
                        self.place_new(x, x)?;
                    }
                }
            }
        }
        while let Some((s, j)) = self.highest_pd() {
            self.rise(s, j + 1);
        }
        self.step += 1;
        let mut resets = Vec::new();
        if self.step >= self.next_global {
            self.reset(self.levels.span())?;
            resets.push((ResetKind::Global, None));
            self.next_global = self.step + u64::from(self.n_active().max(1));
        } else {
            let (dirt, cost) = self.level_sums();
            let d: f64 = dirt.iter().sum();
            let c: f64 = cost.iter().sum();
            let b = (0..self.cost.len()).filter(|&s| self.l_cov[s] >= 0).map(|s| self.l_cov[s]).min();
            if let Some(b) = b {
                if d >= self.levels.eps() / self.levels.beta() * c {
                    let highest_set = (0..self.cost.len()).map(|s| self.l_cov[s]).max().unwrap_or(-1);
                    let highest_item =
                        (0..self.active.len()).filter(|&x| self.active[x]).map(|x| self.level[x]).max().unwrap_or(0);
                    let u = (b + self.levels.reset_depth()).max(highest_set).max(highest_item).min(self.levels.span());
                    let factor = self.levels.eps() / (2.0 * self.levels.beta());
                    let i_crit = naive_highest_half_critical(&dirt, &cost, b, u, factor)
                        .ok_or(Error::Fault(crate::FaultKind::NoHalfCriticalLevel))?;
                    self.reset(i_crit)?;
                    resets.push((ResetKind::Partial, Some(i_crit)));
                }
            }
        }
        Ok(RefStep { step: self.step, rises: self.rises, resets })
    }
}
