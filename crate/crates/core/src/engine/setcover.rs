use alloc::vec::Vec;

use super::{CoverEntry, Engine, EngineOptions, Problem, StepReport, UpdateOp};
use crate::levels::{Levels, Params};
use crate::Error;

/// A static family of weighted sets over elements `0..n_elements`.
#[derive(Debug, Clone, PartialEq)]
pub struct SetSystem {
    n_elements: u32,
    costs: Vec<f64>,
    members: Vec<Vec<u32>>,
    containing: Vec<Vec<u32>>,
}

impl SetSystem {
    /// `sets[i] = (cost, members)`. Members are sorted and deduplicated.
    pub fn new(n_elements: u32, sets: Vec<(f64, Vec<u32>)>) -> Result<Self, Error> {
        let mut costs = Vec::with_capacity(sets.len());
        let mut members = Vec::with_capacity(sets.len());
        let mut containing = alloc::vec![Vec::new(); n_elements as usize];
        for (s, (cost, mut elems)) in sets.into_iter().enumerate() {
            if !(cost > 0.0 && cost <= 1.0) {
                return Err(Error::InvalidParams("set costs must lie in (0, 1]"));
            }
            elems.sort_unstable();
            elems.dedup();
            for &e in &elems {
                if e >= n_elements {
                    return Err(Error::UnknownElement(e));
                }
                containing[e as usize].push(s as u32);
            }
            costs.push(cost);
            members.push(elems);
        }
        Ok(SetSystem { n_elements, costs, members, containing })
    }

    pub fn n_elements(&self) -> u32 {
        self.n_elements
    }

    pub fn n_sets(&self) -> u32 {
        self.costs.len() as u32
    }

    pub fn cost(&self, s: u32) -> f64 {
        self.costs[s as usize]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn members(&self, s: u32) -> &[u32] {
        &self.members[s as usize]
    }

    /// `F_e`, sorted by set id.
    pub fn containing(&self, e: u32) -> &[u32] {
        &self.containing[e as usize]
    }

    /// Largest `|F_e|`.
    pub fn max_frequency(&self) -> u32 {
        self.containing.iter().map(|c| c.len() as u32).max().unwrap_or(0)
    }

    /// Largest over smallest cost, at least 1.
    pub fn cost_ratio(&self) -> f64 {
        let max = self.costs.iter().copied().fold(0.0f64, f64::max);
        let min = self.costs.iter().copied().fold(f64::INFINITY, f64::min);
        if self.costs.is_empty() {
            1.0
        } else {
            (max / min).max(1.0)
        }
    }
}

/// Dynamic set cover over a fixed [`SetSystem`]: elements are inserted and
/// deleted, the cover follows.
#[derive(Debug, Clone)]
pub struct SetCoverEngine {
    engine: Engine,
    system: SetSystem,
}

impl SetCoverEngine {
    pub fn new(system: SetSystem, params: Params, options: EngineOptions) -> Result<Self, Error> {
        if params.n_cap < system.n_elements {
            return Err(Error::InvalidParams("n_cap is below the number of elements"));
        }
        let floor = 1.0 / params.c_ratio;
        if system.costs.iter().any(|&c| c < floor * (1.0 - 1e-12)) {
            return Err(Error::InvalidParams("a set cost is below 1/C"));
        }
        let levels = Levels::new(params);
        let mut engine = Engine::new(levels, Problem::SetCover, &system.costs, system.n_elements as usize, options);
        for e in 0..system.n_elements {
            for &s in system.containing(e) {
                engine.add_incidence(s, e);
            }
        }
        engine.settle();
        Ok(SetCoverEngine { engine, system })
    }

    pub fn system(&self) -> &SetSystem {
        &self.system
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    #[doc(hidden)]
    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn is_active(&self, e: u32) -> bool {
        self.engine.item_level(e).is_some()
    }

    /// Insert element `e`. It joins its highest covering set, or opens the
    /// cheapest set containing it (ties to the lowest id).
    pub fn insert(&mut self, e: u32) -> Result<StepReport, Error> {
        if e >= self.system.n_elements {
            return Err(Error::UnknownElement(e));
        }
        if self.is_active(e) {
            return Err(Error::AlreadyActive(e));
        }
        let f = self.system.containing(e);
        let Some(&cheapest) =
            f.iter().min_by(|&&a, &&b| self.system.cost(a).partial_cmp(&self.system.cost(b)).unwrap().then(a.cmp(&b)))
        else {
            return Err(Error::Uncoverable(e));
        };
        self.engine.begin_step();
        self.engine.activate(e, cheapest)?;
        self.engine.finish_step(UpdateOp::Insert(e))
    }

    /// Delete element `e`. Its set stays in the cover even if it empties.
    pub fn delete(&mut self, e: u32) -> Result<StepReport, Error> {
        if e >= self.system.n_elements {
            return Err(Error::UnknownElement(e));
        }
        if !self.is_active(e) {
            return Err(Error::NotActive(e));
        }
        self.engine.begin_step();
        self.engine.deactivate(e)?;
        self.engine.finish_step(UpdateOp::Delete(e))
    }

    pub fn apply(&mut self, op: UpdateOp) -> Result<StepReport, Error> {
        match op {
            UpdateOp::Insert(e) => self.insert(e),
            UpdateOp::Delete(e) => self.delete(e),
            UpdateOp::InsertEdge(..) | UpdateOp::DeleteEdge(..) => {
                Err(Error::InvalidParams("edge update on a set cover instance"))
            }
        }
    }

    pub fn cover(&self) -> Vec<CoverEntry> {
        self.engine.cover()
    }

    pub fn cover_cost(&self) -> f64 {
        self.engine.cover_cost()
    }

    pub fn active_elements(&self) -> Vec<u32> {
        (0..self.system.n_elements).filter(|&e| self.is_active(e)).collect()
    }
}
