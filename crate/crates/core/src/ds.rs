//! Dynamic dominating set on a fixed vertex set with edge updates.
//!
//! Every vertex is a coverer of its closed neighbourhood and an item that must
//! be dominated. Edges add and remove incidences; the shared engine does the
//! rest.

use alloc::vec::Vec;

use crate::engine::{CoverEntry, Engine, EngineOptions, Problem, StepReport, UpdateOp};
use crate::levels::{Levels, Params};
use crate::Error;

#[derive(Debug, Clone)]
pub struct DomSetEngine {
    engine: Engine,
    max_degree: u32,
    degree: Vec<u32>,
}

impl DomSetEngine {
    /// Start from the edgeless graph with every vertex dominating itself at
    /// `floor(log(1/c(v)))`. `params.n_cap` must be at least the vertex count.
    pub fn new(costs: Vec<f64>, max_degree: u32, params: Params, options: EngineOptions) -> Result<Self, Error> {
        let n = costs.len();
        if (params.n_cap as usize) < n {
            return Err(Error::InvalidParams("n_cap is below the number of vertices"));
        }
        let floor = 1.0 / params.c_ratio;
        if costs.iter().any(|&c| !(c > 0.0 && c <= 1.0) || c < floor * (1.0 - 1e-12)) {
            return Err(Error::InvalidParams("vertex costs must lie in [1/C, 1]"));
        }
        let mut engine = Engine::new(Levels::new(params), Problem::DomSet, &costs, n, options);
        for v in 0..n as u32 {
            engine.add_incidence(v, v);
        }
        for v in 0..n as u32 {
            engine.activate(v, v)?;
        }
        engine.next_global = n as u64;
        engine.settle();
        Ok(DomSetEngine { engine, max_degree, degree: alloc::vec![0; n] })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    #[doc(hidden)]
    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn n_vertices(&self) -> u32 {
        self.degree.len() as u32
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.degree[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        u != v && self.engine.find_incidence(u, v).is_some()
    }

    /// Neighbours of `v`, excluding `v`.
    pub fn neighbors(&self, v: u32) -> Vec<u32> {
        self.engine.coverers_of(v).filter(|&w| w != v).collect()
    }

    /// Level of the pair `v` heads, -1 when `v` is not dominating.
    pub fn dom_level(&self, v: u32) -> i32 {
        self.engine.covering_level(v)
    }

    /// Level of the pair dominating `v`.
    pub fn level(&self, v: u32) -> i32 {
        self.engine.item_level(v).expect("every vertex is dominated")
    }

    pub fn dominator(&self, v: u32) -> u32 {
        self.engine.owner(v).expect("every vertex is dominated")
    }

    fn check_pair(&self, u: u32, v: u32) -> Result<(), Error> {
        let n = self.n_vertices();
        for x in [u, v] {
            if x >= n {
                return Err(Error::UnknownVertex(x));
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(())
    }

    pub fn insert_edge(&mut self, u: u32, v: u32) -> Result<StepReport, Error> {
        self.check_pair(u, v)?;
        if self.has_edge(u, v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        for x in [u, v] {
            if self.degree[x as usize] >= self.max_degree {
                return Err(Error::DegreeExceeded { vertex: x, max_degree: self.max_degree });
            }
        }
        self.degree[u as usize] += 1;
        self.degree[v as usize] += 1;
        let e = &mut self.engine;
        e.begin_step();
        e.add_incidence(u, v);
        e.add_incidence(v, u);
        let u_over_v = e.covering_level(u) > e.item_level(v).unwrap();
        let v_over_u = e.covering_level(v) > e.item_level(u).unwrap();
        assert!(!(u_over_v && v_over_u), "both endpoints dominate above the other");
        if u_over_v {
            e.move_to(v, u)?;
            e.count_inv3_move();
        } else if v_over_u {
            e.move_to(u, v)?;
            e.count_inv3_move();
        }
        e.finish_step(UpdateOp::InsertEdge(u, v))
    }

    pub fn delete_edge(&mut self, u: u32, v: u32) -> Result<StepReport, Error> {
        self.check_pair(u, v)?;
        let e = &mut self.engine;
        let (Some(uv), Some(vu)) = (e.find_incidence(u, v), e.find_incidence(v, u)) else {
            return Err(Error::MissingEdge(u, v));
        };
        self.degree[u as usize] -= 1;
        self.degree[v as usize] -= 1;
        e.begin_step();
        let v_in_u = e.owner(v) == Some(u);
        let u_in_v = e.owner(u) == Some(v);
        e.remove_incidence(uv);
        e.remove_incidence(vu);
        if v_in_u {
            e.rehome(v, v)?;
            e.refresh_all(u);
        }
        if u_in_v {
            e.rehome(u, u)?;
            e.refresh_all(v);
        }
        e.finish_step(UpdateOp::DeleteEdge(u, v))
    }

    pub fn apply(&mut self, op: UpdateOp) -> Result<StepReport, Error> {
        match op {
            UpdateOp::InsertEdge(u, v) => self.insert_edge(u, v),
            UpdateOp::DeleteEdge(u, v) => self.delete_edge(u, v),
            UpdateOp::Insert(_) | UpdateOp::Delete(_) => {
                Err(Error::InvalidParams("element update on a dominating set instance"))
            }
        }
    }

    pub fn cover(&self) -> Vec<CoverEntry> {
        self.engine.cover()
    }

    pub fn cover_cost(&self) -> f64 {
        self.engine.cover_cost()
    }
}
