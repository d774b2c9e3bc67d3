//! Deterministic workloads: random churn over set systems and graphs, and the
//! two adversarial constructions that force `Omega(ln n)` amortized level
//! changes.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` and costs use the
//! pure-Rust `libm`, so a seed yields the same bytes on every platform.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Engine, EngineOptions, SetCoverEngine, SetSystem, StepReport, UpdateOp};
use crate::oracle::ReferenceEngine;
use crate::{DomSetEngine, Error, Params};

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    SetCover { n_elements: u32, sets: Vec<(f64, Vec<u32>)> },
    DomSet { costs: Vec<f64>, max_degree: u32 },
}

/// Declared parameters, as written in a workload header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    /// Elements (set cover) or vertices (dominating set).
    pub n: u32,
    /// Sets; equal to `n` for dominating set.
    pub m: u32,
    /// Largest element frequency, or the degree bound.
    pub f: u32,
    pub c_ratio: f64,
    pub eps_hint: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub instance: Instance,
    pub header: Header,
    pub ops: Vec<UpdateOp>,
    pub seed: Option<u64>,
    pub tag: String,
    /// The construction's arithmetic assumes this `beta`.
    pub beta: Option<f64>,
}

/// Either engine behind one interface, for replaying workloads.
#[derive(Debug, Clone)]
pub enum AnyEngine {
    SetCover(SetCoverEngine),
    DomSet(DomSetEngine),
}

impl AnyEngine {
    pub fn apply(&mut self, op: UpdateOp) -> Result<StepReport, Error> {
        match self {
            AnyEngine::SetCover(e) => e.apply(op),
            AnyEngine::DomSet(e) => e.apply(op),
        }
    }

    pub fn engine(&self) -> &Engine {
        match self {
            AnyEngine::SetCover(e) => e.engine(),
            AnyEngine::DomSet(e) => e.engine(),
        }
    }

    #[doc(hidden)]
    pub fn engine_mut(&mut self) -> &mut Engine {
        match self {
            AnyEngine::SetCover(e) => e.engine_mut(),
            AnyEngine::DomSet(e) => e.engine_mut(),
        }
    }
}

impl Workload {
    pub fn is_dom_set(&self) -> bool {
        matches!(self.instance, Instance::DomSet { .. })
    }

    /// Engine parameters with `n_cap = n` and the declared cost ratio.
    pub fn params(&self, eps: f64) -> Result<Params, Error> {
        Params::new(eps, self.header.n.max(1), self.header.c_ratio)
    }

    pub fn params_with_beta(&self, beta: f64) -> Result<Params, Error> {
        Params::with_beta(beta, self.header.n.max(1), self.header.c_ratio)
    }

    pub fn set_system(&self) -> Option<Result<SetSystem, Error>> {
        match &self.instance {
            Instance::SetCover { n_elements, sets } => Some(SetSystem::new(*n_elements, sets.clone())),
            Instance::DomSet { .. } => None,
        }
    }

    pub fn build(&self, params: Params, options: EngineOptions) -> Result<AnyEngine, Error> {
        match &self.instance {
            Instance::SetCover { n_elements, sets } => {
                let sys = SetSystem::new(*n_elements, sets.clone())?;
                Ok(AnyEngine::SetCover(SetCoverEngine::new(sys, params, options)?))
            }
            Instance::DomSet { costs, max_degree } => {
                Ok(AnyEngine::DomSet(DomSetEngine::new(costs.clone(), *max_degree, params, options)?))
            }
        }
    }

    pub fn reference(&self, params: Params) -> Result<ReferenceEngine, Error> {
        match &self.instance {
            Instance::SetCover { n_elements, sets } => {
                let sys = SetSystem::new(*n_elements, sets.clone())?;
                Ok(ReferenceEngine::set_cover(&sys, params))
            }
            Instance::DomSet { costs, .. } => Ok(ReferenceEngine::dom_set(costs.clone(), params)),
        }
    }
}

fn log_uniform_cost(rng: &mut ChaCha8Rng, c_ratio: f64) -> f64 {
    let u: f64 = rng.gen();
    libm::pow(c_ratio, -u)
}

/// An indexed subset of `0..n` with O(1) insert, remove and uniform pick.
struct Pool {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl Pool {
    fn new(n: usize) -> Self {
        Pool { items: Vec::new(), pos: vec![u32::MAX; n] }
    }

    fn insert(&mut self, x: u32) {
        self.pos[x as usize] = self.items.len() as u32;
        self.items.push(x);
    }

    fn remove(&mut self, x: u32) {
        let p = self.pos[x as usize] as usize;
        self.items.swap_remove(p);
        if p < self.items.len() {
            self.pos[self.items[p] as usize] = p as u32;
        }
        self.pos[x as usize] = u32::MAX;
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> u32 {
        self.items[rng.gen_range(0..self.items.len())]
    }
}

/// Random set system: each element lands in `1..=f` distinct sets chosen
/// uniformly, costs are `C^-U` with `U` uniform in `[0, 1)`. Each op deletes
/// a random active element with probability `churn`, otherwise inserts a
/// random inactive one. Without churn the sequence stops once everything is
/// active.
pub fn random_sc(
    n: u32,
    m: u32,
    f: u32,
    c_ratio: f64,
    op_count: usize,
    churn: f64,
    seed: u64,
) -> Result<Workload, Error> {
    if n == 0 || f == 0 || f > m || u64::from(m) * u64::from(f) < u64::from(n) {
        return Err(Error::InvalidParams("random_sc needs n > 0 and 1 <= f <= m with m * f >= n"));
    }
    if c_ratio.is_nan() || c_ratio < 1.0 || !(0.0..=1.0).contains(&churn) {
        return Err(Error::InvalidParams("random_sc needs C >= 1 and churn in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = vec![Vec::new(); m as usize];
    for e in 0..n {
        let k = rng.gen_range(1..=f) as usize;
        for s in sample(&mut rng, m as usize, k).into_iter() {
            members[s].push(e);
        }
    }
    let sets: Vec<(f64, Vec<u32>)> = members
        .into_iter()
        .map(|mut el| {
            el.sort_unstable();
            (log_uniform_cost(&mut rng, c_ratio), el)
        })
        .collect();
    let mut active = Pool::new(n as usize);
    let mut inactive = Pool::new(n as usize);
    for e in 0..n {
        inactive.insert(e);
    }
    let mut ops = Vec::with_capacity(op_count);
    while ops.len() < op_count {
        let delete = !active.items.is_empty() && (inactive.items.is_empty() || rng.gen::<f64>() < churn);
        if delete {
            if churn == 0.0 {
                break;
            }
            let e = active.pick(&mut rng);
            active.remove(e);
            inactive.insert(e);
            ops.push(UpdateOp::Delete(e));
        } else {
            let e = inactive.pick(&mut rng);
            inactive.remove(e);
            active.insert(e);
            ops.push(UpdateOp::Insert(e));
        }
    }
    Ok(Workload {
        instance: Instance::SetCover { n_elements: n, sets },
        header: Header { n, m, f, c_ratio, eps_hint: 0.1 },
        ops,
        seed: Some(seed),
        tag: format!("random_sc churn={churn}"),
        beta: None,
    })
}

/// Random graph updates on `n` vertices with degree bound `max_degree`. Each
/// op deletes a random edge with probability `churn`, otherwise inserts a
/// random new edge between vertices below the bound (64 sampling attempts,
/// falling back to a deletion).
pub fn random_ds(
    n: u32,
    max_degree: u32,
    c_ratio: f64,
    op_count: usize,
    churn: f64,
    seed: u64,
) -> Result<Workload, Error> {
    if n < 2 || max_degree == 0 {
        return Err(Error::InvalidParams("random_ds needs n >= 2 and a positive degree bound"));
    }
    if c_ratio.is_nan() || c_ratio < 1.0 || !(0.0..=1.0).contains(&churn) {
        return Err(Error::InvalidParams("random_ds needs C >= 1 and churn in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs: Vec<f64> = (0..n).map(|_| log_uniform_cost(&mut rng, c_ratio)).collect();
    let mut degree = vec![0u32; n as usize];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut index: alloc::collections::BTreeMap<(u32, u32), usize> = alloc::collections::BTreeMap::new();
    let mut ops = Vec::with_capacity(op_count);
    while ops.len() < op_count {
        let mut inserted = false;
        if edges.is_empty() || rng.gen::<f64>() >= churn {
            for _ in 0..64 {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                let key = (u.min(v), u.max(v));
                if u == v
                    || degree[u as usize] >= max_degree
                    || degree[v as usize] >= max_degree
                    || index.contains_key(&key)
                {
                    continue;
                }
                degree[u as usize] += 1;
                degree[v as usize] += 1;
                index.insert(key, edges.len());
                edges.push(key);
                ops.push(UpdateOp::InsertEdge(u, v));
                inserted = true;
                break;
            }
        }
        if !inserted {
            if edges.is_empty() {
                break;
            }
            let k = rng.gen_range(0..edges.len());
            let (u, v) = edges.swap_remove(k);
            index.remove(&(u, v));
            if k < edges.len() {
                index.insert(edges[k], k);
            }
            degree[u as usize] -= 1;
            degree[v as usize] -= 1;
            // random orientation, so both argument orders get exercised
            ops.push(if rng.gen() { UpdateOp::DeleteEdge(u, v) } else { UpdateOp::DeleteEdge(v, u) });
        }
    }
    Ok(Workload {
        instance: Instance::DomSet { costs, max_degree },
        header: Header { n, m: n, f: max_degree, c_ratio, eps_hint: 0.1 },
        ops,
        seed: Some(seed),
        tag: format!("random_ds churn={churn}"),
        beta: None,
    })
}

/// 1-based indices of the sets (hubs) covering batch `i` in a hierarchy of
/// `layers` layers over `2^total_bits` leaves: layer `k` starts after
/// `2^total_bits - 2^(total_bits - k)` earlier indices and batch `i` maps to
/// `ceil(i / 2^k)` within it.
fn hierarchy(i: u32, total_bits: u32, layers: u32) -> Vec<u32> {
    let full = 1u32 << total_bits;
    (0..layers).map(|k| full - (full >> k) + i.div_ceil(1 << k)).collect()
}

/// The incremental set cover construction on `n = 2^q` elements.
pub fn lb_setcover(q: u32) -> Result<Workload, Error> {
    if !(2..=24).contains(&q) {
        return Err(Error::InvalidParams("lb_setcover needs 2 <= q <= 24"));
    }
    let n = 1u32 << q;
    let m = n / 2 - 1;
    let mut members = vec![Vec::new(); m as usize];
    for i in 1..=n / 4 {
        // q - 1 layers over n/2 set slots
        for s in hierarchy(i, q - 1, q - 1) {
            for e in 4 * (i - 1)..4 * i {
                members[(s - 1) as usize].push(e);
            }
        }
    }
    let sets = members.into_iter().map(|el| (1.0, el)).collect();
    Ok(Workload {
        instance: Instance::SetCover { n_elements: n, sets },
        header: Header { n, m, f: q - 1, c_ratio: 1.0, eps_hint: core::f64::consts::SQRT_2 - 1.0 },
        ops: (0..n).map(UpdateOp::Insert).collect(),
        seed: None,
        tag: format!("lb_setcover q={q}"),
        beta: Some(core::f64::consts::SQRT_2),
    })
}

/// Layout of the decremental dominating set construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomSetLayout {
    pub q: u32,
    /// Hub `v_j` has vertex id `j - 1`.
    pub hubs: u32,
    /// Vertex ids of batch `B_i` at index `i - 1`.
    pub batches: Vec<Vec<u32>>,
}

impl DomSetLayout {
    pub fn new(q: u32) -> Self {
        let hubs = (1u32 << (q + 1)) - 1;
        let mut next = hubs;
        let batches = (1..=1u32 << q)
            .map(|i| {
                let size = i.trailing_zeros() + 3;
                let b: Vec<u32> = (next..next + size).collect();
                next += size;
                b
            })
            .collect();
        DomSetLayout { q, hubs, batches }
    }

    pub fn n_vertices(&self) -> u32 {
        self.hubs + self.batches.iter().map(|b| b.len() as u32).sum::<u32>()
    }

    /// Hub vertex ids adjacent to batch `i` (1-based), lowest layer first.
    pub fn hubs_of(&self, i: u32) -> Vec<u32> {
        hierarchy(i, self.q + 1, self.q + 1).into_iter().map(|j| j - 1).collect()
    }

    /// Batches (1-based) under the hub at `layer` with in-layer index `k`.
    fn batch_range(&self, layer: u32, k: u32) -> core::ops::RangeInclusive<u32> {
        ((k - 1) << layer) + 1..=k << layer
    }

    /// Vertex id of the hub at `layer` with in-layer index `k` (1-based).
    fn hub(&self, layer: u32, k: u32) -> u32 {
        let full = 1u32 << (self.q + 1);
        full - (full >> layer) + k - 1
    }
}

/// The decremental dominating set construction for `q`: all edges are
/// inserted (root first, then the other hubs from the top layer down), then
/// deleted root by root, one layer per round, lower-indexed hubs first, each
/// hub's edges in batch order.
pub fn lb_domset(q: u32) -> Result<Workload, Error> {
    if !(2..=20).contains(&q) {
        return Err(Error::InvalidParams("lb_domset needs 2 <= q <= 20"));
    }
    let layout = DomSetLayout::new(q);
    let n = layout.n_vertices();
    let mut schedule = Vec::new();
    for layer in (0..=q).rev() {
        for k in 1..=1u32 << (q - layer) {
            let hub = layout.hub(layer, k);
            for i in layout.batch_range(layer, k) {
                for &v in &layout.batches[(i - 1) as usize] {
                    schedule.push((hub, v));
                }
            }
        }
    }
    let mut degree = vec![0u32; n as usize];
    for &(h, v) in &schedule {
        degree[h as usize] += 1;
        degree[v as usize] += 1;
    }
    let max_degree = degree.iter().copied().max().unwrap_or(0);
    let mut ops: Vec<UpdateOp> = schedule.iter().map(|&(h, v)| UpdateOp::InsertEdge(h, v)).collect();
    ops.extend(schedule.iter().map(|&(h, v)| UpdateOp::DeleteEdge(h, v)));
    Ok(Workload {
        instance: Instance::DomSet { costs: vec![1.0; n as usize], max_degree },
        header: Header { n, m: n, f: max_degree, c_ratio: 1.0, eps_hint: core::f64::consts::SQRT_2 - 1.0 },
        ops,
        seed: None,
        tag: format!("lb_domset q={q} order=layer-by-layer,lower-hub-first"),
        beta: Some(core::f64::consts::SQRT_2),
    })
}
