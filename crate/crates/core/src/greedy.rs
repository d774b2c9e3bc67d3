//! Static weighted greedy over a residual instance, using one bucket per ratio
//! level and a pointer that only moves down.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::levels::Levels;
use crate::{Error, FaultKind};

/// A candidate set restricted to the residual universe.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub id: u32,
    pub cost: f64,
    /// Indices into [`ResidualInstance::items`].
    pub members: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualInstance {
    /// Global ids of the items still to cover.
    pub items: Vec<u32>,
    /// Candidates sorted by increasing id.
    pub sets: Vec<CandidateSet>,
}

/// One greedy choice: the set, the global ids it takes over, and its level.
#[derive(Debug, Clone, PartialEq)]
pub struct Pick {
    pub set: u32,
    pub level: i32,
    pub members: Vec<u32>,
}

impl ResidualInstance {
    fn check(&self) -> Result<Vec<Vec<u32>>, Error> {
        debug_assert!(self.sets.windows(2).all(|w| w[0].id < w[1].id), "candidates must be sorted by id");
        let mut containing = vec![Vec::new(); self.items.len()];
        for (k, s) in self.sets.iter().enumerate() {
            for &m in &s.members {
                containing[m as usize].push(k as u32);
            }
        }
        if let Some(i) = containing.iter().position(|c| c.is_empty()) {
            return Err(Error::Uncoverable(self.items[i]));
        }
        Ok(containing)
    }
}

/// Repeatedly take the lowest-id set from the highest non-empty ratio bucket.
pub fn greedy_cover(levels: &Levels, inst: &ResidualInstance) -> Result<Vec<Pick>, Error> {
    let containing = inst.check()?;
    let base = -levels.span();
    let bucket_of = |l: i32| (l - base) as usize;
    let mut buckets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); (2 * levels.span() + 1) as usize];
    let mut live: Vec<u32> = inst.sets.iter().map(|s| s.members.len() as u32).collect();
    let mut level: Vec<i32> = vec![i32::MIN; inst.sets.len()];
    let mut top = 0usize;
    for (k, s) in inst.sets.iter().enumerate() {
        if live[k] > 0 {
            let l = levels.level_of_ratio(live[k] as u64, s.cost)?;
            level[k] = l;
            buckets[bucket_of(l)].insert(k as u32);
            top = top.max(bucket_of(l));
        }
    }
    let mut covered = vec![false; inst.items.len()];
    let mut remaining = inst.items.len();
    let mut picks = Vec::new();
    while remaining > 0 {
        while buckets[top].is_empty() {
            top = top.checked_sub(1).expect("uncovered items left with no candidates");
        }
        let k = buckets[top].pop_first().unwrap() as usize;
        let set = &inst.sets[k];
        let mut members = Vec::with_capacity(live[k] as usize);
        for &m in &set.members {
            if covered[m as usize] {
                continue;
            }
            covered[m as usize] = true;
            remaining -= 1;
            members.push(inst.items[m as usize]);
            for &o in &containing[m as usize] {
                let o = o as usize;
                if o == k {
                    continue;
                }
                buckets[bucket_of(level[o])].remove(&(o as u32));
                live[o] -= 1;
                if live[o] > 0 {
                    let l = levels.level_of_ratio(live[o] as u64, inst.sets[o].cost)?;
                    if bucket_of(l) > top {
                        return Err(Error::Fault(FaultKind::BucketPointerRegressed));
                    }
                    level[o] = l;
                    buckets[bucket_of(l)].insert(o as u32);
                } else {
                    level[o] = i32::MIN;
                }
            }
        }
        live[k] = 0;
        picks.push(Pick { set: set.id, level: level[k], members });
        level[k] = i32::MIN;
    }
    Ok(picks)
}

/// Classic greedy by exact ratio `|S ∩ U| / c(S)`, ties to the lowest id.
/// A baseline for cost comparisons only; placement levels still come from
/// the ratio.
pub fn exact_ratio_greedy(levels: &Levels, inst: &ResidualInstance) -> Result<Vec<Pick>, Error> {
    inst.check()?;
    let mut covered = vec![false; inst.items.len()];
    let mut remaining = inst.items.len();
    let mut picks = Vec::new();
    while remaining > 0 {
        let mut best: Option<(usize, u32)> = None;
        for (k, s) in inst.sets.iter().enumerate() {
            let n = s.members.iter().filter(|&&m| !covered[m as usize]).count() as u32;
            if n == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((b, bn)) => n as f64 / s.cost > bn as f64 / inst.sets[b].cost,
            };
            if better {
                best = Some((k, n));
            }
        }
        let (k, n) = best.expect("coverable instance always has a live candidate");
        let s = &inst.sets[k];
        let mut members = Vec::new();
        for &m in &s.members {
            if !covered[m as usize] {
                covered[m as usize] = true;
                members.push(inst.items[m as usize]);
            }
        }
        remaining -= members.len();
        picks.push(Pick { set: s.id, level: levels.level_of_ratio(n as u64, s.cost)?, members });
    }
    Ok(picks)
}
