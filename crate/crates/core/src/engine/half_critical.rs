//! Search for the highest half-critical level.
//!
//! With `D_j^i` and `C_j^i` the dirt and cost summed over levels `j..=i`, a
//! level `i` is half-critical when `D_j^i >= factor * C_j^i` for every `j` from
//! the scan base up to `i`. Candidates are the half-dirty levels
//! (`D_i >= factor * C_i`) scanned bottom up. A candidate that fails at some
//! `j` leaves a dirty range `(j, i)` with its sums; a later candidate walking
//! down reaches `i`, adds the stored sums and jumps straight to `j`. Every range
//! is consumed once, so one search costs `O(u - b)`.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy)]
struct Range {
    low: i32,
    dirt: f64,
    cost: f64,
}

/// Outcome plus the number of per-level steps taken, for complexity tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub level: Option<i32>,
    pub steps: usize,
}

/// `dirt` and `cost` are indexed by level. Dirt below `b` counts towards
/// level `b`.
pub fn find_highest_half_critical(dirt: &[f64], cost: &[f64], b: i32, u: i32, factor: f64) -> SearchOutcome {
    assert!(b >= 0 && u >= b && (u as usize) < dirt.len() && dirt.len() == cost.len());
    let d = |j: i32| -> f64 {
        if j == b {
            dirt[..=b as usize].iter().sum()
        } else {
            dirt[j as usize]
        }
    };
    let c = |j: i32| cost[j as usize];
    let width = (u - b + 1) as usize;
    // ranges[i - b]: the dirty range whose upper end is i.
    let mut ranges: Vec<Option<Range>> = vec![None; width];
    let slot = |j: i32| (j - b) as usize;
    let half_dirty: Vec<i32> = (b..=u).filter(|&i| d(i) >= factor * c(i)).collect();
    let mut steps = width;
    let mut highest = None;
    for &i in &half_dirty {
        let (mut dsum, mut csum) = (d(i), c(i));
        let mut j = i - 1;
        let mut critical = true;
        while j >= b {
            steps += 1;
            if let Some(r) = ranges[slot(j)].take() {
                dsum += r.dirt;
                csum += r.cost;
                j = r.low;
                continue;
            }
            let (before_d, before_c) = (dsum, csum);
            dsum += d(j);
            csum += c(j);
            if dsum < factor * csum {
                ranges[slot(i)] = Some(Range { low: j, dirt: before_d, cost: before_c });
                critical = false;
                break;
            }
            j -= 1;
        }
        if critical {
            highest = Some(i);
            ranges[slot(i)] = Some(Range { low: b - 1, dirt: dsum, cost: csum });
        }
    }
    SearchOutcome { level: highest, steps }
}

/// Direct definition, quadratic in the number of levels.
pub fn naive_highest_half_critical(dirt: &[f64], cost: &[f64], b: i32, u: i32, factor: f64) -> Option<i32> {
    let folded: f64 = dirt[..=b as usize].iter().sum();
    let d = |j: i32| if j == b { folded } else { dirt[j as usize] };
    (b..=u).rev().find(|&i| {
        let (mut ds, mut cs) = (0.0, 0.0);
        (b..=i).rev().all(|j| {
            ds += d(j);
            cs += cost[j as usize];
            ds >= factor * cs
        })
    })
}
