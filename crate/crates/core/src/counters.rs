//! Per-set occupancy counts with lazily refreshed prefix sums.
//!
//! For a set `S`, `N_j(S)` is the number of its active elements sitting below
//! level `j`. Keeping every `N_j(S)` exact would cost a full window of updates
//! per element move, so each set keeps exact per-level counts and a cumulative
//! estimate that is only recomputed up to a zone boundary. The zone is chosen by
//! the highest bit that flips in a 64-bit change counter, so far zones are
//! refreshed exponentially less often while their error stays below
//! `eps * beta^j`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::levels::{Levels, TIE_TOLERANCE};

/// A run of relative levels refreshed every `2^(bit-1)` counter increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zone {
    pub bit: u32,
    pub start: usize,
    pub end: usize,
}

/// Split `window_size` relative levels into zones. Zone 1 ends at
/// `floor(log_beta(2/eps))` and zone `i` ends at `floor(log_beta(2^i/eps))`,
/// with `beta = 1 + eps`. Empty zones are skipped and the last one is cut at
/// the window edge.
pub fn zone_partition(window_size: usize, eps: f64) -> Vec<Zone> {
    assert!(window_size >= 1, "empty window");
    let beta = 1.0 + eps;
    let mut zones = Vec::new();
    let mut start = 0usize;
    let mut bit = 1u32;
    while start < window_size {
        let bound = libm::ldexp(1.0, bit as i32) / eps;
        let end = floor_log(beta, bound).min(window_size as i64 - 1);
        if end >= start as i64 {
            let end = end as usize;
            zones.push(Zone { bit, start, end });
            start = end + 1;
        }
        bit += 1;
        if bit > 64 {
            // Past 64 flips the counter never reaches this far; give the rest
            // to the last zone.
            zones.push(Zone { bit: 64, start, end: window_size - 1 });
            break;
        }
    }
    zones
}

/// Largest `k >= 0` with `beta^k <= x` by repeated multiplication, or -1 when
/// `x < 1`.
fn floor_log(beta: f64, x: f64) -> i64 {
    if x < 1.0 * (1.0 - TIE_TOLERANCE) {
        return -1;
    }
    let mut k = 0i64;
    let mut p = beta;
    while p <= x * (1.0 + TIE_TOLERANCE) {
        p *= beta;
        k += 1;
    }
    k
}

/// For each possible flip height `q` (1..=64), the last window position to
/// refresh. Shared by every set with the same window shape.
#[derive(Debug)]
pub struct ZoneTable {
    prefix_end: [u16; 65],
}

impl ZoneTable {
    /// Window position 0 (level `j_min`) is always refreshed; the zones start
    /// at position 1, so the relative level of position `p` is `p - 1` and the
    /// error bound at level `j_min + p >= p - 1` still holds when `j_min = -1`.
    pub fn new(window_size: usize, eps: f64) -> Self {
        assert!(window_size >= 1 && window_size <= u16::MAX as usize);
        let mut prefix_end = [0u16; 65];
        if window_size > 1 {
            let zones = zone_partition(window_size - 1, eps);
            for (q, slot) in prefix_end.iter_mut().enumerate().skip(1) {
                let end = zones.iter().filter(|z| z.bit as usize <= q).map(|z| z.end + 1).max().unwrap_or(0);
                *slot = end as u16;
            }
        }
        ZoneTable { prefix_end }
    }

    /// Every position refreshed on every increment.
    pub fn exact(window_size: usize) -> Self {
        ZoneTable { prefix_end: [(window_size - 1) as u16; 65] }
    }

    pub fn prefix_end(&self, q: u32) -> usize {
        self.prefix_end[q as usize] as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Below,
    At(usize),
    Over,
}

#[derive(Debug, Clone)]
pub struct SetCounters {
    j_min: i32,
    j_max: i32,
    below: u32,
    exact: Vec<u32>,
    overflow: u32,
    cumulative: Vec<u32>,
    changes: u64,
    zones: Arc<ZoneTable>,
    refreshed: u64,
}

impl SetCounters {
    pub fn new(window: (i32, i32), zones: Arc<ZoneTable>) -> Self {
        let (j_min, j_max) = window;
        assert!(j_max >= j_min, "empty window");
        let w = (j_max - j_min + 1) as usize;
        SetCounters {
            j_min,
            j_max,
            below: 0,
            exact: vec![0; w],
            overflow: 0,
            cumulative: vec![0; w],
            changes: 0,
            zones,
            refreshed: 0,
        }
    }

    pub fn window(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn window_len(&self) -> usize {
        self.exact.len()
    }

    /// Window position of a level, if inside the window.
    pub fn position(&self, level: i32) -> Option<usize> {
        (level >= self.j_min && level <= self.j_max).then(|| (level - self.j_min) as usize)
    }

    pub fn level_at(&self, pos: usize) -> i32 {
        self.j_min + pos as i32
    }

    fn slot(&self, level: i32) -> Slot {
        if level < self.j_min {
            Slot::Below
        } else if level > self.j_max {
            Slot::Over
        } else {
            Slot::At((level - self.j_min) as usize)
        }
    }

    fn count_mut(&mut self, s: Slot) -> &mut u32 {
        match s {
            Slot::Below => &mut self.below,
            Slot::At(p) => &mut self.exact[p],
            Slot::Over => &mut self.overflow,
        }
    }

    /// One element of this set moved from `old` to `new` (`None` means it was
    /// not counted: inactive, or not yet a member). Returns the last window
    /// position whose cumulative value was refreshed, or `None` when the move
    /// does not change any `N_j` in the window.
    pub fn record(&mut self, old: Option<i32>, new: Option<i32>) -> Option<usize> {
        assert!(old.is_some() || new.is_some(), "counter change without a level");
        let old = old.map(|l| self.slot(l));
        let new = new.map(|l| self.slot(l));
        let visible = match (old, new) {
            (Some(a), Some(b)) => a != b && !(a == Slot::Over && b == Slot::Over),
            (Some(s), None) | (None, Some(s)) => s != Slot::Over,
            (None, None) => unreachable!(),
        };
        if let Some(s) = old {
            let c = self.count_mut(s);
            *c = c.checked_sub(1).expect("counter underflow: element was not counted here");
        }
        if let Some(s) = new {
            *self.count_mut(s) += 1;
        }
        if !visible {
            return None;
        }
        self.changes += 1;
        let q = self.changes.trailing_zeros() + 1;
        let end = self.zones.prefix_end(q).min(self.exact.len() - 1);
        self.refresh(end);
        Some(end)
    }

    fn refresh(&mut self, end: usize) {
        let mut acc = self.below;
        self.cumulative[0] = acc;
        for p in 1..=end {
            acc += self.exact[p - 1];
            self.cumulative[p] = acc;
        }
        self.refreshed += end as u64 + 1;
    }

    /// Refresh the whole window. Returns the last position.
    pub fn refresh_all(&mut self) -> usize {
        let end = self.exact.len() - 1;
        self.refresh(end);
        end
    }

    /// The lazily maintained estimate of `N_j`.
    pub fn cumulative(&self, j: i32) -> u32 {
        self.cumulative[self.position(j).expect("level outside window")]
    }

    /// Exact `N_j` from the per-level counts.
    pub fn exact_below(&self, j: i32) -> u32 {
        match self.slot(j) {
            Slot::Below => panic!("exact_below only tracks levels from the window base"),
            Slot::At(p) => self.below + self.exact[..p].iter().sum::<u32>(),
            Slot::Over => self.below + self.exact.iter().sum::<u32>(),
        }
    }

    /// Exact count of members sitting at `level`, or the aggregate bucket
    /// holding it when outside the window.
    pub fn exact_at(&self, level: i32) -> u32 {
        match self.slot(level) {
            Slot::Below => self.below,
            Slot::At(p) => self.exact[p],
            Slot::Over => self.overflow,
        }
    }

    /// Members counted anywhere (below, in or above the window).
    pub fn total(&self) -> u32 {
        self.below + self.exact.iter().sum::<u32>() + self.overflow
    }

    pub fn changes(&self) -> u64 {
        self.changes
    }

    /// Cumulative entries recomputed so far.
    pub fn refreshed(&self) -> u64 {
        self.refreshed
    }

    /// `j > l_cov` and the estimate reaches `cost * beta^(j+1)`.
    pub fn is_j_pd(&self, levels: &Levels, j: i32, l_cov: i32, cost: f64) -> bool {
        j > l_cov && levels.reaches(self.cumulative(j) as f64, cost, j + 1)
    }

    /// Highest positive-dirty level among window positions `0..=prefix_end`.
    pub fn highest_pd(&self, levels: &Levels, prefix_end: usize, l_cov: i32, cost: f64) -> Option<i32> {
        let end = prefix_end.min(self.exact.len() - 1);
        (0..=end)
            .rev()
            .map(|p| self.level_at(p))
            .take_while(|&j| j > l_cov)
            .find(|&j| levels.reaches(self.cumulative[(j - self.j_min) as usize] as f64, cost, j + 1))
    }

    /// Test hook: skew one cumulative entry.
    #[doc(hidden)]
    pub fn skew_cumulative(&mut self, j: i32, delta: i64) {
        let p = self.position(j).expect("level outside window");
        self.cumulative[p] = (self.cumulative[p] as i64 + delta).max(0) as u32;
    }
}

/// A set whose counters were refreshed during the current update.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub set: u32,
    pub counters: &'a SetCounters,
    pub prefix_end: usize,
    pub l_cov: i32,
    pub cost: f64,
}

/// The highest `(S, j)` with `S` positive dirty at `j`, looking only at
/// refreshed positions. Ties at equal `j` go to the lowest set id.
pub fn highest_pd_candidate<'a>(
    levels: &Levels,
    candidates: impl IntoIterator<Item = Candidate<'a>>,
) -> Option<(u32, i32)> {
    let mut best: Option<(u32, i32)> = None;
    for c in candidates {
        if let Some(j) = c.counters.highest_pd(levels, c.prefix_end, c.l_cov, c.cost) {
            best = match best {
                Some((s, bj)) if bj > j || (bj == j && s < c.set) => Some((s, bj)),
                _ => Some((c.set, j)),
            };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::Params;

    fn sqrt2(n: u32) -> Levels {
        Levels::new(Params::with_beta(core::f64::consts::SQRT_2, n, 1.0).unwrap())
    }

    fn counters(levels: &Levels, cost: f64) -> SetCounters {
        let w = levels.relevant_window(cost);
        let len = (w.1 - w.0 + 1) as usize;
        SetCounters::new(w, Arc::new(ZoneTable::new(len, levels.eps())))
    }

    #[test]
    fn single_level_window_is_one_zone() {
        assert_eq!(zone_partition(1, 0.2), vec![Zone { bit: 1, start: 0, end: 0 }]);
    }

    #[test]
    fn first_zone_end() {
        // floor(log_1.5 4) = 3, since 1.5^3 = 3.375 <= 4 < 5.0625
        let z = zone_partition(20, 0.5);
        assert_eq!((z[0].start, z[0].end), (0, 3));
        // zones tile the window in order
        for w in z.windows(2) {
            assert_eq!(w[1].start, w[0].end + 1);
            assert!(w[1].bit > w[0].bit);
        }
        assert_eq!(z.last().unwrap().end, 19);
    }

    #[test]
    fn first_change_refreshes_first_zone() {
        let lv = sqrt2(1 << 12);
        let mut c = counters(&lv, 1.0);
        let table = ZoneTable::new(c.window_len(), lv.eps());
        let end = c.record(None, Some(0)).unwrap();
        assert_eq!(end, table.prefix_end(1));
        assert_eq!(c.cumulative(1), 1);
    }

    #[test]
    fn flip_height_selects_zones() {
        let lv = sqrt2(1 << 12);
        let mut c = counters(&lv, 1.0);
        let table = ZoneTable::new(c.window_len(), lv.eps());
        let mut ends = Vec::new();
        for _ in 0..4 {
            ends.push(c.record(None, Some(0)).unwrap());
        }
        // 1, 2, 3, 4 → q = 1, 2, 1, 3
        assert_eq!(ends, vec![table.prefix_end(1), table.prefix_end(2), table.prefix_end(1), table.prefix_end(3)]);
    }

    #[test]
    fn refreshed_prefix_is_exact() {
        let lv = sqrt2(1 << 10);
        let mut c = counters(&lv, 1.0);
        for l in [0, 1, 2, 3, 5, 8, 0, 1] {
            c.record(None, Some(l));
        }
        let end = c.refresh_all();
        for p in 0..=end {
            let j = c.level_at(p);
            assert_eq!(c.cumulative(j), c.exact_below(j));
        }
    }

    #[test]
    fn moves_above_window_are_bookkeeping() {
        let lv = sqrt2(8);
        let mut c = counters(&lv, 1.0);
        let (_, j_max) = c.window();
        assert_eq!(c.record(None, Some(j_max + 1)), None);
        assert_eq!(c.record(Some(j_max + 1), Some(j_max + 2)), None);
        assert_eq!(c.changes(), 0);
        assert_eq!(c.total(), 1);
    }

    #[test]
    fn pd_predicate() {
        let lv = sqrt2(64);
        let mut c = counters(&lv, 1.0);
        for _ in 0..8 {
            c.record(None, Some(2));
        }
        c.refresh_all();
        // 8 >= beta^6
        assert!(c.is_j_pd(&lv, 5, 2, 1.0));
        // covering at 5 means 3 is not above it
        assert!(!c.is_j_pd(&lv, 3, 5, 1.0));
        let mut d = counters(&lv, 1.0);
        for _ in 0..3 {
            d.record(None, Some(0));
        }
        d.refresh_all();
        // 3 < beta^4
        assert!(!d.is_j_pd(&lv, 3, -1, 1.0));
    }

    #[test]
    fn candidate_choice() {
        let lv = sqrt2(64);
        assert_eq!(highest_pd_candidate(&lv, Vec::new()), None);
        let mut a = counters(&lv, 1.0);
        let mut b = counters(&lv, 1.0);
        // a: 4 elements at level 0 → PD at 1, 2, 3 (4 >= beta^4)
        for _ in 0..4 {
            a.record(None, Some(0));
        }
        // b: 8 elements at level 0 → PD up to 5
        for _ in 0..8 {
            b.record(None, Some(0));
        }
        let ea = a.refresh_all();
        let eb = b.refresh_all();
        assert_eq!(a.highest_pd(&lv, ea, -1, 1.0), Some(3));
        let cands = vec![
            Candidate { set: 0, counters: &a, prefix_end: ea, l_cov: -1, cost: 1.0 },
            Candidate { set: 1, counters: &b, prefix_end: eb, l_cov: -1, cost: 1.0 },
        ];
        assert_eq!(highest_pd_candidate(&lv, cands), Some((1, 5)));
        let cands = vec![
            Candidate { set: 3, counters: &b, prefix_end: eb, l_cov: -1, cost: 1.0 },
            Candidate { set: 1, counters: &b, prefix_end: eb, l_cov: -1, cost: 1.0 },
        ];
        assert_eq!(highest_pd_candidate(&lv, cands), Some((1, 5)));
    }
}
