//! Per-level bookkeeping of dirt, departures, cost and occupancy.

use alloc::vec;
use alloc::vec::Vec;

use crate::levels::Levels;
use crate::{Error, FaultKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LedgerEvent {
    /// An element left a pair at `level`. Only initial members add dirt.
    Departure {
        level: i32,
        initial: bool,
    },
    Arrival {
        level: i32,
    },
    SetEnter {
        level: i32,
        cost: f64,
    },
    SetLeave {
        level: i32,
        cost: f64,
    },
}

/// Dirt `D_j`, departures `E_j`, cost `C_j`, covered elements `L_j` and covering
/// sets `S_j` for every level `0..=top`, plus running totals of dirt and cost.
#[derive(Debug, Clone)]
pub struct LevelLedger {
    dirt: Vec<f64>,
    departures: Vec<u64>,
    cost: Vec<f64>,
    elements: Vec<u64>,
    sets: Vec<u64>,
    total_sets: u64,
    total_dirt: f64,
    total_cost: f64,
}

impl LevelLedger {
    /// Levels `0..=top`. Pairs never sit below level 0 because every ratio is
    /// at least 1.
    pub fn new(top: i32) -> Self {
        let n = top as usize + 1;
        LevelLedger {
            dirt: vec![0.0; n],
            departures: vec![0; n],
            cost: vec![0.0; n],
            elements: vec![0; n],
            sets: vec![0; n],
            total_sets: 0,
            total_dirt: 0.0,
            total_cost: 0.0,
        }
    }

    pub fn top(&self) -> i32 {
        self.dirt.len() as i32 - 1
    }

    fn idx(&self, level: i32) -> usize {
        assert!(level >= 0 && level <= self.top(), "ledger level {level} out of range");
        level as usize
    }

    pub fn apply(&mut self, levels: &Levels, event: LedgerEvent) -> Result<(), Error> {
        let neg = Error::Fault(FaultKind::NegativeLedger);
        match event {
            LedgerEvent::Departure { level, initial } => {
                let i = self.idx(level);
                self.elements[i] = self.elements[i].checked_sub(1).ok_or(neg)?;
                if initial {
                    let d = 1.0 / levels.pow(level);
                    self.dirt[i] += d;
                    self.total_dirt += d;
                    self.departures[i] += 1;
                }
            }
            LedgerEvent::Arrival { level } => {
                let i = self.idx(level);
                self.elements[i] += 1;
            }
            LedgerEvent::SetEnter { level, cost } => {
                let i = self.idx(level);
                self.sets[i] += 1;
                self.total_sets += 1;
                self.cost[i] += cost;
                self.total_cost += cost;
            }
            LedgerEvent::SetLeave { level, cost } => {
                let i = self.idx(level);
                self.sets[i] = self.sets[i].checked_sub(1).ok_or(neg)?;
                self.total_sets -= 1;
                self.cost[i] -= cost;
                self.total_cost -= cost;
                if self.sets[i] == 0 {
                    // Drop accumulated rounding so an empty level has cost 0.
                    self.total_cost -= self.cost[i];
                    self.cost[i] = 0.0;
                }
                if self.cost[i] < -1e-9 || self.total_cost < -1e-9 {
                    return Err(neg);
                }
                if self.total_cost < 0.0 || self.total_sets == 0 {
                    self.total_cost = 0.0;
                }
            }
        }
        Ok(())
    }

    /// Zero `D_i` and `E_i` for every `i <= level`.
    pub fn clear_dirt_through(&mut self, level: i32) {
        let end = (level.min(self.top()) + 1).max(0) as usize;
        for i in 0..end {
            self.total_dirt -= self.dirt[i];
            self.dirt[i] = 0.0;
            self.departures[i] = 0;
        }
        if self.dirt.iter().all(|&d| d == 0.0) {
            self.total_dirt = 0.0;
        }
    }

    pub fn dirt(&self, level: i32) -> f64 {
        self.dirt[self.idx(level)]
    }

    pub fn departures(&self, level: i32) -> u64 {
        self.departures[self.idx(level)]
    }

    pub fn cost(&self, level: i32) -> f64 {
        self.cost[self.idx(level)]
    }

    pub fn elements(&self, level: i32) -> u64 {
        self.elements[self.idx(level)]
    }

    pub fn sets(&self, level: i32) -> u64 {
        self.sets[self.idx(level)]
    }

    pub fn dirt_levels(&self) -> &[f64] {
        &self.dirt
    }

    pub fn cost_levels(&self) -> &[f64] {
        &self.cost
    }

    /// Incrementally maintained `D`.
    pub fn total_dirt(&self) -> f64 {
        self.total_dirt
    }

    /// Incrementally maintained `C`.
    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    /// Lowest level holding a covering set (idle sets included).
    pub fn lowest_set_level(&self) -> Option<i32> {
        self.sets.iter().position(|&s| s > 0).map(|i| i as i32)
    }

    /// Highest level holding a covering set.
    pub fn highest_set_level(&self) -> Option<i32> {
        self.sets.iter().rposition(|&s| s > 0).map(|i| i as i32)
    }

    /// `D >= (eps/beta) * C` with a non-empty cover. Both sides are summed
    /// in level order rather than read from the running totals, so the
    /// decision does not depend on the order updates arrived in.
    pub fn is_dirty(&self, levels: &Levels) -> bool {
        if self.lowest_set_level().is_none() {
            return false;
        }
        let d: f64 = self.dirt.iter().sum();
        let c: f64 = self.cost.iter().sum();
        d >= levels.eps() / levels.beta() * c
    }
}
