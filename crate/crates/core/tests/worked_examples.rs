use std::f64::consts::SQRT_2;

use dyncover_core::greedy::{greedy_cover, CandidateSet, ResidualInstance};
use dyncover_core::oracle::{check_all, Slack};
use dyncover_core::workloads::{lb_domset, lb_setcover, random_sc};
use dyncover_core::{DomSetEngine, EngineOptions, Levels, Params, ResetKind, UpdateOp};

fn sqrt2(n: u32, c: f64) -> Params {
    Params::with_beta(SQRT_2, n, c).unwrap()
}

#[test]
fn power_and_ratio_levels() {
    let lv = Levels::new(sqrt2(32, 1.0));
    assert!((lv.pow(6) - 8.0).abs() < 1e-12);
    assert_eq!(lv.level_of_ratio(4, 1.0).unwrap(), 4);
    assert_eq!(lv.level_of_ratio(3, 1.0).unwrap(), 3);
    let lv = Levels::new(Params::with_beta(1.5, 100, 2.0).unwrap());
    assert!((lv.pow(3) - 3.375).abs() < 1e-12);
    assert_eq!(lv.level_of_ratio(5, 1.0).unwrap(), 3);
}

#[test]
fn second_insert_rises_pair_to_level_two() {
    let w = lb_setcover(4).unwrap();
    let mut eng = w.build(w.params_with_beta(SQRT_2).unwrap(), EngineOptions::default()).unwrap();
    eng.apply(UpdateOp::Insert(0)).unwrap();
    assert_eq!(eng.engine().covering_level(0), 0);
    let r = eng.apply(UpdateOp::Insert(1)).unwrap();
    assert_eq!(r.rises, 1);
    assert_eq!(eng.engine().covering_level(0), 2);
    assert_eq!(eng.engine().item_level(0), Some(2));
    assert_eq!(eng.engine().item_level(1), Some(2));
}

#[test]
fn eighth_insert_lifts_both_batches_to_level_six() {
    // n = 32: S9 (id 8) holds B1 and B2
    let w = lb_setcover(5).unwrap();
    let mut eng = w.build(w.params_with_beta(SQRT_2).unwrap(), EngineOptions::default()).unwrap();
    let mut last = None;
    for &op in &w.ops[..8] {
        last = Some(eng.apply(op).unwrap());
    }
    assert!(last.unwrap().rises >= 1);
    let e = eng.engine();
    assert_eq!(e.covering_level(8), 6);
    for x in 0..8 {
        assert_eq!(e.owner(x), Some(8));
        assert_eq!(e.item_level(x), Some(6));
    }
}

#[test]
fn set_cover_construction_meets_level_change_bound() {
    for q in 2..=6u32 {
        let w = lb_setcover(q).unwrap();
        let mut eng = w.build(w.params_with_beta(SQRT_2).unwrap(), EngineOptions::default()).unwrap();
        for &op in &w.ops {
            eng.apply(op).unwrap();
        }
        let n = 1u64 << q;
        let bound = n / 2 * (u64::from(q) - 1);
        assert!(eng.engine().totals().level_changes >= bound, "q={q}");
    }
}

#[test]
fn reset_pair_level_from_ratio() {
    let lv = Levels::new(Params::with_beta(1.5, 10, 1.0).unwrap());
    let inst = ResidualInstance {
        items: (0..5).collect(),
        sets: vec![CandidateSet { id: 0, cost: 1.0, members: (0..5).collect() }],
    };
    let picks = greedy_cover(&lv, &inst).unwrap();
    assert_eq!(picks[0].level, 3);
}

#[test]
fn global_resets_follow_schedule_and_leave_no_idle_sets() {
    let w = random_sc(60, 40, 3, 4.0, 3000, 0.4, 5).unwrap();
    let mut eng = w.build(w.params(0.2).unwrap(), EngineOptions::default()).unwrap();
    let mut expected_next = 1;
    for &op in &w.ops {
        let r = eng.apply(op).unwrap();
        let e = eng.engine();
        if r.resets.iter().any(|x| x.kind == ResetKind::Global) {
            assert_eq!(r.step, expected_next);
            expected_next = r.step + u64::from(e.n_active().max(1));
            assert!(e.cover().iter().all(|p| !p.members.is_empty()), "idle set after a global reset");
        } else {
            assert!(r.step < expected_next);
        }
        assert_eq!(e.next_global_reset(), expected_next);
    }
}

#[test]
fn partial_reset_leaves_clean_cover() {
    for seed in 0..4 {
        let w = random_sc(80, 50, 4, 16.0, 3000, 0.45, seed).unwrap();
        let mut eng = w.build(w.params(0.2).unwrap(), EngineOptions::default()).unwrap();
        for &op in &w.ops {
            let r = eng.apply(op).unwrap();
            if r.resets.iter().any(|x| x.kind == ResetKind::Partial) {
                assert!(!eng.engine().ledger().is_dirty(eng.engine().levels()));
            }
        }
    }
}

/// Ten vertices; costs put isolated vertices at chosen levels.
fn graph(costs: &[f64]) -> DomSetEngine {
    let mut all = costs.to_vec();
    all.resize(10, 1.0);
    DomSetEngine::new(all, 4, sqrt2(10, 16.0), EngineOptions::default()).unwrap()
}

#[test]
fn higher_dominator_takes_new_neighbour() {
    // u alone at level 7 (cost 1/12), v alone at level 3 (cost 1/3)
    let mut g = graph(&[1.0 / 12.0, 1.0 / 3.0]);
    assert_eq!((g.dom_level(0), g.level(1)), (7, 3));
    let r = g.insert_edge(0, 1).unwrap();
    assert_eq!(r.inv3_moves, 1);
    assert_eq!(g.dominator(1), 0);
    // the pair of two then rises from 7 to 9
    assert_eq!(r.rises, 1);
    assert_eq!((g.level(1), g.dom_level(0)), (9, 9));
}

#[test]
fn deleted_dominator_hands_over_to_highest_neighbour() {
    // u at 7, z at 5 (cost 1/6), v at 0
    let mut g = graph(&[1.0 / 12.0, 1.0 / 6.0, 1.0]);
    assert_eq!(g.dom_level(1), 5);
    g.insert_edge(0, 2).unwrap();
    g.insert_edge(1, 2).unwrap();
    assert_eq!(g.dominator(2), 0);
    let r = g.delete_edge(0, 2).unwrap();
    assert_eq!(r.inv3_moves, 0);
    assert_eq!(g.dominator(2), 1);
    // z's pair of two rises from 5 to 7
    assert_eq!((g.level(2), g.dom_level(1)), (7, 7));
}

#[test]
fn edge_deletions_can_trigger_rises() {
    let w = lb_domset(2).unwrap();
    let mut eng = w.build(w.params_with_beta(SQRT_2).unwrap(), EngineOptions::default()).unwrap();
    let mut rises_on_delete = 0;
    for &op in &w.ops {
        let r = eng.apply(op).unwrap();
        if matches!(op, UpdateOp::DeleteEdge(..)) {
            rises_on_delete += r.rises;
            assert_eq!(r.inv3_moves, 0);
        }
    }
    assert!(rises_on_delete > 0);
    assert!(check_all(eng.engine(), Slack::Counters).is_clean());
}

#[test]
fn dom_set_construction_grows_with_q() {
    let mut last = 0.0;
    for q in 2..=5 {
        let w = lb_domset(q).unwrap();
        let mut eng = w.build(w.params_with_beta(SQRT_2).unwrap(), EngineOptions::default()).unwrap();
        let (mut changes, mut deletions) = (0u64, 0u64);
        for &op in &w.ops {
            let r = eng.apply(op).unwrap();
            if matches!(op, UpdateOp::DeleteEdge(..)) {
                changes += r.level_changes;
                deletions += 1;
            }
        }
        let per = changes as f64 / deletions as f64;
        assert!(per > last, "q={q}: {per} <= {last}");
        last = per;
    }
}
