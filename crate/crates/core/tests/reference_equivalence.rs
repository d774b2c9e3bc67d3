use dyncover_core::oracle::{check_all, Slack};
use dyncover_core::workloads::{random_ds, random_sc, Workload};
use dyncover_core::EngineOptions;

fn run_against_reference(w: &Workload, eps: f64) {
    let params = w.params(eps).unwrap();
    let mut eng = w.build(params, EngineOptions { exact_counters: true }).unwrap();
    let mut reference = w.reference(params).unwrap();
    for (k, &op) in w.ops.iter().enumerate() {
        let report = eng.apply(op).unwrap_or_else(|e| panic!("{}: op {k} {op:?}: {e}", w.tag));
        let r = reference.apply(op).unwrap();
        let resets: Vec<_> = report.resets.iter().map(|r| (r.kind, r.i_crit)).collect();
        assert_eq!(resets, r.resets, "{} seed {:?}: resets differ at op {k} {op:?}", w.tag, w.seed);
        assert_eq!(report.rises, r.rises, "{} seed {:?}: rises differ at op {k} {op:?}", w.tag, w.seed);
        assert_eq!(
            eng.engine().cover(),
            reference.cover(),
            "{} seed {:?}: cover differs at op {k} {op:?}",
            w.tag,
            w.seed
        );
        if k % 7 == 0 {
            let v = check_all(eng.engine(), Slack::Strict);
            assert!(v.is_clean(), "{} seed {:?} op {k}: {:?}", w.tag, w.seed, v.first());
        }
    }
}

#[test]
fn set_cover_matches_reference() {
    for seed in 0..5 {
        for (eps, c) in [(0.1, 1.0), (0.3, 16.0)] {
            let w = random_sc(60, 40, 4, c, 1500, 0.4, seed).unwrap();
            run_against_reference(&w, eps);
        }
    }
}

#[test]
fn dom_set_matches_reference() {
    for seed in 0..5 {
        for (eps, c) in [(0.1, 1.0), (0.3, 16.0)] {
            let w = random_ds(40, 4, c, 1500, 0.4, seed).unwrap();
            run_against_reference(&w, eps);
        }
    }
}
