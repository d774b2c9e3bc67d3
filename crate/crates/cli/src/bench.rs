//! Desk-scale timing over a ladder of instance sizes.

use std::time::Instant;

use dyncover_core::workloads::random_sc;
use dyncover_core::EngineOptions;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub min_log: u32,
    pub max_log: u32,
    pub f: u32,
    pub c_ratio: f64,
    pub ops_per_element: u32,
    pub churn: f64,
    pub eps: f64,
    pub seed: u64,
    /// Also replay with exact counters and report their refresh count.
    pub compare_exact: bool,
    pub timing: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            min_log: 10,
            max_log: 16,
            f: 4,
            c_ratio: 16.0,
            ops_per_element: 2,
            churn: 0.4,
            eps: 0.2,
            seed: 0,
            compare_exact: false,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: u32,
    pub m: u32,
    pub ops: u64,
    pub nanos: u128,
    pub level_changes: u64,
    pub counter_refreshes: u64,
    pub exact_refreshes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares exponent of total time against `ops * f * log2 n`.
    pub exponent: Option<f64>,
    /// Least-squares slope of ns/op against `log2 n`.
    pub per_op_slope: Option<f64>,
}

/// Slope of the least-squares line through `points`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for &(x, y) in points {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

pub fn bench(opts: &BenchOptions) -> Result<BenchReport, CliError> {
    if opts.min_log > opts.max_log || opts.max_log > 24 {
        return Err(CliError::Params("invalid parameters: need min_log <= max_log <= 24".into()));
    }
    let mut report = BenchReport::default();
    if opts.ops_per_element == 0 {
        return Ok(report);
    }
    let bad = |e: dyncover_core::Error| CliError::Params(e.to_string());
    for lg in opts.min_log..=opts.max_log {
        let n = 1u32 << lg;
        let m = (n / 2).max(opts.f);
        let ops = n as usize * opts.ops_per_element as usize;
        let w = random_sc(n, m, opts.f, opts.c_ratio, ops, opts.churn, opts.seed).map_err(bad)?;
        let params = w.params(opts.eps).map_err(bad)?;
        let mut eng = w.build(params, EngineOptions::default()).map_err(bad)?;
        let t0 = Instant::now();
        for &op in &w.ops {
            eng.apply(op).map_err(bad)?;
        }
        let nanos = if opts.timing { t0.elapsed().as_nanos() } else { 0 };
        let exact_refreshes = if opts.compare_exact {
            let mut exact = w.build(params, EngineOptions { exact_counters: true }).map_err(bad)?;
            for &op in &w.ops {
                exact.apply(op).map_err(bad)?;
            }
            Some(exact.engine().counter_refreshes())
        } else {
            None
        };
        let e = eng.engine();
        report.rows.push(BenchRow {
            n,
            m,
            ops: w.ops.len() as u64,
            nanos,
            level_changes: e.totals().level_changes,
            counter_refreshes: e.counter_refreshes(),
            exact_refreshes,
        });
    }
    if opts.timing {
        let work: Vec<(f64, f64)> = report
            .rows
            .iter()
            .filter(|r| r.ops > 0 && r.nanos > 0)
            .map(|r| ((r.ops as f64 * f64::from(opts.f) * f64::from(r.n).log2()).ln(), (r.nanos as f64).ln()))
            .collect();
        report.exponent = fit_slope(&work);
        let per_op: Vec<(f64, f64)> = report
            .rows
            .iter()
            .filter(|r| r.ops > 0)
            .map(|r| (f64::from(r.n).log2(), r.nanos as f64 / r.ops as f64))
            .collect();
        report.per_op_slope = fit_slope(&per_op);
    }
    Ok(report)
}

pub fn render(report: &BenchReport, timing: bool) -> String {
    let mut s = String::new();
    for r in &report.rows {
        s.push_str(&format!(
            "n={} m={} ops={} level_changes={} counter_refreshes={}",
            r.n, r.m, r.ops, r.level_changes, r.counter_refreshes
        ));
        if let Some(x) = r.exact_refreshes {
            s.push_str(&format!(" exact_counter_refreshes={x}"));
        }
        if timing {
            s.push_str(&format!(" ns_per_op={:.1}", r.nanos as f64 / r.ops.max(1) as f64));
        }
        s.push('\n');
    }
    if let Some(x) = report.exponent {
        s.push_str(&format!("fit time_vs_ops_f_log_n_exponent={x:.3}\n"));
    }
    if let Some(x) = report.per_op_slope {
        s.push_str(&format!("fit ns_per_op_per_log2_n={x:.1}\n"));
    }
    s
}
