//! Metrics output: one `key=value` line per update, then a summary block.
//!
//! Records go to a writer thread through a bounded channel, so file IO
//! overlaps the replay while records stay in order and a slow sink blocks the
//! producer.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::sync::mpsc::{sync_channel, SyncSender};
use std::thread::JoinHandle;

use dyncover_core::{ResetKind, StepReport, Totals, UpdateOp};

const QUEUE_DEPTH: usize = 1024;

pub fn op_token(op: UpdateOp) -> String {
    match op {
        UpdateOp::Insert(e) => format!("+{e}"),
        UpdateOp::Delete(e) => format!("-{e}"),
        UpdateOp::InsertEdge(u, v) => format!("+{u},{v}"),
        UpdateOp::DeleteEdge(u, v) => format!("-{u},{v}"),
    }
}

/// One per-update record. `nanos` is omitted under `--no-timing`.
pub fn step_record(r: &StepReport, nanos: Option<u128>) -> String {
    let mut s = format!(
        "step={} op={} cover_cost={} cover_size={} recourse={} level_changes={} rises={} stale_skips={} inv3_moves={} pulled={}",
        r.step,
        op_token(r.op),
        r.cover_cost,
        r.cover_size,
        r.recourse,
        r.level_changes,
        r.rises,
        r.stale_skips,
        r.inv3_moves,
        r.pulled,
    );
    s.push_str(" resets=");
    if r.resets.is_empty() {
        s.push('-');
    }
    for (k, reset) in r.resets.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        match (reset.kind, reset.i_crit) {
            (ResetKind::Global, _) => write!(s, "global:{}", reset.u_size),
            (ResetKind::Partial, Some(i)) => write!(s, "partial@{i}:{}", reset.u_size),
            (ResetKind::Partial, None) => write!(s, "partial:{}", reset.u_size),
        }
        .unwrap();
    }
    if let Some(ns) = nanos {
        write!(s, " ns={ns}").unwrap();
    }
    s
}

/// Summary block lines. Ratios divide by `max(ops, 1)`.
pub fn summary_block(t: &Totals, counter_refreshes: u64, wall_nanos: Option<u128>) -> Vec<String> {
    let per = |x: u64| x as f64 / t.ops.max(1) as f64;
    let mut lines = vec![
        "[summary]".to_string(),
        format!("ops={}", t.ops),
        format!("level_changes={}", t.level_changes),
        format!("recourse={}", t.recourse),
        format!("rises={}", t.rises),
        format!("stale_skips={}", t.stale_skips),
        format!("pulled={}", t.pulled),
        format!("partial_resets={}", t.partial_resets),
        format!("global_resets={}", t.global_resets),
        format!("level_changes_per_op={}", per(t.level_changes)),
        format!("recourse_per_op={}", per(t.recourse)),
        format!("max_cover_size={}", t.max_cover_size),
        format!("max_rises={}", t.max_rises),
        format!("max_rise_roots={}", t.max_rise_roots),
        format!("max_inv3_moves={}", t.max_inv3_moves),
        format!("peak_level={}", t.peak_level),
        format!("counter_refreshes={counter_refreshes}"),
    ];
    if let Some(ns) = wall_nanos {
        lines.push(format!("wall_ns={ns}"));
        lines.push(format!("ns_per_op={}", ns as f64 / t.ops.max(1) as f64));
    }
    lines
}

/// Writer thread fed by a bounded queue.
pub struct Sink {
    tx: Option<SyncSender<String>>,
    handle: Option<JoinHandle<io::Result<()>>>,
}

impl Sink {
    pub fn new(out: Box<dyn Write + Send>) -> Sink {
        let (tx, rx) = sync_channel::<String>(QUEUE_DEPTH);
        let handle = std::thread::spawn(move || {
            let mut out = io::BufWriter::new(out);
            for line in rx {
                out.write_all(line.as_bytes())?;
                out.write_all(b"\n")?;
            }
            out.flush()
        });
        Sink { tx: Some(tx), handle: Some(handle) }
    }

    pub fn send(&self, line: String) {
        let tx = self.tx.as_ref().expect("sink already closed");
        // The writer only hangs up after an IO error, which finish() reports.
        let _ = tx.send(line);
    }

    /// Close the queue and wait for every record to be written.
    pub fn finish(mut self) -> io::Result<()> {
        self.close()
    }

    fn close(&mut self) -> io::Result<()> {
        drop(self.tx.take());
        match self.handle.take() {
            Some(h) => h.join().unwrap_or_else(|_| Err(io::Error::other("metrics writer panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for Sink {
    fn drop(&mut self) {
        let _ = self.close();
    }
}

/// `key=value` pairs of one record, in file order.
pub type Record = Vec<(String, String)>;

/// Parse a metrics file back into its step records and summary pairs.
pub fn read_metrics(text: &str) -> (Vec<Record>, Record) {
    let mut steps = Vec::new();
    let mut summary = Vec::new();
    let mut in_summary = false;
    for line in text.lines() {
        if line == "[summary]" {
            in_summary = true;
            continue;
        }
        let kv: Vec<(String, String)> = line
            .split_ascii_whitespace()
            .filter_map(|tok| tok.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
            .collect();
        if in_summary {
            summary.extend(kv);
        } else if !kv.is_empty() {
            steps.push(kv);
        }
    }
    (steps, summary)
}
