//! Line-oriented workload files.
//!
//! ```text
//! SC <n> <m> <f> <C> <eps_hint>        DS <n> <Delta> <C> <eps_hint>
//! S <id> <cost> <elem>...              V <id> <cost>
//! + <e> / - <e>                        + <u> <v> / - <u> <v>
//! ```
//!
//! `#` starts a comment. Three comment keys carry metadata and survive a
//! round trip: `# tag: ...`, `# seed: ...` and `# beta: ...`. Floats are
//! written in Rust's shortest round-trip form, so parsing and re-serializing a
//! generated file reproduces it byte for byte.

use std::fmt::Write as _;
use std::str::FromStr;

use dyncover_core::workloads::{Header, Instance, Workload};
use dyncover_core::UpdateOp;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

/// A parsed workload plus the 1-based source line of every op.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub workload: Workload,
    pub op_lines: Vec<usize>,
}

pub fn to_text(w: &Workload) -> String {
    let mut out = String::new();
    let h = &w.header;
    if !w.tag.is_empty() {
        writeln!(out, "# tag: {}", w.tag).unwrap();
    }
    if let Some(seed) = w.seed {
        writeln!(out, "# seed: {seed}").unwrap();
    }
    if let Some(beta) = w.beta {
        writeln!(out, "# beta: {beta}").unwrap();
    }
    match &w.instance {
        Instance::SetCover { n_elements, sets } => {
            writeln!(out, "SC {} {} {} {} {}", n_elements, sets.len(), h.f, h.c_ratio, h.eps_hint).unwrap();
            for (id, (cost, members)) in sets.iter().enumerate() {
                write!(out, "S {id} {cost}").unwrap();
                for e in members {
                    write!(out, " {e}").unwrap();
                }
                out.push('\n');
            }
        }
        Instance::DomSet { costs, max_degree } => {
            writeln!(out, "DS {} {} {} {}", costs.len(), max_degree, h.c_ratio, h.eps_hint).unwrap();
            for (id, cost) in costs.iter().enumerate() {
                writeln!(out, "V {id} {cost}").unwrap();
            }
        }
    }
    for op in &w.ops {
        match *op {
            UpdateOp::Insert(e) => writeln!(out, "+ {e}"),
            UpdateOp::Delete(e) => writeln!(out, "- {e}"),
            UpdateOp::InsertEdge(u, v) => writeln!(out, "+ {u} {v}"),
            UpdateOp::DeleteEdge(u, v) => writeln!(out, "- {u} {v}"),
        }
        .unwrap();
    }
    out
}

struct Fields<'a> {
    line: usize,
    it: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, msg: msg.into() }
    }

    fn next<T: FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let tok = self.it.next().ok_or_else(|| self.err(format!("missing {what}")))?;
        tok.parse().map_err(|_| self.err(format!("bad {what} `{tok}`")))
    }

    fn rest<T: FromStr>(&mut self, what: &str) -> Result<Vec<T>, ParseError> {
        let line = self.line;
        self.it
            .by_ref()
            .map(|tok| tok.parse().map_err(|_| ParseError { line, msg: format!("bad {what} `{tok}`") }))
            .collect()
    }

    fn done(&mut self) -> Result<(), ParseError> {
        match self.it.next() {
            Some(tok) => Err(self.err(format!("unexpected `{tok}`"))),
            None => Ok(()),
        }
    }
}

enum Kind {
    SetCover { n: u32, m: u32, sets: Vec<(f64, Vec<u32>)> },
    DomSet { n: u32, costs: Vec<f64> },
}

pub fn parse(text: &str) -> Result<Parsed, ParseError> {
    let (mut tag, mut seed, mut beta) = (String::new(), None, None);
    let mut header: Option<(Header, Kind)> = None;
    let mut ops = Vec::new();
    let mut op_lines = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let err = |msg: String| ParseError { line, msg };
        if let Some(comment) = raw.trim_start().strip_prefix('#') {
            let comment = comment.trim_start();
            if let Some(v) = comment.strip_prefix("tag:") {
                tag = v.trim().to_string();
            } else if let Some(v) = comment.strip_prefix("seed:") {
                seed = Some(v.trim().parse().map_err(|_| err(format!("bad seed `{}`", v.trim())))?);
            } else if let Some(v) = comment.strip_prefix("beta:") {
                beta = Some(v.trim().parse().map_err(|_| err(format!("bad beta `{}`", v.trim())))?);
            }
            continue;
        }
        let mut f = Fields { line, it: raw.split_ascii_whitespace() };
        let Some(head) = f.it.next() else { continue };
        match (head, &mut header) {
            ("SC", None) => {
                let (n, m, freq) = (f.next("n")?, f.next("m")?, f.next("f")?);
                let (c_ratio, eps_hint) = (f.next("C")?, f.next("eps_hint")?);
                f.done()?;
                let h = Header { n, m, f: freq, c_ratio, eps_hint };
                header = Some((h, Kind::SetCover { n, m, sets: Vec::new() }));
            }
            ("DS", None) => {
                let (n, delta, c_ratio, eps_hint) = (f.next("n")?, f.next("Delta")?, f.next("C")?, f.next("eps_hint")?);
                f.done()?;
                let h = Header { n, m: n, f: delta, c_ratio, eps_hint };
                header = Some((h, Kind::DomSet { n, costs: Vec::new() }));
            }
            ("SC" | "DS", Some(_)) => return Err(err("second header".into())),
            (_, None) => return Err(err("expected an `SC` or `DS` header first".into())),
            ("S", Some((_, Kind::SetCover { n, m, sets }))) => {
                let id: u32 = f.next("set id")?;
                if !ops.is_empty() {
                    return Err(err("set line after the first op".into()));
                }
                if id as usize != sets.len() || id >= *m {
                    return Err(err(format!("set id {id} out of order (expected {})", sets.len())));
                }
                let cost: f64 = f.next("cost")?;
                let members: Vec<u32> = f.rest("element")?;
                if let Some(&e) = members.iter().find(|&&e| e >= *n) {
                    return Err(err(format!("element {e} outside 0..{n}")));
                }
                sets.push((cost, members));
            }
            ("V", Some((_, Kind::DomSet { n, costs }))) => {
                let id: u32 = f.next("vertex id")?;
                if !ops.is_empty() {
                    return Err(err("vertex line after the first op".into()));
                }
                if id as usize != costs.len() || id >= *n {
                    return Err(err(format!("vertex id {id} out of order (expected {})", costs.len())));
                }
                costs.push(f.next("cost")?);
                f.done()?;
            }
            (sign @ ("+" | "-"), Some((_, kind))) => {
                let op = match kind {
                    Kind::SetCover { n, .. } => {
                        let e: u32 = f.next("element")?;
                        if e >= *n {
                            return Err(err(format!("element {e} outside 0..{n}")));
                        }
                        if sign == "+" {
                            UpdateOp::Insert(e)
                        } else {
                            UpdateOp::Delete(e)
                        }
                    }
                    Kind::DomSet { n, .. } => {
                        let (u, v): (u32, u32) = (f.next("vertex")?, f.next("vertex")?);
                        if u >= *n || v >= *n {
                            return Err(err(format!("edge ({u}, {v}) outside 0..{n}")));
                        }
                        if sign == "+" {
                            UpdateOp::InsertEdge(u, v)
                        } else {
                            UpdateOp::DeleteEdge(u, v)
                        }
                    }
                };
                f.done()?;
                ops.push(op);
                op_lines.push(line);
            }
            (other, Some(_)) => return Err(err(format!("unexpected line kind `{other}`"))),
        }
    }

    let last = text.lines().count().max(1);
    let Some((header, kind)) = header else {
        return Err(ParseError { line: last, msg: "missing header".into() });
    };
    let instance = match kind {
        Kind::SetCover { n, m, sets } => {
            if sets.len() != m as usize {
                return Err(ParseError { line: last, msg: format!("header declares {m} sets, found {}", sets.len()) });
            }
            Instance::SetCover { n_elements: n, sets }
        }
        Kind::DomSet { n, costs } => {
            if costs.len() != n as usize {
                return Err(ParseError {
                    line: last,
                    msg: format!("header declares {n} vertices, found {}", costs.len()),
                });
            }
            Instance::DomSet { costs, max_degree: header.f }
        }
    };
    Ok(Parsed { workload: Workload { instance, header, ops, seed, tag, beta }, op_lines })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyncover_core::workloads::{lb_domset, lb_setcover, random_ds, random_sc};

    #[test]
    fn generated_files_round_trip() {
        let ws = [
            random_sc(30, 20, 3, 16.0, 200, 0.3, 7).unwrap(),
            random_ds(25, 4, 4.0, 200, 0.3, 3).unwrap(),
            lb_setcover(4).unwrap(),
            lb_domset(2).unwrap(),
        ];
        for w in ws {
            let text = to_text(&w);
            let parsed = parse(&text).unwrap();
            assert_eq!(parsed.workload, w);
            assert_eq!(to_text(&parsed.workload), text);
        }
    }

    #[test]
    fn hand_written_file() {
        let text = "# a comment\nSC 3 2 2 2 0.1\nS 0 1 0 1\nS 1 0.5 1 2\n\n+ 0\n+ 2\n- 0\n";
        let p = parse(text).unwrap();
        assert_eq!(p.workload.ops, vec![UpdateOp::Insert(0), UpdateOp::Insert(2), UpdateOp::Delete(0)]);
        assert_eq!(p.op_lines, vec![6, 7, 8]);
        assert_eq!(p.workload.seed, None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = [
            ("S 0 1 0\n", 1),
            ("SC 2 1 1 1 0.1\nS 0 1 0 5\n", 2),
            ("SC 2 1 1 1 0.1\nS 0 1 0 1\n+ x\n", 3),
            ("DS 2 1 1 0.1\nV 0 1\nV 1 1\n+ 0\n", 4),
            ("SC 2 2 1 1 0.1\nS 0 1 0 1\n", 2),
            ("DS 2 1 1 0.1\nV 1 1\n", 2),
        ];
        for (text, line) in bad {
            assert_eq!(parse(text).unwrap_err().line, line, "{text:?}");
        }
    }
}
