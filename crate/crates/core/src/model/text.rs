//! Line-based instance format and DOT export.
//!
//! ```text
//! pipes 3
//! tap 1
//! A 2 3
//! B 1 2
//! ```
//!
//! `tap open` marks an unconnected tap. Blank lines and lines starting with
//! `#` are ignored by the parser; the writer never emits them.

use std::fmt::Write as _;

use super::{EvalTrace, Instance, Matching, PipeId};
use crate::error::{Error, Result};

pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "pipes {}", inst.pipe_count).unwrap();
    match inst.alice.tap() {
        Some(t) => writeln!(out, "tap {t}").unwrap(),
        None => writeln!(out, "tap open").unwrap(),
    }
    for (a, b) in inst.alice.normalized_pairs() {
        writeln!(out, "A {a} {b}").unwrap();
    }
    for (a, b) in inst.bob.normalized_pairs() {
        writeln!(out, "B {a} {b}").unwrap();
    }
    out
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut pipes = None;
    let mut tap_seen = false;
    let mut alice = Matching::new();
    let mut bob = Matching::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| err(format!("expected a pipe number, found {s:?}")))
        };
        match fields.as_slice() {
            ["pipes", n] => {
                if pipes.is_some() {
                    return Err(err("duplicate pipes line".into()));
                }
                pipes = Some(num(n)? as usize);
            }
            ["tap", "open"] => {
                if std::mem::replace(&mut tap_seen, true) {
                    return Err(err("duplicate tap line".into()));
                }
            }
            ["tap", t] => {
                if std::mem::replace(&mut tap_seen, true) {
                    return Err(err("duplicate tap line".into()));
                }
                alice.set_tap(Some(PipeId::new(num(t)?)));
            }
            ["A", a, b] => alice.push_pair(PipeId::new(num(a)?), PipeId::new(num(b)?)),
            ["B", a, b] => bob.push_pair(PipeId::new(num(a)?), PipeId::new(num(b)?)),
            _ => return Err(err(format!("unrecognized line {line:?}"))),
        }
    }
    let pipe_count = pipes.ok_or(Error::Parse {
        line: 0,
        message: "missing pipes line".into(),
    })?;
    Ok(Instance {
        pipe_count,
        alice,
        bob,
    })
}

/// Graphviz rendering: one node per pipe plus the tap. Alice's hoses are
/// blue, Bob's red; wet pipes are filled when a trace is supplied.
pub fn instance_to_dot(inst: &Instance, trace: Option<&EvalTrace>) -> String {
    let wet: std::collections::HashSet<PipeId> = trace
        .map(|t| t.path.iter().copied().collect())
        .unwrap_or_default();
    let mut out = String::from("graph garden_hose {\n  tap [shape=doublecircle];\n");
    for i in 1..=inst.pipe_count {
        let p = PipeId::from(i);
        if wet.contains(&p) {
            writeln!(
                out,
                "  p{i} [label=\"{i}\", style=filled, fillcolor=lightblue];"
            )
            .unwrap();
        } else {
            writeln!(out, "  p{i} [label=\"{i}\"];").unwrap();
        }
    }
    if let Some(t) = inst.alice.tap() {
        writeln!(out, "  tap -- p{t} [color=blue];").unwrap();
    }
    for (a, b) in inst.alice.normalized_pairs() {
        writeln!(out, "  p{a} -- p{b} [color=blue];").unwrap();
    }
    for (a, b) in inst.bob.normalized_pairs() {
        writeln!(out, "  p{a} -- p{b} [color=red];").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, Protocol};

    #[test]
    fn writer_output_is_exact() {
        let mut alice = Matching::with_tap(1);
        alice.pair(3, 2);
        let mut bob = Matching::new();
        bob.pair(1, 2);
        let inst = Instance {
            pipe_count: 3,
            alice,
            bob,
        };
        assert_eq!(write_instance(&inst), "pipes 3\ntap 1\nA 2 3\nB 1 2\n");
        let back = parse_instance(&write_instance(&inst)).unwrap();
        assert_eq!(back.alice.normalized_pairs(), inst.alice.normalized_pairs());
        assert_eq!(back.alice.tap(), inst.alice.tap());
    }

    #[test]
    fn open_tap_and_comments() {
        let inst = parse_instance("# x=0 y=1\npipes 2\ntap open\n\nB 1 2\n").unwrap();
        assert_eq!(inst.alice.tap(), None);
        assert_eq!(write_instance(&inst), "pipes 2\ntap open\nB 1 2\n");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(
            parse_instance("pipes 2\nC 1 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_instance("tap 1\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("pipes 2\nA 1 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn dot_highlights_wet_pipes() {
        let mut bob = Matching::new();
        bob.pair(1, 2);
        let inst = Instance {
            pipe_count: 3,
            alice: Matching::with_tap(1),
            bob,
        };
        let trace = evaluate(&Protocol::constant(inst.clone()), &[], &[]).unwrap();
        let dot = instance_to_dot(&inst, Some(&trace));
        assert!(dot.contains("p1 [label=\"1\", style=filled"));
        assert!(dot.contains("p3 [label=\"3\"];"));
        assert!(dot.contains("tap -- p1 [color=blue]"));
        assert!(dot.contains("p1 -- p2 [color=red]"));
    }
}
