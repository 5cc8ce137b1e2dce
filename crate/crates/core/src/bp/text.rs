//! Plain-text dump of a branching program, one block per layer:
//!
//! ```text
//! bp vars 2 width 2 start 0 layers 2
//! layer 0 var 0
//! 0 0 1
//! 1 1 0
//! layer 1 var 1
//! 0 R A
//! 1 A R
//! ```
//!
//! Each node line is `node target-on-0 target-on-1`, with `A`/`R` for the
//! sinks.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::{Layer, LayerMaps, LayeredBranchingProgram, Target};
use crate::error::{Error, Result};

fn target_str(t: Target) -> String {
    match t {
        Target::Node(j) => j.to_string(),
        Target::Accept => "A".into(),
        Target::Reject => "R".into(),
    }
}

pub fn write_bp(bp: &LayeredBranchingProgram) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "bp vars {} width {} start {} layers {}",
        bp.num_vars(),
        bp.width(),
        bp.start(),
        bp.len()
    )
    .unwrap();
    for (i, layer) in bp.layers().iter().enumerate() {
        writeln!(out, "layer {i} var {}", layer.var).unwrap();
        for j in 0..bp.width() as u32 {
            writeln!(
                out,
                "{j} {} {}",
                target_str(layer.maps.target(false, j)),
                target_str(layer.maps.target(true, j))
            )
            .unwrap();
        }
    }
    out
}

pub fn parse_bp(text: &str) -> Result<LayeredBranchingProgram> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty program"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let num = |line: usize, s: &str| {
        s.parse::<usize>()
            .map_err(|_| err(line, "expected a number"))
    };
    let (vars, width, start, count) = match h.as_slice() {
        ["bp", "vars", v, "width", w, "start", s, "layers", l] => (
            num(hline, v)?,
            num(hline, w)?,
            num(hline, s)?,
            num(hline, l)?,
        ),
        _ => return Err(err(hline, "bad header")),
    };
    let parse_target = |line: usize, s: &str| match s {
        "A" => Ok(Target::Accept),
        "R" => Ok(Target::Reject),
        _ => num(line, s).map(|j| Target::Node(j as u32)),
    };
    let mut shared: HashMap<(Vec<Target>, Vec<Target>), Arc<LayerMaps>> = HashMap::new();
    let mut layers = Vec::with_capacity(count);
    for expect in 0..count {
        let (lline, l) = lines.next().ok_or_else(|| err(0, "missing layer"))?;
        let var = match l.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["layer", i, "var", v] if num(lline, i)? == expect => num(lline, v)?,
            _ => return Err(err(lline, "bad layer line")),
        };
        let (mut e0, mut e1) = (Vec::with_capacity(width), Vec::with_capacity(width));
        for node in 0..width {
            let (nline, nl) = lines.next().ok_or_else(|| err(0, "missing node line"))?;
            match nl.split_whitespace().collect::<Vec<_>>().as_slice() {
                [j, a, b] if num(nline, j)? == node => {
                    e0.push(parse_target(nline, a)?);
                    e1.push(parse_target(nline, b)?);
                }
                _ => return Err(err(nline, "bad node line")),
            }
        }
        let maps = match shared.get(&(e0.clone(), e1.clone())) {
            Some(m) => m.clone(),
            None => {
                let m = Arc::new(LayerMaps::new(e0.clone(), e1.clone())?);
                shared.insert((e0, e1), m.clone());
                m
            }
        };
        layers.push(Layer { var, maps });
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, "trailing content"));
    }
    LayeredBranchingProgram::new(vars, width, start as u32, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::{gate_pbp, GateKind};

    #[test]
    fn xor_dump_is_exact() {
        let bp = gate_pbp(GateKind::Xor, 2).unwrap();
        let text = write_bp(&bp);
        assert_eq!(
            text,
            "bp vars 2 width 2 start 0 layers 2\nlayer 0 var 0\n0 0 1\n1 1 0\nlayer 1 var 1\n0 R A\n1 A R\n"
        );
        let back = parse_bp(&text).unwrap();
        assert_eq!(write_bp(&back), text);
    }

    #[test]
    fn parse_rejects_bad_node_line() {
        let text = "bp vars 1 width 1 start 0 layers 1\nlayer 0 var 0\n0 R\n";
        assert!(matches!(parse_bp(text), Err(Error::Parse { line: 3, .. })));
    }
}
