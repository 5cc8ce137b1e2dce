//! Layered branching programs with per-value edge maps.
//!
//! All node layers of a program have the same width. Layer `ℓ` queries one
//! variable and maps every node of node-layer `ℓ` either to a node of
//! node-layer `ℓ + 1` or to one of the two sinks. Edge maps are shared
//! through `Arc`, so long programs that repeat a few distinct layers (the
//! modulus boxes of the majority construction) stay small in memory.
//!
//! A program is a permutation program when, for each layer and each value,
//! no two nodes are sent to the same next-layer node. It is strict when sink
//! edges only leave the last layer. Several nodes may share a sink.

mod majority;
mod text;

use std::sync::Arc;

pub use majority::{
    divider_stage, majority_pbp, reverse_merge, threshold_pbp, DividerStage, MajorityReport,
    MergeClass, NodeClass, StageInfo,
};
pub use text::{parse_bp, write_bp};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Node(u32),
    Accept,
    Reject,
}

impl Target {
    pub fn sink(accept: bool) -> Target {
        if accept {
            Target::Accept
        } else {
            Target::Reject
        }
    }

    pub fn is_sink(self) -> bool {
        !matches!(self, Target::Node(_))
    }
}

/// Both edge maps of one layer together with their inverses on nodes.
#[derive(Debug, PartialEq, Eq)]
pub struct LayerMaps {
    edges: [Vec<Target>; 2],
    inverse: [Vec<Option<u32>>; 2],
}

impl LayerMaps {
    /// Fails if a map is not injective on node targets or points outside
    /// the width.
    pub fn new(edge0: Vec<Target>, edge1: Vec<Target>) -> Result<Self> {
        let width = edge0.len();
        if edge1.len() != width {
            return Err(Error::MalformedProgram(format!(
                "edge maps have lengths {} and {}",
                width,
                edge1.len()
            )));
        }
        let mut inverse = [vec![None; width], vec![None; width]];
        for (b, map) in [&edge0, &edge1].into_iter().enumerate() {
            for (from, t) in map.iter().enumerate() {
                if let Target::Node(to) = *t {
                    let slot = inverse[b].get_mut(to as usize).ok_or_else(|| {
                        Error::MalformedProgram(format!("edge {from} -> {to} leaves width {width}"))
                    })?;
                    if slot.replace(from as u32).is_some() {
                        return Err(Error::MalformedProgram(format!(
                            "two {b}-edges enter node {to}"
                        )));
                    }
                }
            }
        }
        Ok(LayerMaps {
            edges: [edge0, edge1],
            inverse,
        })
    }

    /// Both values follow the same bijection.
    pub fn from_permutation(perm: &[u32]) -> Result<Self> {
        let map: Vec<Target> = perm.iter().map(|&j| Target::Node(j)).collect();
        LayerMaps::new(map.clone(), map)
    }

    pub fn width(&self) -> usize {
        self.edges[0].len()
    }

    pub fn target(&self, value: bool, node: u32) -> Target {
        self.edges[value as usize][node as usize]
    }

    pub fn edges(&self, value: bool) -> &[Target] {
        &self.edges[value as usize]
    }

    /// The node sending its `value`-edge into `node`, if any.
    pub fn source(&self, value: bool, node: u32) -> Option<u32> {
        self.inverse[value as usize][node as usize]
    }

    pub fn has_sink_edges(&self) -> bool {
        self.edges.iter().flatten().any(|t| t.is_sink())
    }

    pub fn is_bijective(&self) -> bool {
        self.inverse.iter().flatten().all(Option::is_some)
    }

    /// Replace every node target `j` with `post(j)`.
    pub fn then(&self, post: impl Fn(u32) -> Target) -> Result<LayerMaps> {
        let map = |v: &Vec<Target>| {
            v.iter()
                .map(|&t| match t {
                    Target::Node(j) => post(j),
                    sink => sink,
                })
                .collect::<Vec<_>>()
        };
        LayerMaps::new(map(&self.edges[0]), map(&self.edges[1]))
    }
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub var: usize,
    pub maps: Arc<LayerMaps>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermutationKind {
    Strict,
    Loose,
}

#[derive(Clone, Debug)]
pub struct LayeredBranchingProgram {
    num_vars: usize,
    width: usize,
    start: u32,
    layers: Vec<Layer>,
}

impl LayeredBranchingProgram {
    pub fn new(num_vars: usize, width: usize, start: u32, layers: Vec<Layer>) -> Result<Self> {
        let bp = LayeredBranchingProgram {
            num_vars,
            width,
            start,
            layers,
        };
        bp.validate()?;
        Ok(bp)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Nodes with outgoing edges plus the two sinks.
    pub fn size(&self) -> u64 {
        self.width as u64 * self.layers.len() as u64 + 2
    }

    /// Structural checks: widths, variable range, injectivity.
    pub fn validate(&self) -> Result<PermutationKind> {
        if self.start as usize >= self.width {
            return Err(Error::MalformedProgram(format!(
                "start node {} outside width {}",
                self.start, self.width
            )));
        }
        let mut kind = PermutationKind::Strict;
        let last = self.layers.len().saturating_sub(1);
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.maps.width() != self.width {
                return Err(Error::MalformedProgram(format!(
                    "layer {i} has width {}, program width is {}",
                    layer.maps.width(),
                    self.width
                )));
            }
            if layer.var >= self.num_vars {
                return Err(Error::MalformedProgram(format!(
                    "layer {i} queries variable {} of {}",
                    layer.var, self.num_vars
                )));
            }
            if i != last && layer.maps.has_sink_edges() {
                kind = PermutationKind::Loose;
            }
        }
        Ok(kind)
    }

    /// True when the last layer only points at sinks, so every path ends
    /// in a sink.
    pub fn is_complete(&self) -> bool {
        self.layers.last().is_some_and(|l| {
            l.maps
                .edges(false)
                .iter()
                .chain(l.maps.edges(true))
                .all(|t| t.is_sink())
        })
    }

    /// Follow `assignment` from `node`. Returns the sink reached, or the
    /// bottom-layer node if the path never left the program.
    pub fn run_from(&self, node: u32, assignment: &[bool]) -> Target {
        let mut at = Target::Node(node);
        for layer in &self.layers {
            match at {
                Target::Node(j) => at = layer.maps.target(assignment[layer.var], j),
                _ => break,
            }
        }
        at
    }

    /// Run from the start node and report whether the accept sink is reached.
    pub fn evaluate(&self, assignment: &[bool]) -> Result<bool> {
        if assignment.len() != self.num_vars {
            return Err(Error::MalformedProgram(format!(
                "assignment has {} bits, program reads {}",
                assignment.len(),
                self.num_vars
            )));
        }
        match self.run_from(self.start, assignment) {
            Target::Accept => Ok(true),
            Target::Reject => Ok(false),
            Target::Node(j) => Err(Error::MalformedProgram(format!(
                "path ends at bottom node {j} instead of a sink"
            ))),
        }
    }

    /// Turn bottom nodes into sinks: node `j` goes to accept iff `labels[j]`.
    pub fn with_bottom_sinks(&self, labels: &[bool]) -> Result<Self> {
        let mut layers = self.layers.clone();
        let last = layers
            .last_mut()
            .ok_or_else(|| Error::MalformedProgram("program has no layers".into()))?;
        last.maps = Arc::new(last.maps.then(|j| Target::sink(labels[j as usize]))?);
        LayeredBranchingProgram::new(self.num_vars, self.width, self.start, layers)
    }
}

/// Extend a partial injective map on `0..width` to a bijection, filling
/// unassigned sources with the unused targets in increasing order.
pub fn complete_permutation(partial: &[Option<u32>]) -> Vec<u32> {
    let width = partial.len();
    let mut used = vec![false; width];
    for t in partial.iter().flatten() {
        debug_assert!(!used[*t as usize], "partial map is not injective");
        used[*t as usize] = true;
    }
    let mut free = (0..width as u32).filter(|&t| !used[t as usize]);
    partial
        .iter()
        .map(|t| t.unwrap_or_else(|| free.next().expect("as many free targets as free sources")))
        .collect()
}

/// Width-`r` program of length `n` on variables `0..n`: value 1 rotates
/// `j -> j + 1 mod r`, value 0 stays. Started at `j`, an input of weight
/// `w` ends at `j + w mod r`. No sinks; the bottom layer is exposed.
pub fn mod_r_box(n: usize, r: usize) -> Result<LayeredBranchingProgram> {
    if n == 0 || r < 2 {
        return Err(Error::InvalidArgument(format!(
            "mod_r_box needs n >= 1 and r >= 2, got n={n}, r={r}"
        )));
    }
    let maps = Arc::new(rotation(r, r)?);
    let layers = (0..n)
        .map(|var| Layer {
            var,
            maps: maps.clone(),
        })
        .collect();
    LayeredBranchingProgram::new(n, r, 0, layers)
}

/// Value 1 rotates the first `r` nodes, everything else is the identity.
pub(crate) fn rotation(r: usize, width: usize) -> Result<LayerMaps> {
    let ident: Vec<Target> = (0..width as u32).map(Target::Node).collect();
    let rot: Vec<Target> = (0..width as u32)
        .map(|j| {
            if (j as usize) < r {
                Target::Node((j + 1) % r as u32)
            } else {
                Target::Node(j)
            }
        })
        .collect();
    LayerMaps::new(ident, rot)
}

/// Strict program of width `n + 1` accepting iff the weight is at least
/// `threshold`. Size is quadratic in `n`.
pub fn counter_threshold_pbp(n: usize, threshold: usize) -> Result<LayeredBranchingProgram> {
    if n == 0 || threshold > n {
        return Err(Error::InvalidArgument(format!(
            "counter needs 1 <= n and threshold <= n, got n={n}, threshold={threshold}"
        )));
    }
    let width = n + 1;
    let maps = Arc::new(rotation(width, width)?);
    let last = Arc::new(maps.then(|j| Target::sink(j as usize >= threshold))?);
    let layers = (0..n)
        .map(|var| Layer {
            var,
            maps: if var + 1 == n {
                last.clone()
            } else {
                maps.clone()
            },
        })
        .collect();
    LayeredBranchingProgram::new(n, width, 0, layers)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Xor,
}

/// Loose permutation programs for the fan-in-`arity` gates: AND and OR have
/// width 1 and exit early; XOR has width 2 and swaps on a 1.
pub fn gate_pbp(kind: GateKind, arity: usize) -> Result<LayeredBranchingProgram> {
    if arity == 0 {
        return Err(Error::InvalidArgument(
            "gate arity must be at least 1".into(),
        ));
    }
    let mut layers = Vec::with_capacity(arity);
    let (width, inner, last) = match kind {
        GateKind::And => (
            1,
            LayerMaps::new(vec![Target::Reject], vec![Target::Node(0)])?,
            LayerMaps::new(vec![Target::Reject], vec![Target::Accept])?,
        ),
        GateKind::Or => (
            1,
            LayerMaps::new(vec![Target::Node(0)], vec![Target::Accept])?,
            LayerMaps::new(vec![Target::Reject], vec![Target::Accept])?,
        ),
        GateKind::Xor => (
            2,
            LayerMaps::new(
                vec![Target::Node(0), Target::Node(1)],
                vec![Target::Node(1), Target::Node(0)],
            )?,
            LayerMaps::new(
                vec![Target::Reject, Target::Accept],
                vec![Target::Accept, Target::Reject],
            )?,
        ),
    };
    let (inner, last) = (Arc::new(inner), Arc::new(last));
    for var in 0..arity {
        let maps = if var + 1 == arity {
            last.clone()
        } else {
            inner.clone()
        };
        layers.push(Layer { var, maps });
    }
    LayeredBranchingProgram::new(arity, width, 0, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{index_to_bits, parse_bits, weight};

    #[test]
    fn counter_examples() {
        let bp = counter_threshold_pbp(2, 1).unwrap();
        assert!(bp.evaluate(&parse_bits("10").unwrap()).unwrap());
        let bp = counter_threshold_pbp(3, 2).unwrap();
        assert_eq!(bp.width(), 4);
        assert!(bp.evaluate(&parse_bits("101").unwrap()).unwrap());
        assert!(!bp.evaluate(&parse_bits("100").unwrap()).unwrap());
        assert_eq!(bp.validate().unwrap(), PermutationKind::Strict);
    }

    #[test]
    fn counter_is_threshold_exhaustively() {
        for n in 1..=8 {
            for t in 0..=n {
                let bp = counter_threshold_pbp(n, t).unwrap();
                for i in 0..1u64 << n {
                    let x = index_to_bits(i, n);
                    assert_eq!(bp.evaluate(&x).unwrap(), weight(&x) >= t);
                }
            }
        }
    }

    #[test]
    fn mod_box_translation() {
        let b = mod_r_box(4, 3).unwrap();
        assert_eq!(b.run_from(1, &parse_bits("0110").unwrap()), Target::Node(0));
        let b = mod_r_box(1, 2).unwrap();
        assert_eq!(b.run_from(0, &[true]), Target::Node(1));
        for layer in mod_r_box(5, 4).unwrap().layers() {
            assert!(layer.maps.is_bijective());
        }
    }

    #[test]
    fn mod_box_xor_rejects_even_weight() {
        let xor = mod_r_box(3, 2)
            .unwrap()
            .with_bottom_sinks(&[false, true])
            .unwrap();
        assert!(!xor.evaluate(&parse_bits("110").unwrap()).unwrap());
        assert!(xor.evaluate(&parse_bits("100").unwrap()).unwrap());
    }

    #[test]
    fn gate_examples() {
        let and = gate_pbp(GateKind::And, 3).unwrap();
        assert!(!and.evaluate(&parse_bits("110").unwrap()).unwrap());
        assert!(and.evaluate(&parse_bits("111").unwrap()).unwrap());
        assert_eq!(and.validate().unwrap(), PermutationKind::Loose);
        let or = gate_pbp(GateKind::Or, 3).unwrap();
        assert!(!or.evaluate(&parse_bits("000").unwrap()).unwrap());
        assert!(or.evaluate(&parse_bits("010").unwrap()).unwrap());
        let xor = gate_pbp(GateKind::Xor, 2).unwrap();
        assert!(xor.evaluate(&parse_bits("01").unwrap()).unwrap());
        assert!(!xor.evaluate(&parse_bits("11").unwrap()).unwrap());
    }

    #[test]
    fn gates_match_truth_exhaustively() {
        for d in 1..=6 {
            for i in 0..1u64 << d {
                let x = index_to_bits(i, d);
                let w = weight(&x);
                assert_eq!(
                    gate_pbp(GateKind::And, d).unwrap().evaluate(&x).unwrap(),
                    w == d
                );
                assert_eq!(
                    gate_pbp(GateKind::Or, d).unwrap().evaluate(&x).unwrap(),
                    w > 0
                );
                assert_eq!(
                    gate_pbp(GateKind::Xor, d).unwrap().evaluate(&x).unwrap(),
                    w % 2 == 1
                );
            }
        }
    }

    #[test]
    fn non_injective_maps_are_rejected() {
        let err = LayerMaps::new(
            vec![Target::Node(0), Target::Node(0)],
            vec![Target::Node(0), Target::Node(1)],
        );
        assert!(matches!(err, Err(Error::MalformedProgram(_))));
        let err = LayerMaps::new(vec![Target::Node(2)], vec![Target::Node(0)]);
        assert!(matches!(err, Err(Error::MalformedProgram(_))));
    }

    #[test]
    fn dangling_path_is_malformed() {
        let b = mod_r_box(2, 2).unwrap();
        assert!(matches!(
            b.evaluate(&[true, false]),
            Err(Error::MalformedProgram(_))
        ));
    }

    #[test]
    fn completion_fills_in_order() {
        assert_eq!(
            complete_permutation(&[None, Some(0), None, Some(3)]),
            vec![1, 0, 2, 3]
        );
    }
}
