//! Branching program to garden-hose compilation.
//!
//! Layer `ℓ` of a width-`W` program that queries variable `v` gets `2W`
//! normalized copies of the leaf protocol for `v`: upper copies `0..W` and
//! lower copies `W..2W`. Each copy has three ports: its entry (`B₁` tap
//! pipe, Alice side), its 0-exit (`B₂` tap pipe, Alice side) and its 1-exit
//! (the extra pipe, Bob side). Water entering upper copy `j` leaves at the
//! exit for the leaf value `b`; the hose for the edge `j → k` on value `b`
//! carries it into the same exit of lower copy `k`, where it runs backwards
//! and comes out at the entry, which Alice hoses to upper copy `k` of the
//! next layer. Alice lays the 0-edges and Bob the 1-edges, so each player
//! needs only their own input. Sink edges get one extra pipe when the
//! water has to change sides: accept on 0 and reject on 1.
//!
//! Pipes of layer `ℓ` are numbered consecutively: the `2W` copies first,
//! then the sink pipes of the layer. Links are resolved lazily from this
//! layout, so no compiled matching is ever built.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::normalize::{bind_matching, normal_alice, normal_bob, NormalAlice};
use crate::bp::{LayerMaps, LayeredBranchingProgram, Target};
use crate::error::{Error, Result};
use crate::model::{End, Links, PipeId, Protocol, ProtocolMeta, Side, Strategy, Violation};

const NONE: u32 = u32::MAX;

/// Sink pipes of a layer: accept on 0 and reject on 1, in node order.
struct SinkTable {
    entries: Vec<(bool, u32)>,
    index: Vec<[u32; 2]>,
}

impl SinkTable {
    fn new(maps: &LayerMaps) -> SinkTable {
        let mut entries = Vec::new();
        let mut index = vec![[NONE; 2]; maps.width()];
        for j in 0..maps.width() as u32 {
            if maps.target(false, j) == Target::Accept {
                index[j as usize][0] = entries.len() as u32;
                entries.push((false, j));
            }
            if maps.target(true, j) == Target::Reject {
                index[j as usize][1] = entries.len() as u32;
                entries.push((true, j));
            }
        }
        SinkTable { entries, index }
    }
}

struct LayerInfo {
    var: usize,
    maps: Arc<LayerMaps>,
    sinks: Arc<SinkTable>,
    /// Pipes before this layer.
    base: u64,
    /// Pipes per normalized copy.
    copy: u32,
}

struct Layout {
    width: u32,
    start: u32,
    layers: Vec<LayerInfo>,
    bases: Vec<u64>,
    leaves: Vec<Option<Protocol>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    In,
    Out0,
}

#[derive(Clone, Copy, Debug)]
struct Port {
    layer: usize,
    copy: u32,
    kind: Kind,
}

impl Port {
    fn other(self) -> Port {
        let kind = match self.kind {
            Kind::In => Kind::Out0,
            Kind::Out0 => Kind::In,
        };
        Port { kind, ..self }
    }
}

enum Conn {
    Open,
    Tap,
    Pipe(u32),
    Port(Port),
}

enum Decoded {
    Copy {
        layer: usize,
        copy: u32,
        local: u32,
    },
    Sink {
        layer: usize,
        value: bool,
        node: u32,
    },
}

impl Layout {
    fn decode(&self, g: u32) -> Option<Decoded> {
        let l = self
            .bases
            .partition_point(|&b| b < g as u64)
            .checked_sub(1)?;
        let info = self.layers.get(l)?;
        let off = g as u64 - info.base - 1;
        let copies = 2 * self.width as u64 * info.copy as u64;
        if off < copies {
            Some(Decoded::Copy {
                layer: l,
                copy: (off / info.copy as u64) as u32,
                local: (off % info.copy as u64) as u32 + 1,
            })
        } else {
            let &(value, node) = info.sinks.entries.get((off - copies) as usize)?;
            Some(Decoded::Sink {
                layer: l,
                value,
                node,
            })
        }
    }

    fn global(&self, layer: usize, copy: u32, local: u32) -> u32 {
        let info = &self.layers[layer];
        (info.base + copy as u64 * info.copy as u64 + local as u64) as u32
    }

    fn sink_pipe(&self, layer: usize, value: bool, node: u32) -> u32 {
        let info = &self.layers[layer];
        let idx = info.sinks.index[node as usize][value as usize];
        (info.base + 2 * self.width as u64 * info.copy as u64 + idx as u64 + 1) as u32
    }

    fn extra(&self, layer: usize, copy: u32) -> u32 {
        self.global(layer, copy, self.layers[layer].copy)
    }
}

struct CompiledStrategy {
    side: Side,
    layout: Arc<Layout>,
    input_len: usize,
}

impl Strategy for CompiledStrategy {
    fn input_len(&self) -> usize {
        self.input_len
    }

    fn bind<'a>(&'a self, input: &'a [bool]) -> Box<dyn Links + 'a> {
        let layout = self.layout.as_ref();
        let mut violation = None;
        let mut bound = |leaf: &Protocol| {
            let strategy = match self.side {
                Side::Alice => leaf.alice(),
                Side::Bob => leaf.bob(),
            };
            match bind_matching(self.side, strategy.as_ref(), input, leaf.pipe_count()) {
                Ok(m) => Some(m),
                Err(v) => {
                    violation.get_or_insert(v);
                    None
                }
            }
        };
        match self.side {
            Side::Alice => {
                let leaves = layout
                    .leaves
                    .iter()
                    .map(|l| {
                        l.as_ref()
                            .and_then(|p| bound(p).map(|m| normal_alice(&m, p.pipe_count())))
                    })
                    .collect();
                Box::new(AliceLinks {
                    layout,
                    leaves,
                    violation,
                })
            }
            Side::Bob => {
                let leaves = layout
                    .leaves
                    .iter()
                    .map(|l| {
                        l.as_ref()
                            .and_then(|p| bound(p).map(|m| normal_bob(&m, p.pipe_count())))
                    })
                    .collect();
                Box::new(BobLinks {
                    layout,
                    leaves,
                    violation,
                })
            }
        }
    }
}

struct AliceLinks<'a> {
    layout: &'a Layout,
    leaves: Vec<Option<NormalAlice>>,
    violation: Option<Violation>,
}

impl AliceLinks<'_> {
    fn leaf(&self, layer: usize) -> Option<&NormalAlice> {
        self.leaves[self.layout.layers[layer].var].as_ref()
    }

    /// The pipe at a port, or `None` when the copy's tap is open and the
    /// port is only a pass-through point.
    fn real(&self, p: Port) -> Option<u32> {
        let leaf = self.leaf(p.layer)?;
        let local = match p.kind {
            Kind::In => leaf.entry,
            Kind::Out0 => leaf.spill0,
        }?;
        Some(self.layout.global(p.layer, p.copy, local))
    }

    fn partner(&self, p: Port) -> Conn {
        let lay = self.layout;
        let w = lay.width;
        let info = &lay.layers[p.layer];
        match (p.kind, p.copy < w) {
            (Kind::In, true) if p.layer == 0 => match p.copy == lay.start {
                true => Conn::Tap,
                false => Conn::Open,
            },
            (Kind::In, true) => Conn::Port(Port {
                layer: p.layer - 1,
                copy: w + p.copy,
                kind: Kind::In,
            }),
            (Kind::In, false) if p.layer + 1 < lay.layers.len() => Conn::Port(Port {
                layer: p.layer + 1,
                copy: p.copy - w,
                kind: Kind::In,
            }),
            (Kind::In, false) => Conn::Open,
            (Kind::Out0, true) => match info.maps.target(false, p.copy) {
                Target::Node(k) => Conn::Port(Port { copy: w + k, ..p }),
                Target::Accept => Conn::Pipe(lay.sink_pipe(p.layer, false, p.copy)),
                Target::Reject => Conn::Open,
            },
            (Kind::Out0, false) => match info.maps.source(false, p.copy - w) {
                Some(j) => Conn::Port(Port { copy: j, ..p }),
                None => Conn::Open,
            },
        }
    }

    /// Where the hose attached to the outside of `p` leads, skipping
    /// pass-through copies.
    fn follow(&self, mut p: Port) -> Option<End> {
        loop {
            match self.partner(p) {
                Conn::Open => return None,
                Conn::Tap => return Some(End::Tap),
                Conn::Pipe(g) => return Some(End::Pipe(PipeId::new(g))),
                Conn::Port(q) => match self.real(q) {
                    Some(g) => return Some(End::Pipe(PipeId::new(g))),
                    None => p = q.other(),
                },
            }
        }
    }

    /// What reaches a hose arriving at `p` from outside.
    fn enter(&self, p: Port) -> Option<End> {
        match self.real(p) {
            Some(g) => Some(End::Pipe(PipeId::new(g))),
            None => self.follow(p.other()),
        }
    }
}

impl Links for AliceLinks<'_> {
    fn link(&self, end: End) -> Option<End> {
        let g = match end {
            End::Tap => {
                return self.enter(Port {
                    layer: 0,
                    copy: self.layout.start,
                    kind: Kind::In,
                })
            }
            End::Pipe(p) => p.index() as u32,
        };
        match self.layout.decode(g)? {
            Decoded::Copy { layer, copy, local } => {
                let leaf = self.leaf(layer)?;
                let port = |kind| Port { layer, copy, kind };
                if leaf.entry == Some(local) {
                    self.follow(port(Kind::In))
                } else if leaf.spill0 == Some(local) {
                    self.follow(port(Kind::Out0))
                } else {
                    match leaf.partner[local as usize] {
                        0 => None,
                        q => Some(End::Pipe(PipeId::new(self.layout.global(layer, copy, q)))),
                    }
                }
            }
            Decoded::Sink {
                layer,
                value: false,
                node,
            } => self.enter(Port {
                layer,
                copy: node,
                kind: Kind::Out0,
            }),
            Decoded::Sink { value: true, .. } => None,
        }
    }

    fn check(&self) -> Result<(), Violation> {
        self.violation.clone().map_or(Ok(()), Err)
    }
}

struct BobLinks<'a> {
    layout: &'a Layout,
    leaves: Vec<Option<Vec<u32>>>,
    violation: Option<Violation>,
}

impl Links for BobLinks<'_> {
    fn link(&self, end: End) -> Option<End> {
        let lay = self.layout;
        let w = lay.width;
        let g = match end {
            End::Tap => return None,
            End::Pipe(p) => p.index() as u32,
        };
        let pipe = |g: u32| Some(End::Pipe(PipeId::new(g)));
        match lay.decode(g)? {
            Decoded::Copy { layer, copy, local } => {
                let info = &lay.layers[layer];
                if local == info.copy {
                    if copy < w {
                        match info.maps.target(true, copy) {
                            Target::Node(k) => pipe(lay.extra(layer, w + k)),
                            Target::Accept => None,
                            Target::Reject => pipe(lay.sink_pipe(layer, true, copy)),
                        }
                    } else {
                        info.maps
                            .source(true, copy - w)
                            .and_then(|j| pipe(lay.extra(layer, j)))
                    }
                } else {
                    match self.leaves[info.var].as_ref()?[local as usize] {
                        0 => None,
                        q => pipe(lay.global(layer, copy, q)),
                    }
                }
            }
            Decoded::Sink {
                layer,
                value: true,
                node,
            } => pipe(lay.extra(layer, node)),
            Decoded::Sink { value: false, .. } => None,
        }
    }

    fn check(&self) -> Result<(), Violation> {
        self.violation.clone().map_or(Ok(()), Err)
    }
}

/// Compile a complete loose permutation program over leaf protocols.
///
/// `leaves[v]` computes variable `v` of the program. All leaves read the
/// same global `(x, y)` and must agree on its lengths. Every leaf is
/// normalized, so the result has exactly
/// `Σ_layers 2W·(3·|leaf| + 1) + #sink pipes` pipes.
pub fn compile_pbp(
    bp: &LayeredBranchingProgram,
    leaves: &BTreeMap<usize, Protocol>,
) -> Result<Protocol> {
    bp.validate()?;
    if !bp.is_complete() {
        return Err(Error::MalformedProgram(
            "the last layer must send every node to a sink".into(),
        ));
    }
    let first = bp.layers()[0].var;
    let reference = leaves.get(&first).ok_or(Error::MissingLeaf(first))?;
    let (nx, ny) = (reference.alice_bits(), reference.bob_bits());
    let mut by_var: Vec<Option<Protocol>> = vec![None; bp.num_vars()];
    for layer in bp.layers() {
        if by_var[layer.var].is_some() {
            continue;
        }
        let leaf = leaves
            .get(&layer.var)
            .ok_or(Error::MissingLeaf(layer.var))?;
        if (leaf.alice_bits(), leaf.bob_bits()) != (nx, ny) {
            return Err(Error::LeafArityMismatch {
                var: layer.var,
                want_x: nx,
                want_y: ny,
                got_x: leaf.alice_bits(),
                got_y: leaf.bob_bits(),
            });
        }
        by_var[layer.var] = Some(leaf.clone());
    }

    let width = bp.width() as u64;
    let mut sink_cache: HashMap<usize, Arc<SinkTable>> = HashMap::new();
    let mut layers = Vec::with_capacity(bp.len());
    let mut bases = Vec::with_capacity(bp.len() + 1);
    let mut total = 0u64;
    let mut sink_count = 0u64;
    let mut max_leaf = 0;
    for layer in bp.layers() {
        let sinks = sink_cache
            .entry(Arc::as_ptr(&layer.maps) as usize)
            .or_insert_with(|| Arc::new(SinkTable::new(&layer.maps)))
            .clone();
        let raw = by_var[layer.var].as_ref().map_or(0, |p| p.pipe_count());
        max_leaf = max_leaf.max(raw);
        let copy = 3 * raw as u64 + 1;
        bases.push(total);
        layers.push(LayerInfo {
            var: layer.var,
            maps: layer.maps.clone(),
            sinks: sinks.clone(),
            base: total,
            copy: copy as u32,
        });
        total += 2 * width * copy + sinks.entries.len() as u64;
        sink_count += sinks.entries.len() as u64;
    }
    bases.push(total);
    if total >= u32::MAX as u64 {
        return Err(Error::CapExceeded {
            what: "compiled pipe count",
            value: total as usize,
            cap: u32::MAX as usize - 1,
        });
    }
    let layout = Arc::new(Layout {
        width: bp.width() as u32,
        start: bp.start(),
        layers,
        bases,
        leaves: by_var,
    });
    let meta = ProtocolMeta::named("pbp")
        .bound("size", total)
        .bound("width", width)
        .bound("layers", bp.len() as u64)
        .bound("sink_pipes", sink_count)
        .bound("max_leaf_raw", max_leaf as u64)
        .bound("max_leaf_normalized", 3 * max_leaf as u64 + 1);
    Ok(Protocol::new(
        total as usize,
        Arc::new(CompiledStrategy {
            side: Side::Alice,
            layout: layout.clone(),
            input_len: nx,
        }),
        Arc::new(CompiledStrategy {
            side: Side::Bob,
            layout,
            input_len: ny,
        }),
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::index_to_bits;
    use crate::bp::{gate_pbp, GateKind, Layer};
    use crate::compile::{alice_literal, and_pair_leaf, bob_literal};
    use crate::model::evaluate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xor_of_literals() {
        let bp = gate_pbp(GateKind::Xor, 2).unwrap();
        let leaves = BTreeMap::from([(0, alice_literal(1, 1, 0)), (1, bob_literal(1, 1, 0))]);
        let p = compile_pbp(&bp, &leaves).unwrap();
        for i in 0..4u64 {
            let (x, y) = ([i & 2 != 0], [i & 1 != 0]);
            assert_eq!(evaluate(&p, &x, &y).unwrap().output, x[0] ^ y[0]);
        }
        // two layers of width 2: 4 copies of 4 pipes and 4 of 7, no sink pipes
        // for accept-on-0 except (node 1, value 0) and reject-on-1 at node 1
        assert_eq!(p.pipe_count(), 4 * 4 + 4 * 7 + 2);
    }

    #[test]
    fn incomplete_program_is_rejected() {
        let maps = Arc::new(LayerMaps::from_permutation(&[0]).unwrap());
        let bp = LayeredBranchingProgram::new(1, 1, 0, vec![Layer { var: 0, maps }]).unwrap();
        let leaves = BTreeMap::from([(0, alice_literal(1, 0, 0))]);
        assert!(matches!(
            compile_pbp(&bp, &leaves),
            Err(Error::MalformedProgram(_))
        ));
    }

    #[test]
    fn missing_and_mismatched_leaves() {
        let bp = gate_pbp(GateKind::And, 2).unwrap();
        let only = BTreeMap::from([(0, alice_literal(1, 1, 0))]);
        assert_eq!(compile_pbp(&bp, &only).unwrap_err(), Error::MissingLeaf(1));
        let bad = BTreeMap::from([(0, alice_literal(1, 1, 0)), (1, alice_literal(2, 1, 0))]);
        assert!(matches!(
            compile_pbp(&bp, &bad),
            Err(Error::LeafArityMismatch { var: 1, .. })
        ));
    }

    fn random_loose_pbp(rng: &mut ChaCha8Rng, vars: usize) -> LayeredBranchingProgram {
        let width = rng.gen_range(1..=4usize);
        let len = rng.gen_range(1..=6usize);
        let mut layers = Vec::new();
        for l in 0..len {
            let mut edge = || {
                let mut perm: Vec<u32> = (0..width as u32).collect();
                for i in (1..width).rev() {
                    perm.swap(i, rng.gen_range(0..=i));
                }
                perm.iter()
                    .map(|&t| {
                        if l + 1 == len || rng.gen_bool(0.25) {
                            Target::sink(rng.gen_bool(0.5))
                        } else {
                            Target::Node(t)
                        }
                    })
                    .collect::<Vec<_>>()
            };
            let (e0, e1) = (edge(), edge());
            layers.push(Layer {
                var: rng.gen_range(0..vars),
                maps: Arc::new(LayerMaps::new(e0, e1).unwrap()),
            });
        }
        let start = rng.gen_range(0..width as u32);
        LayeredBranchingProgram::new(vars, width, start, layers).unwrap()
    }

    #[test]
    fn random_programs_match_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let (nx, ny) = (3, 3);
            let vars = 4;
            let leaves: BTreeMap<usize, Protocol> = (0..vars)
                .map(|v| {
                    let i = rng.gen_range(0..3);
                    let leaf = match rng.gen_range(0..3) {
                        0 => alice_literal(nx, ny, i),
                        1 => bob_literal(nx, ny, i),
                        _ => and_pair_leaf(nx, ny, i),
                    };
                    (v, leaf)
                })
                .collect();
            let bp = random_loose_pbp(&mut rng, vars);
            let p = compile_pbp(&bp, &leaves).unwrap();
            for i in 0..1u64 << (nx + ny) {
                let (x, y) = (index_to_bits(i >> ny, nx), index_to_bits(i & 7, ny));
                let assignment: Vec<bool> = (0..vars)
                    .map(|v| evaluate(&leaves[&v], &x, &y).unwrap().output)
                    .collect();
                assert_eq!(
                    evaluate(&p, &x, &y).unwrap().output,
                    bp.evaluate(&assignment).unwrap()
                );
            }
        }
    }
}
