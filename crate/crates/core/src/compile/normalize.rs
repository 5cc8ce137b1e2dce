//! Single-spill normalization.
//!
//! A protocol on `s` pipes becomes one on `3s + 1` pipes laid out as three
//! blocks `B₁ = 1..=s`, `B₂ = s+1..=2s`, `B₃ = 2s+1..=3s` and one extra pipe
//! `3s + 1`. Both players replicate their hoses in every block. The water
//! runs the original path in `B₁`. Where Alice would leave a pipe open she
//! hoses it to its copy in `B₂`, where the path runs backwards and ends at
//! `B₂`'s copy of the tap pipe, which Alice leaves open. Where Bob would
//! leave a pipe open he hoses it to its copy in `B₃`; the reversed path
//! ends at `B₃`'s tap pipe, which Alice hoses to the extra pipe, which Bob
//! leaves open. So the water spills either at `B₂`'s tap pipe on Alice's
//! side (output 0) or at the extra pipe on Bob's side (output 1).
//!
//! When Alice leaves the tap of the original open, no water enters at all.
//! The entry and the 0-spill then coincide at the tap itself, which is why
//! both are reported per input.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{
    materialize, End, Links, Matching, PipeId, Protocol, ProtocolMeta, Side, Strategy, TableLinks,
    Violation,
};

/// Alice's side of a normalized copy, as local partner slots over
/// `1..=3s+1` (0 means open).
#[derive(Clone, Debug)]
pub(crate) struct NormalAlice {
    pub partner: Vec<u32>,
    /// `B₁` tap pipe, hosed to whatever feeds the copy.
    pub entry: Option<u32>,
    /// `B₂` tap pipe, open in the stand-alone protocol.
    pub spill0: Option<u32>,
}

pub(crate) fn normal_alice(base: &Matching, s: usize) -> NormalAlice {
    let s32 = s as u32;
    let n = 3 * s + 1;
    let mut partner = vec![0u32; n + 1];
    let mut used = vec![false; s + 1];
    for &(a, b) in base.pairs() {
        used[a.index()] = true;
        used[b.index()] = true;
        for block in 0..3 {
            let (a, b) = (
                a.index() as u32 + block * s32,
                b.index() as u32 + block * s32,
            );
            partner[a as usize] = b;
            partner[b as usize] = a;
        }
    }
    let tap = base.tap().map(|t| t.index() as u32);
    if let Some(t) = tap {
        used[t as usize] = true;
        let (b3, extra) = (t + 2 * s32, n as u32);
        partner[b3 as usize] = extra;
        partner[extra as usize] = b3;
    }
    for p in 1..=s32 {
        if !used[p as usize] {
            partner[p as usize] = p + s32;
            partner[(p + s32) as usize] = p;
        }
    }
    NormalAlice {
        partner,
        entry: tap,
        spill0: tap.map(|t| t + s32),
    }
}

/// Bob's side of a normalized copy; the extra pipe stays open.
pub(crate) fn normal_bob(base: &Matching, s: usize) -> Vec<u32> {
    let s32 = s as u32;
    let mut partner = vec![0u32; 3 * s + 2];
    let mut used = vec![false; s + 1];
    for &(a, b) in base.pairs() {
        used[a.index()] = true;
        used[b.index()] = true;
        for block in 0..3 {
            let (a, b) = (
                a.index() as u32 + block * s32,
                b.index() as u32 + block * s32,
            );
            partner[a as usize] = b;
            partner[b as usize] = a;
        }
    }
    for p in 1..=s32 {
        if !used[p as usize] {
            partner[p as usize] = p + 2 * s32;
            partner[(p + 2 * s32) as usize] = p;
        }
    }
    partner
}

fn to_matching(partner: &[u32], tap: Option<u32>) -> Matching {
    let mut m = Matching::new();
    m.set_tap(tap.map(PipeId::new));
    for (a, &b) in partner.iter().enumerate() {
        if b != 0 && (a as u32) < b {
            m.pair(a, b as usize);
        }
    }
    m
}

/// A protocol whose water leaves only through `spill0` (Alice side,
/// output 0) or `spill1` (Bob side, output 1).
#[derive(Clone, Debug)]
pub struct NormalizedProtocol {
    pub protocol: Protocol,
    pub base: Protocol,
}

impl NormalizedProtocol {
    pub fn base_pipes(&self) -> usize {
        self.base.pipe_count()
    }

    /// The extra pipe, left open by Bob.
    pub fn spill1(&self) -> PipeId {
        PipeId::from(3 * self.base_pipes() + 1)
    }

    /// `B₁`'s tap pipe on input `x`, `None` when the tap is left open.
    pub fn tap_pipe(&self, x: &[bool]) -> Result<Option<PipeId>> {
        Ok(self.base.alice_matching(x)?.tap())
    }

    /// `B₂`'s tap pipe on input `x`, `None` when the tap is left open.
    pub fn spill0(&self, x: &[bool]) -> Result<Option<PipeId>> {
        let s = self.base_pipes();
        Ok(self.tap_pipe(x)?.map(|t| PipeId::from(t.index() + s)))
    }
}

struct NormalStrategy {
    side: Side,
    base: Arc<dyn Strategy>,
    s: usize,
}

impl Strategy for NormalStrategy {
    fn input_len(&self) -> usize {
        self.base.input_len()
    }

    fn bind<'a>(&'a self, input: &'a [bool]) -> Box<dyn Links + 'a> {
        let base = bind_matching(self.side, self.base.as_ref(), input, self.s);
        let m = match base {
            Err(v) => return Box::new(Broken(v)),
            Ok(base) => match self.side {
                Side::Alice => {
                    let a = normal_alice(&base, self.s);
                    to_matching(&a.partner, a.entry)
                }
                Side::Bob => to_matching(&normal_bob(&base, self.s), None),
            },
        };
        Box::new(TableLinks::new(self.side, &m, 3 * self.s + 1))
    }
}

pub(crate) struct Broken(pub Violation);

impl Links for Broken {
    fn link(&self, _: End) -> Option<End> {
        None
    }

    fn check(&self) -> Result<(), Violation> {
        Err(self.0.clone())
    }
}

/// One player's matching, with structural problems reported as a violation.
pub(crate) fn bind_matching(
    side: Side,
    strategy: &dyn Strategy,
    input: &[bool],
    pipe_count: usize,
) -> Result<Matching, Violation> {
    match materialize(side, strategy, input, pipe_count) {
        Ok(m) => Ok(m),
        Err(Error::InvalidInstance(v)) => Err(v),
        Err(e) => panic!("binding a checked strategy failed: {e}"),
    }
}

/// Rewire `p` so that it spills only at `spill0` or `spill1`. The result
/// has exactly `3s + 1` pipes and computes the same function.
pub fn normalize_single_spill(p: &Protocol) -> NormalizedProtocol {
    let s = p.pipe_count();
    let meta = ProtocolMeta::named(format!("normalized({})", p.meta.construction))
        .bound("size", 3 * s as u64 + 1)
        .bound("raw_size", s as u64);
    let protocol = Protocol::new(
        3 * s + 1,
        Arc::new(NormalStrategy {
            side: Side::Alice,
            base: p.alice().clone(),
            s,
        }),
        Arc::new(NormalStrategy {
            side: Side::Bob,
            base: p.bob().clone(),
            s,
        }),
        meta,
    );
    NormalizedProtocol {
        protocol,
        base: p.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate;

    fn eq1() -> Protocol {
        Protocol::from_fns(
            3,
            1,
            1,
            |x| Matching::with_tap(if x[0] { 2 } else { 1 }),
            |y| {
                let mut m = Matching::new();
                if y[0] {
                    m.pair(1, 3)
                } else {
                    m.pair(2, 3)
                }
                m
            },
            ProtocolMeta::named("eq1"),
        )
    }

    fn zero_or_tap_open() -> Protocol {
        Protocol::from_fns(
            2,
            1,
            1,
            |x| match x[0] {
                true => Matching::with_tap(1),
                false => Matching::new(),
            },
            |_| Matching::new(),
            ProtocolMeta::named("x1"),
        )
    }

    #[test]
    fn eq1_normalizes_to_ten_pipes_and_keeps_outputs() {
        let p = eq1();
        let n = normalize_single_spill(&p);
        assert_eq!(n.protocol.pipe_count(), 10);
        assert_eq!(n.spill1(), PipeId::new(10));
        for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
            let (x, y) = ([x], [y]);
            let base = evaluate(&p, &x, &y).unwrap();
            let norm = evaluate(&n.protocol, &x, &y).unwrap();
            assert_eq!(base.output, norm.output);
            let last = *norm.path.last().unwrap();
            let expect = if norm.output {
                n.spill1()
            } else {
                n.spill0(&x).unwrap().unwrap()
            };
            assert_eq!(last, expect);
        }
    }

    #[test]
    fn open_tap_stays_dry() {
        let n = normalize_single_spill(&zero_or_tap_open());
        assert_eq!(n.protocol.pipe_count(), 7);
        let t = evaluate(&n.protocol, &[false], &[false]).unwrap();
        assert!(!t.output && t.path.is_empty());
        assert_eq!(n.spill0(&[false]).unwrap(), None);
        let t = evaluate(&n.protocol, &[true], &[false]).unwrap();
        assert!(t.output);
        assert_eq!(*t.path.last().unwrap(), n.spill1());
    }

    #[test]
    fn spill_ends_are_open_on_their_sides() {
        let p = eq1();
        let n = normalize_single_spill(&p);
        for v in [false, true] {
            let a = n.protocol.alice_matching(&[v]).unwrap();
            let b = n.protocol.bob_matching(&[v]).unwrap();
            let s0 = n.spill0(&[v]).unwrap().unwrap();
            assert!(a.pairs().iter().all(|&(p, q)| p != s0 && q != s0));
            assert!(b
                .pairs()
                .iter()
                .all(|&(p, q)| p != n.spill1() && q != n.spill1()));
        }
    }
}
