//! Garden-hose model semantics.
//!
//! A protocol on `s` pipes is a pair of strategies. Given her input, Alice
//! pairs up pipe ends on her side and may attach the tap to one of them; Bob
//! pairs up ends on his side. Water leaves the tap and alternates between
//! Alice-side and Bob-side hoses until it reaches an open end. The output is
//! the parity of the number of pipes it went through, so water spilling on
//! Alice's side means 0 and on Bob's side means 1.

mod certificate;
mod eval;
mod strategy;
mod text;

use std::fmt;

pub use certificate::{check_certificate, CertificateSet, CertificateVerdict};
pub use eval::{
    evaluate, max_time, transcript_protocol, EvalTrace, Transcript, DEFAULT_ENUM_GUARD,
};
pub(crate) use strategy::materialize;
pub use strategy::{Links, MatchingStrategy, Protocol, ProtocolMeta, Strategy, TableLinks};
pub use text::{instance_to_dot, parse_instance, write_instance};

/// A pipe, numbered from 1. The tap is not a pipe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PipeId(u32);

impl PipeId {
    pub const fn new(index: u32) -> Self {
        PipeId(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for PipeId {
    fn from(index: usize) -> Self {
        PipeId(u32::try_from(index).expect("pipe index fits in u32"))
    }
}

impl fmt::Display for PipeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One endpoint on a player's side: the tap (Alice only) or a pipe end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum End {
    Tap,
    Pipe(PipeId),
}

impl End {
    pub fn pipe(index: usize) -> End {
        End::Pipe(PipeId::from(index))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Alice,
    Bob,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Alice => Side::Bob,
            Side::Bob => Side::Alice,
        }
    }
}

/// Hoses placed by one player. `tap` is only meaningful on Alice's side.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    pairs: Vec<(PipeId, PipeId)>,
    tap: Option<PipeId>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_tap(tap: usize) -> Self {
        Matching {
            pairs: Vec::new(),
            tap: Some(PipeId::from(tap)),
        }
    }

    pub fn set_tap(&mut self, tap: Option<PipeId>) {
        self.tap = tap;
    }

    pub fn pair(&mut self, a: usize, b: usize) {
        self.pairs.push((PipeId::from(a), PipeId::from(b)));
    }

    pub fn push_pair(&mut self, a: PipeId, b: PipeId) {
        self.pairs.push((a, b));
    }

    pub fn pairs(&self) -> &[(PipeId, PipeId)] {
        &self.pairs
    }

    pub fn tap(&self) -> Option<PipeId> {
        self.tap
    }

    /// Connect `a` to `b`; either may be the tap.
    pub fn connect(&mut self, a: End, b: End) {
        match (a, b) {
            (End::Tap, End::Pipe(p)) | (End::Pipe(p), End::Tap) => self.tap = Some(p),
            (End::Pipe(p), End::Pipe(q)) => self.pairs.push((p, q)),
            (End::Tap, End::Tap) => panic!("cannot connect the tap to itself"),
        }
    }

    /// Pairs in canonical order: each pair as (low, high), sorted.
    pub fn normalized_pairs(&self) -> Vec<(PipeId, PipeId)> {
        let mut out: Vec<_> = self
            .pairs
            .iter()
            .map(|&(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        out.sort();
        out
    }

    /// Partner table indexed by pipe number, slot 0 standing for the tap.
    /// Assumes the matching has already been validated.
    pub fn partner_table(&self, pipe_count: usize) -> Vec<Option<End>> {
        let mut table = vec![None; pipe_count + 1];
        if let Some(t) = self.tap {
            table[0] = Some(End::Pipe(t));
            table[t.index()] = Some(End::Tap);
        }
        for &(a, b) in &self.pairs {
            table[a.index()] = Some(End::Pipe(b));
            table[b.index()] = Some(End::Pipe(a));
        }
        table
    }
}

/// The hoses of both players for one fixed input pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub pipe_count: usize,
    pub alice: Matching,
    pub bob: Matching,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    PipeOutOfRange { side: Side, pipe: usize },
    SelfPair { side: Side, pipe: usize },
    PipeReused { side: Side, pipe: usize },
    BobTap { pipe: usize },
    Asymmetric { side: Side, pipe: usize },
    Cycle,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PipeOutOfRange { side, pipe } => {
                write!(f, "{side:?} uses pipe {pipe}, which is out of range")
            }
            Violation::SelfPair { side, pipe } => {
                write!(f, "{side:?} pairs pipe {pipe} with itself")
            }
            Violation::PipeReused { side, pipe } => write!(f, "{side:?} uses pipe {pipe} twice"),
            Violation::BobTap { pipe } => write!(f, "Bob attaches a tap to pipe {pipe}"),
            Violation::Asymmetric { side, pipe } => {
                write!(f, "{side:?} hose at pipe {pipe} is not symmetric")
            }
            Violation::Cycle => write!(f, "water path revisits a pipe"),
        }
    }
}

/// Check a single side's matching against the pipe range.
pub fn validate_matching(side: Side, m: &Matching, pipe_count: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut used = vec![false; pipe_count + 1];
    let mut touch = |p: PipeId, out: &mut Vec<Violation>| {
        let i = p.index();
        if i == 0 || i > pipe_count {
            out.push(Violation::PipeOutOfRange { side, pipe: i });
        } else if used[i] {
            out.push(Violation::PipeReused { side, pipe: i });
        } else {
            used[i] = true;
        }
    };
    if let Some(t) = m.tap {
        if side == Side::Bob {
            out.push(Violation::BobTap { pipe: t.index() });
        }
        touch(t, &mut out);
    }
    for &(a, b) in &m.pairs {
        if a == b {
            out.push(Violation::SelfPair {
                side,
                pipe: a.index(),
            });
            continue;
        }
        touch(a, &mut out);
        touch(b, &mut out);
    }
    out
}

/// Every violated invariant of the instance; empty when valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = validate_matching(Side::Alice, &inst.alice, inst.pipe_count);
    out.extend(validate_matching(Side::Bob, &inst.bob, inst.pipe_count));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tap_and_pair_on_same_pipe_is_reuse() {
        let mut alice = Matching::with_tap(1);
        alice.pair(1, 2);
        let inst = Instance {
            pipe_count: 2,
            alice,
            bob: Matching::new(),
        };
        assert_eq!(
            validate_instance(&inst),
            vec![Violation::PipeReused {
                side: Side::Alice,
                pipe: 1
            }]
        );
    }

    #[test]
    fn valid_two_pipe_instance() {
        let mut bob = Matching::new();
        bob.pair(1, 2);
        let inst = Instance {
            pipe_count: 2,
            alice: Matching::with_tap(1),
            bob,
        };
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn self_pair_and_range() {
        let mut bob = Matching::new();
        bob.pair(1, 1);
        let inst = Instance {
            pipe_count: 1,
            alice: Matching::new(),
            bob,
        };
        assert_eq!(
            validate_instance(&inst),
            vec![Violation::SelfPair {
                side: Side::Bob,
                pipe: 1
            }]
        );

        let mut alice = Matching::with_tap(3);
        alice.pair(0, 1);
        let inst = Instance {
            pipe_count: 2,
            alice,
            bob: Matching::with_tap(1),
        };
        let v = validate_instance(&inst);
        assert!(v.contains(&Violation::PipeOutOfRange {
            side: Side::Alice,
            pipe: 3
        }));
        assert!(v.contains(&Violation::PipeOutOfRange {
            side: Side::Alice,
            pipe: 0
        }));
        assert!(v.contains(&Violation::BobTap { pipe: 1 }));
    }
}
