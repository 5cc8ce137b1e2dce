use std::fmt;
use std::sync::Arc;

use super::{validate_matching, End, Matching, PipeId, Side, Violation};
use crate::error::{Error, Result};

/// The hose connections of one player after their input has been fixed.
///
/// `link` answers a local question (which end is this end hosed to?) so that
/// large compiled protocols never have to materialize a full matching.
pub trait Links {
    fn link(&self, end: End) -> Option<End>;

    /// Structural problems detected while binding; evaluation reports them.
    fn check(&self) -> Result<(), Violation> {
        Ok(())
    }
}

/// Maps a player's input to their hoses.
pub trait Strategy: Send + Sync {
    fn input_len(&self) -> usize;

    fn bind<'a>(&'a self, input: &'a [bool]) -> Box<dyn Links + 'a>;
}

/// Links backed by an explicit partner table (slot 0 is the tap).
pub struct TableLinks {
    table: Vec<Option<End>>,
    violation: Option<Violation>,
}

impl TableLinks {
    pub fn new(side: Side, m: &Matching, pipe_count: usize) -> Self {
        match validate_matching(side, m, pipe_count).into_iter().next() {
            Some(v) => TableLinks {
                table: vec![None; pipe_count + 1],
                violation: Some(v),
            },
            None => TableLinks {
                table: m.partner_table(pipe_count),
                violation: None,
            },
        }
    }
}

impl Links for TableLinks {
    fn link(&self, end: End) -> Option<End> {
        let slot = match end {
            End::Tap => 0,
            End::Pipe(p) => p.index(),
        };
        self.table.get(slot).copied().flatten()
    }

    fn check(&self) -> Result<(), Violation> {
        match &self.violation {
            Some(v) => Err(v.clone()),
            None => Ok(()),
        }
    }
}

/// A strategy given as a function from input to an explicit matching.
pub struct MatchingStrategy<F> {
    side: Side,
    input_len: usize,
    pipe_count: usize,
    connect: F,
}

impl<F> MatchingStrategy<F>
where
    F: Fn(&[bool]) -> Matching + Send + Sync,
{
    pub fn new(side: Side, input_len: usize, pipe_count: usize, connect: F) -> Self {
        MatchingStrategy {
            side,
            input_len,
            pipe_count,
            connect,
        }
    }
}

impl<F> Strategy for MatchingStrategy<F>
where
    F: Fn(&[bool]) -> Matching + Send + Sync,
{
    fn input_len(&self) -> usize {
        self.input_len
    }

    fn bind<'a>(&'a self, input: &'a [bool]) -> Box<dyn Links + 'a> {
        let m = (self.connect)(input);
        Box::new(TableLinks::new(self.side, &m, self.pipe_count))
    }
}

/// Where a protocol came from and what its builder promised.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProtocolMeta {
    pub construction: String,
    /// Declared bounds such as `("size", 25)` or `("time", 16)`.
    pub bounds: Vec<(String, u64)>,
}

impl ProtocolMeta {
    pub fn named(construction: impl Into<String>) -> Self {
        ProtocolMeta {
            construction: construction.into(),
            bounds: Vec::new(),
        }
    }

    pub fn bound(mut self, name: &str, value: u64) -> Self {
        self.bounds.push((name.to_string(), value));
        self
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.bounds.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// A garden-hose protocol: pipe count plus one strategy per player.
#[derive(Clone)]
pub struct Protocol {
    pipe_count: usize,
    alice: Arc<dyn Strategy>,
    bob: Arc<dyn Strategy>,
    pub meta: ProtocolMeta,
}

impl fmt::Debug for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Protocol")
            .field("pipe_count", &self.pipe_count)
            .field("alice_bits", &self.alice.input_len())
            .field("bob_bits", &self.bob.input_len())
            .field("meta", &self.meta)
            .finish()
    }
}

impl Protocol {
    pub fn new(
        pipe_count: usize,
        alice: Arc<dyn Strategy>,
        bob: Arc<dyn Strategy>,
        meta: ProtocolMeta,
    ) -> Self {
        Protocol {
            pipe_count,
            alice,
            bob,
            meta,
        }
    }

    /// Protocol from two explicit matching functions.
    pub fn from_fns<FA, FB>(
        pipe_count: usize,
        alice_bits: usize,
        bob_bits: usize,
        alice: FA,
        bob: FB,
        meta: ProtocolMeta,
    ) -> Self
    where
        FA: Fn(&[bool]) -> Matching + Send + Sync + 'static,
        FB: Fn(&[bool]) -> Matching + Send + Sync + 'static,
    {
        Protocol::new(
            pipe_count,
            Arc::new(MatchingStrategy::new(
                Side::Alice,
                alice_bits,
                pipe_count,
                alice,
            )),
            Arc::new(MatchingStrategy::new(Side::Bob, bob_bits, pipe_count, bob)),
            meta,
        )
    }

    pub fn pipe_count(&self) -> usize {
        self.pipe_count
    }

    pub fn alice_bits(&self) -> usize {
        self.alice.input_len()
    }

    pub fn bob_bits(&self) -> usize {
        self.bob.input_len()
    }

    pub fn alice(&self) -> &Arc<dyn Strategy> {
        &self.alice
    }

    pub fn bob(&self) -> &Arc<dyn Strategy> {
        &self.bob
    }

    pub(crate) fn check_inputs(&self, x: &[bool], y: &[bool]) -> Result<()> {
        if x.len() != self.alice_bits() {
            return Err(Error::InputLength {
                side: Side::Alice,
                expected: self.alice_bits(),
                got: x.len(),
            });
        }
        if y.len() != self.bob_bits() {
            return Err(Error::InputLength {
                side: Side::Bob,
                expected: self.bob_bits(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Alice's hoses on input `x` as an explicit matching.
    pub fn alice_matching(&self, x: &[bool]) -> Result<Matching> {
        self.materialize(Side::Alice, x)
    }

    pub fn bob_matching(&self, y: &[bool]) -> Result<Matching> {
        self.materialize(Side::Bob, y)
    }

    fn materialize(&self, side: Side, input: &[bool]) -> Result<Matching> {
        let strategy = match side {
            Side::Alice => &self.alice,
            Side::Bob => &self.bob,
        };
        materialize(side, strategy.as_ref(), input, self.pipe_count)
    }

    /// The full instance for one input pair.
    pub fn instance(&self, x: &[bool], y: &[bool]) -> Result<super::Instance> {
        Ok(super::Instance {
            pipe_count: self.pipe_count,
            alice: self.alice_matching(x)?,
            bob: self.bob_matching(y)?,
        })
    }

    /// A protocol that ignores its inputs and always plays `inst`.
    pub fn constant(inst: super::Instance) -> Protocol {
        let (a, b) = (inst.alice.clone(), inst.bob.clone());
        Protocol::from_fns(
            inst.pipe_count,
            0,
            0,
            move |_| a.clone(),
            move |_| b.clone(),
            ProtocolMeta::named("constant-instance"),
        )
    }
}

/// One player's hoses on `input` as an explicit matching, with symmetry
/// and range checks.
pub(crate) fn materialize(
    side: Side,
    strategy: &dyn Strategy,
    input: &[bool],
    pipe_count: usize,
) -> Result<Matching> {
    if input.len() != strategy.input_len() {
        return Err(Error::InputLength {
            side,
            expected: strategy.input_len(),
            got: input.len(),
        });
    }
    let links = strategy.bind(input);
    links.check().map_err(Error::InvalidInstance)?;
    let mut m = Matching::new();
    for i in 1..=pipe_count {
        let here = End::pipe(i);
        match links.link(here) {
            None => {}
            Some(End::Tap) => {
                if side == Side::Bob {
                    return Err(Error::InvalidInstance(Violation::BobTap { pipe: i }));
                }
                if links.link(End::Tap) != Some(here) {
                    return Err(Error::InvalidInstance(Violation::Asymmetric {
                        side,
                        pipe: i,
                    }));
                }
                m.set_tap(Some(PipeId::from(i)));
            }
            Some(End::Pipe(q)) => {
                if q.index() == 0 || q.index() > pipe_count {
                    return Err(Error::InvalidInstance(Violation::PipeOutOfRange {
                        side,
                        pipe: q.index(),
                    }));
                }
                if q.index() == i {
                    return Err(Error::InvalidInstance(Violation::SelfPair {
                        side,
                        pipe: i,
                    }));
                }
                if links.link(End::Pipe(q)) != Some(here) {
                    return Err(Error::InvalidInstance(Violation::Asymmetric {
                        side,
                        pipe: i,
                    }));
                }
                if i < q.index() {
                    m.pair(i, q.index());
                }
            }
        }
    }
    if side == Side::Alice && links.link(End::Tap).is_some() && m.tap().is_none() {
        return Err(Error::InvalidInstance(Violation::Asymmetric {
            side,
            pipe: 0,
        }));
    }
    Ok(m)
}
