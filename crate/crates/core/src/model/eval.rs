use super::{End, Links, PipeId, Protocol, Side, Violation};
use crate::bits::{ceil_log2, index_to_bits};
use crate::error::{Error, Result};

/// Default cap on `log₂` of the number of input pairs enumerated.
pub const DEFAULT_ENUM_GUARD: usize = 24;

/// The water path for one input pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalTrace {
    pub path: Vec<PipeId>,
    pub output: bool,
    pub wet_count: usize,
    pub spill_side: Side,
    /// Pipe names in the order the water crosses the boundary.
    pub transcript: Vec<PipeId>,
}

/// Follow the water from the tap.
///
/// Every hop is checked for range and symmetry, so a strategy that emits a
/// malformed matching produces `InvalidInstance` instead of a bogus path.
pub fn evaluate(p: &Protocol, x: &[bool], y: &[bool]) -> Result<EvalTrace> {
    p.check_inputs(x, y)?;
    let alice = p.alice().bind(x);
    let bob = p.bob().bind(y);
    alice.check().map_err(Error::InvalidInstance)?;
    bob.check().map_err(Error::InvalidInstance)?;
    let path = walk(p.pipe_count(), alice.as_ref(), bob.as_ref())?;
    let wet_count = path.len();
    let output = wet_count % 2 == 1;
    Ok(EvalTrace {
        transcript: path.clone(),
        path,
        output,
        wet_count,
        spill_side: if output { Side::Bob } else { Side::Alice },
    })
}

fn walk(pipe_count: usize, alice: &dyn Links, bob: &dyn Links) -> Result<Vec<PipeId>> {
    let mut path = Vec::new();
    let mut at = End::Tap;
    let mut side = Side::Alice;
    loop {
        let links = match side {
            Side::Alice => alice,
            Side::Bob => bob,
        };
        let next = match links.link(at) {
            None => return Ok(path),
            Some(End::Tap) => {
                let pipe = match at {
                    End::Pipe(p) => p.index(),
                    End::Tap => 0,
                };
                let v = match side {
                    Side::Bob => Violation::BobTap { pipe },
                    Side::Alice => Violation::Asymmetric { side, pipe },
                };
                return Err(Error::InvalidInstance(v));
            }
            Some(End::Pipe(q)) => q,
        };
        if next.index() == 0 || next.index() > pipe_count {
            return Err(Error::InvalidInstance(Violation::PipeOutOfRange {
                side,
                pipe: next.index(),
            }));
        }
        if at == End::Pipe(next) {
            return Err(Error::InvalidInstance(Violation::SelfPair {
                side,
                pipe: next.index(),
            }));
        }
        if links.link(End::Pipe(next)) != Some(at) {
            return Err(Error::InvalidInstance(Violation::Asymmetric {
                side,
                pipe: next.index(),
            }));
        }
        path.push(next);
        if path.len() > pipe_count {
            return Err(Error::InvalidInstance(Violation::Cycle));
        }
        at = End::Pipe(next);
        side = side.other();
    }
}

fn check_guard(bits: usize, guard: usize) -> Result<()> {
    if bits > guard || bits >= 63 {
        return Err(Error::DomainTooLarge { bits, limit: guard });
    }
    Ok(())
}

pub type InputPair = (Vec<bool>, Vec<bool>);

/// Largest wet-pipe count over all inputs, with a witnessing input pair.
pub fn max_time(p: &Protocol, guard_bits: usize) -> Result<(usize, InputPair)> {
    let (nx, ny) = (p.alice_bits(), p.bob_bits());
    check_guard(nx + ny, guard_bits)?;
    let mut best = (0, (index_to_bits(0, nx), index_to_bits(0, ny)));
    for xi in 0..1u64 << nx {
        let x = index_to_bits(xi, nx);
        for yi in 0..1u64 << ny {
            let y = index_to_bits(yi, ny);
            let t = evaluate(p, &x, &y)?;
            if t.wet_count > best.0 {
                best = (t.wet_count, (x.clone(), y));
            }
        }
    }
    Ok(best)
}

/// The round-by-round message sequence obtained by announcing each pipe the
/// water crosses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub messages: Vec<PipeId>,
    pub output: bool,
    /// `messages.len() · ⌈log₂ s⌉`
    pub bits: u64,
}

pub fn transcript_protocol(p: &Protocol, x: &[bool], y: &[bool]) -> Result<Transcript> {
    let trace = evaluate(p, x, y)?;
    let per_message = ceil_log2(p.pipe_count() as u64) as u64;
    Ok(Transcript {
        bits: trace.transcript.len() as u64 * per_message,
        output: trace.transcript.len() % 2 == 1,
        messages: trace.transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Matching, ProtocolMeta};

    fn fixed(pipes: usize, alice: Matching, bob: Matching) -> Protocol {
        Protocol::constant(crate::model::Instance {
            pipe_count: pipes,
            alice,
            bob,
        })
    }

    #[test]
    fn open_tap_outputs_zero() {
        let p = fixed(1, Matching::new(), Matching::new());
        let t = evaluate(&p, &[], &[]).unwrap();
        assert!(!t.output);
        assert_eq!(t.wet_count, 0);
        assert_eq!(t.spill_side, Side::Alice);
    }

    #[test]
    fn single_pipe_outputs_one() {
        let p = fixed(1, Matching::with_tap(1), Matching::new());
        let t = evaluate(&p, &[], &[]).unwrap();
        assert!(t.output);
        assert_eq!(t.wet_count, 1);
        assert_eq!(t.spill_side, Side::Bob);
    }

    #[test]
    fn bounce_back_outputs_zero() {
        let mut bob = Matching::new();
        bob.pair(1, 2);
        let p = fixed(2, Matching::with_tap(1), bob);
        let t = evaluate(&p, &[], &[]).unwrap();
        assert!(!t.output);
        assert_eq!(t.wet_count, 2);
        assert_eq!(t.spill_side, Side::Alice);
        assert_eq!(t.path, vec![PipeId::new(1), PipeId::new(2)]);

        let tr = transcript_protocol(&p, &[], &[]).unwrap();
        assert_eq!(tr.messages, vec![PipeId::new(1), PipeId::new(2)]);
        assert!(!tr.output);
        assert_eq!(tr.bits, 2);
    }

    #[test]
    fn transcript_of_open_tap_is_empty() {
        let p = fixed(3, Matching::new(), Matching::new());
        let tr = transcript_protocol(&p, &[], &[]).unwrap();
        assert!(tr.messages.is_empty());
        assert!(!tr.output);
    }

    #[test]
    fn malformed_matching_is_reported() {
        let mut alice = Matching::with_tap(1);
        alice.pair(1, 2);
        let p = fixed(2, alice, Matching::new());
        assert!(matches!(
            evaluate(&p, &[], &[]),
            Err(Error::InvalidInstance(Violation::PipeReused { .. }))
        ));
    }

    #[test]
    fn input_length_is_checked() {
        let p = Protocol::from_fns(
            1,
            2,
            1,
            |_| Matching::new(),
            |_| Matching::new(),
            ProtocolMeta::default(),
        );
        assert!(matches!(
            evaluate(&p, &[true], &[false]),
            Err(Error::InputLength {
                side: Side::Alice,
                ..
            })
        ));
    }

    #[test]
    fn max_time_of_constant_zero_is_zero() {
        let p = Protocol::from_fns(
            2,
            2,
            2,
            |_| Matching::new(),
            |_| Matching::new(),
            ProtocolMeta::default(),
        );
        assert_eq!(max_time(&p, DEFAULT_ENUM_GUARD).unwrap().0, 0);
        assert!(matches!(max_time(&p, 3), Err(Error::DomainTooLarge { .. })));
    }
}
