//! Nondeterministic certificates: a guessed set of pipes checked locally by
//! each player. A consistent set contains the whole water path and otherwise
//! only alternating cycles, so its size has the parity of the output.

use std::collections::BTreeSet;

use super::{End, Instance, PipeId};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CertificateSet {
    pub pipes: BTreeSet<PipeId>,
}

impl CertificateSet {
    pub fn new<I: IntoIterator<Item = PipeId>>(pipes: I) -> Self {
        CertificateSet {
            pipes: pipes.into_iter().collect(),
        }
    }

    /// Subset of `1..=pipe_count` given by the low bits of `mask`.
    pub fn from_mask(mask: u64, pipe_count: usize) -> Self {
        CertificateSet::new(
            (1..=pipe_count)
                .filter(|i| mask >> (i - 1) & 1 == 1)
                .map(PipeId::from),
        )
    }

    pub fn len(&self) -> usize {
        self.pipes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pipes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateVerdict {
    /// Both players accept the set; the value is `|S| mod 2`.
    ConsistentParity(bool),
    Inconsistent,
}

/// Alice's and Bob's local consistency checks for `set`.
///
/// `inst` must be valid. The empty set is consistent exactly when the tap is
/// unconnected.
pub fn check_certificate(inst: &Instance, set: &CertificateSet) -> CertificateVerdict {
    let alice = inst.alice.partner_table(inst.pipe_count);
    let bob = inst.bob.partner_table(inst.pipe_count);
    if set.is_empty() {
        return if alice[0].is_none() {
            CertificateVerdict::ConsistentParity(false)
        } else {
            CertificateVerdict::Inconsistent
        };
    }
    let tap_pipe = match inst.alice.tap() {
        Some(t) if set.pipes.contains(&t) => t,
        _ => return CertificateVerdict::Inconsistent,
    };
    if set
        .pipes
        .iter()
        .any(|p| p.index() == 0 || p.index() > inst.pipe_count)
    {
        return CertificateVerdict::Inconsistent;
    }
    let inside = |e: Option<End>| match e {
        Some(End::Pipe(q)) => Some(set.pipes.contains(&q)),
        _ => None,
    };
    let mut alice_open = 0;
    for &p in set.pipes.iter().filter(|&&p| p != tap_pipe) {
        match inside(alice[p.index()]) {
            Some(true) => {}
            Some(false) => return CertificateVerdict::Inconsistent,
            None => alice_open += 1,
        }
    }
    let mut bob_open = 0;
    for &p in &set.pipes {
        match inside(bob[p.index()]) {
            Some(true) => {}
            Some(false) => return CertificateVerdict::Inconsistent,
            None => bob_open += 1,
        }
    }
    let odd = set.len() % 2 == 1;
    let ok = if odd {
        alice_open == 0 && bob_open == 1
    } else {
        alice_open == 1 && bob_open == 0
    };
    if ok {
        CertificateVerdict::ConsistentParity(odd)
    } else {
        CertificateVerdict::Inconsistent
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, Matching, Protocol};

    fn eq1_instance(x: bool, y: bool) -> Instance {
        // pipes: 1 = E0, 2 = E1, 3 = Z
        let alice = Matching::with_tap(if x { 2 } else { 1 });
        let mut bob = Matching::new();
        bob.pair(if y { 1 } else { 2 }, 3);
        Instance {
            pipe_count: 3,
            alice,
            bob,
        }
    }

    #[test]
    fn eq1_certificates() {
        let inst = eq1_instance(false, false);
        let s1 = CertificateSet::new([PipeId::new(1)]);
        assert_eq!(
            check_certificate(&inst, &s1),
            CertificateVerdict::ConsistentParity(true)
        );
        let all = CertificateSet::from_mask(0b111, 3);
        assert_eq!(
            check_certificate(&inst, &all),
            CertificateVerdict::Inconsistent
        );
    }

    #[test]
    fn empty_set_matches_open_tap() {
        let open = Instance {
            pipe_count: 2,
            alice: Matching::new(),
            bob: Matching::new(),
        };
        assert_eq!(
            check_certificate(&open, &CertificateSet::default()),
            CertificateVerdict::ConsistentParity(false)
        );
        assert_eq!(
            check_certificate(&eq1_instance(true, false), &CertificateSet::default()),
            CertificateVerdict::Inconsistent
        );
    }

    #[test]
    fn wet_set_is_consistent_with_output() {
        for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
            let inst = eq1_instance(x, y);
            let trace = evaluate(&Protocol::constant(inst.clone()), &[], &[]).unwrap();
            let wet = CertificateSet::new(trace.path.iter().copied());
            assert_eq!(
                check_certificate(&inst, &wet),
                CertificateVerdict::ConsistentParity(trace.output)
            );
        }
    }
}
