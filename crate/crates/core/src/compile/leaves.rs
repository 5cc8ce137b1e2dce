//! Atomic protocols over the global input `(x, y)` and the distributed
//! majority builder.

use std::collections::BTreeMap;

use super::compile_pbp;
use crate::bp::{counter_threshold_pbp, majority_pbp};
use crate::error::{Error, Result};
use crate::model::{Matching, Protocol, ProtocolMeta};

/// `x_i` on one pipe: the tap is hosed to pipe 1 iff `x_i = 1`.
pub fn alice_literal(nx: usize, ny: usize, i: usize) -> Protocol {
    assert!(i < nx, "Alice literal {i} out of {nx} bits");
    Protocol::from_fns(
        1,
        nx,
        ny,
        move |x| match x[i] {
            true => Matching::with_tap(1),
            false => Matching::new(),
        },
        |_| Matching::new(),
        ProtocolMeta::named(format!("x{}", i + 1)).bound("size", 1),
    )
}

/// `y_i` on two pipes: the water always reaches Bob at pipe 1; he leaves it
/// open iff `y_i = 1` and otherwise sends it back through pipe 2.
pub fn bob_literal(nx: usize, ny: usize, i: usize) -> Protocol {
    assert!(i < ny, "Bob literal {i} out of {ny} bits");
    Protocol::from_fns(
        2,
        nx,
        ny,
        |_| Matching::with_tap(1),
        move |y| bounce_unless(y[i]),
        ProtocolMeta::named(format!("y{}", i + 1)).bound("size", 2),
    )
}

/// `x_i ∧ y_i` on two pipes.
pub fn and_pair_leaf(nx: usize, ny: usize, i: usize) -> Protocol {
    assert!(i < nx && i < ny, "AND pair {i} out of ({nx}, {ny}) bits");
    Protocol::from_fns(
        2,
        nx,
        ny,
        move |x| match x[i] {
            true => Matching::with_tap(1),
            false => Matching::new(),
        },
        move |y| bounce_unless(y[i]),
        ProtocolMeta::named(format!("x{0}&y{0}", i + 1)).bound("size", 2),
    )
}

fn bounce_unless(open: bool) -> Matching {
    let mut m = Matching::new();
    if !open {
        m.pair(1, 2);
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmajVariant {
    /// Quadratic counter program.
    Counter,
    /// Quasi-linear divider-stage program.
    St97,
}

impl std::str::FromStr for DmajVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counter" => Ok(DmajVariant::Counter),
            "st97" => Ok(DmajVariant::St97),
            _ => Err(Error::InvalidArgument(format!(
                "unknown variant {s:?}, expected counter or st97"
            ))),
        }
    }
}

/// Distributed majority: 1 iff `Σ xᵢ·yᵢ ≥ n/2`.
pub fn build_dmaj(n: usize, variant: DmajVariant) -> Result<Protocol> {
    if n == 0 {
        return Err(Error::InvalidArgument("dmaj needs n >= 1".into()));
    }
    let bp = match variant {
        DmajVariant::Counter => counter_threshold_pbp(n, n.div_ceil(2))?,
        DmajVariant::St97 => majority_pbp(n)?,
    };
    let leaves: BTreeMap<usize, Protocol> = (0..n).map(|i| (i, and_pair_leaf(n, n, i))).collect();
    let mut p = compile_pbp(&bp, &leaves)?;
    let name = match variant {
        DmajVariant::Counter => "dmaj-counter",
        DmajVariant::St97 => "dmaj-st97",
    };
    p.meta.construction = name.into();
    p.meta.bounds.push(("bp_size".into(), bp.size()));
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{index_to_bits, parse_bits};
    use crate::model::evaluate;

    #[test]
    fn atomic_truth_tables() {
        for i in 0..4u64 {
            let (x, y) = ([i & 2 != 0], [i & 1 != 0]);
            assert_eq!(
                evaluate(&alice_literal(1, 1, 0), &x, &y).unwrap().output,
                x[0]
            );
            assert_eq!(
                evaluate(&bob_literal(1, 1, 0), &x, &y).unwrap().output,
                y[0]
            );
            assert_eq!(
                evaluate(&and_pair_leaf(1, 1, 0), &x, &y).unwrap().output,
                x[0] && y[0]
            );
        }
    }

    #[test]
    fn dmaj_example() {
        let x = parse_bits("1111").unwrap();
        let y = parse_bits("1100").unwrap();
        for v in [DmajVariant::Counter, DmajVariant::St97] {
            assert!(evaluate(&build_dmaj(4, v).unwrap(), &x, &y).unwrap().output);
        }
    }

    #[test]
    fn dmaj_variants_exhaustive_small() {
        for n in 1..=5 {
            let (c, s) = (
                build_dmaj(n, DmajVariant::Counter).unwrap(),
                build_dmaj(n, DmajVariant::St97).unwrap(),
            );
            for i in 0..1u64 << (2 * n) {
                let (x, y) = (
                    index_to_bits(i >> n, n),
                    index_to_bits(i & ((1 << n) - 1), n),
                );
                let want = 2 * x.iter().zip(&y).filter(|(a, b)| **a && **b).count() >= n;
                assert_eq!(evaluate(&c, &x, &y).unwrap().output, want);
                assert_eq!(evaluate(&s, &x, &y).unwrap().output, want);
            }
        }
    }
}
