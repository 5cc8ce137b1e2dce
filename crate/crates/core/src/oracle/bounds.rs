//! Exhaustive verification, rectangle covers and one-way complexity.

use std::collections::HashSet;

use super::FunctionTable;
use crate::bits::{ceil_log2, index_to_bits};
use crate::error::{Error, Result};
use crate::model::{evaluate, Protocol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass {
        inputs: u64,
    },
    Counterexample {
        x: Vec<bool>,
        y: Vec<bool>,
        expected: bool,
        got: bool,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

/// Compare `p` with `f` on every input pair.
pub fn exhaustive_verify(p: &Protocol, f: &FunctionTable) -> Result<Verdict> {
    if (p.alice_bits(), p.bob_bits()) != (f.alice_bits(), f.bob_bits()) {
        return Err(Error::InvalidArgument(format!(
            "protocol takes ({}, {}) bits, table has ({}, {})",
            p.alice_bits(),
            p.bob_bits(),
            f.alice_bits(),
            f.bob_bits()
        )));
    }
    let ys: Vec<Vec<bool>> = (0..f.cols() as u64)
        .map(|j| index_to_bits(j, f.bob_bits()))
        .collect();
    for xi in 0..f.rows() {
        let x = index_to_bits(xi as u64, f.alice_bits());
        for (yi, y) in ys.iter().enumerate() {
            let got = evaluate(p, &x, y)?.output;
            let expected = f.get(xi, yi);
            if got != expected {
                return Ok(Verdict::Counterexample {
                    x,
                    y: y.clone(),
                    expected,
                    got,
                });
            }
        }
    }
    Ok(Verdict::Pass {
        inputs: (f.rows() * f.cols()) as u64,
    })
}

/// Minimum numbers of monochromatic rectangles covering the 0-entries and
/// the 1-entries. `exact` is false when the tables were too large for the
/// exact search and the numbers are greedy upper bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverNumbers {
    pub c0: usize,
    pub c1: usize,
    pub exact: bool,
}

/// Largest input length per side for the exact cover search.
pub const EXACT_COVER_BITS: usize = 3;

pub fn cover_numbers(f: &FunctionTable) -> CoverNumbers {
    let exact = f.alice_bits() <= EXACT_COVER_BITS && f.bob_bits() <= EXACT_COVER_BITS;
    let (c0, c1) = if exact {
        (exact_cover(f, false), exact_cover(f, true))
    } else {
        (greedy_cover(f, false), greedy_cover(f, true))
    };
    CoverNumbers { c0, c1, exact }
}

/// Maximal `value`-rectangles as cell masks over a table of at most 8×8.
fn maximal_rectangles(f: &FunctionTable, value: bool) -> Vec<u64> {
    let rows = f.row_masks(value);
    let cols = f.cols();
    let mut out = HashSet::new();
    for subset in 1u32..1 << rows.len() {
        let common = (0..rows.len())
            .filter(|r| subset >> r & 1 == 1)
            .fold(u64::MAX >> (64 - cols), |m, r| m & rows[r]);
        if common == 0 {
            continue;
        }
        let closure: Vec<usize> = (0..rows.len())
            .filter(|&r| rows[r] & common == common)
            .collect();
        out.insert(closure.iter().fold(0u64, |m, &r| m | common << (r * cols)));
    }
    let mut v: Vec<u64> = out.into_iter().collect();
    v.sort_unstable();
    v
}

fn exact_cover(f: &FunctionTable, value: bool) -> usize {
    let cells = f
        .row_masks(value)
        .iter()
        .enumerate()
        .fold(0u64, |m, (r, &row)| m | row << (r * f.cols()));
    if cells == 0 {
        return 0;
    }
    let rects = maximal_rectangles(f, value);
    let mut best = greedy_on(cells, &rects);
    branch(cells, &rects, 0, &mut best);
    best
}

fn branch(uncovered: u64, rects: &[u64], used: usize, best: &mut usize) {
    if uncovered == 0 {
        *best = (*best).min(used);
        return;
    }
    let largest = rects
        .iter()
        .map(|r| (r & uncovered).count_ones())
        .max()
        .unwrap_or(0);
    let lower = (uncovered.count_ones()).div_ceil(largest.max(1)) as usize;
    if used + lower >= *best {
        return;
    }
    // Branch on the cell that the fewest rectangles cover.
    let cell = (0..64)
        .filter(|c| uncovered >> c & 1 == 1)
        .min_by_key(|c| rects.iter().filter(|r| *r >> c & 1 == 1).count())
        .expect("uncovered cell");
    for &r in rects.iter().filter(|r| *r >> cell & 1 == 1) {
        branch(uncovered & !r, rects, used + 1, best);
    }
}

fn greedy_on(mut uncovered: u64, rects: &[u64]) -> usize {
    let mut n = 0;
    while uncovered != 0 {
        let r = rects
            .iter()
            .max_by_key(|r| (*r & uncovered).count_ones())
            .expect("cover exists");
        uncovered &= !r;
        n += 1;
    }
    n
}

/// Greedy cover that grows each rectangle from an uncovered cell.
fn greedy_cover(f: &FunctionTable, value: bool) -> usize {
    let (rows, cols) = (f.rows(), f.cols());
    let mut covered = vec![false; rows * cols];
    let mut n = 0;
    for x in 0..rows {
        for y in 0..cols {
            if f.get(x, y) != value || covered[x * cols + y] {
                continue;
            }
            let mut rset = vec![x];
            let mut cset: Vec<usize> = (0..cols).filter(|&c| f.get(x, c) == value).collect();
            for r in 0..rows {
                if r != x && f.get(r, y) == value {
                    let keep: Vec<usize> = cset
                        .iter()
                        .copied()
                        .filter(|&c| f.get(r, c) == value)
                        .collect();
                    if 2 * keep.len() >= cset.len() {
                        cset = keep;
                        rset.push(r);
                    }
                }
            }
            for &r in &rset {
                for &c in &cset {
                    covered[r * cols + c] = true;
                }
            }
            n += 1;
        }
    }
    n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

/// Deterministic one-way communication complexity: `⌈log₂⌉` of the number
/// of distinct rows (Alice speaks) or columns (Bob speaks).
pub fn one_way_cc(f: &FunctionTable, direction: Direction) -> u32 {
    let distinct = match direction {
        Direction::AliceToBob => (0..f.rows())
            .map(|x| f.row(x).to_vec())
            .collect::<HashSet<_>>()
            .len(),
        Direction::BobToAlice => (0..f.cols())
            .map(|y| f.column(y))
            .collect::<HashSet<_>>()
            .len(),
    };
    ceil_log2(distinct as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::equality_serial;

    #[test]
    fn verify_examples() {
        let p = equality_serial(4);
        assert_eq!(
            exhaustive_verify(&p, &FunctionTable::named("eq", 4).unwrap()).unwrap(),
            Verdict::Pass { inputs: 256 }
        );
        assert!(
            !exhaustive_verify(&p, &FunctionTable::named("ip", 4).unwrap())
                .unwrap()
                .is_pass()
        );
        assert!(exhaustive_verify(&p, &FunctionTable::named("ip", 3).unwrap()).is_err());
    }

    #[test]
    fn cover_examples() {
        let eq2 = FunctionTable::named("eq", 2).unwrap();
        let c = cover_numbers(&eq2);
        assert_eq!(c.c1, 4);
        assert!(c.exact);
        let one = FunctionTable::named("const1", 2).unwrap();
        assert_eq!(
            cover_numbers(&one),
            CoverNumbers {
                c0: 0,
                c1: 1,
                exact: true
            }
        );
    }

    #[test]
    fn cover_by_brute_force() {
        // Independent check: try every family of k rectangles on a 2×2 or 2×4 grid.
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        for _ in 0..30 {
            let f = FunctionTable::random(1, 2, &mut rng).unwrap();
            let c = cover_numbers(&f);
            for value in [false, true] {
                let cells: Vec<(usize, usize)> = (0..2)
                    .flat_map(|x| (0..4).map(move |y| (x, y)))
                    .filter(|&(x, y)| f.get(x, y) == value)
                    .collect();
                let mut rects = Vec::new();
                for rs in 1u32..4 {
                    for cs in 1u32..16 {
                        let ok = (0..2).all(|x| {
                            (0..4).all(|y| {
                                rs >> x & 1 == 0 || cs >> y & 1 == 0 || f.get(x, y) == value
                            })
                        });
                        if ok {
                            rects.push((rs, cs));
                        }
                    }
                }
                let min = (0..=cells.len())
                    .find(|&k| {
                        (0..rects.len().pow(k as u32)).any(|code| {
                            let pick: Vec<_> = (0..k)
                                .map(|i| rects[code / rects.len().pow(i as u32) % rects.len()])
                                .collect();
                            cells.iter().all(|&(x, y)| {
                                pick.iter()
                                    .any(|&(rs, cs)| rs >> x & 1 == 1 && cs >> y & 1 == 1)
                            })
                        })
                    })
                    .unwrap();
                assert_eq!(if value { c.c1 } else { c.c0 }, min);
            }
        }
    }

    #[test]
    fn one_way_examples() {
        assert_eq!(
            one_way_cc(
                &FunctionTable::named("eq", 3).unwrap(),
                Direction::AliceToBob
            ),
            3
        );
        assert_eq!(
            one_way_cc(
                &FunctionTable::named("const0", 2).unwrap(),
                Direction::BobToAlice
            ),
            0
        );
        // DMAJ₂ rows: x=00 all 0; 01 → [0,1,0,1]; 10 → [0,0,1,1]; 11 → [0,1,1,1].
        assert_eq!(
            one_way_cc(
                &FunctionTable::named("dmaj", 2).unwrap(),
                Direction::AliceToBob
            ),
            2
        );
    }
}
