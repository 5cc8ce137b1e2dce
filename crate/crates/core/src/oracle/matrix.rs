//! Matching enumeration, the garden-hose matrix and exact minimum size.

use std::collections::HashMap;

use super::FunctionTable;
use crate::bits::bits_to_index;
use crate::error::{Error, Result};
use crate::model::{Matching, PipeId, Protocol, ProtocolMeta};

pub const DEFAULT_MATCHING_CAP: usize = 10;
/// Largest `s` for which `G_s` is built.
pub const MATRIX_CAP: usize = 6;
/// Largest input length per side accepted by [`min_gh`].
pub const MIN_GH_INPUT_CAP: usize = 3;

/// A partial matching on points `0..v`: `partner[i] == i` when `i` is free.
type Involution = Vec<u8>;

fn involutions(v: usize) -> Vec<Involution> {
    fn rec(partner: &mut Involution, out: &mut Vec<Involution>) {
        let Some(i) = partner.iter().position(|&p| p == u8::MAX) else {
            out.push(partner.clone());
            return;
        };
        partner[i] = i as u8;
        rec(partner, out);
        for j in i + 1..partner.len() {
            if partner[j] == u8::MAX {
                partner[i] = j as u8;
                partner[j] = i as u8;
                rec(partner, out);
                partner[j] = u8::MAX;
            }
        }
        partner[i] = u8::MAX;
    }
    let mut out = Vec::new();
    rec(&mut vec![u8::MAX; v], &mut out);
    out
}

/// Number of partial matchings on `v` points: `T(v) = T(v−1) + (v−1)·T(v−2)`.
pub fn involution_count(v: usize) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for k in 2..=v as u64 {
        (a, b) = (b, b + (k - 1) * a);
    }
    b
}

/// All partial matchings on the pipes `1..=v`, in a fixed order starting
/// with the empty one.
pub fn enumerate_matchings(v: usize) -> Result<Vec<Matching>> {
    enumerate_matchings_with_cap(v, DEFAULT_MATCHING_CAP)
}

pub fn enumerate_matchings_with_cap(v: usize, cap: usize) -> Result<Vec<Matching>> {
    if v > cap {
        return Err(Error::CapExceeded {
            what: "matching vertices",
            value: v,
            cap,
        });
    }
    Ok(involutions(v)
        .iter()
        .map(|inv| to_matching(inv, 1))
        .collect())
}

/// Point `i` becomes pipe `i + offset`; with `offset == 0` point 0 is the tap.
fn to_matching(inv: &Involution, offset: usize) -> Matching {
    let mut m = Matching::new();
    for (i, &j) in inv.iter().enumerate() {
        let j = j as usize;
        if j <= i {
            continue;
        }
        if i + offset == 0 {
            m.set_tap(Some(PipeId::from(j)));
        } else {
            m.pair(i + offset, j + offset);
        }
    }
    m
}

/// Parity of the path when Alice plays `row` (point 0 the tap, point `i`
/// pipe `i`) and Bob plays `col` (point `i` pipe `i + 1`).
fn parity(row: &Involution, col: &Involution) -> bool {
    let mut at = 0usize;
    let mut wet = 0usize;
    loop {
        let pipe = row[at] as usize;
        if pipe == at {
            return wet % 2 == 1;
        }
        wet += 1;
        let back = col[pipe - 1] as usize;
        if back == pipe - 1 {
            return wet % 2 == 1;
        }
        wet += 1;
        at = back + 1;
    }
}

/// `G_s`: path parities for every Alice matching (rows) against every Bob
/// matching (columns) on `s` pipes.
#[derive(Clone, Debug)]
pub struct GardenHoseMatrix {
    pub s: usize,
    pub rows: Vec<Matching>,
    pub cols: Vec<Matching>,
    pub entries: Vec<Vec<bool>>,
}

impl GardenHoseMatrix {
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.entries[r][c]
    }

    /// One line per row of `0`/`1` characters.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# G_{} rows={} cols={}\n",
            self.s,
            self.rows.len(),
            self.cols.len()
        );
        for row in &self.entries {
            out.extend(row.iter().map(|&v| if v { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

struct RawMatrix {
    rows: Vec<Involution>,
    cols: Vec<Involution>,
    /// Per column, the set of rows with entry 1.
    ones: Vec<Vec<u64>>,
}

fn raw_matrix(s: usize) -> RawMatrix {
    let rows = involutions(s + 1);
    let cols = involutions(s);
    let words = rows.len().div_ceil(64);
    let ones = cols
        .iter()
        .map(|c| {
            let mut set = vec![0u64; words];
            for (r, row) in rows.iter().enumerate() {
                if parity(row, c) {
                    set[r / 64] |= 1 << (r % 64);
                }
            }
            set
        })
        .collect();
    RawMatrix { rows, cols, ones }
}

fn check_matrix_cap(s: usize) -> Result<()> {
    if s > MATRIX_CAP {
        return Err(Error::CapExceeded {
            what: "pipes",
            value: s,
            cap: MATRIX_CAP,
        });
    }
    Ok(())
}

pub fn garden_hose_matrix(s: usize) -> Result<GardenHoseMatrix> {
    check_matrix_cap(s)?;
    let rows = involutions(s + 1);
    let cols = involutions(s);
    let entries = rows
        .iter()
        .map(|r| cols.iter().map(|c| parity(r, c)).collect())
        .collect();
    Ok(GardenHoseMatrix {
        s,
        rows: rows.iter().map(|r| to_matching(r, 0)).collect(),
        cols: cols.iter().map(|c| to_matching(c, 1)).collect(),
        entries,
    })
}

/// Matchings for every input of `f` on `s` pipes that reproduce `f`.
#[derive(Clone, Debug)]
pub struct GhWitness {
    pub s: usize,
    /// Alice's matching for each `x`.
    pub rows: Vec<Matching>,
    /// Bob's matching for each `y`.
    pub cols: Vec<Matching>,
    alice_bits: usize,
    bob_bits: usize,
}

impl GhWitness {
    /// The witness as a protocol that looks its matchings up.
    pub fn to_protocol(&self) -> Protocol {
        let (rows, cols) = (self.rows.clone(), self.cols.clone());
        Protocol::from_fns(
            self.s,
            self.alice_bits,
            self.bob_bits,
            move |x| rows[bits_to_index(x) as usize].clone(),
            move |y| cols[bits_to_index(y) as usize].clone(),
            ProtocolMeta::named(format!("min-gh witness s={}", self.s))
                .bound("size", self.s as u64),
        )
    }
}

/// Smallest `s ≤ s_max` such that the communication matrix of `f` is a
/// submatrix of `G_s`, with a witness embedding.
pub fn min_gh(f: &FunctionTable, s_max: usize) -> Result<GhWitness> {
    let bits = f.alice_bits().max(f.bob_bits());
    if bits > MIN_GH_INPUT_CAP {
        return Err(Error::DomainTooLarge {
            bits,
            limit: MIN_GH_INPUT_CAP,
        });
    }
    check_matrix_cap(s_max)?;
    (0..=s_max)
        .find_map(|s| embed(f, s))
        .ok_or(Error::NotFound { s_max })
}

fn embed(f: &FunctionTable, s: usize) -> Option<GhWitness> {
    let raw = raw_matrix(s);
    let words = raw.ones[0].len();
    let full: Vec<u64> = (0..words)
        .map(|w| {
            let left = raw.rows.len() - 64 * w;
            if left >= 64 {
                u64::MAX
            } else {
                (1u64 << left) - 1
            }
        })
        .collect();

    let mut seen = HashMap::new();
    let mut distinct = Vec::new();
    let mut rep = vec![0; raw.cols.len()];
    for (c, set) in raw.ones.iter().enumerate() {
        rep[c] = *seen.entry(set.clone()).or_insert_with(|| {
            distinct.push(c);
            c
        });
    }
    // Relabelling pipes maps embeddings to embeddings, so the first column
    // only needs one representative per number of pairs.
    let first: Vec<usize> = {
        let mut v: Vec<usize> = (0..=s / 2)
            .filter_map(|k| {
                raw.cols.iter().position(|c| {
                    (0..s).all(|i| c[i] as usize == if i < 2 * k { i ^ 1 } else { i })
                })
            })
            .map(|c| rep[c])
            .collect();
        v.dedup();
        v
    };

    let mut f_cols: Vec<Vec<bool>> = Vec::new();
    let mut col_of_y = Vec::with_capacity(f.cols());
    for y in 0..f.cols() {
        let col = f.column(y);
        let k = f_cols.iter().position(|c| *c == col).unwrap_or_else(|| {
            f_cols.push(col);
            f_cols.len() - 1
        });
        col_of_y.push(k);
    }

    struct Search<'a> {
        ones: &'a [Vec<u64>],
        full: &'a [u64],
        f_cols: &'a [Vec<bool>],
        distinct: &'a [usize],
        first: &'a [usize],
        chosen: Vec<usize>,
    }

    impl Search<'_> {
        fn go(&mut self, cand: &[Vec<u64>]) -> Option<Vec<Vec<u64>>> {
            let d = self.chosen.len();
            if d == self.f_cols.len() {
                return Some(cand.to_vec());
            }
            let options = if d == 0 { self.first } else { self.distinct };
            for &c in options {
                if self.chosen.contains(&c) {
                    continue;
                }
                let mut next = cand.to_vec();
                let ok = next.iter_mut().zip(&self.f_cols[d]).all(|(set, &want)| {
                    let mut any = 0;
                    for (w, word) in set.iter_mut().enumerate() {
                        *word &= if want {
                            self.ones[c][w]
                        } else {
                            !self.ones[c][w] & self.full[w]
                        };
                        any |= *word;
                    }
                    any != 0
                });
                if !ok {
                    continue;
                }
                self.chosen.push(c);
                if let Some(found) = self.go(&next) {
                    return Some(found);
                }
                self.chosen.pop();
            }
            None
        }
    }

    let mut search = Search {
        ones: &raw.ones,
        full: &full,
        f_cols: &f_cols,
        distinct: &distinct,
        first: &first,
        chosen: Vec::new(),
    };
    let cand = search.go(&vec![full.clone(); f.rows()])?;
    let rows = cand
        .iter()
        .map(|set| {
            let w = set
                .iter()
                .position(|&w| w != 0)
                .expect("nonempty candidate set");
            let r = 64 * w + set[w].trailing_zeros() as usize;
            to_matching(&raw.rows[r], 0)
        })
        .collect();
    let cols = col_of_y
        .iter()
        .map(|&k| to_matching(&raw.cols[search.chosen[k]], 1))
        .collect();
    Some(GhWitness {
        s,
        rows,
        cols,
        alice_bits: f.alice_bits(),
        bob_bits: f.bob_bits(),
    })
}
