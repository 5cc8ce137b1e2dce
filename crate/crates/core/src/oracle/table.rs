//! Explicit truth tables of two-party Boolean functions.

use std::fmt::Write as _;

use rand::Rng;

use crate::bits::{index_to_bits, inner_product};
use crate::error::{Error, Result};
use crate::model::{evaluate, Protocol};

/// Largest `alice_bits + bob_bits` a table may have.
pub const TABLE_GUARD: usize = 24;

/// `f(x, y)` for every `x` of `alice_bits` bits and `y` of `bob_bits` bits,
/// stored row by row. Row `x` is indexed by `x` read most-significant bit
/// first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionTable {
    alice_bits: usize,
    bob_bits: usize,
    values: Vec<bool>,
}

fn guard(alice_bits: usize, bob_bits: usize) -> Result<()> {
    let bits = alice_bits + bob_bits;
    if bits > TABLE_GUARD {
        return Err(Error::DomainTooLarge {
            bits,
            limit: TABLE_GUARD,
        });
    }
    Ok(())
}

impl FunctionTable {
    pub fn new(alice_bits: usize, bob_bits: usize, values: Vec<bool>) -> Result<Self> {
        guard(alice_bits, bob_bits)?;
        let want = 1usize << (alice_bits + bob_bits);
        if values.len() != want {
            return Err(Error::InvalidArgument(format!(
                "table for ({alice_bits}, {bob_bits}) bits needs {want} entries, got {}",
                values.len()
            )));
        }
        Ok(FunctionTable {
            alice_bits,
            bob_bits,
            values,
        })
    }

    pub fn from_fn(
        alice_bits: usize,
        bob_bits: usize,
        mut f: impl FnMut(&[bool], &[bool]) -> bool,
    ) -> Result<Self> {
        guard(alice_bits, bob_bits)?;
        let ys: Vec<Vec<bool>> = (0..1u64 << bob_bits)
            .map(|j| index_to_bits(j, bob_bits))
            .collect();
        let mut values = Vec::with_capacity(1 << (alice_bits + bob_bits));
        for i in 0..1u64 << alice_bits {
            let x = index_to_bits(i, alice_bits);
            values.extend(ys.iter().map(|y| f(&x, y)));
        }
        Ok(FunctionTable {
            alice_bits,
            bob_bits,
            values,
        })
    }

    /// The function computed by a protocol.
    pub fn from_protocol(p: &Protocol) -> Result<Self> {
        guard(p.alice_bits(), p.bob_bits())?;
        let mut err = None;
        let t = FunctionTable::from_fn(p.alice_bits(), p.bob_bits(), |x, y| {
            match evaluate(p, x, y) {
                Ok(t) => t.output,
                Err(e) => {
                    err.get_or_insert(e);
                    false
                }
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(t),
        }
    }

    pub fn random(alice_bits: usize, bob_bits: usize, rng: &mut impl Rng) -> Result<Self> {
        guard(alice_bits, bob_bits)?;
        let values = (0..1usize << (alice_bits + bob_bits))
            .map(|_| rng.gen())
            .collect();
        FunctionTable::new(alice_bits, bob_bits, values)
    }

    /// A named function on `n`-bit inputs: `eq`, `ip`, `dmaj`, `and`,
    /// `disj`, `xor`, `const0` or `const1`.
    pub fn named(name: &str, n: usize) -> Result<Self> {
        let pairs = |x: &[bool], y: &[bool]| x.iter().zip(y).filter(|(a, b)| **a && **b).count();
        match name {
            "eq" => FunctionTable::from_fn(n, n, |x, y| x == y),
            "ip" => FunctionTable::from_fn(n, n, inner_product),
            "dmaj" => FunctionTable::from_fn(n, n, |x, y| 2 * pairs(x, y) >= n),
            "and" => FunctionTable::from_fn(n, n, |x, y| pairs(x, y) == n),
            "disj" => FunctionTable::from_fn(n, n, |x, y| pairs(x, y) == 0),
            "xor" => FunctionTable::from_fn(n, n, |x, y| {
                x.iter().chain(y).filter(|b| **b).count() % 2 == 1
            }),
            "const0" => FunctionTable::from_fn(n, n, |_, _| false),
            "const1" => FunctionTable::from_fn(n, n, |_, _| true),
            _ => Err(Error::InvalidArgument(format!("unknown function {name:?}"))),
        }
    }

    pub fn alice_bits(&self) -> usize {
        self.alice_bits
    }

    pub fn bob_bits(&self) -> usize {
        self.bob_bits
    }

    pub fn rows(&self) -> usize {
        1 << self.alice_bits
    }

    pub fn cols(&self) -> usize {
        1 << self.bob_bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.values[x * self.cols() + y]
    }

    pub fn row(&self, x: usize) -> &[bool] {
        &self.values[x * self.cols()..(x + 1) * self.cols()]
    }

    pub fn column(&self, y: usize) -> Vec<bool> {
        (0..self.rows()).map(|x| self.get(x, y)).collect()
    }

    pub fn is_constant(&self) -> Option<bool> {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first).then_some(first)
    }

    pub fn transpose(&self) -> FunctionTable {
        let mut values = Vec::with_capacity(self.values.len());
        for y in 0..self.cols() {
            values.extend((0..self.rows()).map(|x| self.get(x, y)));
        }
        FunctionTable {
            alice_bits: self.bob_bits,
            bob_bits: self.alice_bits,
            values,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "alice_bits={} bob_bits={}\n",
            self.alice_bits, self.bob_bits
        );
        for x in 0..self.rows() {
            for &v in self.row(x) {
                out.push(if v { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line, message: &str| Error::Parse {
            line,
            message: message.into(),
        };
        let (hl, header) = lines.next().ok_or_else(|| bad(0, "empty table"))?;
        let mut dims = [None, None];
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad(hl, "expected key=value"))?;
            let slot = match key {
                "alice_bits" => 0,
                "bob_bits" => 1,
                _ => return Err(bad(hl, &format!("unknown header field {key:?}"))),
            };
            dims[slot] = Some(
                value
                    .parse::<usize>()
                    .map_err(|_| bad(hl, "dimension is not a number"))?,
            );
        }
        let [Some(alice_bits), Some(bob_bits)] = dims else {
            return Err(bad(hl, "header must be `alice_bits=N bob_bits=M`"));
        };
        guard(alice_bits, bob_bits)?;
        let mut values = Vec::with_capacity(1 << (alice_bits + bob_bits));
        let mut rows = 0;
        for (line, l) in lines {
            if l.len() != 1 << bob_bits {
                return Err(bad(
                    line,
                    &format!("row must have {} entries", 1usize << bob_bits),
                ));
            }
            for c in l.chars() {
                values.push(match c {
                    '0' => false,
                    '1' => true,
                    _ => return Err(bad(line, &format!("unexpected character {c:?}"))),
                });
            }
            rows += 1;
        }
        if rows != 1usize << alice_bits {
            return Err(bad(
                0,
                &format!("expected {} rows, found {rows}", 1usize << alice_bits),
            ));
        }
        FunctionTable::new(alice_bits, bob_bits, values)
    }

    /// Rows of the matrix as bit masks over the columns, for tables with at
    /// most 64 columns.
    pub(crate) fn row_masks(&self, value: bool) -> Vec<u64> {
        assert!(self.cols() <= 64);
        (0..self.rows())
            .map(|x| {
                self.row(x)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == value)
                    .fold(0u64, |m, (y, _)| m | 1 << y)
            })
            .collect()
    }
}

impl std::fmt::Display for FunctionTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        for x in 0..self.rows() {
            let _ = writeln!(
                s,
                "{}",
                self.row(x)
                    .iter()
                    .map(|&v| if v { '1' } else { '0' })
                    .collect::<String>()
            );
        }
        f.write_str(&s)
    }
}
