//! Equality protocols: bit-serial, block-serial and randomized.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{bits_to_index, ceil_log2, inner_product};
use crate::error::{Error, Result};
use crate::model::{End, Matching, PipeId, Protocol, ProtocolMeta};

/// Default cap on the value pipes of one block.
pub const DEFAULT_BLOCK_BUDGET: usize = 1 << 20;

fn pipe(p: u32) -> End {
    End::Pipe(PipeId::new(p))
}

/// Pipe layout of the bit-serial comparison of two `m`-bit strings.
///
/// Stages alternate roles. An even stage is checked by Bob: Alice sends
/// her bit through `E⁰`/`E¹`, Bob continues on a match and returns the
/// water through `Z`, which Alice leaves open, on a mismatch. An odd stage
/// is checked by Alice: Bob sends through `F⁰`/`F¹` and Alice leaves the
/// wrong one open. After the last match the water spills on Bob's side,
/// through one extra pipe if Alice made the last check.
#[derive(Clone, Debug)]
struct Serial {
    base: Vec<u32>,
    extra: Option<u32>,
    pipes: usize,
}

impl Serial {
    fn new(m: usize) -> Serial {
        let mut base = Vec::with_capacity(m);
        let mut next = 0u32;
        for i in 0..m {
            base.push(next);
            next += if i % 2 == 0 { 3 } else { 2 };
        }
        let extra = m.is_multiple_of(2).then(|| {
            next += 1;
            next
        });
        Serial {
            base,
            extra,
            pipes: next as usize,
        }
    }

    fn value(&self, stage: usize, bit: bool) -> u32 {
        self.base[stage] + 1 + bit as u32
    }

    fn alice(&self, a: &[bool]) -> Matching {
        let mut m = Matching::new();
        for i in (0..a.len()).step_by(2) {
            let from = match i {
                0 => End::Tap,
                _ => pipe(self.value(i - 1, a[i - 1])),
            };
            m.connect(from, pipe(self.value(i, a[i])));
        }
        if let Some(t) = self.extra {
            let last = a.len() - 1;
            m.connect(pipe(self.value(last, a[last])), pipe(t));
        }
        m
    }

    fn bob(&self, b: &[bool]) -> Matching {
        let mut m = Matching::new();
        for i in (0..b.len()).step_by(2) {
            m.connect(pipe(self.value(i, !b[i])), pipe(self.base[i] + 3));
            if i + 1 < b.len() {
                m.connect(pipe(self.value(i, b[i])), pipe(self.value(i + 1, b[i + 1])));
            }
        }
        m
    }
}

/// `EQₙ` by comparing bit after bit; `⌈5n/2⌉ + [n even]` pipes, time at
/// most `n + 1`.
pub fn equality_serial(n: usize) -> Protocol {
    assert!(n >= 1, "equality needs n >= 1");
    let layout = Serial::new(n);
    let bob = layout.clone();
    let pipes = layout.pipes;
    Protocol::from_fns(
        pipes,
        n,
        n,
        move |x| layout.alice(x),
        move |y| bob.bob(y),
        ProtocolMeta::named(format!("eq-serial n={n}"))
            .bound("size", pipes as u64)
            .bound("time", n as u64 + 1),
    )
}

/// `EQₙ` over blocks of `b` bits. Stages alternate sender and receiver. The
/// sender puts the water into the value pipe of its block; on a match the
/// receiver forwards it into the value pipe of its own next block. On a
/// mismatch the water has to end on Alice's side after an even number of
/// pipes: a receiving Bob pairs the wrong value pipes among themselves (the
/// odd one out with a rail pipe), a receiving Alice simply leaves them open.
pub fn equality_block(n: usize, b: usize) -> Result<Protocol> {
    equality_block_with_budget(n, b, DEFAULT_BLOCK_BUDGET)
}

pub fn equality_block_with_budget(n: usize, b: usize, budget: usize) -> Result<Protocol> {
    if b == 0 || b > n {
        return Err(Error::InvalidArgument(format!(
            "block size must be in 1..={n}, got {b}"
        )));
    }
    if b >= usize::BITS as usize - 1 || 1usize << b > budget {
        return Err(Error::BlockTooLarge {
            block_bits: b,
            budget,
        });
    }
    let layout = Blocks::new(n, b);
    let bob = layout.clone();
    let pipes = layout.pipes;
    let stages = n.div_ceil(b) as u64;
    let bound = stages * ((1 << b) + 2) + 2;
    Ok(Protocol::from_fns(
        pipes,
        n,
        n,
        move |x| layout.alice(x),
        move |y| bob.bob(y),
        ProtocolMeta::named(format!("eq-block n={n} b={b}"))
            .bound("size", pipes as u64)
            .bound("size_bound", bound)
            .bound("time", stages + 2),
    ))
}

#[derive(Clone, Debug)]
struct Blocks {
    /// `(first bit, width, first pipe, rail)` per stage; Alice sends in
    /// even stages.
    stages: Vec<(usize, usize, u32, Option<u32>)>,
    extra: Option<u32>,
    pipes: usize,
}

impl Blocks {
    fn new(n: usize, b: usize) -> Blocks {
        let mut stages = Vec::new();
        let mut next = 0u32;
        for (k, start) in (0..n).step_by(b).enumerate() {
            let width = b.min(n - start);
            let first = next;
            next += 1 << width;
            let rail = (k % 2 == 0).then(|| {
                next += 1;
                next
            });
            stages.push((start, width, first, rail));
        }
        let extra = (stages.len() % 2 == 0).then(|| {
            next += 1;
            next
        });
        Blocks {
            stages,
            extra,
            pipes: next as usize,
        }
    }

    fn value_pipe(&self, k: usize, input: &[bool]) -> u32 {
        let (start, width, first, _) = self.stages[k];
        first + 1 + bits_to_index(&input[start..start + width]) as u32
    }

    /// Alice sends in even stages and forwards after matching in odd ones.
    fn alice(&self, x: &[bool]) -> Matching {
        let mut m = Matching::new();
        for k in (0..self.stages.len()).step_by(2) {
            let from = match k {
                0 => End::Tap,
                _ => pipe(self.value_pipe(k - 1, x)),
            };
            m.connect(from, pipe(self.value_pipe(k, x)));
        }
        if let Some(t) = self.extra {
            m.connect(pipe(self.value_pipe(self.stages.len() - 1, x)), pipe(t));
        }
        m
    }

    fn bob(&self, y: &[bool]) -> Matching {
        let mut m = Matching::new();
        for k in (0..self.stages.len()).step_by(2) {
            let (_, width, first, rail) = self.stages[k];
            let hit = self.value_pipe(k, y);
            let mut wrong = (first + 1..=first + (1 << width)).filter(|&p| p != hit);
            while let Some(p) = wrong.next() {
                let q = wrong.next().or(rail).expect("blocks carry a rail");
                m.connect(pipe(p), pipe(q));
            }
            if k + 1 < self.stages.len() {
                m.connect(pipe(hit), pipe(self.value_pipe(k + 1, y)));
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TapeScope {
    Public,
    AlicePrivate,
    BobPrivate,
}

impl TapeScope {
    fn name(self) -> &'static str {
        match self {
            TapeScope::Public => "public",
            TapeScope::AlicePrivate => "alice_private",
            TapeScope::BobPrivate => "bob_private",
        }
    }
}

/// A finite string of random bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomTape {
    pub bits: Vec<bool>,
    pub scope: TapeScope,
}

impl RandomTape {
    pub fn from_seed(scope: TapeScope, len: usize, seed: u64) -> RandomTape {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RandomTape::from_rng(scope, len, &mut rng)
    }

    pub fn from_rng(scope: TapeScope, len: usize, rng: &mut impl Rng) -> RandomTape {
        RandomTape {
            bits: (0..len).map(|_| rng.gen()).collect(),
            scope,
        }
    }

    /// `tape scope=S bits=N` followed by the bits as hex, 64 digits per
    /// line, the first bit being the high bit of the first digit.
    pub fn to_hex(&self) -> String {
        let mut out = format!(
            "tape scope={} bits={}\n",
            self.scope.name(),
            self.bits.len()
        );
        let digits: Vec<char> = self
            .bits
            .chunks(4)
            .map(|c| {
                let v = c
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, &b)| acc | (b as u32) << (3 - i));
                char::from_digit(v, 16).expect("nibble")
            })
            .collect();
        for line in digits.chunks(64) {
            writeln!(out, "{}", line.iter().collect::<String>()).unwrap();
        }
        out
    }

    pub fn from_hex(text: &str) -> Result<RandomTape> {
        let mut lines = text.lines();
        let err = |line: usize, message: &str| Error::Parse {
            line,
            message: message.into(),
        };
        let header = lines.next().ok_or_else(|| err(1, "empty tape"))?;
        let (scope, len) = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["tape", s, b] => {
                let scope = match s.strip_prefix("scope=") {
                    Some("public") => TapeScope::Public,
                    Some("alice_private") => TapeScope::AlicePrivate,
                    Some("bob_private") => TapeScope::BobPrivate,
                    _ => return Err(err(1, "bad scope")),
                };
                let len = b
                    .strip_prefix("bits=")
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| err(1, "bad bit count"))?;
                (scope, len)
            }
            _ => return Err(err(1, "bad header")),
        };
        let mut bits = Vec::with_capacity(len);
        for (i, line) in lines.enumerate() {
            for c in line.trim().chars() {
                let v = c
                    .to_digit(16)
                    .ok_or_else(|| err(i + 2, "expected a hex digit"))?;
                bits.extend((0..4).map(|k| v >> (3 - k) & 1 == 1));
            }
        }
        if bits.len() < len || bits.len() >= len + 4 {
            return Err(err(0, "digit count does not match the bit count"));
        }
        bits.truncate(len);
        Ok(RandomTape { bits, scope })
    }
}

/// Equality with a shared random tape of `t·n` bits: the serial gadget
/// compares the `t` inner products `⟨x, r⁽ʲ⁾⟩` and `⟨y, r⁽ʲ⁾⟩`. Always 1 on
/// `x = y`; 1 with probability `2^{-t}` over the tape on `x ≠ y`.
pub fn equality_public_coin(n: usize, t: usize, tape: &RandomTape) -> Result<Protocol> {
    if n == 0 || t == 0 {
        return Err(Error::InvalidArgument(
            "public-coin equality needs n, t >= 1".into(),
        ));
    }
    if tape.bits.len() < t * n {
        return Err(Error::TapeTooShort {
            needed: t * n,
            got: tape.bits.len(),
        });
    }
    let strings: Vec<Vec<bool>> = tape.bits[..t * n].chunks(n).map(<[bool]>::to_vec).collect();
    let hash = move |v: &[bool]| {
        strings
            .iter()
            .map(|r| inner_product(v, r))
            .collect::<Vec<_>>()
    };
    let bob_hash = hash.clone();
    let layout = Serial::new(t);
    let bob = layout.clone();
    let pipes = layout.pipes;
    Ok(Protocol::from_fns(
        pipes,
        n,
        n,
        move |x| layout.alice(&hash(x)),
        move |y| bob.bob(&bob_hash(y)),
        ProtocolMeta::named(format!("eq-public n={n} t={t}"))
            .bound("size", pipes as u64)
            .bound("time", t as u64 + 1),
    ))
}

/// The fixed table of `2m` strings of `n` bits behind private-coin
/// equality.
pub fn private_coin_table(n: usize, m: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * m)
        .map(|_| (0..n).map(|_| rng.gen()).collect())
        .collect()
}

/// Equality where only Alice has randomness. Her input is `x` followed by
/// `⌈log₂ m⌉` private index bits (read mod `m`). For index `i` she sends
/// the water into pipe `4i + 2⟨x,r²ⁱ⟩ + ⟨x,r²ⁱ⁺¹⟩ + 1` of a bank of `4m`;
/// Bob leaves open the pipe his own inner products predict for each `i`
/// and sends every other bank pipe back to Alice, who leaves it open.
pub fn equality_private_coin(n: usize, m: usize, seed: u64) -> Result<Protocol> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument(
            "private-coin equality needs n, m >= 1".into(),
        ));
    }
    let table = private_coin_table(n, m, seed);
    let bob_table = table.clone();
    let index_bits = ceil_log2(m as u64) as usize;
    let slot = |table: &[Vec<bool>], v: &[bool], i: usize| {
        4 * i as u32
            + 2 * inner_product(v, &table[2 * i]) as u32
            + inner_product(v, &table[2 * i + 1]) as u32
            + 1
    };
    let bank = 4 * m as u32;
    let rail = (m % 2 == 1).then_some(bank + 1);
    let pipes = bank as usize + rail.is_some() as usize;
    Ok(Protocol::from_fns(
        pipes,
        n + index_bits,
        n,
        move |input| {
            let (x, idx) = input.split_at(n);
            let i = (bits_to_index(idx) % m as u64) as usize;
            Matching::with_tap(slot(&table, x, i) as usize)
        },
        move |y| {
            let keep: Vec<u32> = (0..m).map(|i| slot(&bob_table, y, i)).collect();
            let mut m = Matching::new();
            let mut k = 0;
            let mut wrong = (1..=bank).filter(|p| {
                let hit = keep.get(k) == Some(p);
                if hit {
                    k += 1;
                }
                !hit
            });
            while let Some(p) = wrong.next() {
                let q = wrong.next().or(rail).expect("odd leftover has a rail");
                m.connect(pipe(p), pipe(q));
            }
            m
        },
        ProtocolMeta::named(format!("eq-private n={n} m={m}"))
            .bound("size", pipes as u64)
            .bound("time", 3),
    ))
}
