//! Pointer jumping on two layers of `n` vertices.
//!
//! Vertices are numbered `1..=n`; vertex `i` has the binary name `i − 1`.
//! Alice holds a bijection `f_A: U → V`, Bob `f_B: V → U`. Starting at the
//! first vertex of `U` the pointer is applied `k` times, alternating
//! `f_A, f_B, f_A, …`, and the output is the XOR of the bits of the name
//! of the vertex reached.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::{bits_to_index, ceil_log2, index_to_bits};
use crate::error::{Error, Result};
use crate::model::{End, Matching, PipeId, Protocol, ProtocolMeta};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PJInstance {
    pub n: usize,
    pub k: usize,
    /// `f_a[i]` is the 0-based image of 0-based vertex `i`.
    pub f_a: Vec<usize>,
    pub f_b: Vec<usize>,
}

fn is_permutation(f: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    f.len() == n
        && f.iter()
            .all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

fn name_parity(v: usize) -> bool {
    v.count_ones() % 2 == 1
}

impl PJInstance {
    pub fn new(n: usize, k: usize, f_a: Vec<usize>, f_b: Vec<usize>) -> Result<Self> {
        if n < 2 || k < 1 {
            return Err(Error::InvalidArgument(format!(
                "pointer jumping needs n >= 2 and k >= 1, got n={n}, k={k}"
            )));
        }
        if !is_permutation(&f_a, n) || !is_permutation(&f_b, n) {
            return Err(Error::InvalidArgument(
                "f_A and f_B must be permutations".into(),
            ));
        }
        Ok(PJInstance { n, k, f_a, f_b })
    }

    pub fn random(n: usize, k: usize, rng: &mut impl Rng) -> Self {
        let mut f_a: Vec<usize> = (0..n).collect();
        let mut f_b = f_a.clone();
        f_a.shuffle(rng);
        f_b.shuffle(rng);
        PJInstance { n, k, f_a, f_b }
    }

    /// Bits per encoded image.
    pub fn name_bits(n: usize) -> usize {
        ceil_log2(n as u64) as usize
    }

    pub fn alice_input(&self) -> Vec<bool> {
        encode(&self.f_a, self.n)
    }

    pub fn bob_input(&self) -> Vec<bool> {
        encode(&self.f_b, self.n)
    }

    /// The instance encoded by a pair of protocol inputs, if both encode
    /// permutations.
    pub fn from_inputs(n: usize, k: usize, x: &[bool], y: &[bool]) -> Option<Self> {
        PJInstance::new(n, k, decode(x, n)?, decode(y, n)?).ok()
    }

    /// `n k`, then `f_A` and `f_B` as lines of 1-based images.
    pub fn to_text(&self) -> String {
        let line = |f: &[usize]| {
            f.iter()
                .map(|v| (v + 1).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.k).unwrap();
        writeln!(out, "{}", line(&self.f_a)).unwrap();
        writeln!(out, "{}", line(&self.f_b)).unwrap();
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let nums = |(line, l): (usize, &str)| {
            l.split_whitespace()
                .map(|v| {
                    v.parse::<usize>().map_err(|_| Error::Parse {
                        line,
                        message: format!("expected a number, found {v:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        let [head, fa, fb] = lines.as_slice() else {
            return Err(Error::Parse {
                line: 0,
                message: "expected a header and two permutation lines".into(),
            });
        };
        let (n, k) = match nums(*head)?.as_slice() {
            &[n, k] => (n, k),
            _ => {
                return Err(Error::Parse {
                    line: head.0,
                    message: "header must be `n k`".into(),
                })
            }
        };
        let perm = |l: (usize, &str)| -> Result<Vec<usize>> {
            nums(l)?
                .into_iter()
                .map(|v| {
                    v.checked_sub(1).ok_or(Error::Parse {
                        line: l.0,
                        message: "vertices are numbered from 1".into(),
                    })
                })
                .collect()
        };
        PJInstance::new(n, k, perm(*fa)?, perm(*fb)?)
    }
}

fn encode(f: &[usize], n: usize) -> Vec<bool> {
    let w = PJInstance::name_bits(n);
    f.iter().flat_map(|&v| index_to_bits(v as u64, w)).collect()
}

/// The encoded permutation, or `None` if the bits do not encode one.
fn decode(bits: &[bool], n: usize) -> Option<Vec<usize>> {
    let w = PJInstance::name_bits(n);
    if bits.len() != n * w {
        return None;
    }
    let f: Vec<usize> = bits.chunks(w).map(|c| bits_to_index(c) as usize).collect();
    is_permutation(&f, n).then_some(f)
}

/// Name of `f_k(v₀)`.
pub fn pj_target(inst: &PJInstance) -> usize {
    (0..inst.k).fold(0, |v, j| if j % 2 == 0 { inst.f_a[v] } else { inst.f_b[v] })
}

pub fn eval_pj(inst: &PJInstance) -> bool {
    name_parity(pj_target(inst))
}

/// `k` blocks of `n` pipes; pipe `(j, v)` stands for vertex `v` at step `j`.
/// Alice taps into `(1, f_A(v₀))` and wires `(j, v)` to `(j+1, f_A(v))` for
/// even `j`; Bob does the same with `f_B` for odd `j`. Water in block `j`
/// sits on Bob's side for odd `j`, so spilling out of block `k` gives the
/// output `k mod 2`. The player wiring into block `k` knows the final
/// vertex `w` and makes that connection only if the parity of `w`'s name is
/// `k mod 2`; otherwise the water spills one block earlier, on the other
/// side. Inputs are the permutations encoded as `n` images of
/// `⌈log₂ n⌉` bits each; an input that encodes no permutation plays no
/// hoses.
pub fn pointer_jumping_protocol(n: usize, k: usize) -> Result<Protocol> {
    if n < 2 || k < 1 {
        return Err(Error::InvalidArgument(format!(
            "pointer jumping needs n >= 2 and k >= 1, got n={n}, k={k}"
        )));
    }
    let bits = n * PJInstance::name_bits(n);
    let pipe = move |block: usize, v: usize| End::Pipe(PipeId::from(block * n + v + 1));
    let final_ok = move |w: usize| name_parity(w) == (k % 2 == 1);
    let wire = move |f: &[usize], first: usize| {
        let mut m = Matching::new();
        for j in (first..k - 1).step_by(2) {
            for (v, &fv) in f.iter().enumerate().take(n) {
                if j + 2 == k && !final_ok(fv) {
                    continue;
                }
                m.connect(pipe(j, v), pipe(j + 1, fv));
            }
        }
        m
    };
    Ok(Protocol::from_fns(
        k * n,
        bits,
        bits,
        move |x| match decode(x, n) {
            None => Matching::new(),
            Some(f) => {
                let mut m = wire(&f, 1);
                if k > 1 || final_ok(f[0]) {
                    m.connect(End::Tap, pipe(0, f[0]));
                }
                m
            }
        },
        move |y| match decode(y, n) {
            None => Matching::new(),
            Some(f) => wire(&f, 0),
        },
        ProtocolMeta::named(format!("pj n={n} k={k}"))
            .bound("size", (k * n) as u64)
            .bound("time", k as u64),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, Instance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_examples() {
        let id2 = PJInstance::new(2, 2, vec![0, 1], vec![0, 1]).unwrap();
        assert!(!eval_pj(&id2));
        let shift = PJInstance::new(4, 1, vec![1, 2, 3, 0], vec![0, 1, 2, 3]).unwrap();
        assert_eq!(pj_target(&shift), 1);
        assert!(eval_pj(&shift));
    }

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn exhaustive_n3() {
        for k in 1..=3 {
            let p = pointer_jumping_protocol(3, k).unwrap();
            assert_eq!(p.pipe_count(), 3 * k);
            for fa in all_perms(3) {
                for fb in all_perms(3) {
                    let inst = PJInstance::new(3, k, fa.clone(), fb).unwrap();
                    let t = evaluate(&p, &inst.alice_input(), &inst.bob_input()).unwrap();
                    assert_eq!(t.output, eval_pj(&inst));
                    assert!(t.wet_count <= k);
                }
            }
        }
    }

    #[test]
    fn invalid_encoding_plays_nothing() {
        let p = pointer_jumping_protocol(3, 2).unwrap();
        let bad = encode(&[0, 0, 1], 3);
        let m = p.alice_matching(&bad).unwrap();
        assert_eq!(m.tap(), None);
        assert!(m.pairs().is_empty());
    }

    #[test]
    fn matchings_are_legal_for_random_bijections() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let inst = PJInstance::random(8, 4, &mut rng);
            let p = pointer_jumping_protocol(8, 4).unwrap();
            let full = Instance {
                pipe_count: p.pipe_count(),
                alice: p.alice_matching(&inst.alice_input()).unwrap(),
                bob: p.bob_matching(&inst.bob_input()).unwrap(),
            };
            assert!(crate::model::validate_instance(&full).is_empty());
        }
    }

    #[test]
    fn text_round_trip() {
        let inst = PJInstance::new(4, 3, vec![1, 2, 3, 0], vec![3, 2, 1, 0]).unwrap();
        let text = inst.to_text();
        assert_eq!(text, "4 3\n2 3 4 1\n4 3 2 1\n");
        assert_eq!(PJInstance::parse(&text).unwrap(), inst);
        assert!(PJInstance::parse("4 3\n1 1 2 3\n1 2 3 4\n").is_err());
        assert!(matches!(
            PJInstance::parse("4\n1 2 3 4\n1 2 3 4\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
