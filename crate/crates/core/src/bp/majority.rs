//! Strict permutation branching program for threshold functions of size
//! `O(n log³ n)`.
//!
//! The program runs a sequence of divider stages. A stage chains modulus
//! boxes of sizes `r₁ = 2^t < r₂ < … < r_k` (the `rᵢ` for `i ≥ 2` are primes
//! between `4 log M` and `12 log M`) over all `n` variables. The wiring
//! between consecutive boxes is injective and carries a rounded fixed-point
//! estimate of `h·(|x| − b)/P` (with `P = ∏ rᵢ`) from one box to the next,
//! so the node reached after the last box pins `|x|` down to a short interval
//! of `[b, b + M)`. Nodes whose interval lies entirely on one side of the
//! threshold decide; the others are undecided and span at most `M/2`
//! weights.
//!
//! Each stage is followed by three reversed copies of itself. Accepting,
//! rejecting and undecided bottom nodes enter different copies, so every
//! input leaves the stage at one of three canonical nodes. Decided inputs
//! ride identity lanes to the last layer; undecided inputs enter the next
//! stage. Once the interval is shorter than `log n` an exact counter
//! finishes the job.

use std::collections::HashMap;
use std::sync::Arc;

use super::{
    complete_permutation, counter_threshold_pbp, rotation, Layer, LayerMaps,
    LayeredBranchingProgram, Target,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Accept,
    Reject,
    Undecided,
    Unreached,
}

/// Three-way routing used by [`reverse_merge`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MergeClass {
    Undecided = 0,
    Accept = 1,
    Reject = 2,
}

/// Plan of one divider stage over the weight interval `[b, b + M − 1]`.
#[derive(Clone, Debug)]
pub struct DividerStage {
    pub interval_start: u64,
    pub interval_len: u64,
    pub threshold: u64,
    pub r1: u64,
    /// `r₂ < … < r_k`
    pub primes: Vec<u64>,
    /// Multiplier `h` coprime to the modulus product.
    pub scale: u64,
    /// Start node in the first box.
    pub start: u32,
    /// `joins[j]` wires the bottom of box `j` into the top of box `j + 1`.
    pub joins: Vec<Vec<u32>>,
    pub classes: Vec<NodeClass>,
    /// Weights of the interval (capped at `n`) that end at each bottom node.
    pub weights: Vec<Vec<u64>>,
    /// Smallest and largest weight ending at an undecided node.
    pub undecided: Option<(u64, u64)>,
}

impl DividerStage {
    pub fn moduli(&self) -> Vec<u64> {
        std::iter::once(self.r1)
            .chain(self.primes.iter().copied())
            .collect()
    }

    pub fn box_count(&self) -> usize {
        1 + self.primes.len()
    }

    pub fn width(&self) -> usize {
        *self.primes.last().unwrap_or(&self.r1) as usize
    }

    pub fn modulus_product(&self) -> u128 {
        self.moduli().iter().map(|&r| r as u128).product()
    }

    /// Bottom node reached by weight `c`, by modular arithmetic.
    pub fn end_node(&self, c: u64) -> u32 {
        let moduli = self.moduli();
        let mut state = ((self.start as u64 + c) % moduli[0]) as u32;
        for (j, join) in self.joins.iter().enumerate() {
            let r = moduli[j + 1];
            state = ((join[state as usize] as u64 + c) % r) as u32;
        }
        state
    }

    /// Length of the undecided union, 0 if everything is decided.
    pub fn undecided_len(&self) -> u64 {
        self.undecided.map_or(0, |(lo, hi)| hi - lo + 1)
    }

    /// Every structural promise of the stage, as a list of failures.
    pub fn invariant_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let log_m = (self.interval_len as f64).log2();
        let k = self.box_count();
        if let (Some(&r2), Some(&rk)) = (self.primes.first(), self.primes.last()) {
            if (r2 as f64) <= 4.0 * log_m {
                out.push(format!(
                    "r2 = {r2} is not above 4 log M = {:.2}",
                    4.0 * log_m
                ));
            }
            if (rk as f64) >= 12.0 * log_m {
                out.push(format!(
                    "rk = {rk} is not below 12 log M = {:.2}",
                    12.0 * log_m
                ));
            }
            if self.r1 >= r2 {
                out.push(format!("r1 = {} is not below r2 = {r2}", self.r1));
            }
        } else {
            out.push("no prime boxes".into());
        }
        if !self.r1.is_power_of_two() {
            out.push(format!("r1 = {} is not a power of two", self.r1));
        }
        if self.primes.windows(2).any(|w| w[0] >= w[1]) || self.primes.iter().any(|&p| !is_prime(p))
        {
            out.push("primes are not increasing primes".into());
        }
        if (k as f64) > log_m {
            out.push(format!("k = {k} exceeds log M = {log_m:.2}"));
        }
        if self.modulus_product() < 2 * self.interval_len as u128 {
            out.push("modulus product is below 2M".into());
        }
        if 2 * self.undecided_len() > self.interval_len {
            out.push(format!(
                "undecided union {} exceeds M/2 = {}",
                self.undecided_len(),
                self.interval_len as f64 / 2.0
            ));
        }
        for (j, join) in self.joins.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            if !join.iter().all(|&t| seen.insert(t)) {
                out.push(format!("join {j} is not injective"));
            }
        }
        out
    }

    /// The joined boxes as a sinkless strict permutation fragment of width
    /// `r_k` and length `k·n`, started at `self.start`.
    pub fn fragment(&self, n: usize) -> Result<LayeredBranchingProgram> {
        let width = self.width();
        let moduli = self.moduli();
        let mut layers = Vec::with_capacity(n * moduli.len());
        for (j, &r) in moduli.iter().enumerate() {
            let rot = Arc::new(rotation(r as usize, width)?);
            let last = match self.joins.get(j) {
                Some(join) => {
                    let mut partial = vec![None; width];
                    for (a, &t) in join.iter().enumerate() {
                        partial[a] = Some(t);
                    }
                    let full = complete_permutation(&partial);
                    Arc::new(rot.then(|t| Target::Node(full[t as usize]))?)
                }
                None => rot.clone(),
            };
            for var in 0..n {
                let maps = if var + 1 == n {
                    last.clone()
                } else {
                    rot.clone()
                };
                layers.push(Layer { var, maps });
            }
        }
        LayeredBranchingProgram::new(n, width, self.start, layers)
    }
}

pub(crate) fn is_prime(v: u64) -> bool {
    v >= 2
        && (2..)
            .take_while(|d| d * d <= v)
            .all(|d| !v.is_multiple_of(d))
}

fn primes_in_open_interval(lo: f64, hi: f64) -> Vec<u64> {
    let top = hi.ceil() as u64;
    let mut sieve = vec![true; top as usize + 1];
    let mut out = Vec::new();
    for v in 2..=top {
        if sieve[v as usize] {
            let mut m = v * v;
            while m <= top {
                sieve[m as usize] = false;
                m += v;
            }
            if (v as f64) > lo && (v as f64) < hi {
                out.push(v);
            }
        }
    }
    out
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

/// Plan a divider stage for weights in `[b, b + len − 1]` and build its
/// fragment. Fails with `NoPrimeTuple` when the prime window cannot meet
/// the size constraints, which happens only for very short intervals.
pub fn divider_stage(
    n: usize,
    interval_start: u64,
    interval_len: u64,
    threshold: u64,
) -> Result<(DividerStage, LayeredBranchingProgram)> {
    if (interval_len as f64) <= (n as f64).log2() {
        return Err(Error::InvalidArgument(format!(
            "interval length {interval_len} is at most log n; use exact counting"
        )));
    }
    let stage = plan_divider(n, interval_start, interval_len, threshold)?;
    let fragment = stage.fragment(n)?;
    Ok((stage, fragment))
}

pub(crate) fn plan_divider(n: usize, b: u64, len: u64, threshold: u64) -> Result<DividerStage> {
    let no_tuple = || Error::NoPrimeTuple { interval_len: len };
    if len < 2 {
        return Err(no_tuple());
    }
    let log_m = (len as f64).log2();
    let window = primes_in_open_interval(4.0 * log_m, 12.0 * log_m);
    let r2 = *window.first().ok_or_else(no_tuple)?;
    let r1 = 1u64 << (63 - (r2 - 1).leading_zeros());
    let mut product = r1 as u128;
    let mut primes = Vec::new();
    for &p in &window {
        if product >= 2 * len as u128 {
            break;
        }
        primes.push(p);
        product *= p as u128;
    }
    if product < 2 * len as u128 || (1 + primes.len()) as f64 > log_m {
        return Err(no_tuple());
    }
    let moduli: Vec<u64> = std::iter::once(r1).chain(primes.iter().copied()).collect();

    let mut scale = (product / (2 * len as u128)).max(1);
    while gcd(scale, product) != 1 {
        scale -= 1;
    }
    // v_j = h · (P / r_j)^{-1} mod r_j turns box j's residue into its term
    // of the fractional expansion of h·c/P.
    let coeff: Vec<u64> = moduli
        .iter()
        .map(|&r| {
            let cofactor = ((product / r as u128) % r as u128) as u64;
            let w = mod_inverse(cofactor, r).expect("moduli are pairwise coprime");
            ((scale % r as u128) as u64 * w) % r
        })
        .collect();
    let offset = |r: u64| (r - b % r) % r;
    let start = offset(r1) as u32;
    let mut joins = Vec::with_capacity(primes.len());
    for j in 0..moduli.len() - 1 {
        let (r, next) = (moduli[j], moduli[j + 1]);
        let inv_next = mod_inverse(coeff[j + 1], next).expect("coefficient is invertible");
        let join: Vec<u32> = (0..r)
            .map(|state| {
                let acc = (coeff[j] * state) % r;
                let grid = ((2 * acc * next + r) / (2 * r)) % next;
                ((inv_next * grid + offset(next)) % next) as u32
            })
            .collect();
        joins.push(join);
    }

    let mut stage = DividerStage {
        interval_start: b,
        interval_len: len,
        threshold,
        r1,
        primes,
        scale: scale as u64,
        start,
        joins,
        classes: Vec::new(),
        weights: Vec::new(),
        undecided: None,
    };
    let width = stage.width();
    let mut weights = vec![Vec::new(); width];
    let top = (b + len - 1).min(n as u64);
    for c in b..=top {
        weights[stage.end_node(c) as usize].push(c);
    }
    let classes: Vec<NodeClass> = weights
        .iter()
        .map(|ws| {
            let above = ws.iter().filter(|&&c| c >= threshold).count();
            match (ws.is_empty(), above) {
                (true, _) => NodeClass::Unreached,
                (false, 0) => NodeClass::Reject,
                (false, a) if a == ws.len() => NodeClass::Accept,
                _ => NodeClass::Undecided,
            }
        })
        .collect();
    let undecided = weights
        .iter()
        .zip(&classes)
        .filter(|(_, &c)| c == NodeClass::Undecided)
        .flat_map(|(ws, _)| ws.iter().copied())
        .fold(None, |acc: Option<(u64, u64)>, c| match acc {
            None => Some((c, c)),
            Some((lo, hi)) => Some((lo.min(c), hi.max(c))),
        });
    stage.classes = classes;
    stage.weights = weights;
    stage.undecided = undecided;
    Ok(stage)
}

fn ptr_key(m: &Arc<LayerMaps>) -> usize {
    Arc::as_ptr(m) as usize
}

/// Append three reversed copies of a strict sinkless fragment so that every
/// input ends at one of three canonical nodes: `start` for undecided,
/// `W + start` for accept and `2W + start` for reject (`W` the fragment
/// width). Width triples and length doubles; the result is sinkless.
pub fn reverse_merge(
    fragment: &LayeredBranchingProgram,
    classes: &[MergeClass],
) -> Result<LayeredBranchingProgram> {
    let w = fragment.width();
    if classes.len() != w {
        return Err(Error::MalformedProgram(format!(
            "{} classes for a fragment of width {w}",
            classes.len()
        )));
    }
    if fragment.is_empty() || fragment.layers().iter().any(|l| !l.maps.is_bijective()) {
        return Err(Error::MalformedProgram(
            "reverse merge needs a non-empty fragment whose layers are bijections".into(),
        ));
    }
    let wide = 3 * w;
    let mut forward: HashMap<usize, Arc<LayerMaps>> = HashMap::new();
    let mut backward: HashMap<usize, Arc<LayerMaps>> = HashMap::new();
    let embed = |m: &LayerMaps| {
        let perm: Vec<u32> = (0..wide as u32)
            .map(|a| match a < w as u32 {
                true => node_of(m.target(false, a)),
                false => a,
            })
            .collect();
        let perm1: Vec<u32> = (0..wide as u32)
            .map(|a| match a < w as u32 {
                true => node_of(m.target(true, a)),
                false => a,
            })
            .collect();
        LayerMaps::new(to_targets(&perm), to_targets(&perm1))
    };
    let mut layers = Vec::with_capacity(2 * fragment.len());
    let last = fragment.len() - 1;
    for (i, layer) in fragment.layers().iter().enumerate() {
        let maps = if i == last {
            let route = |e: u32| classes[e as usize] as u32 * w as u32 + e;
            let mut out = [vec![None; wide], vec![None; wide]];
            for (b, slot) in out.iter_mut().enumerate() {
                for a in 0..w as u32 {
                    slot[a as usize] = Some(route(node_of(layer.maps.target(b == 1, a))));
                }
            }
            let [p0, p1] = out.map(|p| complete_permutation(&p));
            Arc::new(LayerMaps::new(to_targets(&p0), to_targets(&p1))?)
        } else {
            match forward.get(&ptr_key(&layer.maps)) {
                Some(m) => m.clone(),
                None => {
                    let m = Arc::new(embed(&layer.maps)?);
                    forward.insert(ptr_key(&layer.maps), m.clone());
                    m
                }
            }
        };
        layers.push(Layer {
            var: layer.var,
            maps,
        });
    }
    for layer in fragment.layers().iter().rev() {
        let maps = match backward.get(&ptr_key(&layer.maps)) {
            Some(m) => m.clone(),
            None => {
                let inv = |b: bool| {
                    (0..wide as u32)
                        .map(|a| {
                            let (copy, local) = (a / w as u32, a % w as u32);
                            let src = layer.maps.source(b, local).expect("bijective layer");
                            Target::Node(copy * w as u32 + src)
                        })
                        .collect::<Vec<_>>()
                };
                let m = Arc::new(LayerMaps::new(inv(false), inv(true))?);
                backward.insert(ptr_key(&layer.maps), m.clone());
                m
            }
        };
        layers.push(Layer {
            var: layer.var,
            maps,
        });
    }
    LayeredBranchingProgram::new(fragment.num_vars(), wide, fragment.start(), layers)
}

fn node_of(t: Target) -> u32 {
    match t {
        Target::Node(j) => j,
        _ => unreachable!("fragment layers have no sink edges"),
    }
}

fn to_targets(perm: &[u32]) -> Vec<Target> {
    perm.iter().map(|&j| Target::Node(j)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageInfo {
    pub interval_start: u64,
    pub interval_len: u64,
    pub moduli: Vec<u64>,
    pub undecided: Option<(u64, u64)>,
}

/// How a threshold program was assembled and how big it came out.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorityReport {
    pub n: usize,
    pub threshold: usize,
    pub stages: Vec<StageInfo>,
    /// Interval handed to the exact counter, if any.
    pub finisher: Option<(u64, u64)>,
    /// The plain counter was used instead of divider stages.
    pub fallback: bool,
    pub width: usize,
    pub length: usize,
    pub size: u64,
}

impl MajorityReport {
    /// `size / (n · log₂³ n)`
    pub fn size_ratio(&self) -> f64 {
        let lg = (self.n as f64).log2();
        self.size as f64 / (self.n as f64 * lg * lg * lg)
    }
}

/// Strict permutation program accepting iff `|x| ≥ ⌈n/2⌉`.
pub fn majority_pbp(n: usize) -> Result<LayeredBranchingProgram> {
    threshold_pbp(n, n.div_ceil(2)).map(|(bp, _)| bp)
}

/// Strict permutation program accepting iff `|x| ≥ threshold`.
pub fn threshold_pbp(
    n: usize,
    threshold: usize,
) -> Result<(LayeredBranchingProgram, MajorityReport)> {
    if n == 0 || threshold > n {
        return Err(Error::InvalidArgument(format!(
            "threshold program needs 1 <= n and threshold <= n, got n={n}, threshold={threshold}"
        )));
    }
    let log_n = (n as f64).log2();
    let theta = threshold as u64;
    let (mut b, mut len) = (0u64, n as u64 + 1);
    let mut stages = Vec::new();
    let mut region = 0u64;
    while (len as f64) > log_n && !(region > 0 && len <= region) {
        let stage = match plan_divider(n, b, len, theta) {
            Ok(s) => s,
            Err(Error::NoPrimeTuple { .. }) => break,
            Err(e) => return Err(e),
        };
        let next = stage.undecided;
        let progressed = 2 * stage.undecided_len() <= len;
        region = region.max(3 * stage.width() as u64);
        stages.push(stage);
        match next {
            None => {
                len = 0;
                break;
            }
            Some((lo, hi)) => {
                if !progressed {
                    return Err(Error::MalformedProgram(format!(
                        "divider stage on [{b}, {}] did not halve the interval",
                        b + len - 1
                    )));
                }
                b = lo;
                len = hi - lo + 1;
            }
        }
    }
    if stages.is_empty() {
        let bp = counter_threshold_pbp(n, threshold)?;
        let report = MajorityReport {
            n,
            threshold,
            stages: Vec::new(),
            finisher: None,
            fallback: true,
            width: bp.width(),
            length: bp.len(),
            size: bp.size(),
        };
        return Ok((bp, report));
    }
    let finisher = (len > 0).then_some((b, len));
    assemble(n, theta, stages, finisher)
}

fn assemble(
    n: usize,
    theta: u64,
    stages: Vec<DividerStage>,
    finisher: Option<(u64, u64)>,
) -> Result<(LayeredBranchingProgram, MajorityReport)> {
    let lanes = 2 * stages.len();
    let region = stages
        .iter()
        .map(|s| 3 * s.width())
        .chain(finisher.map(|(_, len)| len as usize))
        .max()
        .unwrap_or(1);
    let width = lanes + region;
    let off = lanes as u32;

    // Final sink labels: lanes alternate accept/reject.
    let lane_label = |j: u32| Target::sink(j.is_multiple_of(2));

    let embed = |m: &LayerMaps| -> Result<LayerMaps> {
        let inner = m.width() as u32;
        let map = |b: bool| -> Vec<Target> {
            (0..width as u32)
                .map(|a| {
                    if a >= off && a < off + inner {
                        match m.target(b, a - off) {
                            Target::Node(j) => Target::Node(j + off),
                            sink => sink,
                        }
                    } else {
                        Target::Node(a)
                    }
                })
                .collect()
        };
        LayerMaps::new(map(false), map(true))
    };

    let starts: Vec<u32> = stages
        .iter()
        .map(|s| s.start)
        .chain(finisher.map(|(b, len)| ((len - b % len) % len) as u32))
        .collect();

    let mut layers = Vec::new();
    let mut infos = Vec::with_capacity(stages.len());
    for (i, stage) in stages.iter().enumerate() {
        let w = stage.width() as u32;
        let classes: Vec<MergeClass> = stage
            .classes
            .iter()
            .map(|c| match c {
                NodeClass::Accept => MergeClass::Accept,
                NodeClass::Undecided => MergeClass::Undecided,
                NodeClass::Reject | NodeClass::Unreached => MergeClass::Reject,
            })
            .collect();
        let merged = reverse_merge(&stage.fragment(n)?, &classes)?;
        let (u, a, r) = (
            off + stage.start,
            off + w + stage.start,
            off + 2 * w + stage.start,
        );
        let next_start = starts.get(i + 1).map(|s| off + s);
        let mut cache: HashMap<usize, Arc<LayerMaps>> = HashMap::new();
        let last = merged.len() - 1;
        for (li, layer) in merged.layers().iter().enumerate() {
            let maps = if li == last {
                let embedded = embed(&layer.maps)?;
                match next_start {
                    Some(ns) => {
                        let mut partial = vec![None; width];
                        for (p, slot) in partial.iter_mut().enumerate().take(2 * i) {
                            *slot = Some(p as u32);
                        }
                        partial[u as usize] = Some(ns);
                        partial[a as usize] = Some(2 * i as u32);
                        partial[r as usize] = Some(2 * i as u32 + 1);
                        let t = complete_permutation(&partial);
                        Arc::new(embedded.then(|j| Target::Node(t[j as usize]))?)
                    }
                    None => Arc::new(embedded.then(|j| {
                        if j < off {
                            lane_label(j)
                        } else {
                            Target::sink(j == a)
                        }
                    })?),
                }
            } else {
                match cache.get(&ptr_key(&layer.maps)) {
                    Some(m) => m.clone(),
                    None => {
                        let m = Arc::new(embed(&layer.maps)?);
                        cache.insert(ptr_key(&layer.maps), m.clone());
                        m
                    }
                }
            };
            layers.push(Layer {
                var: layer.var,
                maps,
            });
        }
        infos.push(StageInfo {
            interval_start: stage.interval_start,
            interval_len: stage.interval_len,
            moduli: stage.moduli(),
            undecided: stage.undecided,
        });
    }
    if let Some((b, len)) = finisher {
        let rot = Arc::new(embed(&rotation(len as usize, len as usize)?)?);
        let last = Arc::new(rot.then(|j| {
            if j < off {
                lane_label(j)
            } else if j < off + len as u32 {
                Target::sink(b + (j - off) as u64 >= theta)
            } else {
                Target::Reject
            }
        })?);
        for var in 0..n {
            let maps = if var + 1 == n {
                last.clone()
            } else {
                rot.clone()
            };
            layers.push(Layer { var, maps });
        }
    }
    let bp = LayeredBranchingProgram::new(n, width, off + starts[0], layers)?;
    let report = MajorityReport {
        n,
        threshold: theta as usize,
        stages: infos,
        finisher,
        fallback: false,
        width,
        length: bp.len(),
        size: bp.size(),
    };
    Ok((bp, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{index_to_bits, parse_bits, weight};
    use crate::bp::PermutationKind;

    fn canonical(n: usize, w: usize) -> Vec<bool> {
        (0..n).map(|i| i < w).collect()
    }

    #[test]
    fn small_majority_example() {
        let bp = majority_pbp(5).unwrap();
        assert!(bp.evaluate(&parse_bits("11100").unwrap()).unwrap());
        assert!(!bp.evaluate(&parse_bits("11000").unwrap()).unwrap());
    }

    #[test]
    fn majority_exhaustive_small() {
        for n in 1..=12 {
            let bp = majority_pbp(n).unwrap();
            assert_eq!(bp.validate().unwrap(), PermutationKind::Strict);
            for i in 0..1u64 << n {
                let x = index_to_bits(i, n);
                assert_eq!(
                    bp.evaluate(&x).unwrap(),
                    2 * weight(&x) >= n,
                    "n={n} x={i:b}"
                );
            }
        }
    }

    #[test]
    fn threshold_per_weight() {
        for n in [20usize, 33, 64, 100] {
            for t in [0, 1, n / 3, n / 2, n - 1, n] {
                let (bp, _) = threshold_pbp(n, t).unwrap();
                for w in 0..=n {
                    assert_eq!(
                        bp.evaluate(&canonical(n, w)).unwrap(),
                        w >= t,
                        "n={n} t={t} w={w}"
                    );
                }
            }
        }
    }

    #[test]
    fn divider_stage_invariants_and_two_routes() {
        let (stage, frag) = divider_stage(4096, 0, 4097, 2048).unwrap();
        assert!(
            stage.invariant_failures().is_empty(),
            "{:?}",
            stage.invariant_failures()
        );
        for c in (0..=4096).step_by(97).chain([2047, 2048, 4096]) {
            let sim = frag.run_from(stage.start, &canonical(4096, c as usize));
            assert_eq!(sim, Target::Node(stage.end_node(c)));
        }
    }

    #[test]
    fn divider_rejects_short_interval() {
        assert!(matches!(
            divider_stage(1024, 0, 10, 5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn reverse_merge_funnels_classes() {
        let (stage, frag) = divider_stage(64, 0, 65, 32).unwrap();
        let classes: Vec<MergeClass> = stage
            .classes
            .iter()
            .map(|c| match c {
                NodeClass::Accept => MergeClass::Accept,
                NodeClass::Undecided => MergeClass::Undecided,
                _ => MergeClass::Reject,
            })
            .collect();
        let merged = reverse_merge(&frag, &classes).unwrap();
        let w = frag.width() as u32;
        assert_eq!(merged.width(), 3 * frag.width());
        assert_eq!(merged.len(), 2 * frag.len());
        for layer in merged.layers() {
            assert!(layer.maps.is_bijective());
        }
        for c in 0..=64u64 {
            let node = stage.end_node(c);
            let expect = classes[node as usize] as u32 * w + stage.start;
            assert_eq!(
                merged.run_from(stage.start, &canonical(64, c as usize)),
                Target::Node(expect)
            );
        }
    }

    #[test]
    fn reverse_merge_needs_bijective_layers() {
        let and = crate::bp::gate_pbp(crate::bp::GateKind::And, 2).unwrap();
        assert!(matches!(
            reverse_merge(&and, &[MergeClass::Accept]),
            Err(Error::MalformedProgram(_))
        ));
    }

    #[test]
    fn modular_inverse() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(primes_in_open_interval(4.0, 12.0), vec![5, 7, 11]);
    }
}
