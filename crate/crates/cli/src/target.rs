//! Named protocols together with the function they are meant to compute.

use garden_hose::bits::{bits_to_string, inner_product, parse_bits};
use garden_hose::compile::{build_dmaj, compile_formula, DmajVariant, FormulaNode};
use garden_hose::constructions::{
    equality_block_with_budget, equality_private_coin, equality_public_coin, equality_serial,
    eval_pj, pointer_jumping_protocol, PJInstance, RandomTape, TapeScope, DEFAULT_BLOCK_BUDGET,
};
use garden_hose::model::Protocol;

use crate::CliError;

pub const FUNCTIONS: &[&str] = &[
    "eq-serial",
    "eq-block",
    "pj",
    "dmaj",
    "ip",
    "pub-eq",
    "pri-eq",
];

/// Parameters selecting one construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FnSpec {
    pub function: String,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub b: Option<usize>,
    pub t: Option<usize>,
    pub m: Option<usize>,
    pub variant: Option<String>,
    pub seed: Option<u64>,
}

impl FnSpec {
    pub fn n(&self) -> Result<usize, CliError> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(CliError::usage("--n must be at least 1")),
            None => Err(CliError::usage(format!(
                "--n is required for {}",
                self.function
            ))),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::usage(format!(
                "--seed is required for the randomized function {}",
                self.function
            ))
        })
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self.function.as_str(), "pub-eq" | "pri-eq")
    }

    pub fn block(&self) -> Result<usize, CliError> {
        let n = self.n()?;
        Ok(self
            .b
            .unwrap_or_else(|| (1..=n).find(|b| b * b >= n).unwrap_or(n)))
    }

    pub fn variant(&self) -> Result<DmajVariant, CliError> {
        Ok(self.variant.as_deref().unwrap_or("st97").parse()?)
    }

    pub fn t(&self) -> usize {
        self.t.unwrap_or(2)
    }

    pub fn m(&self) -> Result<usize, CliError> {
        Ok(self.m.unwrap_or(8 * self.n()?))
    }

    /// The protocol. Randomized functions use `--seed` for their tape.
    pub fn build(&self, budget_pipes: Option<usize>) -> Result<Protocol, CliError> {
        let n = self.n()?;
        let p = match self.function.as_str() {
            "eq-serial" => equality_serial(n),
            "eq-block" => equality_block_with_budget(
                n,
                self.block()?,
                budget_pipes.unwrap_or(DEFAULT_BLOCK_BUDGET),
            )?,
            "pj" => pointer_jumping_protocol(
                n,
                self.k
                    .ok_or_else(|| CliError::usage("--k is required for pj"))?,
            )?,
            "dmaj" => build_dmaj(n, self.variant()?)?,
            "ip" => compile_formula(&FormulaNode::inner_product(n))?,
            "pub-eq" => {
                let tape = RandomTape::from_seed(TapeScope::Public, self.t() * n, self.seed()?);
                equality_public_coin(n, self.t(), &tape)?
            }
            "pri-eq" => equality_private_coin(n, self.m()?, self.seed()?)?,
            other => {
                return Err(CliError::usage(format!(
                    "unknown function {other:?}, expected one of {}",
                    FUNCTIONS.join(", ")
                )))
            }
        };
        if let Some(cap) = budget_pipes {
            if p.pipe_count() > cap {
                return Err(CliError::usage(format!(
                    "protocol needs {} pipes, budget is {cap}",
                    p.pipe_count()
                )));
            }
        }
        Ok(p)
    }

    /// The intended value on inputs of the protocol's shape, or `None` for
    /// inputs outside the function's domain.
    pub fn reference(&self, x: &[bool], y: &[bool]) -> Result<Option<bool>, CliError> {
        let n = self.n()?;
        Ok(Some(match self.function.as_str() {
            "eq-serial" | "eq-block" | "pub-eq" | "pri-eq" => x[..n] == *y,
            "ip" => inner_product(x, y),
            "dmaj" => 2 * x.iter().zip(y).filter(|(a, b)| **a && **b).count() >= n,
            "pj" => {
                let k = self
                    .k
                    .ok_or_else(|| CliError::usage("--k is required for pj"))?;
                match PJInstance::from_inputs(n, k, x, y) {
                    Some(inst) => eval_pj(&inst),
                    None => return Ok(None),
                }
            }
            other => return Err(CliError::usage(format!("unknown function {other:?}"))),
        }))
    }

    /// `key=value` fields, in a fixed order, for instance-file headers.
    pub fn header(&self) -> String {
        let mut out = format!("function={}", self.function);
        let opt = |out: &mut String, key: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push_str(&format!(" {key}={v}"));
            }
        };
        opt(&mut out, "n", self.n.map(|v| v.to_string()));
        opt(&mut out, "k", self.k.map(|v| v.to_string()));
        opt(&mut out, "b", self.b.map(|v| v.to_string()));
        opt(&mut out, "t", self.t.map(|v| v.to_string()));
        opt(&mut out, "m", self.m.map(|v| v.to_string()));
        opt(&mut out, "variant", self.variant.clone());
        opt(&mut out, "seed", self.seed.map(|v| v.to_string()));
        out
    }

    /// Inverse of [`FnSpec::header`] plus `x=` and `y=` fields.
    pub fn parse_header(line: &str) -> Result<(FnSpec, Vec<bool>, Vec<bool>), CliError> {
        let mut spec = FnSpec::default();
        let (mut x, mut y) = (None, None);
        for field in line.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("bad header field {field:?}")))?;
            let num = || {
                value
                    .parse::<usize>()
                    .map_err(|_| CliError::usage(format!("{key} must be a number")))
            };
            match key {
                "function" => spec.function = value.to_string(),
                "n" => spec.n = Some(num()?),
                "k" => spec.k = Some(num()?),
                "b" => spec.b = Some(num()?),
                "t" => spec.t = Some(num()?),
                "m" => spec.m = Some(num()?),
                "variant" => spec.variant = Some(value.to_string()),
                "seed" => spec.seed = Some(num()? as u64),
                "x" => x = Some(parse_bits(value)?),
                "y" => y = Some(parse_bits(value)?),
                _ => return Err(CliError::usage(format!("unknown header field {key:?}"))),
            }
        }
        match (x, y) {
            (Some(x), Some(y)) if !spec.function.is_empty() => Ok((spec, x, y)),
            _ => Err(CliError::usage(
                "instance header needs function=, x= and y=",
            )),
        }
    }

    pub fn input_header(&self, x: &[bool], y: &[bool]) -> String {
        format!(
            "{} x={} y={}",
            self.header(),
            bits_to_string(x),
            bits_to_string(y)
        )
    }
}
