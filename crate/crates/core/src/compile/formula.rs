//! Boolean formulas over Alice's and Bob's bits.
//!
//! ```text
//! formula := var | KIND "(" formula ("," formula)* ")"
//! var     := ("x" | "y") digits        (1-based)
//! KIND    := AND | OR | XOR | MAJ
//! ```
//!
//! Whitespace is ignored.

use std::collections::BTreeMap;
use std::fmt;

use super::compile_pbp;
use super::leaves::{alice_literal, and_pair_leaf, bob_literal};
use crate::bp::{gate_pbp, majority_pbp, GateKind};
use crate::error::{Error, Result};
use crate::model::{Protocol, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    Or,
    Xor,
    Maj,
}

impl GateOp {
    fn name(self) -> &'static str {
        match self {
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Xor => "XOR",
            GateOp::Maj => "MAJ",
        }
    }

    fn apply(self, values: &[bool]) -> bool {
        let ones = values.iter().filter(|&&v| v).count();
        match self {
            GateOp::And => ones == values.len(),
            GateOp::Or => ones > 0,
            GateOp::Xor => ones % 2 == 1,
            GateOp::Maj => 2 * ones >= values.len(),
        }
    }
}

/// Variable indices are 1-based, as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulaNode {
    Leaf(Side, usize),
    /// `x_i ∧ y_i` as a single two-pipe gadget.
    AndPairLeaf(usize),
    Gate(GateOp, Vec<FormulaNode>),
}

impl FormulaNode {
    /// Input lengths `(|x|, |y|)` implied by the largest indices used.
    pub fn input_lens(&self) -> (usize, usize) {
        match self {
            FormulaNode::Leaf(Side::Alice, i) => (*i, 0),
            FormulaNode::Leaf(Side::Bob, i) => (0, *i),
            FormulaNode::AndPairLeaf(i) => (*i, *i),
            FormulaNode::Gate(_, children) => children
                .iter()
                .map(FormulaNode::input_lens)
                .fold((0, 0), |(a, b), (c, d)| (a.max(c), b.max(d))),
        }
    }

    pub fn evaluate(&self, x: &[bool], y: &[bool]) -> bool {
        match self {
            FormulaNode::Leaf(Side::Alice, i) => x[i - 1],
            FormulaNode::Leaf(Side::Bob, i) => y[i - 1],
            FormulaNode::AndPairLeaf(i) => x[i - 1] && y[i - 1],
            FormulaNode::Gate(op, children) => {
                let values: Vec<bool> = children.iter().map(|c| c.evaluate(x, y)).collect();
                op.apply(&values)
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            FormulaNode::Gate(_, children) => children.iter().map(FormulaNode::leaf_count).sum(),
            _ => 1,
        }
    }

    /// `XOR(AND(x1,y1), …, AND(xn,yn))`.
    pub fn inner_product(n: usize) -> FormulaNode {
        FormulaNode::Gate(
            GateOp::Xor,
            (1..=n)
                .map(|i| {
                    FormulaNode::Gate(
                        GateOp::And,
                        vec![
                            FormulaNode::Leaf(Side::Alice, i),
                            FormulaNode::Leaf(Side::Bob, i),
                        ],
                    )
                })
                .collect(),
        )
    }
}

impl fmt::Display for FormulaNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaNode::Leaf(Side::Alice, i) => write!(f, "x{i}"),
            FormulaNode::Leaf(Side::Bob, i) => write!(f, "y{i}"),
            FormulaNode::AndPairLeaf(i) => write!(f, "AND(x{i},y{i})"),
            FormulaNode::Gate(op, children) => {
                write!(f, "{}(", op.name())?;
                for (k, c) in children.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn formula(&mut self) -> Result<FormulaNode> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.text.get(start) {
                Some(&c) => self.syntax(start, format!("unexpected {:?}", c as char)),
                None => self.syntax(start, "unexpected end of input"),
            });
        }
        let ident = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii");
        let op = match ident {
            "AND" => GateOp::And,
            "OR" => GateOp::Or,
            "XOR" => GateOp::Xor,
            "MAJ" => GateOp::Maj,
            _ => return self.variable(ident, start),
        };
        if self.peek() != Some(b'(') {
            return Err(self.syntax(self.pos, format!("expected '(' after {ident}")));
        }
        self.pos += 1;
        if self.peek() == Some(b')') {
            return Err(Error::Arity { offset: start });
        }
        let mut children = vec![self.formula()?];
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    children.push(self.formula()?);
                }
                Some(b')') => {
                    self.pos += 1;
                    return Ok(FormulaNode::Gate(op, children));
                }
                _ => return Err(self.syntax(self.pos, "expected ',' or ')'")),
            }
        }
    }

    fn variable(&self, ident: &str, start: usize) -> Result<FormulaNode> {
        let side = match ident.as_bytes()[0] {
            b'x' => Side::Alice,
            b'y' => Side::Bob,
            _ => return Err(self.syntax(start, format!("unknown identifier {ident:?}"))),
        };
        let digits = &ident[1..];
        match digits.parse::<usize>() {
            Ok(i) if i >= 1 && digits.bytes().all(|b| b.is_ascii_digit()) => {
                Ok(FormulaNode::Leaf(side, i))
            }
            _ => Err(self.syntax(start, format!("unknown identifier {ident:?}"))),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<FormulaNode> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let f = p.formula()?;
    match p.peek() {
        None => Ok(f),
        Some(_) => Err(p.syntax(p.pos, "trailing input")),
    }
}

/// Lower a formula bottom-up: literals become atomic protocols, gates become
/// compiled gate programs over their compiled children. `AND(xi, yi)` with
/// matching indices uses the two-pipe pair gadget.
///
/// Each gate level multiplies the children's sizes by about `6W`: every
/// layer holds `2W` copies and normalization triples a copy. `W` is 1 for
/// AND and OR and 2 for XOR, so at fixed depth the size is linear in the
/// leaf count.
pub fn compile_formula(f: &FormulaNode) -> Result<Protocol> {
    let (nx, ny) = f.input_lens();
    let mut p = lower(f, nx, ny)?;
    p.meta.construction = format!("formula {f}");
    Ok(p)
}

fn lower(f: &FormulaNode, nx: usize, ny: usize) -> Result<Protocol> {
    match f {
        FormulaNode::Leaf(Side::Alice, i) => Ok(alice_literal(nx, ny, i - 1)),
        FormulaNode::Leaf(Side::Bob, i) => Ok(bob_literal(nx, ny, i - 1)),
        FormulaNode::AndPairLeaf(i) => Ok(and_pair_leaf(nx, ny, i - 1)),
        FormulaNode::Gate(GateOp::And, children)
            if matches!(children.as_slice(),
                [FormulaNode::Leaf(Side::Alice, i), FormulaNode::Leaf(Side::Bob, j)] if i == j) =>
        {
            let FormulaNode::Leaf(_, i) = children[0] else {
                unreachable!()
            };
            Ok(and_pair_leaf(nx, ny, i - 1))
        }
        FormulaNode::Gate(op, children) => {
            if children.is_empty() {
                return Err(Error::Arity { offset: 0 });
            }
            let k = children.len();
            let bp = match op {
                GateOp::And => gate_pbp(GateKind::And, k)?,
                GateOp::Or => gate_pbp(GateKind::Or, k)?,
                GateOp::Xor => gate_pbp(GateKind::Xor, k)?,
                GateOp::Maj => majority_pbp(k)?,
            };
            let leaves = children
                .iter()
                .enumerate()
                .map(|(v, c)| Ok((v, lower(c, nx, ny)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            compile_pbp(&bp, &leaves)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::index_to_bits;
    use crate::model::evaluate;

    #[test]
    fn parses_examples() {
        let f = parse_formula("XOR(AND(x1,y1),AND(x2,y2))").unwrap();
        assert_eq!(f, FormulaNode::inner_product(2));
        assert_eq!(
            parse_formula(" x3 ").unwrap(),
            FormulaNode::Leaf(Side::Alice, 3)
        );
        assert_eq!(f.to_string(), "XOR(AND(x1,y1),AND(x2,y2))");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_formula("MAJ(x1 y1)"),
            Err(Error::Syntax { offset: 7, .. })
        ));
        assert_eq!(
            parse_formula("MAJ()").unwrap_err(),
            Error::Arity { offset: 0 }
        );
        assert!(matches!(
            parse_formula("AND(z1)"),
            Err(Error::Syntax { offset: 4, .. })
        ));
        assert!(matches!(parse_formula("x0"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_formula("x1)"),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            parse_formula(""),
            Err(Error::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            parse_formula("OR(x1,"),
            Err(Error::Syntax { offset: 6, .. })
        ));
    }

    fn check_exhaustive(f: &FormulaNode) -> Protocol {
        let p = compile_formula(f).unwrap();
        let (nx, ny) = f.input_lens();
        for i in 0..1u64 << (nx + ny) {
            let (x, y) = (
                index_to_bits(i >> ny, nx),
                index_to_bits(i & ((1 << ny) - 1), ny),
            );
            assert_eq!(
                evaluate(&p, &x, &y).unwrap().output,
                f.evaluate(&x, &y),
                "{f} on {i:b}"
            );
        }
        p
    }

    #[test]
    fn inner_product_two() {
        check_exhaustive(&FormulaNode::inner_product(2));
    }

    #[test]
    fn bob_literal_has_two_pipes() {
        let p = check_exhaustive(&FormulaNode::Leaf(Side::Bob, 1));
        assert_eq!(p.pipe_count(), 2);
    }

    #[test]
    fn mixed_gates() {
        for text in [
            "MAJ(x1,y1,x2)",
            "OR(AND(x1,y2),XOR(y1,x2),x1)",
            "AND(OR(x1,y1),MAJ(x2,y2,x1,y1))",
            "XOR(x1)",
            "MAJ(XOR(x1,y1),AND(x2,y2),OR(x1,y2))",
        ] {
            check_exhaustive(&parse_formula(text).unwrap());
        }
    }
}
