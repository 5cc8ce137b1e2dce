use thiserror::Error;

use crate::model::{Side, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{side:?} input has {got} bits, protocol expects {expected}")]
    InputLength {
        side: Side,
        expected: usize,
        got: usize,
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(Violation),
    #[error("input domain of 2^{bits} points exceeds the enumeration guard 2^{limit}")]
    DomainTooLarge { bits: usize, limit: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed branching program: {0}")]
    MalformedProgram(String),
    #[error("leaf for variable {var} expects inputs ({got_x}, {got_y}) but the program uses ({want_x}, {want_y})")]
    LeafArityMismatch {
        var: usize,
        want_x: usize,
        want_y: usize,
        got_x: usize,
        got_y: usize,
    },
    #[error("no leaf protocol for variable {0}")]
    MissingLeaf(usize),
    #[error("no prime tuple in the window for interval length {interval_len}")]
    NoPrimeTuple { interval_len: u64 },
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("gate at offset {offset} has no arguments")]
    Arity { offset: usize },
    #[error("malformed protocol tree: {0}")]
    MalformedTree(String),
    #[error("block of {block_bits} bits needs 2^{block_bits} pipes, budget is {budget}")]
    BlockTooLarge { block_bits: usize, budget: usize },
    #[error("random tape has {got} bits, {needed} needed")]
    TapeTooShort { needed: usize, got: usize },
    #[error("{what} = {value} exceeds the cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("no protocol with at most {s_max} pipes")]
    NotFound { s_max: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
