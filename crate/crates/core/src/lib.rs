//! Garden-hose protocols and the tools to build and check them.
//!
//! * [`model`]: instances, strategies, evaluation, time and certificates.
//! * [`bp`]: layered permutation branching programs, including a
//!   quasi-linear-size strict program for majority.
//! * [`compile`]: single-spill normalization and compilers from branching
//!   programs, formulas and protocol trees to garden-hose protocols.
//! * [`constructions`]: equality, pointer jumping and randomized equality.
//! * [`oracle`]: truth tables, matching enumeration, the garden-hose matrix,
//!   exact minimum size for tiny functions, covers and one-way complexity.

pub mod bits;
pub mod bp;
pub mod compile;
pub mod constructions;
pub mod error;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
