//! Lowering pipeline: single-spill normalization, branching program
//! compilation, formulas and protocol trees.

mod formula;
mod leaves;
mod normalize;
mod pbp;
mod tree;

pub use formula::{compile_formula, parse_formula, FormulaNode, GateOp};
pub use leaves::{alice_literal, and_pair_leaf, bob_literal, build_dmaj, DmajVariant};
pub use normalize::{normalize_single_spill, NormalizedProtocol};
pub use pbp::compile_pbp;
pub use tree::{compile_protocol_tree, parse_protocol_tree, ProtocolTree, TreeNode};
