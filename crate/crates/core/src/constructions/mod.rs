//! Named protocols: equality in several flavours and pointer jumping.

mod equality;
mod pj;

pub use equality::{
    equality_block, equality_block_with_budget, equality_private_coin, equality_public_coin,
    equality_serial, private_coin_table, RandomTape, TapeScope, DEFAULT_BLOCK_BUDGET,
};
pub use pj::{eval_pj, pj_target, pointer_jumping_protocol, PJInstance};
