//! Brute-force ground truth for tiny functions and protocols.

mod bounds;
mod matrix;
mod table;

pub use bounds::{
    cover_numbers, exhaustive_verify, one_way_cc, CoverNumbers, Direction, Verdict,
    EXACT_COVER_BITS,
};
pub use matrix::{
    enumerate_matchings, enumerate_matchings_with_cap, garden_hose_matrix, involution_count,
    min_gh, GardenHoseMatrix, GhWitness, DEFAULT_MATCHING_CAP, MATRIX_CAP, MIN_GH_INPUT_CAP,
};
pub use table::{FunctionTable, TABLE_GUARD};
