//! Conversion of a ν-s-supergale `d` into a ν-s'-gale `d'` for `s' > s`
//! that succeeds wherever `d` does.
//!
//! The pieces are the set gales `d_U^t`, the prefix-set partition of `U`,
//! the level sets `U_i = {w : d(w) > 2^i}`, and the sum
//! `d' = Σ_i i·d_{U_i}^{s'}` truncated at index `I` and depth `K`, with
//! the discarded mass bounded through a balance certificate.

mod build;
mod dut;
mod levels;
mod plan;
mod sets;

pub use build::{build_dprime, build_dprime_uniform, BuildOptions, Conversion, IndexPart};
pub use dut::{
    dut_table, eval_dut, eval_dut_uniform, verify_dut_is_gale, DutEvaluator, DutReport,
    Truncation,
};
pub use levels::{enumerate_level_sets, LevelSet, LevelSetFamily};
pub use plan::{tail_bound, ConversionPlan};
pub use sets::{partition_prefix_sets, StringSet};
