//! Attack algorithms used to validate the scheme's security claims at toy
//! scale: exhaustive hash inversion, the time-memory trade-off on `P·c₁ = c₂`,
//! and multi-enrollment instances of the revocability equation
//! `P_i P_jᵀ c_j + P_i e_ij = c_i`.

mod brute;
mod revocability;
mod tmto;

pub use brute::{brute_force_invert, BruteForceOutcome};
pub use revocability::{build_revocability_instance, RevocabilityGroundTruth, RevocabilityInstance};
pub use tmto::{
    is_codeword, plant_exact_instance, search_space_size, tmto_exact, ExactInstance, TmtoOptions, TmtoReport,
    TmtoResult, DEFAULT_CAPACITY,
};
