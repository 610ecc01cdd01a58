use crate::ecc::{enumerate, Codeword};
use crate::geometry::{normalize, UnitVector};
use crate::protection::{digests_equal, hash_codeword, ProtectedTemplate};

#[derive(Clone, Debug, PartialEq)]
pub enum BruteForceOutcome {
    /// `template = Pᵀ·c`, the enrolled template up to round-off.
    Found { codeword: Codeword, template: UnitVector, tries: u64 },
    Exhausted { tries: u64 },
}

/// Hashes codewords in canonical order until one matches the stored digest
/// or `budget` candidates have been tried.
pub fn brute_force_invert(pt: &ProtectedTemplate, budget: u64) -> BruteForceOutcome {
    let mut tries = 0;
    for c in enumerate(pt.params()).take(budget.try_into().unwrap_or(usize::MAX)) {
        tries += 1;
        if digests_equal(&hash_codeword(&c), pt.digest()) {
            let back = pt.helper().transpose().mul_vec(&c.to_dense()).expect("dimensions agree");
            let template = normalize(&back).expect("orthogonal image of a unit vector");
            return BruteForceOutcome::Found { codeword: c, template, tries };
        }
    }
    BruteForceOutcome::Exhausted { tries }
}
