use rand::Rng;

use crate::ecc::{CodeParams, Codeword};
use crate::error::{Error, Result};
use crate::geometry::UnitVector;
use crate::protection::{protect_revealing, Digest32};
use crate::rotation::OrthogonalMatrix;
use crate::simulation::perturb_exact_angle;

/// Secrets behind a [`RevocabilityInstance`], kept for validation only.
#[derive(Clone, Debug, PartialEq)]
pub struct RevocabilityGroundTruth {
    pub base: UnitVector,
    pub templates: Vec<UnitVector>,
    pub codewords: Vec<Codeword>,
}

/// `m` independent protections of noisy versions of one template.
#[derive(Clone, Debug, PartialEq)]
pub struct RevocabilityInstance {
    pub params: CodeParams,
    pub helpers: Vec<OrthogonalMatrix>,
    pub digests: Vec<Digest32>,
    pub ground_truth: RevocabilityGroundTruth,
}

impl RevocabilityInstance {
    pub fn len(&self) -> usize {
        self.helpers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.helpers.is_empty()
    }

    /// `e_ij = t_i − t_j`.
    pub fn error_vector(&self, i: usize, j: usize) -> Vec<f64> {
        let t = &self.ground_truth.templates;
        t[i].iter().zip(t[j].iter()).map(|(a, b)| a - b).collect()
    }

    /// `P_i P_jᵀ`, the public matrix an attacker holding both helpers sees.
    pub fn relative_helper(&self, i: usize, j: usize) -> OrthogonalMatrix {
        self.helpers[i].mul(&self.helpers[j].transpose()).expect("equal dimensions")
    }
}

pub fn build_revocability_instance<R: Rng + ?Sized>(
    count: usize,
    theta: f64,
    params: CodeParams,
    rng: &mut R,
) -> Result<RevocabilityInstance> {
    if count < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 enrollments, got {count}")));
    }
    let base = UnitVector::random(params.dim(), rng)?;
    let mut helpers = Vec::with_capacity(count);
    let mut digests = Vec::with_capacity(count);
    let mut templates = Vec::with_capacity(count);
    let mut codewords = Vec::with_capacity(count);
    for _ in 0..count {
        let t = perturb_exact_angle(&base, theta, rng)?;
        let (pt, c) = protect_revealing(&t, params, rng)?;
        digests.push(*pt.digest());
        helpers.push(pt.helper().clone());
        templates.push(t);
        codewords.push(c);
    }
    Ok(RevocabilityInstance {
        params,
        helpers,
        digests,
        ground_truth: RevocabilityGroundTruth { base, templates, codewords },
    })
}
