//! Fusing several enrollment templates of one user into a single center.

use crate::error::{Error, Result};
use crate::geometry::{angle_stable, check_same_dim, normalize, UnitVector};

/// Weiszfeld weights are `1 / max(angle, WEISZFELD_FLOOR)`.
pub const WEISZFELD_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct TemplateSet {
    dim: usize,
    members: Vec<UnitVector>,
}

impl TemplateSet {
    pub fn new(members: Vec<UnitVector>) -> Result<Self> {
        let dim = members
            .first()
            .map(UnitVector::dim)
            .ok_or_else(|| Error::DegenerateSet("no members".into()))?;
        for m in &members {
            check_same_dim(dim, m.dim())?;
        }
        Ok(TemplateSet { dim, members })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[UnitVector] {
        &self.members
    }

    fn weighted_sum(&self, weight: impl Fn(&UnitVector) -> f64) -> Vec<f64> {
        let mut sum = vec![0.0; self.dim];
        for m in &self.members {
            let w = weight(m);
            sum.iter_mut().zip(m.iter()).for_each(|(s, x)| *s += w * x);
        }
        sum
    }

    /// `Σ angle(x, tᵢ)`.
    pub fn angular_cost(&self, x: &UnitVector) -> Result<f64> {
        self.members.iter().map(|m| angle_stable(x, m)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterMethod {
    Mean,
    Median,
}

impl std::str::FromStr for CenterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(CenterMethod::Mean),
            "median" => Ok(CenterMethod::Median),
            other => Err(Error::ConfigContradiction(format!("unknown center method {other:?}"))),
        }
    }
}

/// `normalize(Σ tᵢ)`, the unit vector maximizing `Σ ⟨x, tᵢ⟩`.
pub fn center_mean(ts: &TemplateSet) -> Result<UnitVector> {
    normalize(&ts.weighted_sum(|_| 1.0))
        .map_err(|_| Error::DegenerateSet("members sum to zero".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MedianCenter {
    pub center: UnitVector,
    pub iterations: usize,
    /// False when `max_iters` ran out before successive iterates came
    /// within `tol`; `center` is then the best iterate seen.
    pub converged: bool,
}

/// Angular geometric median by projected Weiszfeld iteration, started from
/// [`center_mean`]. Returns the iterate with the lowest `Σ angle(x, tᵢ)`.
pub fn center_median(ts: &TemplateSet, max_iters: usize, tol: f64) -> Result<MedianCenter> {
    if max_iters == 0 {
        return Err(Error::ConfigContradiction("max_iters must be at least 1".into()));
    }
    let mut x = center_mean(ts)?;
    let mut best = (ts.angular_cost(&x)?, x.clone());
    for iter in 1..=max_iters {
        let next = normalize(&ts.weighted_sum(|m| {
            let d = angle_stable(&x, m).unwrap_or(0.0);
            1.0 / d.max(WEISZFELD_FLOOR)
        }))
        .map_err(|_| Error::DegenerateSet("Weiszfeld weights cancel".into()))?;
        let step = angle_stable(&x, &next)?;
        let cost = ts.angular_cost(&next)?;
        if cost < best.0 {
            best = (cost, next.clone());
        }
        x = next;
        if step < tol {
            return Ok(MedianCenter { center: best.1, iterations: iter, converged: true });
        }
    }
    Ok(MedianCenter { center: best.1, iterations: max_iters, converged: false })
}

pub fn center(ts: &TemplateSet, method: CenterMethod) -> Result<UnitVector> {
    match method {
        CenterMethod::Mean => center_mean(ts),
        CenterMethod::Median => Ok(center_median(ts, 200, 1e-12)?.center),
    }
}
