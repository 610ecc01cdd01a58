//! Unit vectors on the sphere and the angular metric.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Tolerance on `|‖v‖ − 1|` accepted by [`UnitVector::new`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Norms at or below this are treated as zero by [`normalize`].
pub const ZERO_NORM: f64 = 1e-12;

/// A point on the unit sphere `S^(n-1)`, `n ≥ 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps `entries` after checking the dimension and the unit norm.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_dim(entries.len())?;
        let norm = l2_norm(&entries);
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector(entries))
    }

    /// Skips the norm check. Callers guarantee the invariant.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(entries.len() >= 2);
        UnitVector(entries)
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        check_dim(dim)?;
        if i >= dim {
            return Err(Error::DimMismatch { expected: dim, found: i + 1 });
        }
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Ok(UnitVector(v))
    }

    /// Uniform sample from the sphere: a normalized standard Gaussian vector.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        check_dim(dim)?;
        loop {
            let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            if let Ok(v) = normalize(&g) {
                return Ok(v);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `⟨self, other⟩`.
    pub fn dot(&self, other: &UnitVector) -> Result<f64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn neg(&self) -> UnitVector {
        UnitVector(self.0.iter().map(|x| -x).collect())
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Whitespace-separated decimal literals with shortest round-trip formatting.
impl fmt::Display for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{x:?}")?;
        }
        Ok(())
    }
}

impl FromStr for UnitVector {
    type Err = Error;

    /// Parses and normalizes. Use [`parse_vector`] to pin the dimension.
    fn from_str(s: &str) -> Result<Self> {
        normalize(&parse_vector(s, None)?)
    }
}

/// Reads the vector text format: decimal literals separated by ASCII
/// whitespace. With `expected = Some(n)` exactly `n` values are required.
pub fn parse_vector(text: &str, expected: Option<usize>) -> Result<Vec<f64>> {
    let values = text
        .split_ascii_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::VectorParse(format!("{tok:?} is not a finite number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(n) = expected {
        if values.len() != n {
            return Err(Error::DimMismatch { expected: n, found: values.len() });
        }
    }
    Ok(values)
}

/// `v / ‖v‖₂`.
pub fn normalize(v: &[f64]) -> Result<UnitVector> {
    check_dim(v.len())?;
    let norm = l2_norm(v);
    if !(norm > ZERO_NORM) || !norm.is_finite() {
        return Err(Error::ZeroVector { norm });
    }
    Ok(UnitVector(v.iter().map(|x| x / norm).collect()))
}

/// Angular distance `cos⁻¹⟨u, v⟩ ∈ [0, π]`; the inner product is clamped first.
pub fn angle(u: &UnitVector, v: &UnitVector) -> Result<f64> {
    Ok(u.dot(v)?.clamp(-1.0, 1.0).acos())
}

/// Same metric as [`angle`] but computed as `2·atan2(‖u − v‖, ‖u + v‖)`,
/// which keeps full relative precision near 0 and π where `acos` does not.
pub fn angle_stable(u: &UnitVector, v: &UnitVector) -> Result<f64> {
    check_same_dim(u.dim(), v.dim())?;
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v.iter()) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    Ok(2.0 * diff.sqrt().atan2(sum.sqrt()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::DimTooSmall(dim));
    }
    Ok(())
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}
