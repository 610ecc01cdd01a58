//! Orthogonal isometries: the plane rotation taking `t` to `c`, Haar-uniform
//! sampling on `O(n)`, and the hidden rotation `P = R·Q`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{self, check_dim, check_same_dim, normalize, UnitVector};

/// Orthogonality tolerance on `max |MᵀM − I|` for matrices built in memory.
pub const ORTHO_TOLERANCE: f64 = 1e-8;

/// Angles within this of 0 or π take the degenerate branches of
/// [`plane_rotation`].
pub const DEGENERATE_ANGLE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalMatrix(DMatrix<f64>);

impl OrthogonalMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, ORTHO_TOLERANCE)
    }

    pub fn with_tolerance(m: DMatrix<f64>, tolerance: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimMismatch { expected: m.nrows(), found: m.ncols() });
        }
        check_dim(m.nrows())?;
        let residual = orthogonality_residual(&m);
        if !(residual <= tolerance) {
            return Err(Error::NotOrthogonal { residual, tolerance });
        }
        Ok(OrthogonalMatrix(m))
    }

    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        OrthogonalMatrix(m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(OrthogonalMatrix(DMatrix::identity(dim, dim)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `max |MᵀM − I|`.
    pub fn residual(&self) -> f64 {
        orthogonality_residual(&self.0)
    }

    pub fn transpose(&self) -> OrthogonalMatrix {
        OrthogonalMatrix(self.0.transpose())
    }

    pub fn mul(&self, other: &OrthogonalMatrix) -> Result<OrthogonalMatrix> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(OrthogonalMatrix(&self.0 * &other.0))
    }

    /// Raw product `M·v` without renormalization.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_same_dim(self.dim(), v.len())?;
        Ok((&self.0 * DVector::from_column_slice(v)).data.into())
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.dim();
        (0..n).flat_map(move |i| (0..n).map(move |j| self.0[(i, j)]))
    }

    /// One Newton–Schulz polar step, `M ← M(3I − MᵀM)/2`. Squares the
    /// orthogonality residual.
    pub(crate) fn refine(self) -> OrthogonalMatrix {
        let n = self.dim();
        let gram = self.0.tr_mul(&self.0);
        let correction = DMatrix::identity(n, n) * 1.5 - gram * 0.5;
        OrthogonalMatrix(&self.0 * correction)
    }
}

pub fn orthogonality_residual(m: &DMatrix<f64>) -> f64 {
    let gram = m.tr_mul(m);
    let n = gram.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = (gram[(i, j)] - target).abs();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// `normalize(M·v)`.
pub fn apply(m: &OrthogonalMatrix, v: &UnitVector) -> Result<UnitVector> {
    normalize(&m.mul_vec(v)?)
}

/// The plane `span{t, w}` and angle of the rotation taking `t` to `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneRotationFactors {
    pub t: UnitVector,
    /// Unit vector orthogonal to `t` in the rotation plane.
    pub w: UnitVector,
    pub theta: f64,
}

impl PlaneRotationFactors {
    pub fn new(t: &UnitVector, c: &UnitVector) -> Result<Self> {
        check_same_dim(t.dim(), c.dim())?;
        let along = geometry::dot(t, c);
        let residual: Vec<f64> = c.iter().zip(t.iter()).map(|(ci, ti)| ci - along * ti).collect();
        let theta = geometry::l2_norm(&residual).atan2(along);
        let (w, theta) = if theta <= DEGENERATE_ANGLE {
            (orthogonal_complement(t), 0.0)
        } else if theta >= PI - DEGENERATE_ANGLE {
            (orthogonal_complement(t), PI)
        } else {
            (orthonormalize_against(t, residual), theta)
        };
        Ok(PlaneRotationFactors { t: t.clone(), w, theta })
    }

    fn cos_sin(&self) -> (f64, f64) {
        if self.theta == 0.0 {
            (1.0, 0.0)
        } else if self.theta == PI {
            (-1.0, 0.0)
        } else {
            (self.theta.cos(), self.theta.sin())
        }
    }

    /// `R = I + (cos θ − 1)(ttᵀ + wwᵀ) + sin θ (wtᵀ − twᵀ)`, which is
    /// `I − ttᵀ − wwᵀ + [t w] R_θ [t w]ᵀ` expanded.
    pub fn to_matrix(&self) -> OrthogonalMatrix {
        let n = self.t.dim();
        self.rotate_left(&DMatrix::identity(n, n))
    }

    /// `R·M` in `O(n²)` using the rank-two structure of `R − I`.
    pub fn rotate_left(&self, m: &DMatrix<f64>) -> OrthogonalMatrix {
        let (cos, sin) = self.cos_sin();
        let (t, w) = (self.t.as_slice(), self.w.as_slice());
        let n = m.nrows();
        let mut out = m.clone();
        for j in 0..n {
            let col = m.column(j);
            let a: f64 = col.iter().zip(t).map(|(x, y)| x * y).sum();
            let b: f64 = col.iter().zip(w).map(|(x, y)| x * y).sum();
            let ct = (cos - 1.0) * a - sin * b;
            let cw = (cos - 1.0) * b + sin * a;
            for i in 0..n {
                out[(i, j)] += t[i] * ct + w[i] * cw;
            }
        }
        OrthogonalMatrix(out)
    }
}

/// Gram–Schmidt of `v` against `t`, applied twice.
fn orthonormalize_against(t: &[f64], mut v: Vec<f64>) -> UnitVector {
    for _ in 0..2 {
        let proj = geometry::dot(t, &v);
        v.iter_mut().zip(t).for_each(|(x, ti)| *x -= proj * ti);
        let norm = geometry::l2_norm(&v);
        v.iter_mut().for_each(|x| *x /= norm);
    }
    UnitVector::from_raw(v)
}

/// Unit vector orthogonal to `t`, from the basis vector least aligned with it.
fn orthogonal_complement(t: &UnitVector) -> UnitVector {
    let k = (0..t.dim())
        .min_by(|&a, &b| t[a].abs().total_cmp(&t[b].abs()).then(a.cmp(&b)))
        .expect("dim >= 2");
    let mut e = vec![0.0; t.dim()];
    e[k] = 1.0;
    orthonormalize_against(t, e)
}

/// An orthogonal `R` with `R·t = c` rotating only within `span{t, c}`.
pub fn plane_rotation(t: &UnitVector, c: &UnitVector) -> Result<OrthogonalMatrix> {
    Ok(PlaneRotationFactors::new(t, c)?.to_matrix())
}

/// Haar-distributed sample from `O(n)`: QR of a standard Gaussian matrix
/// with the columns of `Q` sign-corrected by `diag(R)`.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<OrthogonalMatrix> {
    check_dim(n)?;
    let gaussian = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let (mut q, r) = gaussian.qr().unpack();
    let r_diag = r.diagonal();
    for (j, d) in r_diag.iter().enumerate() {
        if *d < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(OrthogonalMatrix(q))
}

/// Hidden rotation: `P = R·Q` with `Q` Haar-random and `R` the plane
/// rotation taking `Q·t` to `c`. Satisfies `P·t = c`.
pub fn hrmg<R: Rng + ?Sized>(t: &UnitVector, c: &UnitVector, rng: &mut R) -> Result<OrthogonalMatrix> {
    check_same_dim(t.dim(), c.dim())?;
    let q = haar_orthogonal(t.dim(), rng)?;
    let qt = apply(&q, t)?;
    let factors = PlaneRotationFactors::new(&qt, c)?;
    Ok(factors.rotate_left(q.matrix()))
}
