//! Meet-in-the-middle search for codeword pairs with `P·c₁ = c₂`.
//!
//! `c₁` splits into two disjoint half-weight vectors `a + b`, so
//! `P·c₁ = q_a + q_b` with `q_a = Σ aᵢ pᵢ` over the columns `pᵢ` of `P`.
//! All `N = C(n, α/2)·2^(α/2)` partial sums go into one table; per-coordinate
//! sorted sub-tables then find the pairs whose sums land on `{0, ±1/√α}`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;

use crate::ecc::{binomial, enumerate, usample, CodeParams, Codeword, Sign};
use crate::error::{Error, Result};
use crate::rotation::{hrmg, OrthogonalMatrix};

/// Default bound on the table size `N`.
pub const DEFAULT_CAPACITY: u64 = 1 << 24;

/// Step-3 window around each target value in the exact search.
const EXACT_WINDOW: f64 = 1e-9;

/// Per-coordinate tolerance of the final codeword membership test.
const MEMBERSHIP_TOLERANCE: f64 = 1e-6;

fn require_even(params: CodeParams) -> Result<()> {
    if !params.weight().is_multiple_of(2) {
        return Err(Error::OddWeight(params.weight()));
    }
    Ok(())
}

/// `N = C(n, α/2)·2^(α/2)`, the number of half-weight vectors.
pub fn search_space_size(params: CodeParams) -> Result<BigUint> {
    require_even(params)?;
    let half = params.weight() / 2;
    Ok(binomial(params.dim(), half) << half)
}

/// A planted solution `P·c₁ = c₂` with `P = HRMG(c₁, c₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactInstance {
    pub helper: OrthogonalMatrix,
    pub c1: Codeword,
    pub c2: Codeword,
}

pub fn plant_exact_instance<R: Rng + ?Sized>(params: CodeParams, rng: &mut R) -> Result<ExactInstance> {
    require_even(params)?;
    let c1 = usample(params, rng);
    let c2 = usample(params, rng);
    let helper = hrmg(&c1.dense(), &c2.dense(), rng)?;
    Ok(ExactInstance { helper, c1, c2 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmtoOptions {
    /// Number of filtering coordinates; defaults to `⌈log₂ N⌉` capped at `n`.
    pub ell: Option<usize>,
    /// Half-width of the Step-3 acceptance window. Zero is the exact search.
    pub slack: f64,
    pub capacity: u64,
}

impl Default for TmtoOptions {
    fn default() -> Self {
        TmtoOptions { ell: None, slack: 0.0, capacity: DEFAULT_CAPACITY }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TmtoResult {
    pub table_size: u64,
    pub ell: usize,
    pub slack: f64,
    /// Distinct `(c₁, c₂)` in canonical order.
    pub solutions: Vec<(Codeword, Codeword)>,
    /// Ordered pairs `(a, b)`, `b ≠ −a`, matching on all `ell` coordinates.
    pub step3_survivors: u64,
    /// Survivors with disjoint supports whose full sum was tested.
    pub step4_checks: u64,
}

/// The JSON report emitted by `attack tmto`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TmtoReport {
    pub params: CodeParams,
    #[serde(rename = "N")]
    pub n_table: u64,
    pub ell: usize,
    pub slack: f64,
    pub solutions_found: usize,
    pub planted_recovered: bool,
    pub step3_survivors: u64,
    pub step4_checks: u64,
    pub wall_time_ms: f64,
}

struct HalfTable {
    dim: usize,
    entries: Vec<(Vec<usize>, Vec<Sign>)>,
    /// Row `k` holds `q` for `entries[k]`.
    sums: Vec<f64>,
}

impl HalfTable {
    /// Step 1: every half-weight vector with entries `±1/√α` and its image.
    fn build(p: &OrthogonalMatrix, params: CodeParams) -> Self {
        let n = params.dim();
        let m = params.entry_magnitude();
        let half = CodeParams::new(n, params.weight() / 2).expect("1 ≤ α/2 ≤ n");
        let columns: Vec<Vec<f64>> = (0..n).map(|j| p.matrix().column(j).iter().copied().collect()).collect();
        let mut entries = Vec::new();
        let mut sums = Vec::new();
        for a in enumerate(half) {
            let start = sums.len();
            sums.resize(start + n, 0.0);
            let row = &mut sums[start..];
            for (j, s) in a.entries() {
                let w = s.as_f64() * m;
                row.iter_mut().zip(&columns[j]).for_each(|(r, c)| *r += w * c);
            }
            entries.push((a.support().to_vec(), a.signs().to_vec()));
        }
        HalfTable { dim: n, entries, sums }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    /// `b = −a` sums to zero on every coordinate whatever `P` is.
    fn is_negation(&self, a: usize, b: usize) -> bool {
        let (sa, ga) = &self.entries[a];
        let (sb, gb) = &self.entries[b];
        sa == sb && ga.iter().zip(gb).all(|(x, y)| *x == y.flip())
    }

    fn sum(&self, k: usize) -> &[f64] {
        &self.sums[k * self.dim..(k + 1) * self.dim]
    }

    /// Step 2: `(coordinate value, row)` sorted by value.
    fn sorted_column(&self, i: usize) -> Vec<(f64, u32)> {
        let mut col: Vec<(f64, u32)> = (0..self.len()).map(|k| (self.sum(k)[i], k as u32)).collect();
        col.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        col
    }
}

fn supports_disjoint(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// Reads `v` as a codeword of `params` if every coordinate is within
/// `tolerance` of `0` or `±1/√α` and exactly `α` are nonzero.
pub fn is_codeword(v: &[f64], params: CodeParams, tolerance: f64) -> Option<Codeword> {
    let m = params.entry_magnitude();
    let mut support = Vec::with_capacity(params.weight());
    let mut signs = Vec::with_capacity(params.weight());
    for (j, &x) in v.iter().enumerate() {
        if x.abs() <= tolerance {
            continue;
        }
        if (x.abs() - m).abs() > tolerance {
            return None;
        }
        support.push(j);
        signs.push(Sign::of(x));
        if support.len() > params.weight() {
            return None;
        }
    }
    if support.len() != params.weight() {
        return None;
    }
    Codeword::new(params.dim(), support, signs).ok()
}

/// Finds every `(c₁, c₂)` with `P·c₁ = c₂` by the four-step trade-off.
/// With `slack > 0` Step 3 accepts sums within `slack` of the targets, the
/// relaxation one would need against `P c_j + P_i e_ij = c_i`.
pub fn tmto_exact(p: &OrthogonalMatrix, params: CodeParams, opts: &TmtoOptions) -> Result<TmtoResult> {
    let size = search_space_size(params)?;
    if p.dim() != params.dim() {
        return Err(Error::DimMismatch { expected: params.dim(), found: p.dim() });
    }
    let table_size = size
        .to_u64()
        .filter(|&s| s <= opts.capacity)
        .ok_or_else(|| Error::CapacityExceeded { size: size.to_string(), bound: opts.capacity })?;
    if !(opts.slack >= 0.0) || !opts.slack.is_finite() {
        return Err(Error::ConfigContradiction(format!("slack {} must be finite and ≥ 0", opts.slack)));
    }
    let n = params.dim();
    let default_ell = (u64::BITS - table_size.saturating_sub(1).leading_zeros()).max(1) as usize;
    let ell = opts.ell.unwrap_or(default_ell).min(n);
    if ell == 0 {
        return Err(Error::ConfigContradiction("ell must be at least 1".into()));
    }

    let table = HalfTable::build(p, params);
    let m = params.entry_magnitude();
    let targets = [0.0, m, -m];
    let window = EXACT_WINDOW + opts.slack;
    let on_target = |x: f64| targets.iter().any(|t| (x - t).abs() <= window);

    // Step 3 against T_1 by binary search. Pairs that survive are then held
    // to the same condition on coordinates 2..ell, which is the intersection
    // with the matches from T_2..T_ell.
    let first = table.sorted_column(0);
    let mut survivors: Vec<(u32, u32)> = Vec::new();
    for a in 0..table.len() {
        let qa = table.sum(a);
        for t in targets {
            let lo = t - qa[0] - window;
            let hi = t - qa[0] + window;
            let start = first.partition_point(|e| e.0 < lo);
            let end = first.partition_point(|e| e.0 <= hi);
            for &(_, b) in &first[start..end] {
                if table.is_negation(a, b as usize) {
                    continue;
                }
                let qb = table.sum(b as usize);
                if (1..ell).all(|i| on_target(qa[i] + qb[i])) {
                    survivors.push((a as u32, b));
                }
            }
        }
    }
    // A pair can match two targets when windows overlap.
    survivors.sort_unstable();
    survivors.dedup();
    let step3_survivors = survivors.len() as u64;

    let mut step4_checks = 0;
    let mut solutions = BTreeSet::new();
    let mut full = vec![0.0; n];
    for &(a, b) in &survivors {
        let (sa, ga) = &table.entries[a as usize];
        let (sb, gb) = &table.entries[b as usize];
        if !supports_disjoint(sa, sb) {
            continue;
        }
        step4_checks += 1;
        let (qa, qb) = (table.sum(a as usize), table.sum(b as usize));
        full.iter_mut().zip(qa.iter().zip(qb)).for_each(|(f, (x, y))| *f = x + y);
        if let Some(c2) = is_codeword(&full, params, MEMBERSHIP_TOLERANCE) {
            let mut merged: Vec<(usize, Sign)> = sa.iter().copied().zip(ga.iter().copied()).collect();
            merged.extend(sb.iter().copied().zip(gb.iter().copied()));
            merged.sort_unstable_by_key(|e| e.0);
            let (support, signs) = merged.into_iter().unzip();
            let c1 = Codeword::new(n, support, signs)?;
            solutions.insert((c1, c2));
        }
    }

    Ok(TmtoResult {
        table_size,
        ell,
        slack: opts.slack,
        solutions: solutions.into_iter().collect(),
        step3_survivors,
        step4_checks,
    })
}
