//! The sparse ternary spherical code `C_α`.
//!
//! A codeword has exactly `α` nonzero entries, each `±1/√α`. Nearest-codeword
//! decoding reduces to picking the `α` largest magnitudes, and the minimum
//! angle between distinct codewords is `cos⁻¹(1 − 1/α)`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_same_dim, UnitVector};

/// Code dimension `n` and weight `α`, with `1 ≤ α ≤ n`, `2 ≤ n < 2³²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct CodeParams {
    dim: usize,
    weight: usize,
}

impl CodeParams {
    pub fn new(dim: usize, weight: usize) -> Result<Self> {
        if dim < 2 || weight < 1 || weight > dim || dim > u32::MAX as usize {
            return Err(Error::InvalidParams { n: dim, alpha: weight });
        }
        Ok(CodeParams { dim, weight })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    /// Magnitude `1/√α` of each nonzero codeword entry.
    pub fn entry_magnitude(&self) -> f64 {
        (self.weight as f64).sqrt().recip()
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n: usize,
    alpha: usize,
}

impl TryFrom<ParamsRepr> for CodeParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        CodeParams::new(r.n, r.alpha)
    }
}

impl From<CodeParams> for ParamsRepr {
    fn from(p: CodeParams) -> Self {
        ParamsRepr { n: p.dim, alpha: p.weight }
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, alpha={})", self.dim, self.weight)
    }
}

/// `Plus` orders before `Minus`, which makes sign vectors count like a
/// binary counter with `+` as 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `sign(0) = +`.
    pub fn of(x: f64) -> Sign {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// A codeword stored sparsely. The derived ordering is the canonical one:
/// support lexicographically, then signs as a binary counter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword {
    dim: usize,
    support: Vec<usize>,
    signs: Vec<Sign>,
}

impl Codeword {
    pub fn new(dim: usize, support: Vec<usize>, signs: Vec<Sign>) -> Result<Self> {
        CodeParams::new(dim, support.len().max(1))?;
        if support.is_empty() {
            return Err(Error::InvalidCodeword("empty support".into()));
        }
        if support.len() != signs.len() {
            return Err(Error::InvalidCodeword(format!(
                "{} support entries but {} signs",
                support.len(),
                signs.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCodeword("support must be strictly ascending".into()));
        }
        if support.last().is_some_and(|&j| j >= dim) {
            return Err(Error::InvalidCodeword(format!("support index out of range for n={dim}")));
        }
        Ok(Codeword { dim, support, signs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn params(&self) -> CodeParams {
        CodeParams { dim: self.dim, weight: self.support.len() }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.support.iter().copied().zip(self.signs.iter().copied())
    }

    /// Dense coordinates: `±1/√α` on the support, 0 elsewhere.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.params().entry_magnitude();
        let mut v = vec![0.0; self.dim];
        for (j, s) in self.entries() {
            v[j] = s.as_f64() * m;
        }
        v
    }

    pub fn dense(&self) -> UnitVector {
        UnitVector::from_raw(self.to_dense())
    }

    /// `⟨c, u⟩`, summed in ascending index order.
    pub fn inner(&self, u: &[f64]) -> f64 {
        let sum: f64 = self.entries().map(|(j, s)| s.as_f64() * u[j]).sum();
        sum * self.params().entry_magnitude()
    }

    pub fn neg(&self) -> Codeword {
        Codeword {
            dim: self.dim,
            support: self.support.clone(),
            signs: self.signs.iter().map(|s| s.flip()).collect(),
        }
    }
}

/// `n alpha idx:+ idx:- ...`
impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.dim, self.weight())?;
        for (j, s) in self.entries() {
            write!(f, " {j}:{}", s.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidCodeword(format!("{msg} in {s:?}"));
        let mut toks = s.split_ascii_whitespace();
        let dim: usize = toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("missing n"))?;
        let weight: usize =
            toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("missing alpha"))?;
        let mut support = Vec::with_capacity(weight);
        let mut signs = Vec::with_capacity(weight);
        for tok in toks {
            let (idx, sign) = tok.split_once(':').ok_or_else(|| bad("malformed entry"))?;
            support.push(idx.parse().map_err(|_| bad("malformed index"))?);
            signs.push(match sign {
                "+" => Sign::Plus,
                "-" => Sign::Minus,
                _ => return Err(bad("malformed sign")),
            });
        }
        if support.len() != weight {
            return Err(bad("entry count does not match alpha"));
        }
        Codeword::new(dim, support, signs)
    }
}

/// Uniform sample from `C_α`: a uniform `α`-subset of positions, then
/// independent fair signs.
pub fn usample<R: Rng + ?Sized>(params: CodeParams, rng: &mut R) -> Codeword {
    let mut support = rand::seq::index::sample(rng, params.dim, params.weight).into_vec();
    support.sort_unstable();
    let signs = (0..params.weight)
        .map(|_| if rng.random::<bool>() { Sign::Minus } else { Sign::Plus })
        .collect();
    Codeword { dim: params.dim, support, signs }
}

/// Magnitude-descending order, lower index first on ties.
fn by_magnitude(u: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| u[b].abs().total_cmp(&u[a].abs()).then(a.cmp(&b))
}

/// The codeword maximizing `⟨c, u⟩` over `C_α`.
pub fn decode(u: &UnitVector, params: CodeParams) -> Result<Codeword> {
    check_same_dim(params.dim, u.dim())?;
    Ok(decode_slice(u, params))
}

pub(crate) fn decode_slice(u: &[f64], params: CodeParams) -> Codeword {
    let mut idx: Vec<usize> = (0..u.len()).collect();
    let alpha = params.weight;
    if alpha < idx.len() {
        idx.select_nth_unstable_by(alpha - 1, by_magnitude(u));
    }
    let mut support = idx[..alpha].to_vec();
    support.sort_unstable();
    let signs = support.iter().map(|&j| Sign::of(u[j])).collect();
    Codeword { dim: params.dim, support, signs }
}

/// Orders list-decoding candidates so that the heap root is the worst one.
struct Ranked {
    score: f64,
    codeword: Codeword,
}

impl Ord for Ranked {
    /// Greater means better: higher score, then canonically smaller.
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.codeword.cmp(&self.codeword))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

struct ListSearch<'a> {
    u: &'a [f64],
    dim: usize,
    scale: f64,
    order: Vec<usize>,
    /// `prefix[k]` = sum of the `k` largest magnitudes.
    prefix: Vec<f64>,
    count: usize,
    heap: BinaryHeap<Reverse<Ranked>>,
    chosen: Vec<(usize, Sign)>,
}

impl ListSearch<'_> {
    fn visit(&mut self, k: usize, remaining: usize, partial: f64) {
        if remaining == 0 {
            self.offer();
            return;
        }
        if self.heap.len() == self.count {
            let bound = (partial + self.prefix[k + remaining] - self.prefix[k]) * self.scale;
            let worst = self.heap.peek().map(|r| r.0.score).unwrap_or(f64::NEG_INFINITY);
            if bound < worst - 1e-12 {
                return;
            }
        }
        let j = self.order[k];
        let mag = self.u[j].abs();
        let agree = Sign::of(self.u[j]);
        self.chosen.push((j, agree));
        self.visit(k + 1, remaining - 1, partial + mag);
        self.chosen.pop();
        if self.order.len() - k > remaining {
            self.visit(k + 1, remaining, partial);
        }
        self.chosen.push((j, agree.flip()));
        self.visit(k + 1, remaining - 1, partial - mag);
        self.chosen.pop();
    }

    fn offer(&mut self) {
        let mut entries = self.chosen.clone();
        entries.sort_unstable_by_key(|e| e.0);
        let (support, signs) = entries.into_iter().unzip();
        let codeword = Codeword { dim: self.dim, support, signs };
        let candidate = Ranked { score: codeword.inner(self.u), codeword };
        if self.heap.len() < self.count {
            self.heap.push(Reverse(candidate));
        } else if self.heap.peek().is_some_and(|worst| candidate > worst.0) {
            self.heap.pop();
            self.heap.push(Reverse(candidate));
        }
    }
}

/// The `count` codewords with the largest `⟨c, u⟩`, best first. Equal
/// scores are broken by canonical order, so the first entry is [`decode`]'s.
pub fn decode_list(u: &UnitVector, params: CodeParams, count: usize) -> Result<Vec<Codeword>> {
    check_same_dim(params.dim, u.dim())?;
    if let Some(card) = cardinality(params).to_u64() {
        if count as u64 > card {
            return Err(Error::CountTooLarge { count, cardinality: card });
        }
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..u.dim()).collect();
    order.sort_unstable_by(by_magnitude(u));
    let mut prefix = Vec::with_capacity(order.len() + 1);
    prefix.push(0.0);
    for &j in &order {
        prefix.push(prefix.last().unwrap() + u[j].abs());
    }
    let mut search = ListSearch {
        u,
        dim: params.dim,
        scale: params.entry_magnitude(),
        order,
        prefix,
        count,
        heap: BinaryHeap::with_capacity(count + 1),
        chosen: Vec::with_capacity(params.weight),
    };
    search.visit(0, params.weight, 0.0);
    let mut ranked: Vec<Ranked> = search.heap.into_iter().map(|r| r.0).collect();
    ranked.sort_unstable_by(|a, b| b.cmp(a));
    Ok(ranked.into_iter().map(|r| r.codeword).collect())
}

/// Minimum angle between distinct codewords, `cos⁻¹(1 − 1/α)`.
pub fn min_angle(params: CodeParams) -> f64 {
    (1.0 - 1.0 / params.weight as f64).acos()
}

/// `|C_α| = C(n, α) · 2^α`, exactly.
pub fn cardinality(params: CodeParams) -> BigUint {
    binomial(params.dim, params.weight) << params.weight
}

/// `log₂ |C_α|`.
pub fn security_bits(params: CodeParams) -> f64 {
    log2_big(&cardinality(params))
}

pub(crate) fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `log₂ x` from the top 64 bits of `x`.
pub(crate) fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map_or(f64::NEG_INFINITY, |v| (v as f64).log2());
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 significant bits");
    (top as f64).log2() + shift as f64
}

/// Every codeword of `C_α` in canonical order: supports in lexicographic
/// order, and for each support the sign patterns as a binary counter.
/// Requires `α < 64`.
pub fn enumerate(params: CodeParams) -> Codewords {
    assert!(params.weight < 64, "enumeration needs alpha < 64");
    Codewords {
        params,
        support: Some((0..params.weight).collect()),
        pattern: 0,
    }
}

pub struct Codewords {
    params: CodeParams,
    support: Option<Vec<usize>>,
    pattern: u64,
}

impl Codewords {
    fn advance_support(&mut self) {
        let Some(support) = self.support.as_mut() else { return };
        let (n, k) = (self.params.dim, self.params.weight);
        let mut i = k;
        while i > 0 {
            i -= 1;
            if support[i] < n - k + i {
                support[i] += 1;
                for m in i + 1..k {
                    support[m] = support[m - 1] + 1;
                }
                return;
            }
        }
        self.support = None;
    }
}

impl Iterator for Codewords {
    type Item = Codeword;

    fn next(&mut self) -> Option<Codeword> {
        let support = self.support.as_ref()?;
        let k = self.params.weight;
        let signs = (0..k)
            .map(|i| if self.pattern >> (k - 1 - i) & 1 == 1 { Sign::Minus } else { Sign::Plus })
            .collect();
        let cw = Codeword { dim: self.params.dim, support: support.clone(), signs };
        self.pattern += 1;
        if self.pattern == 1u64 << k {
            self.pattern = 0;
            self.advance_support();
        }
        Some(cw)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashMap};

    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    use super::*;
    use crate::geometry::{angle, normalize};

    fn params(n: usize, a: usize) -> CodeParams {
        CodeParams::new(n, a).unwrap()
    }

    /// Exhaustive ranking by dense inner product, canonical order on ties.
    fn brute_ranking(u: &[f64], p: CodeParams) -> Vec<Codeword> {
        let mut all: Vec<(f64, Codeword)> = enumerate(p)
            .map(|c| (crate::geometry::dot(&c.to_dense(), u), c))
            .collect();
        all.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        all.into_iter().map(|(_, c)| c).collect()
    }

    #[test]
    fn params_validation() {
        assert!(CodeParams::new(4, 0).is_err());
        assert!(CodeParams::new(4, 5).is_err());
        assert!(CodeParams::new(1, 1).is_err());
        assert!(CodeParams::new(4, 1).is_ok());
        assert!(CodeParams::new(5, 3).is_ok());
    }

    #[test]
    fn codeword_validation() {
        use Sign::*;
        assert!(Codeword::new(4, vec![2, 1], vec![Plus, Plus]).is_err());
        assert!(Codeword::new(4, vec![1, 1], vec![Plus, Plus]).is_err());
        assert!(Codeword::new(4, vec![1, 4], vec![Plus, Plus]).is_err());
        assert!(Codeword::new(4, vec![1, 2], vec![Plus]).is_err());
        assert!(Codeword::new(4, vec![], vec![]).is_err());
        let c = Codeword::new(4, vec![1, 3], vec![Plus, Minus]).unwrap();
        let d = c.to_dense();
        assert!((crate::geometry::l2_norm(&d) - 1.0).abs() < 1e-15);
        assert!((d[3] + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn text_form_round_trip() {
        let c: Codeword = "6 3 0:+ 2:- 5:+".parse().unwrap();
        assert_eq!(c.to_string(), "6 3 0:+ 2:- 5:+");
        assert!("6 3 0:+ 2:-".parse::<Codeword>().is_err());
        assert!("6 1 0:x".parse::<Codeword>().is_err());
    }

    #[test]
    fn usample_structure_and_determinism() {
        let p = params(5, 2);
        let c = usample(p, &mut ChaCha20Rng::seed_from_u64(3));
        assert_eq!(c.weight(), 2);
        for x in c.to_dense() {
            assert!(x == 0.0 || (x.abs() - 0.5f64.sqrt()).abs() < 1e-15);
        }
        assert_eq!(c, usample(p, &mut ChaCha20Rng::seed_from_u64(3)));

        let draw = |seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..100).map(|_| usample(params(512, 16), &mut rng)).collect::<Vec<_>>()
        };
        assert_ne!(draw(1), draw(2));
    }

    #[test]
    fn usample_is_uniform_chi_square() {
        let p = params(5, 2);
        let all: Vec<Codeword> = enumerate(p).collect();
        assert_eq!(all.len(), 40);
        let mut counts: HashMap<Codeword, u64> = all.iter().map(|c| (c.clone(), 0)).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let draws = 40_000;
        for _ in 0..draws {
            *counts.get_mut(&usample(p, &mut rng)).unwrap() += 1;
        }
        let expected = draws as f64 / 40.0;
        let stat: f64 = counts.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        let p_value = 1.0 - ChiSquared::new(39.0).unwrap().cdf(stat);
        assert!(p_value > 0.001, "chi2={stat}, p={p_value}");
    }

    #[test]
    fn decode_fixed_point() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = params(12, 5);
            let c = usample(p, &mut rng);
            assert_eq!(decode(&c.dense(), p).unwrap(), c);
        }
    }

    #[test]
    fn decode_examples() {
        let p = params(4, 2);
        let u = normalize(&[0.8, 0.5, 0.3, 0.1]).unwrap();
        assert_eq!(decode(&u, p).unwrap().to_string(), "4 2 0:+ 1:+");
        assert_eq!(brute_ranking(&u, p)[0].to_string(), "4 2 0:+ 1:+");
        let u = normalize(&[-0.9, 0.1, 0.4, 0.1]).unwrap();
        assert_eq!(decode(&u, p).unwrap().to_string(), "4 2 0:- 2:+");
        assert_eq!(brute_ranking(&u, p)[0].to_string(), "4 2 0:- 2:+");
        let bad = normalize(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(decode(&bad, p), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn decode_ties_prefer_lower_index_and_plus_sign() {
        let p = params(4, 2);
        let u = normalize(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(decode(&u, p).unwrap().to_string(), "4 2 0:+ 1:+");
        let u = normalize(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(decode(&u, p).unwrap().to_string(), "4 2 0:+ 1:+");
        let u = normalize(&[0.0, -0.6, 0.0, -0.6]).unwrap();
        assert_eq!(decode(&u, p).unwrap().to_string(), "4 2 1:- 3:-");
    }

    #[test]
    fn decode_matches_exhaustive_argmax() {
        let p = params(8, 3);
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let u = UnitVector::random(8, &mut rng).unwrap();
            assert_eq!(decode(&u, p).unwrap(), brute_ranking(&u, p)[0]);
        }
    }

    #[test]
    fn decode_list_examples() {
        let p = params(4, 2);
        let u = normalize(&[0.8, 0.5, 0.3, 0.1]).unwrap();
        assert_eq!(decode_list(&u, p, 1).unwrap(), vec![decode(&u, p).unwrap()]);
        let top3: Vec<String> = decode_list(&u, p, 3).unwrap().iter().map(|c| c.to_string()).collect();
        // Frozen from the exhaustive ranking below.
        assert_eq!(top3, ["4 2 0:+ 1:+", "4 2 0:+ 2:+", "4 2 0:+ 3:+"]);
        let brute = brute_ranking(&u, p);
        assert_eq!(decode_list(&u, p, 3).unwrap(), brute[..3]);
        // The full ranking contains exact real-valued ties (e.g. −0.5+0.3 and
        // −0.3+0.1), which the two summation orders may round differently.
        let all = decode_list(&u, p, 24).unwrap();
        for (a, b) in all.iter().zip(&brute) {
            assert!((a.inner(&u) - b.inner(&u)).abs() < 1e-12);
        }
        assert_eq!(all.iter().collect::<BTreeSet<_>>(), brute.iter().collect::<BTreeSet<_>>());
        assert!(matches!(decode_list(&u, p, 25), Err(Error::CountTooLarge { count: 25, cardinality: 24 })));
    }

    #[test]
    fn decode_list_matches_exhaustive_ranking() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for &(n, a) in &[(6, 2), (7, 3), (8, 4), (9, 5)] {
            let p = params(n, a);
            for _ in 0..30 {
                let u = UnitVector::random(n, &mut rng).unwrap();
                let list = decode_list(&u, p, 17).unwrap();
                assert_eq!(list, brute_ranking(&u, p)[..17]);
                assert_eq!(list[0], decode(&u, p).unwrap());
                let scores: Vec<f64> = list.iter().map(|c| c.inner(&u)).collect();
                assert!(scores.windows(2).all(|w| w[0] >= w[1]));
                assert_eq!(list.iter().collect::<BTreeSet<_>>().len(), list.len());
            }
        }
    }

    #[test]
    fn decode_list_on_codeword_input_at_scale() {
        let p = params(512, 16);
        let c = usample(p, &mut ChaCha20Rng::seed_from_u64(1));
        let list = decode_list(&c.dense(), p, 5).unwrap();
        assert_eq!(list[0], c);
        let second = list[1].inner(&c.to_dense());
        assert!((second - 15.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn min_angle_values() {
        assert!((min_angle(params(512, 16)).to_degrees() - 20.36).abs() < 0.01);
        assert!((min_angle(params(512, 16)) - 0.355421).abs() < 1e-6);
        assert!((min_angle(params(4, 1)) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn exhaustive_pairwise_min_angle() {
        for &(n, a) in &[(5, 2), (6, 2)] {
            let p = params(n, a);
            let all: Vec<UnitVector> = enumerate(p).map(|c| c.dense()).collect();
            let mut min = f64::INFINITY;
            for i in 0..all.len() {
                for j in i + 1..all.len() {
                    min = min.min(angle(&all[i], &all[j]).unwrap());
                }
            }
            assert!((min - 0.5f64.acos()).abs() < 1e-12);
            assert!(min >= min_angle(p) - 1e-12);
        }
    }

    #[test]
    fn cardinality_matches_enumeration() {
        for &(n, a) in &[(4, 2), (5, 2), (6, 3), (7, 7), (8, 1)] {
            let p = params(n, a);
            let listed: Vec<Codeword> = enumerate(p).collect();
            assert_eq!(BigUint::from(listed.len()), cardinality(p));
            assert!(listed.windows(2).all(|w| w[0] < w[1]), "canonical order");
        }
        assert_eq!(cardinality(params(4, 2)), BigUint::from(24u32));
    }

    #[test]
    fn security_bits_values() {
        let bits = security_bits(params(512, 16));
        assert!(bits >= 115.0, "{bits}");
        // log2(C(512,16)) + 16, with C(512,16) from exact integer arithmetic.
        let exact: f64 = (0..16).map(|i| ((512 - i) as f64 / (i + 1) as f64).log2()).sum::<f64>() + 16.0;
        assert!((bits - exact).abs() < 1e-9);
        assert!((security_bits(params(4, 2)) - 24f64.log2()).abs() < 1e-12);
        assert!((security_bits(params(40, 40)) - 40.0).abs() < 1e-12);
        assert!((security_bits(params(200, 200)) - 200.0).abs() < 1e-9);
    }
}
