//! Synthetic identities with controlled angular noise, and CSV ingestion of
//! externally produced embeddings.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, check_same_dim, normalize, UnitVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Every sample sits at exactly `theta` radians from its center.
    ExactAngle { theta: f64 },
    /// `normalize(center + sigma·g)` with `g` standard normal.
    GaussianPerturb { sigma: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::ExactAngle { theta } if !(0.0..std::f64::consts::PI).contains(&theta) => {
                Err(Error::InvalidNoise(format!("angle {theta} outside [0, π)")))
            }
            NoiseSpec::GaussianPerturb { sigma } if !(sigma >= 0.0) || !sigma.is_finite() => {
                Err(Error::InvalidNoise(format!("sigma {sigma} must be finite and non-negative")))
            }
            _ => Ok(()),
        }
    }

    pub fn apply<R: Rng + ?Sized>(&self, t: &UnitVector, rng: &mut R) -> Result<UnitVector> {
        match *self {
            NoiseSpec::ExactAngle { theta } => perturb_exact_angle(t, theta, rng),
            NoiseSpec::GaussianPerturb { sigma } => perturb_gaussian(t, sigma, rng),
        }
    }

    /// Short label for report rows, e.g. `angle=5deg` or `sigma=0.01`.
    pub fn label(&self) -> String {
        match *self {
            NoiseSpec::ExactAngle { theta } => format!("angle={}deg", theta.to_degrees()),
            NoiseSpec::GaussianPerturb { sigma } => format!("sigma={sigma}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityModel {
    pub id: String,
    pub center: UnitVector,
    pub noise: NoiseSpec,
}

impl IdentityModel {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<UnitVector> {
        self.noise.apply(&self.center, rng)
    }
}

/// Labelled unit vectors of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    records: Vec<(String, UnitVector)>,
}

impl Dataset {
    pub fn new(records: Vec<(String, UnitVector)>) -> Result<Self> {
        let dim = records
            .first()
            .map(|r| r.1.dim())
            .ok_or_else(|| Error::InsufficientData("dataset has no records".into()))?;
        for (_, v) in &records {
            check_same_dim(dim, v.dim())?;
        }
        Ok(Dataset { dim, records })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn records(&self) -> &[(String, UnitVector)] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records grouped by label, labels in order of first appearance.
    pub fn by_label(&self) -> Vec<(&str, Vec<&UnitVector>)> {
        let mut groups: Vec<(&str, Vec<&UnitVector>)> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for (label, v) in &self.records {
            let slot = *index.entry(label.as_str()).or_insert_with(|| {
                groups.push((label.as_str(), Vec::new()));
                groups.len() - 1
            });
            groups[slot].1.push(v);
        }
        groups
    }

    pub fn vectors_for(&self, label: &str) -> Vec<&UnitVector> {
        self.records.iter().filter(|r| r.0 == label).map(|r| &r.1).collect()
    }
}

/// `cos θ · t + sin θ · d` for a uniform unit tangent direction `d` at `t`.
pub fn perturb_exact_angle<R: Rng + ?Sized>(t: &UnitVector, theta: f64, rng: &mut R) -> Result<UnitVector> {
    NoiseSpec::ExactAngle { theta }.validate()?;
    if theta == 0.0 {
        return Ok(t.clone());
    }
    let d = tangent_direction(t, rng);
    let (c, s) = (theta.cos(), theta.sin());
    let out: Vec<f64> = t.iter().zip(&d).map(|(ti, di)| c * ti + s * di).collect();
    normalize(&out)
}

fn tangent_direction<R: Rng + ?Sized>(t: &UnitVector, rng: &mut R) -> Vec<f64> {
    loop {
        let mut g: Vec<f64> = (0..t.dim()).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            let p = geometry::dot(t, &g);
            g.iter_mut().zip(t.iter()).for_each(|(gi, ti)| *gi -= p * ti);
        }
        let norm = geometry::l2_norm(&g);
        if norm > 1e-6 {
            g.iter_mut().for_each(|x| *x /= norm);
            return g;
        }
    }
}

/// `normalize(t + σ·g)`.
pub fn perturb_gaussian<R: Rng + ?Sized>(t: &UnitVector, sigma: f64, rng: &mut R) -> Result<UnitVector> {
    NoiseSpec::GaussianPerturb { sigma }.validate()?;
    if sigma == 0.0 {
        return Ok(t.clone());
    }
    let out: Vec<f64> = t
        .iter()
        .map(|ti| ti + sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect();
    normalize(&out)
}

/// `k` uniform identity centers with `per_id` noisy samples each, labelled
/// `id0000`, `id0001`, ….
pub fn gen_dataset<R: Rng + ?Sized>(
    k: usize,
    per_id: usize,
    dim: usize,
    noise: NoiseSpec,
    rng: &mut R,
) -> Result<Dataset> {
    if k < 2 || per_id < 1 {
        return Err(Error::InsufficientData(format!("need k ≥ 2 and per_id ≥ 1, got k={k}, per_id={per_id}")));
    }
    noise.validate()?;
    let mut records = Vec::with_capacity(k * per_id);
    for i in 0..k {
        let model = IdentityModel { id: format!("id{i:04}"), center: UnitVector::random(dim, rng)?, noise };
        for _ in 0..per_id {
            records.push((model.id.clone(), model.sample(rng)?));
        }
    }
    Dataset::new(records)
}

/// Reads headerless rows `label,v1,…,vn`; every vector is normalized.
pub fn import_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut records = Vec::new();
    let mut width = None;
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Csv(e.to_string()))?;
        let expected = *width.get_or_insert(row.len());
        if row.len() != expected {
            return Err(Error::RaggedRows { row: row_no, expected, found: row.len() });
        }
        if expected < 3 {
            return Err(Error::DimTooSmall(expected.saturating_sub(1)));
        }
        let values = row
            .iter()
            .enumerate()
            .skip(1)
            .map(|(col, field)| {
                field.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::NonNumeric {
                    row: row_no,
                    column: col + 1,
                    value: field.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let v = normalize(&values).map_err(|_| Error::ZeroVectorRow { row: row_no })?;
        records.push((row[0].to_string(), v));
    }
    Dataset::new(records)
}

/// Writes rows `label,v1,…,vn` with round-trip float formatting.
pub fn export_csv<W: Write>(ds: &Dataset, output: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(output);
    for (label, v) in &ds.records {
        let mut row = Vec::with_capacity(v.dim() + 1);
        row.push(label.clone());
        row.extend(v.iter().map(|x| format!("{x:?}")));
        writer.write_record(&row).map_err(|e| Error::Csv(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
