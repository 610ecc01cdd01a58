//! TAR/FAR measurement for baseline and protected matchers.
//!
//! Each repetition splits every identity's `n0` records into `n1` enrollment
//! records and `n2 = n0 − n1` genuine probes. Impostor probes for an identity
//! are all `n0` records of the other `k − 1` identities, so `n3 = n0·(k − 1)`.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::centering::{center, CenterMethod, TemplateSet};
use crate::ecc::CodeParams;
use crate::error::{Error, Result};
use crate::geometry::{angle, check_same_dim, UnitVector};
use crate::protection::{protect, verify, verify_list};
use crate::simulation::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Matcher {
    /// Accept iff the angle to the enrolled template is at most `threshold` radians.
    Baseline { threshold: f64 },
    /// Enroll with `protect`; verify against the `list_count` nearest codewords.
    Protected {
        #[serde(default = "one")]
        list_count: usize,
    },
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Enrollment {
    /// The first sampled enrollment record.
    Single,
    /// The center of all `n1` enrollment records.
    Centered { method: CenterMethod },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub matcher: Matcher,
    pub enrollment: Enrollment,
}

impl Pipeline {
    pub fn name(&self) -> String {
        let m = match self.matcher {
            Matcher::Baseline { .. } => "baseline".to_string(),
            Matcher::Protected { list_count: 1 } => "protected".to_string(),
            Matcher::Protected { list_count } => format!("protected-list{list_count}"),
        };
        match self.enrollment {
            Enrollment::Single => format!("{m}-single"),
            Enrollment::Centered { method: CenterMethod::Mean } => format!("{m}-centered-mean"),
            Enrollment::Centered { method: CenterMethod::Median } => format!("{m}-centered-median"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub k: usize,
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub r: usize,
    pub params: CodeParams,
    pub seed: u64,
    pub pipeline: Pipeline,
    /// Free-form description of the data's noise, copied into report rows.
    #[serde(default)]
    pub noise: Option<String>,
}

impl EvalConfig {
    /// Fills in `n2` and `n3` from `(k, n0, n1)`.
    pub fn new(k: usize, n0: usize, n1: usize, r: usize, params: CodeParams, seed: u64, pipeline: Pipeline) -> Self {
        EvalConfig {
            k,
            n0,
            n1,
            n2: n0.saturating_sub(n1),
            n3: n0 * k.saturating_sub(1),
            r,
            params,
            seed,
            pipeline,
            noise: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigContradiction(msg));
        if self.k < 2 {
            return bad(format!("k={} must be at least 2", self.k));
        }
        if self.n1 < 1 || self.r < 1 {
            return bad("n1 and r must be at least 1".into());
        }
        if self.n1 + self.n2 != self.n0 || self.n2 < 1 {
            return bad(format!("n1 + n2 = {} + {} must equal n0 = {} with n2 ≥ 1", self.n1, self.n2, self.n0));
        }
        if self.n3 != self.n0 * (self.k - 1) {
            return bad(format!("n3 = {} must equal n0·(k − 1) = {}", self.n3, self.n0 * (self.k - 1)));
        }
        match self.pipeline.matcher {
            Matcher::Baseline { threshold } if !threshold.is_finite() => bad("threshold must be finite".into()),
            Matcher::Protected { list_count: 0 } => bad("list_count must be at least 1".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RepetitionReport {
    pub repetition: usize,
    pub tar: f64,
    pub far: f64,
    pub genuine_accepts: usize,
    pub genuine_trials: usize,
    pub impostor_accepts: usize,
    pub impostor_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tar: f64,
    pub far: f64,
    pub genuine_accepts: usize,
    pub genuine_trials: usize,
    pub impostor_accepts: usize,
    pub impostor_trials: usize,
    pub per_repetition: Vec<RepetitionReport>,
}

impl EvalReport {
    fn from_repetitions(per_repetition: Vec<RepetitionReport>) -> Self {
        let ga = per_repetition.iter().map(|r| r.genuine_accepts).sum();
        let gt = per_repetition.iter().map(|r| r.genuine_trials).sum();
        let ia = per_repetition.iter().map(|r| r.impostor_accepts).sum();
        let it = per_repetition.iter().map(|r| r.impostor_trials).sum();
        EvalReport {
            tar: rate(ga, gt),
            far: rate(ia, it),
            genuine_accepts: ga,
            genuine_trials: gt,
            impostor_accepts: ia,
            impostor_trials: it,
            per_repetition,
        }
    }
}

fn rate(accepts: usize, trials: usize) -> f64 {
    if trials == 0 {
        0.0
    } else {
        accepts as f64 / trials as f64
    }
}

/// One identity's share of one repetition.
struct Enrolled<'a> {
    template: UnitVector,
    genuine: Vec<&'a UnitVector>,
    impostors: Vec<&'a UnitVector>,
    rng: ChaCha20Rng,
}

/// The `k` identities used by the protocol: the first `k` labels with at
/// least `n0` records, truncated to their first `n0` records.
fn select_identities<'a>(ds: &'a Dataset, cfg: &EvalConfig) -> Result<Vec<Vec<&'a UnitVector>>> {
    let chosen: Vec<Vec<&UnitVector>> = ds
        .by_label()
        .into_iter()
        .filter(|(_, vs)| vs.len() >= cfg.n0)
        .take(cfg.k)
        .map(|(_, vs)| vs[..cfg.n0].to_vec())
        .collect();
    if chosen.len() < cfg.k {
        return Err(Error::InsufficientData(format!(
            "need {} identities with at least {} records, found {}",
            cfg.k,
            cfg.n0,
            chosen.len()
        )));
    }
    Ok(chosen)
}

/// Independent generator for `(seed, repetition, identity)`.
fn trial_rng(seed: u64, repetition: usize, identity: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((repetition as u64) << 32) | identity as u64);
    rng
}

fn enrollments<'a>(
    identities: &[Vec<&'a UnitVector>],
    cfg: &EvalConfig,
    repetition: usize,
) -> Result<Vec<Enrolled<'a>>> {
    let mut out = Vec::with_capacity(identities.len());
    for (i, records) in identities.iter().enumerate() {
        let mut rng = trial_rng(cfg.seed, repetition, i);
        let mut order: Vec<usize> = (0..cfg.n0).collect();
        order.shuffle(&mut rng);
        let (enroll, held_out) = order.split_at(cfg.n1);
        let template = match cfg.pipeline.enrollment {
            Enrollment::Single => records[enroll[0]].clone(),
            Enrollment::Centered { method } => {
                let set = TemplateSet::new(enroll.iter().map(|&j| records[j].clone()).collect())?;
                center(&set, method)?
            }
        };
        let genuine = held_out.iter().map(|&j| records[j]).collect();
        let impostors = identities
            .iter()
            .enumerate()
            .filter(|(other, _)| *other != i)
            .flat_map(|(_, rs)| rs.iter().copied())
            .collect();
        out.push(Enrolled { template, genuine, impostors, rng });
    }
    Ok(out)
}

fn prepare<'a>(ds: &'a Dataset, cfg: &EvalConfig) -> Result<Vec<Vec<&'a UnitVector>>> {
    cfg.validate()?;
    if matches!(cfg.pipeline.matcher, Matcher::Protected { .. }) {
        check_same_dim(cfg.params.dim(), ds.dim())?;
    }
    select_identities(ds, cfg)
}

/// Runs all `r` repetitions and aggregates TAR and FAR over every trial.
pub fn run_protocol(ds: &Dataset, cfg: &EvalConfig) -> Result<EvalReport> {
    let identities = prepare(ds, cfg)?;
    let mut reps = Vec::with_capacity(cfg.r);
    for repetition in 0..cfg.r {
        let mut rep = RepetitionReport { repetition, ..Default::default() };
        for mut e in enrollments(&identities, cfg, repetition)? {
            let mut accept: Box<dyn FnMut(&UnitVector) -> Result<bool>> = match cfg.pipeline.matcher {
                Matcher::Baseline { threshold } => {
                    let t = e.template.clone();
                    Box::new(move |p| Ok(angle(&t, p)? <= threshold))
                }
                Matcher::Protected { list_count } => {
                    let pt = protect(&e.template, cfg.params, &mut e.rng)?;
                    Box::new(move |p| {
                        Ok(if list_count == 1 { verify(&pt, p)? } else { verify_list(&pt, p, list_count)? }
                            .is_accept())
                    })
                }
            };
            for p in &e.genuine {
                rep.genuine_trials += 1;
                rep.genuine_accepts += accept(p)? as usize;
            }
            for p in &e.impostors {
                rep.impostor_trials += 1;
                rep.impostor_accepts += accept(p)? as usize;
            }
        }
        rep.tar = rate(rep.genuine_accepts, rep.genuine_trials);
        rep.far = rate(rep.impostor_accepts, rep.impostor_trials);
        reps.push(rep);
    }
    Ok(EvalReport::from_repetitions(reps))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocPoint {
    /// `None` for the protected pipeline, whose decision has no threshold.
    pub threshold: Option<f64>,
    pub report: EvalReport,
}

/// Baseline TAR/FAR at each threshold, all on the same splits. A protected
/// pipeline yields its single operating point.
pub fn roc_sweep(ds: &Dataset, cfg: &EvalConfig, thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidThresholds("no thresholds given".into()));
    }
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidThresholds("thresholds must be finite and ascending".into()));
    }
    if let Matcher::Protected { .. } = cfg.pipeline.matcher {
        return Ok(vec![RocPoint { threshold: None, report: run_protocol(ds, cfg)? }]);
    }
    let identities = prepare(ds, cfg)?;
    let mut per_threshold: Vec<Vec<RepetitionReport>> = vec![Vec::with_capacity(cfg.r); thresholds.len()];
    for repetition in 0..cfg.r {
        let mut genuine = Vec::new();
        let mut impostor = Vec::new();
        for e in enrollments(&identities, cfg, repetition)? {
            for p in &e.genuine {
                genuine.push(angle(&e.template, p)?);
            }
            for p in &e.impostors {
                impostor.push(angle(&e.template, p)?);
            }
        }
        for (slot, &th) in per_threshold.iter_mut().zip(thresholds) {
            let ga = genuine.iter().filter(|&&a| a <= th).count();
            let ia = impostor.iter().filter(|&&a| a <= th).count();
            slot.push(RepetitionReport {
                repetition,
                tar: rate(ga, genuine.len()),
                far: rate(ia, impostor.len()),
                genuine_accepts: ga,
                genuine_trials: genuine.len(),
                impostor_accepts: ia,
                impostor_trials: impostor.len(),
            });
        }
    }
    Ok(thresholds
        .iter()
        .zip(per_threshold)
        .map(|(&th, reps)| RocPoint { threshold: Some(th), report: EvalReport::from_repetitions(reps) })
        .collect())
}

/// One row of the report CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub pipeline: String,
    pub alpha: usize,
    pub noise: String,
    pub threshold: Option<f64>,
    pub tar: f64,
    pub far: f64,
    pub genuine_trials: usize,
    pub impostor_trials: usize,
    pub seed: u64,
}

impl ReportRow {
    pub fn new(cfg: &EvalConfig, threshold: Option<f64>, report: &EvalReport) -> Self {
        let threshold = threshold.or(match cfg.pipeline.matcher {
            Matcher::Baseline { threshold } => Some(threshold),
            Matcher::Protected { .. } => None,
        });
        ReportRow {
            pipeline: cfg.pipeline.name(),
            alpha: cfg.params.weight(),
            noise: cfg.noise.clone().unwrap_or_default(),
            threshold,
            tar: report.tar,
            far: report.far,
            genuine_trials: report.genuine_trials,
            impostor_trials: report.impostor_trials,
            seed: cfg.seed,
        }
    }
}

/// Header `pipeline,alpha,noise,threshold,tar,far,genuine_trials,impostor_trials,seed`.
pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Csv(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(["pipeline", "alpha", "noise", "threshold", "tar", "far", "genuine_trials", "impostor_trials", "seed"])
            .map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::decode;
    use crate::geometry::angle_stable;
    use crate::protection::{protect_revealing, Decision};
    use crate::rotation::apply;
    use crate::seeded_rng;
    use crate::simulation::{gen_dataset, NoiseSpec};

    fn params(n: usize, a: usize) -> CodeParams {
        CodeParams::new(n, a).unwrap()
    }

    fn baseline(threshold: f64) -> Pipeline {
        Pipeline { matcher: Matcher::Baseline { threshold }, enrollment: Enrollment::Single }
    }

    fn protected() -> Pipeline {
        Pipeline { matcher: Matcher::Protected { list_count: 1 }, enrollment: Enrollment::Single }
    }

    #[test]
    fn config_validation() {
        let p = params(8, 2);
        assert!(EvalConfig::new(3, 4, 1, 1, p, 0, protected()).validate().is_ok());
        let mut c = EvalConfig::new(3, 4, 1, 1, p, 0, protected());
        c.n2 = 2;
        assert!(matches!(c.validate(), Err(Error::ConfigContradiction(_))));
        let mut c = EvalConfig::new(3, 4, 1, 1, p, 0, protected());
        c.n3 = 4;
        assert!(matches!(c.validate(), Err(Error::ConfigContradiction(_))));
        assert!(EvalConfig::new(3, 4, 4, 1, p, 0, protected()).validate().is_err());
        assert!(EvalConfig::new(3, 4, 0, 1, p, 0, protected()).validate().is_err());
        assert!(EvalConfig::new(3, 4, 1, 0, p, 0, protected()).validate().is_err());
    }

    #[test]
    fn config_json_shape() {
        let mut cfg = EvalConfig::new(
            10,
            4,
            2,
            3,
            params(512, 16),
            7,
            Pipeline { matcher: Matcher::Protected { list_count: 1 }, enrollment: Enrollment::Centered { method: CenterMethod::Median } },
        );
        cfg.noise = Some("angle=5deg".into());
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(json["params"], serde_json::json!({"n": 512, "alpha": 16}));
        assert_eq!(json["n3"], 36);
        assert_eq!(json["pipeline"]["enrollment"], serde_json::json!({"type": "centered", "method": "median"}));
        let back: EvalConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, cfg);
        let parsed: EvalConfig = serde_json::from_str(
            r#"{"k":2,"n0":2,"n1":1,"n2":1,"n3":2,"r":1,"params":{"n":4,"alpha":2},"seed":1,
                "pipeline":{"matcher":{"type":"protected"},"enrollment":{"type":"single"}}}"#,
        )
        .unwrap();
        assert_eq!(parsed.pipeline.matcher, Matcher::Protected { list_count: 1 });
        assert!(serde_json::from_str::<EvalConfig>(
            r#"{"k":2,"n0":2,"n1":1,"n2":1,"n3":2,"r":1,"params":{"n":4,"alpha":9},"seed":1,
                "pipeline":{"matcher":{"type":"protected"},"enrollment":{"type":"single"}}}"#
        )
        .is_err());
    }

    #[test]
    fn insufficient_data() {
        let ds = gen_dataset(3, 2, 8, NoiseSpec::ExactAngle { theta: 0.1 }, &mut seeded_rng(1)).unwrap();
        let cfg = EvalConfig::new(3, 4, 1, 1, params(8, 2), 0, baseline(0.5));
        assert!(matches!(run_protocol(&ds, &cfg), Err(Error::InsufficientData(_))));
        let cfg = EvalConfig::new(4, 2, 1, 1, params(8, 2), 0, baseline(0.5));
        assert!(matches!(run_protocol(&ds, &cfg), Err(Error::InsufficientData(_))));
        let cfg = EvalConfig::new(3, 2, 1, 1, params(9, 2), 0, protected());
        assert!(matches!(run_protocol(&ds, &cfg), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn trial_accounting_and_aggregation() {
        let ds = gen_dataset(5, 6, 32, NoiseSpec::GaussianPerturb { sigma: 0.1 }, &mut seeded_rng(2)).unwrap();
        let cfg = EvalConfig::new(4, 5, 2, 3, params(32, 4), 9, baseline(0.6));
        let report = run_protocol(&ds, &cfg).unwrap();
        assert_eq!(report.genuine_trials, cfg.n2 * cfg.r * cfg.k);
        assert_eq!(report.impostor_trials, cfg.n3 * cfg.r * cfg.k);
        assert_eq!(report.per_repetition.len(), 3);
        let weighted: f64 = report.per_repetition.iter().map(|r| r.tar * r.genuine_trials as f64).sum::<f64>()
            / report.genuine_trials as f64;
        assert!((weighted - report.tar).abs() < 1e-12);
        assert_eq!(report, run_protocol(&ds, &cfg).unwrap());
        let mut other = cfg.clone();
        other.seed = 10;
        assert_eq!(run_protocol(&ds, &other).unwrap().genuine_trials, report.genuine_trials);
    }

    #[test]
    fn small_exact_noise_is_always_accepted() {
        let ds = gen_dataset(6, 4, 128, NoiseSpec::ExactAngle { theta: 3f64.to_radians() }, &mut seeded_rng(3))
            .unwrap();
        let cfg = EvalConfig::new(6, 4, 1, 2, params(128, 8), 4, protected());
        let report = run_protocol(&ds, &cfg).unwrap();
        assert_eq!(report.tar, 1.0);
        assert_eq!(report.far, 0.0);
        let centered = Pipeline {
            matcher: Matcher::Protected { list_count: 2 },
            enrollment: Enrollment::Centered { method: CenterMethod::Mean },
        };
        let cfg = EvalConfig::new(6, 4, 2, 1, params(128, 8), 4, centered);
        assert_eq!(run_protocol(&ds, &cfg).unwrap().tar, 1.0);
    }

    #[test]
    fn roc_extremes_and_monotonicity() {
        let ds = gen_dataset(6, 4, 64, NoiseSpec::GaussianPerturb { sigma: 0.05 }, &mut seeded_rng(4)).unwrap();
        let cfg = EvalConfig::new(6, 4, 1, 2, params(64, 4), 5, baseline(0.0));
        let zero = roc_sweep(&ds, &cfg, &[0.0]).unwrap();
        assert_eq!(zero[0].report.far, 0.0);
        assert_eq!(zero[0].report.tar, 0.0);
        let full = roc_sweep(&ds, &cfg, &[std::f64::consts::PI]).unwrap();
        assert_eq!((full[0].report.tar, full[0].report.far), (1.0, 1.0));
        let ths: Vec<f64> = (0..20).map(|i| i as f64 * std::f64::consts::PI / 19.0).collect();
        let sweep = roc_sweep(&ds, &cfg, &ths).unwrap();
        for w in sweep.windows(2) {
            assert!(w[0].report.tar <= w[1].report.tar && w[0].report.far <= w[1].report.far);
        }
        // Each sweep point agrees with a direct run at that threshold.
        let mut direct = cfg.clone();
        direct.pipeline = baseline(ths[5]);
        assert_eq!(run_protocol(&ds, &direct).unwrap(), sweep[5].report);
        assert!(roc_sweep(&ds, &cfg, &[]).is_err());
        assert!(roc_sweep(&ds, &cfg, &[0.3, 0.1]).is_err());
        let prot = EvalConfig::new(6, 4, 1, 1, params(64, 4), 5, protected());
        let single = roc_sweep(&ds, &prot, &[0.1, 0.2]).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].threshold, None);
    }

    #[test]
    fn protected_decision_is_decoder_cell_membership() {
        let mut rng = seeded_rng(5);
        let p = params(64, 6);
        let half_min = crate::ecc::min_angle(p) / 2.0;
        for _ in 0..40 {
            let t = UnitVector::random(64, &mut rng).unwrap();
            let (pt, c) = protect_revealing(&t, p, &mut rng).unwrap();
            for k in 0..10 {
                let theta = 0.05 * k as f64;
                let probe = crate::simulation::perturb_exact_angle(&t, theta, &mut rng).unwrap();
                let moved = apply(pt.helper(), &probe).unwrap();
                let lhs = angle_stable(&moved, &c.dense()).unwrap();
                assert!((lhs - angle_stable(&probe, &t).unwrap()).abs() <= 1e-8);
                let decision = verify(&pt, &probe).unwrap();
                assert_eq!(decision.is_accept(), decode(&moved, p).unwrap() == c);
                if theta < half_min {
                    assert_eq!(decision, Decision::Accept);
                }
            }
        }
    }

    #[test]
    fn report_csv_layout() {
        let ds = gen_dataset(3, 3, 16, NoiseSpec::ExactAngle { theta: 0.1 }, &mut seeded_rng(6)).unwrap();
        let mut cfg = EvalConfig::new(3, 3, 1, 1, params(16, 4), 8, protected());
        cfg.noise = Some("angle=5.7deg".into());
        let report = run_protocol(&ds, &cfg).unwrap();
        let mut out = Vec::new();
        write_report_csv(&[ReportRow::new(&cfg, None, &report)], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "pipeline,alpha,noise,threshold,tar,far,genuine_trials,impostor_trials,seed");
        assert_eq!(lines.next().unwrap(), "protected-single,4,angle=5.7deg,,1.0,0.0,6,18,8");
        let mut empty = Vec::new();
        write_report_csv(&[], &mut empty).unwrap();
        assert!(String::from_utf8(empty).unwrap().starts_with("pipeline,alpha"));
    }
}
