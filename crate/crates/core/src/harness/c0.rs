use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{with_workers, ExperimentConfig};
use super::write_pretty_json;
use crate::error::{Error, Result};
use crate::qlinalg::QVector;
use crate::random::{sample_dense_signal, sample_gaussian_matrix_mode, sample_sphere, trial_stream_id, RngStream, StreamKind};
use crate::solver::{solve, RecoveryProblem};

pub const C0_FILE: &str = "c0.json";
pub const C0_SCHEMA_VERSION: u32 = 1;

/// Tails below this make the ratio meaningless.
pub const MIN_TAIL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C0Point {
    pub m: usize,
    pub s: usize,
    pub trial: usize,
    /// `‖x# − x‖₁ / ‖x − x_s‖₁`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub m: usize,
    pub s: usize,
    pub trial: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C0Scatter {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub points: Vec<C0Point>,
    pub skipped: Vec<SkippedPoint>,
}

impl C0Scatter {
    /// Largest observed ratio for each `s`, in increasing `s`.
    pub fn per_s_max(&self) -> Vec<(usize, f64)> {
        let mut best: BTreeMap<usize, f64> = BTreeMap::new();
        for p in &self.points {
            let e = best.entry(p.s).or_insert(f64::NEG_INFINITY);
            *e = e.max(p.ratio);
        }
        best.into_iter().collect()
    }
}

/// `‖x# − x‖₁ / ‖x − x_s‖₁`, a lower bound on `C0` whenever the error bound holds.
pub fn c0_ratio(x: &QVector, x_hat: &QVector, s: usize) -> Result<f64> {
    let tail = x.try_sub(&x.best_s_sparse(s)?)?.norm1();
    if tail < MIN_TAIL {
        return Err(Error::SkippedPoint(format!("‖x − x_s‖₁ = {tail:e} for s = {s}")));
    }
    Ok(x_hat.try_sub(x)?.norm1() / tail)
}

/// Recovers dense Gaussian signals (`σ² = 1`) and records the ratio for every
/// sparsity level of the configured rule. The solve does not depend on `s`,
/// so each trial is solved once.
pub fn run_c0_experiment(config: &ExperimentConfig) -> Result<C0Scatter> {
    config.validate()?;
    let mut tasks: Vec<(usize, usize)> = Vec::new();
    let mut ms = config.m_values.clone();
    ms.sort_unstable();
    ms.dedup();
    for &m in &ms {
        tasks.extend((0..config.trials).map(|t| (m, t)));
    }
    let per_trial: Vec<(Vec<C0Point>, Vec<SkippedPoint>)> =
        with_workers(|| tasks.par_iter().map(|&(m, t)| c0_trial(config, m, t)).collect::<Result<Vec<_>>>())??;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (p, s) in per_trial {
        points.extend(p);
        skipped.extend(s);
    }
    let scatter = C0Scatter { schema_version: C0_SCHEMA_VERSION, config: config.clone(), points, skipped };
    std::fs::create_dir_all(&config.output)?;
    write_pretty_json(&config.output.join(C0_FILE), &scatter)?;
    Ok(scatter)
}

fn c0_trial(config: &ExperimentConfig, m: usize, trial: usize) -> Result<(Vec<C0Point>, Vec<SkippedPoint>)> {
    let mut rng = RngStream::new(config.base_seed, trial_stream_id(StreamKind::C0Scatter, m, 0, trial));
    let mode = config.scalar_mode;
    let phi = sample_gaussian_matrix_mode(&mut rng, m, config.n, 1.0 / m as f64, mode)?;
    let x = sample_dense_signal(&mut rng, config.n, 1.0, mode)?;
    let noise = sample_sphere(&mut rng, m, config.eta, mode)?;
    let y = phi.matvec(&x)?.try_add(&noise)?;
    let x_hat = solve(&RecoveryProblem::new(phi, y, config.eta)?, &config.solver)?.x_hat;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for s in config.s_rule.values(m) {
        match c0_ratio(&x, &x_hat, s) {
            Ok(ratio) => points.push(C0Point { m, s, trial, ratio }),
            Err(Error::SkippedPoint(reason)) => skipped.push(SkippedPoint { m, s, trial, reason }),
            Err(e) => return Err(e),
        }
    }
    Ok((points, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::SRule;
    use crate::quaternion::Quaternion as Q;

    #[test]
    fn full_sparsity_is_skipped() {
        let x = QVector::from_vec(vec![Q::ONE, Q::I, Q::J]);
        let x_hat = QVector::zeros(3);
        assert!(matches!(c0_ratio(&x, &x_hat, 3), Err(Error::SkippedPoint(_))));
        // tail after keeping one entry is 2, error is 3
        assert!((c0_ratio(&x, &x_hat, 1).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn ratios_are_nonnegative_and_monotone_per_trial() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            n: 24,
            m_values: vec![8],
            s_rule: SRule::UpToHalfM,
            trials: 3,
            output: dir.path().to_path_buf(),
            ..Default::default()
        };
        let sc = run_c0_experiment(&cfg).unwrap();
        assert_eq!(sc.points.len(), 3 * 4);
        assert!(sc.skipped.is_empty());
        assert!(sc.points.iter().all(|p| p.ratio >= 0.0));
        for t in 0..3 {
            let r: Vec<f64> = sc.points.iter().filter(|p| p.trial == t).map(|p| p.ratio).collect();
            assert!(r.windows(2).all(|w| w[0] <= w[1]), "{r:?}");
        }
        let maxes = sc.per_s_max();
        assert_eq!(maxes.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        assert!(dir.path().join(C0_FILE).exists());
    }
}
