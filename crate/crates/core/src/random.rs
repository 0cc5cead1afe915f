//! Seeded samplers for Gaussian measurement ensembles and sparse signals.
//!
//! Every random draw goes through an [`RngStream`]: a ChaCha8 generator keyed
//! by a 64-bit seed and positioned on a 64-bit stream. Distinct streams are
//! independent, so each trial of an experiment owns one stream and results do
//! not depend on how trials are scheduled across threads.
//!
//! Stream ids for experiment trials are packed by [`trial_stream_id`]:
//!
//! ```text
//! bits 60..64  experiment kind (0 sweep, 1 C0 scatter, 2 ratio test, 3 guarantee check)
//! bits 44..60  m
//! bits 28..44  s
//! bits  0..28  trial index
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{QMatrix, QVector, SupportSet};
use crate::quaternion::Quaternion;

/// Scalar field used when sampling an experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    /// Full quaternion entries, each component `N(0, σ²/4)`.
    #[default]
    Quaternion,
    /// Real entries `N(0, σ²)` embedded as quaternions with zero imaginary part.
    Real,
}

impl std::str::FromStr for ScalarMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quaternion" | "q" => Ok(ScalarMode::Quaternion),
            "real" | "r" => Ok(ScalarMode::Real),
            _ => Err(Error::InvalidInput(format!("unknown scalar mode {s:?}"))),
        }
    }
}

impl std::fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScalarMode::Quaternion => "quaternion",
            ScalarMode::Real => "real",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamKind {
    Sweep = 0,
    C0Scatter = 1,
    RatioTest = 2,
    Guarantee = 3,
}

pub fn trial_stream_id(kind: StreamKind, m: usize, s: usize, trial: usize) -> u64 {
    ((kind as u64) << 60)
        | ((m as u64 & 0xFFFF) << 44)
        | ((s as u64 & 0xFFFF) << 28)
        | (trial as u64 & 0x0FFF_FFFF)
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform_index(&mut self, range: std::ops::Range<usize>) -> usize {
        self.rng.random_range(range)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

fn check_variance(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidVariance(sigma2))
    }
}

/// `N_H(0, σ²)`: four independent `N(0, σ²/4)` components, so `E|q|² = σ²`.
pub fn sample_quaternion_gaussian(rng: &mut RngStream, sigma2: f64) -> Result<Quaternion> {
    check_variance(sigma2)?;
    Ok(quaternion_gaussian(rng, sigma2.sqrt() * 0.5))
}

fn quaternion_gaussian(rng: &mut RngStream, sd: f64) -> Quaternion {
    Quaternion::new(
        sd * rng.standard_normal(),
        sd * rng.standard_normal(),
        sd * rng.standard_normal(),
        sd * rng.standard_normal(),
    )
}

/// One scalar with total variance `σ²` in the requested mode.
pub fn sample_scalar(rng: &mut RngStream, sigma2: f64, mode: ScalarMode) -> Result<Quaternion> {
    check_variance(sigma2)?;
    Ok(match mode {
        ScalarMode::Quaternion => quaternion_gaussian(rng, sigma2.sqrt() * 0.5),
        ScalarMode::Real => Quaternion::real(sigma2.sqrt() * rng.standard_normal()),
    })
}

pub fn sample_gaussian_matrix(rng: &mut RngStream, m: usize, n: usize, sigma2: f64) -> Result<QMatrix> {
    sample_gaussian_matrix_mode(rng, m, n, sigma2, ScalarMode::Quaternion)
}

/// `m×n` matrix of i.i.d. entries, drawn row by row.
pub fn sample_gaussian_matrix_mode(
    rng: &mut RngStream,
    m: usize,
    n: usize,
    sigma2: f64,
    mode: ScalarMode,
) -> Result<QMatrix> {
    check_variance(sigma2)?;
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!("matrix shape {m}x{n} must be at least 1x1")));
    }
    let sd = sigma2.sqrt();
    Ok(QMatrix::from_fn(m, n, |_, _| match mode {
        ScalarMode::Quaternion => quaternion_gaussian(rng, 0.5 * sd),
        ScalarMode::Real => Quaternion::real(sd * rng.standard_normal()),
    }))
}

/// Uniformly random `s`-subset of `0..n` by a partial Fisher–Yates shuffle.
pub fn sample_support(rng: &mut RngStream, n: usize, s: usize) -> Result<SupportSet> {
    if s > n {
        return Err(Error::SparsityOutOfRange { s, n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..s {
        let j = rng.uniform_index(i..n);
        idx.swap(i, j);
    }
    idx.truncate(s);
    SupportSet::new(idx)
}

pub fn sample_sparse_signal(rng: &mut RngStream, n: usize, s: usize) -> Result<(QVector, SupportSet)> {
    sample_sparse_signal_mode(rng, n, s, ScalarMode::Quaternion)
}

/// Uniform support of size `s` carrying i.i.d. unit-variance entries.
pub fn sample_sparse_signal_mode(
    rng: &mut RngStream,
    n: usize,
    s: usize,
    mode: ScalarMode,
) -> Result<(QVector, SupportSet)> {
    let support = sample_support(rng, n, s)?;
    let mut x = QVector::zeros(n);
    for &i in support.indices() {
        x[i] = sample_scalar(rng, 1.0, mode)?;
    }
    Ok((x, support))
}

/// Dense vector of i.i.d. `N(0, σ²)` scalars.
pub fn sample_dense_signal(rng: &mut RngStream, n: usize, sigma2: f64, mode: ScalarMode) -> Result<QVector> {
    (0..n).map(|_| sample_scalar(rng, sigma2, mode)).collect()
}

/// Uniform point on the `ℓ2` sphere of the given radius (zero vector for radius 0).
pub fn sample_sphere(rng: &mut RngStream, n: usize, radius: f64, mode: ScalarMode) -> Result<QVector> {
    if radius == 0.0 || n == 0 {
        return Ok(QVector::zeros(n));
    }
    loop {
        let v = sample_dense_signal(rng, n, 1.0, mode)?;
        let norm = v.norm2();
        if norm > 1e-300 {
            return Ok(v.scale(radius / norm));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_identical() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        let xa: Vec<_> = (0..100).map(|_| sample_quaternion_gaussian(&mut a, 1.0).unwrap()).collect();
        let xb: Vec<_> = (0..100).map(|_| sample_quaternion_gaussian(&mut b, 1.0).unwrap()).collect();
        assert_eq!(xa, xb);
        let mut c = RngStream::new(42, 8);
        assert_ne!(sample_quaternion_gaussian(&mut c, 1.0).unwrap(), xa[0]);
    }

    #[test]
    fn component_and_total_variance() {
        let mut rng = RngStream::new(1, 0);
        let samples = 100_000;
        let qs: Vec<Quaternion> = (0..samples).map(|_| sample_quaternion_gaussian(&mut rng, 1.0).unwrap()).collect();
        let mean_sq: f64 = qs.iter().map(|q| q.norm_sqr()).sum::<f64>() / samples as f64;
        assert!((mean_sq - 1.0).abs() < 0.03, "E|q|^2 = {mean_sq}");
        for comp in 0..4 {
            let vals: Vec<f64> = qs.iter().map(|q| q.to_array()[comp]).collect();
            let mean = vals.iter().sum::<f64>() / samples as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
            assert!((var - 0.25).abs() < 0.25 * 0.05, "component {comp} variance {var}");
        }
    }

    #[test]
    fn invalid_variance() {
        let mut rng = RngStream::new(1, 0);
        assert!(matches!(sample_quaternion_gaussian(&mut rng, 0.0), Err(Error::InvalidVariance(_))));
        assert!(matches!(sample_gaussian_matrix(&mut rng, 2, 2, -1.0), Err(Error::InvalidVariance(_))));
    }

    #[test]
    fn matrix_shape_and_column_energy() {
        let mut rng = RngStream::new(3, 0);
        let m = 16;
        let a = sample_gaussian_matrix(&mut rng, m, 1000, 1.0 / m as f64).unwrap();
        assert_eq!(a.shape(), (16, 1000));
        let mean: f64 = (0..1000).map(|j| a.column(j).norm2().powi(2)).sum::<f64>() / 1000.0;
        assert!((mean - 1.0).abs() < 0.05, "mean column energy {mean}");
    }

    #[test]
    fn sparse_signal_support() {
        let mut rng = RngStream::new(5, 0);
        let (x, s) = sample_sparse_signal(&mut rng, 20, 6).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(x.support(), s);
        let (z, s0) = sample_sparse_signal(&mut rng, 20, 0).unwrap();
        assert!(s0.is_empty());
        assert_eq!(z, QVector::zeros(20));
        assert!(matches!(sample_sparse_signal(&mut rng, 3, 4), Err(Error::SparsityOutOfRange { s: 4, n: 3 })));
    }

    #[test]
    fn support_inclusion_is_uniform() {
        // Each index is included with probability s/n; check within 3σ binomial bands.
        let (n, s, draws) = (16usize, 4usize, 10_000usize);
        let mut rng = RngStream::new(11, 0);
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            for &i in sample_support(&mut rng, n, s).unwrap().indices() {
                counts[i] += 1;
            }
        }
        let p = s as f64 / n as f64;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!((c as f64 - mean).abs() <= 3.0 * sd, "index {i}: {c} vs {mean}±{}", 3.0 * sd);
        }
    }

    #[test]
    fn real_mode_has_full_variance() {
        let mut rng = RngStream::new(9, 0);
        let a = sample_gaussian_matrix_mode(&mut rng, 200, 200, 1.0, ScalarMode::Real).unwrap();
        assert!(a.is_real());
        let mean_sq = a.as_slice().iter().map(|q| q.norm_sqr()).sum::<f64>() / 40_000.0;
        assert!((mean_sq - 1.0).abs() < 0.03);
    }

    #[test]
    fn sphere_radius() {
        let mut rng = RngStream::new(2, 0);
        let e = sample_sphere(&mut rng, 10, 0.1, ScalarMode::Quaternion).unwrap();
        assert!((e.norm2() - 0.1).abs() < 1e-15);
        assert_eq!(sample_sphere(&mut rng, 4, 0.0, ScalarMode::Real).unwrap(), QVector::zeros(4));
    }

    #[test]
    fn stream_ids_do_not_collide() {
        let a = trial_stream_id(StreamKind::Sweep, 32, 9, 0);
        let b = trial_stream_id(StreamKind::Sweep, 32, 9, 1);
        let c = trial_stream_id(StreamKind::C0Scatter, 32, 9, 0);
        let d = trial_stream_id(StreamKind::Sweep, 9, 32, 0);
        assert!(a != b && a != c && a != d);
    }
}
