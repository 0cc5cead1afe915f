use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma};

use super::config::with_workers;
use crate::error::{Error, Result};
use crate::random::{sample_dense_signal, sample_gaussian_matrix_mode, trial_stream_id, RngStream, ScalarMode, StreamKind};

pub const MIN_RATIO_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub m: usize,
    pub n: usize,
    pub samples: usize,
    pub mode: ScalarMode,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Shape and rate of the reference Gamma law.
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    pub expected_variance: f64,
    pub ks_distance: f64,
}

/// `(shape, rate)` of the law of `‖Φx‖₂²/‖x‖₂²` for Gaussian `Φ` with `σ² = 1/m`:
/// `Γ(2m, 2m)` for quaternion entries, `Γ(m/2, m/2)` (a scaled `χ²_m`) for real ones.
pub fn ratio_law(m: usize, mode: ScalarMode) -> (f64, f64) {
    let k = match mode {
        ScalarMode::Quaternion => 2.0 * m as f64,
        ScalarMode::Real => 0.5 * m as f64,
    };
    (k, k)
}

/// Kolmogorov–Smirnov distance `sup |F_N − F|`; sorts `samples` in place.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Draws `samples` independent pairs `(Φ, x)` with `Φ` `m × n` Gaussian
/// (`σ² = 1/m`) and `x` a dense Gaussian vector, and compares the empirical law
/// of `‖Φx‖₂²/‖x‖₂²` with [`ratio_law`].
pub fn run_ratio_test(m: usize, n: usize, samples: usize, mode: ScalarMode, seed: u64) -> Result<RatioStats> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!("ratio test needs m, n >= 1, got m = {m}, n = {n}")));
    }
    if samples < MIN_RATIO_SAMPLES {
        return Err(Error::InvalidInput(format!("ratio test needs at least {MIN_RATIO_SAMPLES} samples, got {samples}")));
    }
    let mut values: Vec<f64> = with_workers(|| {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(seed, trial_stream_id(StreamKind::RatioTest, m, 0, i));
                let phi = sample_gaussian_matrix_mode(&mut rng, m, n, 1.0 / m as f64, mode)?;
                let x = sample_dense_signal(&mut rng, n, 1.0, mode)?;
                Ok(phi.matvec(&x)?.norm2().powi(2) / x.norm2().powi(2))
            })
            .collect::<Result<Vec<f64>>>()
    })??;
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let (shape, rate) = ratio_law(m, mode);
    let law = Gamma::new(shape, rate).map_err(|e| Error::InvalidInput(format!("gamma law: {e}")))?;
    let ks = ks_distance(&mut values, |x| law.cdf(x));
    Ok(RatioStats {
        m,
        n,
        samples,
        mode,
        mean,
        variance,
        gamma_shape: shape,
        gamma_rate: rate,
        expected_variance: shape / (rate * rate),
        ks_distance: ks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laws() {
        assert_eq!(ratio_law(16, ScalarMode::Quaternion), (32.0, 32.0));
        assert_eq!(ratio_law(16, ScalarMode::Real), (8.0, 8.0));
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        // midpoints of the uniform law
        let mut v: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).rev().collect();
        let d = ks_distance(&mut v, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12, "{d}");
    }

    #[test]
    fn rejects_small_sample_counts() {
        assert!(run_ratio_test(4, 8, 999, ScalarMode::Quaternion, 0).is_err());
        assert!(run_ratio_test(0, 8, 1000, ScalarMode::Quaternion, 0).is_err());
    }

    #[test]
    fn moments_close_to_law() {
        let q = run_ratio_test(4, 6, 4000, ScalarMode::Quaternion, 1).unwrap();
        assert!((q.mean - 1.0).abs() < 0.02, "{q:?}");
        assert!((q.variance / q.expected_variance - 1.0).abs() < 0.15, "{q:?}");
        assert!(q.ks_distance < 0.03, "{q:?}");
        let r = run_ratio_test(4, 6, 4000, ScalarMode::Real, 1).unwrap();
        assert!((r.variance / q.variance - 4.0).abs() < 0.8, "{} vs {}", r.variance, q.variance);
    }
}
