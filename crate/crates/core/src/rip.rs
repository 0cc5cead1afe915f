//! Restricted isometry constants.
//!
//! `δs = max_{#S ≤ s} ‖Φ_S*Φ_S − I‖₂→₂`. The maximum over nested supports is
//! monotone, so only supports of size exactly `s` are enumerated. Each one
//! costs a Hermitian eigenvalue problem of size `s`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{hermitian_inner, hermitian_opnorm, QMatrix, QVector, SupportSet};
use crate::random::{sample_dense_signal, sample_support, RngStream, ScalarMode};

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 2_000_000;

/// Below this, `δ` is too small to divide by in [`check_rip_ip`].
pub const DEGENERATE_DELTA: f64 = 1e-14;

/// Supports per parallel work item.
const CHUNK: u128 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RipMethod {
    ExactEnumeration,
    SampledLowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipReport {
    pub s: usize,
    pub delta: f64,
    pub method: RipMethod,
    /// Supports enumerated, or vectors sampled.
    pub supports_examined: u64,
    pub argmax_support: SupportSet,
    pub elapsed_s: f64,
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let mut candidate = next;
        loop {
            let count = binomial(n - candidate - 1, k - slot - 1);
            if rank < count {
                break;
            }
            rank -= count;
            candidate += 1;
        }
        out.push(candidate);
        next = candidate + 1;
    }
    out
}

/// Advances to the lexicographic successor; `false` after the last subset.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `‖Φ_S*Φ_S − I‖₂→₂` for one support.
pub fn support_deviation(phi: &QMatrix, support: &SupportSet) -> Result<f64> {
    let gram = phi.gram(support)?;
    let id = QMatrix::identity(support.len());
    hermitian_opnorm(&gram.try_sub(&id)?)
}

pub fn exact_delta(phi: &QMatrix, s: usize) -> Result<RipReport> {
    exact_delta_with_budget(phi, s, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_delta_with_budget(phi: &QMatrix, s: usize, budget: u128) -> Result<RipReport> {
    let n = phi.cols();
    if s == 0 || s > n {
        return Err(Error::SparsityOutOfRange { s, n });
    }
    let total = binomial(n, s);
    if total > budget {
        return Err(Error::BudgetExceeded { required: total, budget });
    }
    let start = Instant::now();
    let chunks = total.div_ceil(CHUNK);
    // (delta, rank) with ties resolved towards the lowest rank, so the
    // parallel reduction is order independent.
    let best = (0..chunks as u64)
        .into_par_iter()
        .map(|chunk| -> Result<(f64, u128)> {
            let first = chunk as u128 * CHUNK;
            let last = (first + CHUNK).min(total);
            let mut comb = unrank_combination(n, s, first);
            let mut best = (f64::NEG_INFINITY, first);
            for rank in first..last {
                let support = SupportSet::new(comb.clone())?;
                let d = support_deviation(phi, &support)?;
                if d > best.0 {
                    best = (d, rank);
                }
                next_combination(&mut comb, n);
            }
            Ok(best)
        })
        .try_reduce(
            || (f64::NEG_INFINITY, u128::MAX),
            |a, b| Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
        )?;

    #[cfg(debug_assertions)]
    if n <= 8 && s > 1 {
        let smaller = exact_delta_with_budget(phi, s - 1, budget)?;
        debug_assert!(smaller.delta <= best.0 + 1e-12, "delta not monotone in s");
    }

    Ok(RipReport {
        s,
        delta: best.0.max(0.0),
        method: RipMethod::ExactEnumeration,
        supports_examined: total as u64,
        argmax_support: SupportSet::new(unrank_combination(n, s, best.1))?,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

fn unit_vector_on(rng: &mut RngStream, n: usize, support: &SupportSet, mode: ScalarMode) -> Result<QVector> {
    loop {
        let vals = sample_dense_signal(rng, support.len(), 1.0, mode)?;
        let norm = vals.norm2();
        if norm > 1e-300 {
            return QVector::scatter(n, support, &vals.scale(1.0 / norm));
        }
    }
}

/// `max |‖Φx‖₂² − 1|` over random `s`-sparse unit vectors; never exceeds the exact `δs`.
pub fn sampled_delta_lower_bound(phi: &QMatrix, s: usize, trials: usize, rng: &mut RngStream) -> Result<RipReport> {
    sampled_delta_lower_bound_mode(phi, s, trials, rng, ScalarMode::Quaternion)
}

/// As [`sampled_delta_lower_bound`], drawing real or quaternion test vectors.
pub fn sampled_delta_lower_bound_mode(
    phi: &QMatrix,
    s: usize,
    trials: usize,
    rng: &mut RngStream,
    mode: ScalarMode,
) -> Result<RipReport> {
    let n = phi.cols();
    if s == 0 || s > n {
        return Err(Error::SparsityOutOfRange { s, n });
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let start = Instant::now();
    let mut best = (f64::NEG_INFINITY, SupportSet::empty());
    for _ in 0..trials {
        let support = sample_support(rng, n, s)?;
        let x = unit_vector_on(rng, n, &support, mode)?;
        let dev = (phi.matvec(&x)?.norm2().powi(2) - x.norm2().powi(2)).abs();
        if dev > best.0 {
            best = (dev, support);
        }
    }
    Ok(RipReport {
        s,
        delta: best.0,
        method: RipMethod::SampledLowerBound,
        supports_examined: trials as u64,
        argmax_support: best.1,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipIpCheck {
    /// `max |⟨Φx, Φy⟩| / (δ_{s1+s2} ‖x‖₂‖y‖₂)` over the sampled pairs.
    pub max_ratio: f64,
    pub delta: f64,
    pub trials: usize,
    /// `δ` was below [`DEGENERATE_DELTA`] and every sampled inner product vanished.
    pub degenerate: bool,
}

/// Samples disjoint-support pairs `x` (`s1`-sparse), `y` (`s2`-sparse) and
/// compares `|⟨Φx, Φy⟩|` with `δ_{s1+s2}‖x‖‖y‖`.
pub fn check_rip_ip(phi: &QMatrix, s1: usize, s2: usize, trials: usize, rng: &mut RngStream) -> Result<RipIpCheck> {
    let n = phi.cols();
    if s1 == 0 || s2 == 0 || s1 + s2 > n {
        return Err(Error::SparsityOutOfRange { s: s1 + s2, n });
    }
    let delta = exact_delta(phi, s1 + s2)?.delta;
    check_rip_ip_against(phi, s1, s2, trials, delta, rng)
}

/// [`check_rip_ip`] with a precomputed `δ_{s1+s2}`.
pub fn check_rip_ip_against(
    phi: &QMatrix,
    s1: usize,
    s2: usize,
    trials: usize,
    delta: f64,
    rng: &mut RngStream,
) -> Result<RipIpCheck> {
    let n = phi.cols();
    if s1 == 0 || s2 == 0 || s1 + s2 > n {
        return Err(Error::SparsityOutOfRange { s: s1 + s2, n });
    }
    let mut max_normalized = 0.0f64;
    for _ in 0..trials {
        // draw s1+s2 distinct indices, split into the two supports
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..s1 + s2 {
            let j = rng.uniform_index(i..n);
            idx.swap(i, j);
        }
        let sx = SupportSet::new(idx[..s1].to_vec())?;
        let sy = SupportSet::new(idx[s1..s1 + s2].to_vec())?;
        let x = unit_vector_on(rng, n, &sx, ScalarMode::Quaternion)?;
        let y = unit_vector_on(rng, n, &sy, ScalarMode::Quaternion)?;
        let ip = hermitian_inner(&phi.matvec(&x)?, &phi.matvec(&y)?)?;
        max_normalized = max_normalized.max(ip.norm() / (x.norm2() * y.norm2()));
    }
    if delta < DEGENERATE_DELTA {
        if max_normalized <= 1e-12 {
            return Ok(RipIpCheck { max_ratio: 0.0, delta, trials, degenerate: true });
        }
        return Err(Error::DegenerateDelta(delta));
    }
    Ok(RipIpCheck { max_ratio: max_normalized / delta, delta, trials, degenerate: false })
}

/// Constants of the stable-recovery error bound
/// `‖x# − x‖₂ ≤ C0/√s · ‖x − x_s‖₁ + C1·η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundConstants {
    pub delta2s: f64,
    pub c0: f64,
    pub c1: f64,
}

pub fn error_constants(delta2s: f64) -> Result<ErrorBoundConstants> {
    let sqrt2 = std::f64::consts::SQRT_2;
    if !(delta2s >= 0.0 && delta2s < sqrt2 - 1.0) {
        return Err(Error::ConditionViolated(delta2s));
    }
    let denom = 1.0 - (sqrt2 + 1.0) * delta2s;
    Ok(ErrorBoundConstants {
        delta2s,
        c0: 2.0 * (1.0 + (sqrt2 - 1.0) * delta2s) / denom,
        c1: 4.0 * (1.0 + delta2s).sqrt() / denom,
    })
}

impl ErrorBoundConstants {
    /// Right-hand side `C0/√s · tail + C1·η`.
    pub fn l2_bound(&self, s: usize, tail_l1: f64, eta: f64) -> f64 {
        self.c0 / (s as f64).sqrt() * tail_l1 + self.c1 * eta
    }

    /// `C0 · tail`, the exact-data `ℓ1` bound.
    pub fn l1_bound(&self, tail_l1: f64) -> f64 {
        self.c0 * tail_l1
    }

    /// Human-readable statement of the guarantee for sparsity `s`.
    pub fn guarantee_text(&self, s: usize) -> String {
        format!(
            "delta_{two_s} = {d:.6} < sqrt(2)-1, so for every x and y = Phi x + e with ||e||_2 <= eta the \
             l1 minimizer x# satisfies\n  ||x# - x||_2 <= {c0:.6}/sqrt({s}) * ||x - x_{s}||_1 + {c1:.6} * eta\n\
             and, for exact data,\n  ||x# - x||_1 <= {c0:.6} * ||x - x_{s}||_1\n\
             in particular every {s}-sparse x is recovered exactly from y = Phi x.",
            two_s = 2 * s,
            d = self.delta2s,
            c0 = self.c0,
            c1 = self.c1,
        )
    }
}
