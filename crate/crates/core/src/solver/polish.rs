//! Support polishing and optimality certificates.
//!
//! Given the active groups of an ADMM iterate, the polished point is the least
//! squares fit of `ỹ` restricted to those columns. A dual vector built from the
//! ADMM multiplier, corrected so that it matches the polished point's
//! subgradient exactly on the support and rescaled into the dual feasible set,
//! gives a lower bound on the optimal value. A small gap proves optimality.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::admm::{group_l1, group_norms};

pub(crate) struct Polished {
    pub x: DVector<f64>,
    /// `‖A x − ỹ‖₂`.
    pub residual: f64,
    pub objective: f64,
    pub support: Vec<usize>,
}

/// Groups whose norm exceeds `threshold · max group norm`.
pub(crate) fn active_groups(z: &DVector<f64>, threshold: f64) -> Vec<usize> {
    let norms = group_norms(z);
    let max = norms.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    norms.iter().enumerate().filter(|(_, &g)| g > threshold * max).map(|(k, _)| k).collect()
}

fn support_columns(support: &[usize]) -> Vec<usize> {
    support.iter().flat_map(|&k| 4 * k..4 * k + 4).collect()
}

/// Least squares on the given groups; `None` when the restricted normal
/// equations are rank deficient.
pub(crate) fn least_squares_on_support(a: &DMatrix<f64>, y: &DVector<f64>, support: &[usize]) -> Option<Polished> {
    let n4 = a.ncols();
    if support.is_empty() {
        let x = DVector::zeros(n4);
        return Some(Polished { x, residual: y.norm(), objective: 0.0, support: Vec::new() });
    }
    if 4 * support.len() > a.nrows() {
        return None;
    }
    let cols = support_columns(support);
    let a_s = a.select_columns(cols.iter());
    let gram = a_s.tr_mul(&a_s);
    // Reject numerically singular systems before trusting the factor.
    let diag_max = gram.diagonal().iter().copied().fold(0.0, f64::max);
    let chol = Cholesky::new(gram)?;
    let l_diag_min = chol.l_dirty().diagonal().iter().map(|v| v * v).fold(f64::INFINITY, f64::min);
    if !(l_diag_min > 1e-13 * diag_max) {
        return None;
    }
    let mut coef = a_s.tr_mul(y);
    chol.solve_mut(&mut coef);
    if !coef.iter().all(|v| v.is_finite()) {
        return None;
    }
    let residual = (&a_s * &coef - y).norm();
    let mut x = DVector::zeros(n4);
    for (slot, &col) in cols.iter().enumerate() {
        x[col] = coef[slot];
    }
    let objective = group_l1(&x);
    Some(Polished { x, residual, objective, support: support.to_vec() })
}

/// Dual lower bound `⟨λ, ỹ⟩ − η‖λ‖` for the polished point, with `λ` derived
/// from `multiplier`. Returns `(lower_bound, max off-support dual group norm)`.
pub(crate) fn dual_lower_bound(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    eta: f64,
    polished: &Polished,
    multiplier: &DVector<f64>,
) -> Option<(f64, f64)> {
    let mut lambda = multiplier.clone();
    if !polished.support.is_empty() {
        let cols = support_columns(&polished.support);
        let a_s = a.select_columns(cols.iter());
        // subgradient of the polished point on its support
        let mut g = DVector::zeros(cols.len());
        for (slot, &k) in polished.support.iter().enumerate() {
            let grp = polished.x.rows(4 * k, 4);
            let norm = grp.norm();
            if norm > 0.0 {
                for c in 0..4 {
                    g[4 * slot + c] = grp[c] / norm;
                }
            }
        }
        // λ ← λ + A_S (A_Sᵀ A_S)⁻¹ (g − A_Sᵀ λ), the nearest λ with A_Sᵀλ = g
        let mismatch = &g - a_s.tr_mul(&lambda);
        let chol = Cholesky::new(a_s.tr_mul(&a_s))?;
        let coef = chol.solve(&mismatch);
        lambda += &a_s * coef;
    }
    let at_lambda = a.tr_mul(&lambda);
    let norms = group_norms(&at_lambda);
    let worst = norms.iter().copied().fold(0.0, f64::max);
    let off_support = norms
        .iter()
        .enumerate()
        .filter(|(k, _)| !polished.support.contains(k))
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let scale = worst.max(1.0);
    let lambda = lambda / scale;
    let bound = lambda.dot(y) - eta * lambda.norm();
    bound.is_finite().then_some((bound, off_support))
}
