//! ADMM iterations for `min Σₖ ‖vₖ‖₂  s.t.  A v = u, u ∈ C`.
//!
//! Splitting: `(v, u)` lives on the graph `G = {(v, Av)}`, a copy `(z, w)` carries
//! the group norm and the set `C` (the point `ỹ`, or the ball of radius `η`
//! around it). Each sweep projects onto `G`, applies block soft-thresholding and
//! the projection onto `C`, then updates the duals. The graph projection uses a
//! Cholesky factor of `I + AAᵀ`, which does not depend on `ρ`, so `ρ` can adapt
//! without refactoring.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// `max(0, 1 − κ/‖v‖₂)·v`, and zero when `v = 0`.
pub fn block_soft_threshold(v: [f64; 4], kappa: f64) -> [f64; 4] {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
    if norm <= kappa || norm == 0.0 {
        return [0.0; 4];
    }
    let f = 1.0 - kappa / norm;
    [f * v[0], f * v[1], f * v[2], f * v[3]]
}

/// Group norms of a vec4-laid-out vector.
pub(crate) fn group_norms(v: &DVector<f64>) -> Vec<f64> {
    v.as_slice().chunks_exact(4).map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt()).collect()
}

pub(crate) fn group_l1(v: &DVector<f64>) -> f64 {
    group_norms(v).iter().sum()
}

/// Feasible set for `u = Av`.
#[derive(Clone, Debug)]
pub(crate) struct Target {
    pub y: DVector<f64>,
    pub eta: f64,
}

impl Target {
    pub fn project(&self, v: &DVector<f64>, out: &mut DVector<f64>) {
        if self.eta == 0.0 {
            out.copy_from(&self.y);
            return;
        }
        let dist = (v - &self.y).norm();
        if dist <= self.eta {
            out.copy_from(v);
        } else {
            let f = self.eta / dist;
            out.copy_from(&self.y);
            out.axpy(f, v, 1.0 - f);
        }
    }
}

/// Residual norms and the thresholds they are compared against,
/// `tol_abs·√dim + tol_rel·scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub eps_primal: f64,
    pub eps_dual: f64,
    /// Norm of the scaled dual variable, `‖(y_v, y_u)‖ / ρ`.
    pub dual_scale: f64,
}

impl Residuals {
    pub fn converged(&self) -> bool {
        self.primal <= self.eps_primal && self.dual <= self.eps_dual
    }
}

/// Full iterate. Duals are stored unscaled, so changing `ρ` leaves them intact.
#[derive(Clone, Debug)]
pub struct AdmmState {
    pub v: DVector<f64>,
    pub u: DVector<f64>,
    pub z: DVector<f64>,
    pub w: DVector<f64>,
    pub z_prev: DVector<f64>,
    pub w_prev: DVector<f64>,
    /// Multiplier of `v = z`.
    pub dual_v: DVector<f64>,
    /// Multiplier of `u = w`.
    pub dual_u: DVector<f64>,
    pub rho: f64,
}

impl AdmmState {
    /// Cold start: everything zero except `w = Π_C(0)`.
    pub(crate) fn cold(n4: usize, m4: usize, rho: f64, target: &Target) -> Self {
        let mut w = DVector::zeros(m4);
        target.project(&DVector::zeros(m4), &mut w);
        AdmmState {
            v: DVector::zeros(n4),
            u: DVector::zeros(m4),
            z: DVector::zeros(n4),
            w: w.clone(),
            z_prev: DVector::zeros(n4),
            w_prev: w,
            dual_v: DVector::zeros(n4),
            dual_u: DVector::zeros(m4),
            rho,
        }
    }

    /// Lagrange multiplier of `Av ∈ C`; at a fixed point `Aᵀλ = dual_v ∈ ∂‖z‖`.
    pub fn multiplier(&self) -> DVector<f64> {
        -&self.dual_u
    }
}

/// Standard ADMM residuals of a state:
/// primal `‖(v − z, u − w)‖`, dual `ρ‖(z − z_prev, w − w_prev)‖`.
pub fn residuals(state: &AdmmState, tol_abs: f64, tol_rel: f64) -> Residuals {
    let sq = |a: &DVector<f64>| a.norm_squared();
    let primal = (sq(&(&state.v - &state.z)) + sq(&(&state.u - &state.w))).sqrt();
    let dual = state.rho * (sq(&(&state.z - &state.z_prev)) + sq(&(&state.w - &state.w_prev))).sqrt();
    let dim = (state.v.len() + state.u.len()) as f64;
    let scale_primal = (sq(&state.v) + sq(&state.u)).sqrt().max((sq(&state.z) + sq(&state.w)).sqrt());
    let dual_norm = (sq(&state.dual_v) + sq(&state.dual_u)).sqrt();
    let dual_scale = dual_norm / state.rho;
    Residuals {
        primal,
        dual,
        eps_primal: tol_abs * dim.sqrt() + tol_rel * scale_primal,
        eps_dual: tol_abs * dim.sqrt() + tol_rel * state.rho * dual_scale,
        dual_scale,
    }
}

/// Prefactored projection onto `{(v, Av)}`.
pub(crate) struct GraphProjector<'a> {
    a: &'a DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    r: DVector<f64>,
    t: DVector<f64>,
}

impl<'a> GraphProjector<'a> {
    pub fn new(a: &'a DMatrix<f64>) -> Result<Self> {
        let m4 = a.nrows();
        let mut k = a * a.transpose();
        for i in 0..m4 {
            k[(i, i)] += 1.0;
        }
        let chol = Cholesky::new(k)
            .ok_or_else(|| Error::FactorizationFailure("I + AAᵀ is not positive definite (non-finite data?)".into()))?;
        Ok(GraphProjector { a, chol, r: DVector::zeros(a.ncols()), t: DVector::zeros(m4) })
    }

    /// `(v, u) = argmin ‖v − c‖² + ‖u − d‖²` over `u = Av`.
    ///
    /// `v = (I + AᵀA)⁻¹(c + Aᵀd)` by Woodbury, and `u = Av` collapses to the
    /// solution of `(I + AAᵀ)u = A(c + Aᵀd)`.
    pub fn project(&mut self, c: &DVector<f64>, d: &DVector<f64>, v: &mut DVector<f64>, u: &mut DVector<f64>) {
        self.r.copy_from(c);
        self.r.gemv_tr(1.0, self.a, d, 1.0);
        self.t.gemv(1.0, self.a, &self.r, 0.0);
        self.chol.solve_mut(&mut self.t);
        u.copy_from(&self.t);
        v.copy_from(&self.r);
        v.gemv_tr(-1.0, self.a, &self.t, 1.0);
    }
}

/// One ADMM sweep in place.
pub(crate) fn step(state: &mut AdmmState, proj: &mut GraphProjector<'_>, target: &Target, c: &mut DVector<f64>, d: &mut DVector<f64>) {
    let inv_rho = 1.0 / state.rho;
    // c = z − y_v/ρ, d = w − y_u/ρ
    c.copy_from(&state.z);
    c.axpy(-inv_rho, &state.dual_v, 1.0);
    d.copy_from(&state.w);
    d.axpy(-inv_rho, &state.dual_u, 1.0);
    proj.project(c, d, &mut state.v, &mut state.u);

    std::mem::swap(&mut state.z, &mut state.z_prev);
    std::mem::swap(&mut state.w, &mut state.w_prev);

    // z = prox of the group norm at v + y_v/ρ
    {
        let v = state.v.as_slice();
        let yv = state.dual_v.as_slice();
        let z = state.z.as_mut_slice();
        for ((zg, vg), yg) in z.chunks_exact_mut(4).zip(v.chunks_exact(4)).zip(yv.chunks_exact(4)) {
            let arg = [
                vg[0] + inv_rho * yg[0],
                vg[1] + inv_rho * yg[1],
                vg[2] + inv_rho * yg[2],
                vg[3] + inv_rho * yg[3],
            ];
            zg.copy_from_slice(&block_soft_threshold(arg, inv_rho));
        }
    }
    // w = Π_C(u + y_u/ρ)
    d.copy_from(&state.u);
    d.axpy(inv_rho, &state.dual_u, 1.0);
    target.project(d, &mut state.w);

    state.dual_v.axpy(state.rho, &state.v, 1.0);
    state.dual_v.axpy(-state.rho, &state.z, 1.0);
    state.dual_u.axpy(state.rho, &state.u, 1.0);
    state.dual_u.axpy(-state.rho, &state.w, 1.0);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_closed_forms() {
        assert_eq!(block_soft_threshold([3.0, 0.0, 0.0, 0.0], 1.0), [2.0, 0.0, 0.0, 0.0]);
        assert_eq!(block_soft_threshold([0.5, 0.5, 0.5, 0.5], 1.0), [0.0; 4]);
        assert_eq!(block_soft_threshold([0.3, -0.1, 0.2, 0.0], 5.0), [0.0; 4]);
        assert_eq!(block_soft_threshold([0.3, -0.1, 0.2, 0.7], 0.0), [0.3, -0.1, 0.2, 0.7]);
        assert_eq!(block_soft_threshold([0.0; 4], 0.0), [0.0; 4]);
        // ‖(3,4,0,0)‖ = 5, shrink by 1 → factor 4/5
        let v = block_soft_threshold([3.0, 4.0, 0.0, 0.0], 1.0);
        assert!((v[0] - 2.4).abs() < 1e-15 && (v[1] - 3.2).abs() < 1e-15);
    }

    #[test]
    fn ball_projection() {
        let t = Target { y: DVector::from_vec(vec![1.0, 0.0]), eta: 0.5 };
        let mut out = DVector::zeros(2);
        t.project(&DVector::from_vec(vec![3.0, 0.0]), &mut out);
        assert!((out[0] - 1.5).abs() < 1e-15 && out[1] == 0.0);
        t.project(&DVector::from_vec(vec![1.2, 0.1]), &mut out);
        assert_eq!(out.as_slice(), &[1.2, 0.1]);
        let exact = Target { y: DVector::from_vec(vec![1.0, 2.0]), eta: 0.0 };
        exact.project(&DVector::from_vec(vec![9.0, 9.0]), &mut out);
        assert_eq!(out.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn graph_projection_lands_on_graph_and_is_orthogonal() {
        let a = DMatrix::from_fn(3, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let mut proj = GraphProjector::new(&a).unwrap();
        let c = DVector::from_fn(5, |i, _| i as f64 * 0.3 - 0.4);
        let d = DVector::from_fn(3, |i, _| 1.0 - i as f64);
        let (mut v, mut u) = (DVector::zeros(5), DVector::zeros(3));
        proj.project(&c, &d, &mut v, &mut u);
        assert!((&a * &v - &u).norm() < 1e-12);
        // (c − v, d − u) must be orthogonal to every (x, Ax)
        let dc = &c - &v;
        let dd = &d - &u;
        let normal = &dc + a.transpose() * &dd;
        assert!(normal.norm() < 1e-12);
    }

    #[test]
    fn residuals_at_cold_start() {
        let y = DVector::from_vec(vec![3.0, 4.0, 0.0, 0.0]);
        let target = Target { y: y.clone(), eta: 0.0 };
        let state = AdmmState::cold(8, 4, 1.0, &target);
        let r = residuals(&state, 1e-10, 1e-10);
        assert!((r.primal - 5.0).abs() < 1e-15);
    }

    #[test]
    fn dual_scale_halves_when_rho_doubles() {
        let target = Target { y: DVector::from_vec(vec![1.0; 4]), eta: 0.0 };
        let mut state = AdmmState::cold(4, 4, 1.0, &target);
        state.dual_v = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.0]);
        state.dual_u = DVector::from_vec(vec![1.0, 1.0, -1.0, 0.25]);
        let r1 = residuals(&state, 1e-10, 1e-10);
        state.rho *= 2.0;
        let r2 = residuals(&state, 1e-10, 1e-10);
        assert!((r2.dual_scale - 0.5 * r1.dual_scale).abs() < 1e-15);
    }
}
