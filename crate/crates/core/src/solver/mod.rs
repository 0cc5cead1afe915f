//! Quaternion basis pursuit.
//!
//! Solves `min ‖z‖₁ s.t. Φz = y` (`η = 0`) or `min ‖z‖₁ s.t. ‖Φz − y‖₂ ≤ η`
//! on the compact real embedding, where the quaternion `ℓ1` norm becomes a
//! sum of group norms over coordinate quadruples.
//!
//! The ADMM iterate only identifies the answer approximately. Every few
//! iterations the active groups are polished by least squares; if a dual
//! certificate closes the duality gap the polished point is returned at once.
//! Otherwise ADMM runs to its residual tolerances and a final polish is kept
//! only if it is feasible and does not increase the objective.

mod admm;
mod polish;

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use admm::{block_soft_threshold, residuals, AdmmState, Residuals};

use crate::embedding::{build_embedding, unvec4};
use crate::error::{Error, Result};
use crate::qlinalg::{QMatrix, QVector};
use admm::{group_l1, step, GraphProjector, Target};
use polish::{active_groups, dual_lower_bound, least_squares_on_support, Polished};

/// Regularization added to `AAᵀ` when it is rank deficient.
const GRAM_REGULARIZATION: f64 = 1e-12;
/// A polished point may exceed `η` by this much relative to `max(1, ‖y‖)`.
const FEASIBILITY_SLACK: f64 = 1e-12;
/// Allowed objective increase when accepting an uncertified polish.
const POLISH_OBJECTIVE_SLACK: f64 = 1e-9;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
/// Iterations between residual-balancing checks.
const RHO_ADAPT_INTERVAL: usize = 50;
/// After this many changes `ρ` stays fixed, which restores the convergence guarantee of plain ADMM.
const RHO_MAX_CHANGES: usize = 20;

/// One instance of the `ℓ1` problem: data `y = Φx + e` with `‖e‖₂ ≤ η`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryProblem {
    pub phi: QMatrix,
    pub y: QVector,
    #[serde(default)]
    pub eta: f64,
}

impl RecoveryProblem {
    pub fn new(phi: QMatrix, y: QVector, eta: f64) -> Result<Self> {
        let p = RecoveryProblem { phi, y, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidInput(format!("noise bound must be finite and non-negative, got {}", self.eta)));
        }
        if self.y.len() != self.phi.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix with measurement vector of length {}",
                self.phi.rows(),
                self.phi.cols(),
                self.y.len()
            )));
        }
        if !self.phi.is_finite() || !self.y.is_finite() {
            return Err(Error::InvalidInput("problem data contains non-finite values".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub rho: f64,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    /// Residual balancing: every 50 iterations scale `ρ` by 2 when one residual exceeds the other tenfold (at most 20 changes).
    pub adaptive_rho: bool,
    pub polish: bool,
    /// Groups below this fraction of the largest group norm are dropped when polishing.
    pub polish_threshold: f64,
    /// Iterations between support checks for a certified early exit.
    pub polish_every: usize,
    /// Record per-iteration diagnostics in [`SolveResult::trace`].
    pub trace: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            rho: 1.0,
            max_iters: 50_000,
            tol_primal: 1e-10,
            tol_dual: 1e-10,
            adaptive_rho: true,
            polish: true,
            polish_threshold: 1e-5,
            polish_every: 10,
            trace: false,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("solver parameter {name} must be positive, got {v}")))
            }
        };
        positive("rho", self.rho)?;
        positive("tol_primal", self.tol_primal)?;
        positive("tol_dual", self.tol_dual)?;
        positive("polish_threshold", self.polish_threshold)?;
        if self.max_iters == 0 || self.polish_every == 0 {
            return Err(Error::InvalidConfig("max_iters and polish_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub objective: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveResult {
    /// The minimizer `x#`.
    pub x_hat: QVector,
    pub iterations: usize,
    /// ADMM primal residual; for a certified point, the constraint violation `max(0, ‖Φx − y‖ − η)`.
    pub primal_residual: f64,
    /// ADMM dual residual; for a certified point, the duality gap.
    pub dual_residual: f64,
    /// `‖x#‖₁`.
    pub objective: f64,
    pub polished: bool,
    pub status: SolveStatus,
    /// Duality gap proven for `x_hat`, when a certificate was found.
    pub certificate_gap: Option<f64>,
    pub rho_final: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

impl SolveResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,primal,dual,objective,rho\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{:e},{:e},{:e},{:e}", r.iteration, r.primal, r.dual, r.objective, r.rho);
        }
        out
    }
}

struct Certified {
    polished: Polished,
    gap: f64,
}

pub fn solve(problem: &RecoveryProblem, params: &SolverParams) -> Result<SolveResult> {
    problem.validate()?;
    params.validate()?;
    let emb = build_embedding(&problem.phi, &problem.y)?;
    let a = &emb.a_compact;
    let y = &emb.y_vec4;
    let eta = problem.eta;
    let (m4, n4) = a.shape();
    let y_norm = y.norm();
    let feas_tol = FEASIBILITY_SLACK * y_norm.max(1.0);

    if y_norm <= eta {
        // zero is feasible and has the least possible norm
        return Ok(SolveResult {
            x_hat: QVector::zeros(emb.n),
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            objective: 0.0,
            polished: false,
            status: SolveStatus::Converged,
            certificate_gap: Some(0.0),
            rho_final: params.rho,
            trace: Vec::new(),
        });
    }

    let gram_chol = factor_gram(a)?;
    if let Some(result) = infeasibility_check(a, y, &gram_chol, eta, feas_tol, emb.n, params.rho)? {
        return Ok(result);
    }

    let target = Target { y: y.clone(), eta };
    let mut proj = GraphProjector::new(a)?;
    let mut state = AdmmState::cold(n4, m4, params.rho, &target);
    let (mut c, mut d) = (DVector::zeros(n4), DVector::zeros(m4));
    let mut trace = Vec::new();
    let mut last_support: Option<Vec<usize>> = None;
    let mut rho_changes = 0;
    let mut status = SolveStatus::MaxIters;
    let mut iterations = params.max_iters;
    let mut res = residuals(&state, params.tol_primal, params.tol_dual);

    for it in 1..=params.max_iters {
        step(&mut state, &mut proj, &target, &mut c, &mut d);
        res = residuals(&state, params.tol_primal, params.tol_dual);
        if params.trace {
            trace.push(TraceRow { iteration: it, primal: res.primal, dual: res.dual, objective: group_l1(&state.z), rho: state.rho });
        }
        if res.converged() {
            status = SolveStatus::Converged;
            iterations = it;
            break;
        }
        if params.polish && it % params.polish_every == 0 {
            let support = active_groups(&state.z, params.polish_threshold);
            if last_support.as_ref() == Some(&support) {
                if let Some(cert) = try_certify(a, y, eta, feas_tol, &support, &state, params.tol_dual) {
                    return Ok(certified_result(emb.n, cert, it, state.rho, eta, trace));
                }
            }
            last_support = Some(support);
        }
        if params.adaptive_rho && it % RHO_ADAPT_INTERVAL == 0 && rho_changes < RHO_MAX_CHANGES {
            let new_rho = if res.primal > 10.0 * res.dual {
                state.rho * 2.0
            } else if res.dual > 10.0 * res.primal {
                state.rho / 2.0
            } else {
                state.rho
            }
            .clamp(RHO_MIN, RHO_MAX);
            if new_rho != state.rho {
                state.rho = new_rho;
                rho_changes += 1;
            }
        }
    }

    let mut x = state.z.clone();
    let mut polished = false;
    let mut certificate_gap = None;
    if params.polish {
        // The iterate is only feasible up to the residual tolerance, which can
        // lower its norm below the optimum; compare against its projection.
        let reference = group_l1(&project_feasible(a, y, &gram_chol, eta, &state.z));
        let support = active_groups(&state.z, params.polish_threshold);
        if let Some(p) = least_squares_on_support(a, y, &support) {
            if p.residual <= eta + feas_tol && p.objective <= reference + POLISH_OBJECTIVE_SLACK {
                certificate_gap = dual_lower_bound(a, y, eta, &p, &state.multiplier())
                    .map(|(lb, _)| (p.objective - lb).max(0.0));
                x = p.x;
                polished = true;
            }
        }
    }
    let x_hat = unvec4(x.as_slice())?;
    let objective = x_hat.norm1();
    Ok(SolveResult {
        x_hat,
        iterations,
        primal_residual: res.primal,
        dual_residual: res.dual,
        objective,
        polished,
        status,
        certificate_gap,
        rho_final: state.rho,
        trace,
    })
}

/// Cholesky factor of `AAᵀ`, regularized when `A` has dependent rows.
fn factor_gram(a: &DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let gram = a * a.transpose();
    if let Some(c) = Cholesky::new(gram.clone()) {
        return Ok(c);
    }
    log::warn!("AAᵀ is rank deficient; regularizing with {GRAM_REGULARIZATION:e}·I");
    let mut reg = gram;
    for i in 0..reg.nrows() {
        reg[(i, i)] += GRAM_REGULARIZATION;
    }
    Cholesky::new(reg).ok_or_else(|| Error::FactorizationFailure("AAᵀ + 1e-12·I is not positive definite".into()))
}

/// Least-norm correction of `z` onto `{z : ‖Az − ỹ‖ ≤ η}`.
fn project_feasible(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    chol: &Cholesky<f64, nalgebra::Dyn>,
    eta: f64,
    z: &DVector<f64>,
) -> DVector<f64> {
    let r = a * z - y;
    let rn = r.norm();
    if rn <= eta {
        return z.clone();
    }
    // aim at the nearest point of the ball around ỹ
    let excess = &r * (1.0 - eta / rn);
    z - a.tr_mul(&chol.solve(&excess))
}

/// Detects `min ‖Az − ỹ‖ > η`, in which case no point is feasible.
fn infeasibility_check(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    chol: &Cholesky<f64, nalgebra::Dyn>,
    eta: f64,
    feas_tol: f64,
    n: usize,
    rho: f64,
) -> Result<Option<SolveResult>> {
    let w = chol.solve(y);
    let z = a.tr_mul(&w);
    let best = (a * &z - y).norm();
    if best.is_finite() && best <= eta + feas_tol.max(1e-9 * y.norm()) {
        return Ok(None);
    }
    let x_hat = unvec4(z.as_slice())?;
    let objective = x_hat.norm1();
    debug_assert_eq!(x_hat.len(), n);
    Ok(Some(SolveResult {
        x_hat,
        iterations: 0,
        primal_residual: best - eta,
        dual_residual: 0.0,
        objective,
        polished: false,
        status: SolveStatus::Infeasible,
        certificate_gap: None,
        rho_final: rho,
        trace: Vec::new(),
    }))
}

fn try_certify(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    eta: f64,
    feas_tol: f64,
    support: &[usize],
    state: &AdmmState,
    gap_tol: f64,
) -> Option<Certified> {
    let p = least_squares_on_support(a, y, support)?;
    if p.residual > eta + feas_tol {
        return None;
    }
    let (lb, _) = dual_lower_bound(a, y, eta, &p, &state.multiplier())?;
    let gap = (p.objective - lb).max(0.0);
    (gap <= gap_tol * p.objective.max(1.0)).then_some(Certified { polished: p, gap })
}

fn certified_result(n: usize, cert: Certified, iterations: usize, rho: f64, eta: f64, trace: Vec<TraceRow>) -> SolveResult {
    let x_hat = unvec4(cert.polished.x.as_slice()).expect("vec4 length is a multiple of 4");
    debug_assert_eq!(x_hat.len(), n);
    SolveResult {
        objective: x_hat.norm1(),
        x_hat,
        iterations,
        primal_residual: (cert.polished.residual - eta).max(0.0),
        dual_residual: cert.gap,
        polished: true,
        status: SolveStatus::Converged,
        certificate_gap: Some(cert.gap),
        rho_final: rho,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion as Q;
    use crate::random::{sample_gaussian_matrix, sample_sparse_signal, RngStream};

    fn solve_default(phi: QMatrix, y: QVector, eta: f64) -> SolveResult {
        solve(&RecoveryProblem::new(phi, y, eta).unwrap(), &SolverParams::default()).unwrap()
    }

    #[test]
    fn identity_returns_measurements() {
        let y = QVector::from_vec(vec![Q::new(1.0, -2.0, 0.5, 0.0), Q::ZERO, Q::K]);
        let r = solve_default(QMatrix::identity(3), y.clone(), 0.0);
        assert_eq!(r.status, SolveStatus::Converged);
        assert!(r.x_hat.approx_eq(&y, 1e-9), "{:?}", r.x_hat);
    }

    #[test]
    fn zero_data_gives_zero() {
        let mut rng = RngStream::new(1, 0);
        let phi = sample_gaussian_matrix(&mut rng, 3, 6, 1.0 / 3.0).unwrap();
        let r = solve_default(phi, QVector::zeros(3), 0.0);
        assert_eq!(r.x_hat, QVector::zeros(6));
        assert_eq!(r.status, SolveStatus::Converged);
    }

    #[test]
    fn recovers_one_sparse() {
        let mut rng = RngStream::new(7, 0);
        let phi = sample_gaussian_matrix(&mut rng, 6, 8, 1.0 / 6.0).unwrap();
        let (x, _) = sample_sparse_signal(&mut rng, 8, 1).unwrap();
        let y = phi.matvec(&x).unwrap();
        let r = solve_default(phi, y, 0.0);
        assert!((&r.x_hat - &x).norm2() <= 1e-7, "err {}", (&r.x_hat - &x).norm2());
        assert!(r.polished);
        assert!(r.certificate_gap.is_some());
    }

    #[test]
    fn noisy_solution_is_feasible() {
        let mut rng = RngStream::new(3, 0);
        let phi = sample_gaussian_matrix(&mut rng, 10, 12, 0.1).unwrap();
        let (x, _) = sample_sparse_signal(&mut rng, 12, 2).unwrap();
        let y = phi.matvec(&x).unwrap();
        let eta = 0.05;
        let r = solve_default(phi.clone(), y.clone(), eta);
        let misfit = (&phi.matvec(&r.x_hat).unwrap() - &y).norm2();
        assert!(misfit <= eta + 1e-8, "misfit {misfit}");
        assert!(r.objective <= x.norm1() + 1e-8);
    }

    #[test]
    fn infeasible_when_overdetermined() {
        // 3 equations, 1 unknown, inconsistent data
        let phi = QMatrix::from_real(3, 1, &[1.0, 1.0, 1.0]).unwrap();
        let y = QVector::from_real(&[1.0, 2.0, 3.0]);
        let r = solve_default(phi, y, 0.0);
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn param_validation() {
        let bad = SolverParams { rho: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverParams { max_iters: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(RecoveryProblem::new(QMatrix::zeros(2, 2), QVector::zeros(2), -1.0).is_err());
        assert!(RecoveryProblem::new(QMatrix::zeros(2, 2), QVector::zeros(3), 0.0).is_err());
    }

    #[test]
    fn trace_is_recorded() {
        let mut rng = RngStream::new(5, 0);
        let phi = sample_gaussian_matrix(&mut rng, 4, 8, 0.25).unwrap();
        let (x, _) = sample_sparse_signal(&mut rng, 8, 1).unwrap();
        let y = phi.matvec(&x).unwrap();
        let params = SolverParams { trace: true, ..Default::default() };
        let r = solve(&RecoveryProblem::new(phi, y, 0.0).unwrap(), &params).unwrap();
        assert_eq!(r.trace.len(), r.iterations);
        assert!(r.trace_csv().starts_with("iteration,primal,dual,objective,rho\n1,"));
    }
}
