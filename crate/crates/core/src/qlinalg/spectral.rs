//! Spectra of quaternion Hermitian matrices.
//!
//! A Hermitian `Ψ ∈ H^{n×n}` has `n` real right eigenvalues. They are read off
//! the `2n×2n` complex adjoint `χ(Ψ)`, which is complex Hermitian and carries
//! every eigenvalue twice.

use nalgebra::SymmetricEigen;

use super::matrix::{complex_adjoint, from_complex_column, QMatrix};
use super::vector::QVector;
use crate::error::{Error, Result};

/// Entrywise tolerance on `Ψ − Ψ*` before a matrix is accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Paired eigenvalues of `χ(Ψ)` must agree to this (relative to the spectrum scale).
const PAIR_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending real eigenvalues, one per pair.
    pub values: Vec<f64>,
    /// Unit right eigenvectors: `Ψ·vectors[i] = vectors[i]·values[i]`.
    pub vectors: Vec<QVector>,
}

pub fn hermitian_eigen(psi: &QMatrix) -> Result<HermitianEigen> {
    let (n, cols) = psi.shape();
    if n != cols {
        return Err(Error::DimensionMismatch(format!("eigenvalues of a {n}x{cols} matrix")));
    }
    let deviation = psi.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    if n == 0 {
        return Ok(HermitianEigen { values: Vec::new(), vectors: Vec::new() });
    }
    // Symmetrize so the tolerated deviation cannot split the pairs.
    let sym = QMatrix::from_fn(n, n, |i, j| (psi.get(i, j) + psi.get(j, i).conj()).scale(0.5));
    let chi = complex_adjoint(&sym);
    let eig = SymmetricEigen::new(chi);

    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for pair in order.chunks_exact(2) {
        let (lo, hi) = (eig.eigenvalues[pair[0]], eig.eigenvalues[pair[1]]);
        if (hi - lo).abs() > PAIR_TOL * scale {
            return Err(Error::FactorizationFailure(format!(
                "complex adjoint eigenvalues {lo} and {hi} do not pair up"
            )));
        }
        values.push(lo);
        let col: Vec<_> = eig.eigenvectors.column(pair[0]).iter().copied().collect();
        let mut v = from_complex_column(&col)?;
        let norm = v.norm2();
        if norm > 0.0 {
            v = v.scale(1.0 / norm);
        }
        vectors.push(v);
    }
    Ok(HermitianEigen { values, vectors })
}

/// The `n` real right eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(psi: &QMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(psi).map(|e| e.values)
}

/// `‖Ψ‖₂→₂ = maxᵢ |λᵢ|`.
pub fn hermitian_opnorm(psi: &QMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(psi)?.into_iter().fold(0.0, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion as Q;

    #[test]
    fn scaled_identity() {
        let psi = QMatrix::identity(2).scale(2.0);
        let ev = hermitian_eigenvalues(&psi).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn off_diagonal_i() {
        // [[0, i], [−i, 0]]: χ has characteristic polynomial (λ²−1)², eigenvalues ±1
        let psi = QMatrix::from_row_major(2, 2, vec![Q::ZERO, Q::I, -Q::I, Q::ZERO]).unwrap();
        let ev = hermitian_eigenvalues(&psi).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-12);
        assert!((ev[1] - 1.0).abs() < 1e-12);
        assert!((hermitian_opnorm(&psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(hermitian_opnorm(&QMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let psi = QMatrix::from_row_major(2, 2, vec![Q::ZERO, Q::I, Q::I, Q::ZERO]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&psi), Err(Error::NotHermitian { .. })));
        let diag = QMatrix::from_row_major(1, 1, vec![Q::J]).unwrap();
        assert!(matches!(hermitian_opnorm(&diag), Err(Error::NotHermitian { .. })));
        assert!(hermitian_eigenvalues(&QMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn eigenvectors_are_right_eigenvectors() {
        let psi = QMatrix::from_row_major(
            2,
            2,
            vec![Q::real(1.0), Q::new(0.3, 0.2, -0.7, 0.1), Q::new(0.3, -0.2, 0.7, -0.1), Q::real(-0.5)],
        )
        .unwrap();
        let eig = hermitian_eigen(&psi).unwrap();
        for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
            let lhs = psi.matvec(v).unwrap();
            let rhs = v.mul_right(Q::real(*lambda));
            assert!(lhs.approx_eq(&rhs, 1e-12));
            assert!((v.norm2() - 1.0).abs() < 1e-12);
        }
    }
}
