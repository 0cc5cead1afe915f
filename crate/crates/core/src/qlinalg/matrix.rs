use nalgebra::DMatrix;
use num_complex::Complex64;

use super::vector::{QVector, SupportSet};
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Dense `m×n` quaternion matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Quaternion::ONE);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(QMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        QMatrix::from_row_major(rows, cols, values.iter().map(|&v| Quaternion::real(v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, q: Quaternion) {
        self.data[i * self.cols + j] = q;
    }

    pub fn row(&self, i: usize) -> &[Quaternion] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> QVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `Φx` with entries `Σⱼ φᵢⱼ xⱼ` (matrix on the left).
    pub fn matvec(&self, x: &QVector) -> Result<QVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: {}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let xs = x.as_slice();
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(xs).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose `Φ*`.
    pub fn adjoint(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// `Φ_S`: the columns listed in `s`, in order.
    pub fn submatrix(&self, s: &SupportSet) -> Result<QMatrix> {
        s.check_bound(self.cols)?;
        let idx = s.indices();
        Ok(QMatrix::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j])))
    }

    /// `Φ_S* Φ_S`, computed without materializing `Φ_S`.
    pub fn gram(&self, s: &SupportSet) -> Result<QMatrix> {
        s.check_bound(self.cols)?;
        let idx = s.indices();
        let k = idx.len();
        let mut g = QMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let v: Quaternion =
                    (0..self.rows).map(|i| self.get(i, idx[a]).conj() * self.get(i, idx[b])).sum();
                g.set(a, b, v);
                if a != b {
                    g.set(b, a, v.conj());
                }
            }
        }
        Ok(g)
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.scale(s)).collect() }
    }

    pub fn try_sub(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "subtraction of {:?} and {:?} matrices",
                self.shape(),
                other.shape()
            )));
        }
        Ok(QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// Largest componentwise deviation between `Ψ` and `Ψ*`.
    pub fn hermitian_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = self.get(i, j) - self.get(j, i).conj();
                for c in d.to_array() {
                    dev = dev.max(c.abs());
                }
            }
        }
        dev
    }

    /// Frobenius-style entrywise max of `|Δ|` against another matrix.
    pub fn max_abs_diff(&self, other: &QMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).to_array().iter().fold(0.0f64, |m, c| m.max(c.abs())))
            .fold(0.0, f64::max)
    }

    /// Whether every entry has zero imaginary parts.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|q| q.b == 0.0 && q.c == 0.0 && q.d == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }
}

/// Writes `q = z₁ + z₂j` (with `z₁ = a+bi`, `z₂ = c+di`) as the complex block
/// `[[z₁, z₂], [−z̄₂, z̄₁]]`.
pub fn complex_block(q: Quaternion) -> [[Complex64; 2]; 2] {
    let z1 = Complex64::new(q.a, q.b);
    let z2 = Complex64::new(q.c, q.d);
    [[z1, z2], [-z2.conj(), z1.conj()]]
}

/// Complex adjoint representation `χ(A)` of an `m×n` quaternion matrix, a
/// `2m×2n` complex matrix assembled from [`complex_block`]s. `χ` is an
/// algebra homomorphism and `χ(A*) = χ(A)ᴴ`.
pub fn complex_adjoint(a: &QMatrix) -> DMatrix<Complex64> {
    let (m, n) = a.shape();
    let mut out = DMatrix::<Complex64>::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let blk = complex_block(a.get(i, j));
            for (r, row) in blk.iter().enumerate() {
                for (c, &z) in row.iter().enumerate() {
                    out[(2 * i + r, 2 * j + c)] = z;
                }
            }
        }
    }
    out
}

/// First column of `χ(x)`: the complex image `(z₁, −z̄₂)` of each coordinate.
pub fn complex_column(x: &QVector) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(2 * x.len());
    for &q in x.iter() {
        let blk = complex_block(q);
        v.push(blk[0][0]);
        v.push(blk[1][0]);
    }
    v
}

/// Inverse of [`complex_column`]: any `(u, w)` pair is the first column of the
/// block of `u − w̄·j`.
pub fn from_complex_column(v: &[Complex64]) -> Result<QVector> {
    if v.len() % 2 != 0 {
        return Err(Error::BadLength { len: v.len(), group: 2 });
    }
    Ok(v.chunks_exact(2)
        .map(|p| {
            let (u, w) = (p[0], p[1]);
            let z2 = -w.conj();
            Quaternion::new(u.re, u.im, z2.re, z2.im)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion as Q;

    #[test]
    fn identity_matvec() {
        let x = QVector::from_vec(vec![Q::new(1.0, 2.0, 3.0, 4.0), Q::K]);
        assert_eq!(QMatrix::identity(2).matvec(&x).unwrap(), x);
        assert!(QMatrix::identity(3).matvec(&x).is_err());
    }

    #[test]
    fn adjoint_of_scalar() {
        let a = QMatrix::from_row_major(1, 1, vec![Q::I]).unwrap();
        assert_eq!(a.adjoint().get(0, 0), -Q::I);
    }

    #[test]
    fn left_multiplication_order() {
        // [i]·(j) = ij = k, not ji
        let a = QMatrix::from_row_major(1, 1, vec![Q::I]).unwrap();
        let x = QVector::from_vec(vec![Q::J]);
        assert_eq!(a.matvec(&x).unwrap()[0], Q::K);
    }

    #[test]
    fn submatrix_columns() {
        let a = QMatrix::from_fn(2, 2, |i, j| Q::real((2 * i + j) as f64));
        assert_eq!(a.submatrix(&SupportSet::full(2)).unwrap(), a);
        let first = a.submatrix(&SupportSet::new(vec![0]).unwrap()).unwrap();
        assert_eq!(first.shape(), (2, 1));
        assert_eq!(first.column(0), a.column(0));
        assert!(a.submatrix(&SupportSet::new(vec![2]).unwrap()).is_err());
    }

    #[test]
    fn complex_adjoint_of_j() {
        let a = QMatrix::from_row_major(1, 1, vec![Q::J]).unwrap();
        let c = complex_adjoint(&a);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(c[(0, 0)], zero);
        assert_eq!(c[(0, 1)], one);
        assert_eq!(c[(1, 0)], -one);
        assert_eq!(c[(1, 1)], zero);
    }

    #[test]
    fn complex_column_round_trip() {
        let x = QVector::from_vec(vec![Q::new(1.0, -2.0, 3.0, 0.5), Q::K]);
        assert_eq!(from_complex_column(&complex_column(&x)).unwrap(), x);
    }

    #[test]
    fn gram_matches_adjoint_product() {
        let a = QMatrix::from_fn(3, 4, |i, j| Q::new(i as f64, j as f64, 1.0 - i as f64, 0.5 * j as f64));
        let s = SupportSet::new(vec![0, 2, 3]).unwrap();
        let sub = a.submatrix(&s).unwrap();
        let g = sub.adjoint().matmul(&sub).unwrap();
        assert!(a.gram(&s).unwrap().max_abs_diff(&g) < 1e-12);
        assert!(g.hermitian_deviation() < 1e-12);
    }
}
