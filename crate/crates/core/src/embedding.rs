//! Real-valued formulations of the quaternion `ℓ1` problem.
//!
//! Two layouts are used:
//!
//! * **vec4** (coordinate-major): `(x₁ᵣ, x₁ᵢ, x₁ⱼ, x₁ₖ, x₂ᵣ, ...)`. The compact
//!   `4m×4n` operator maps vec4 to vec4, `A·vec4(z) = vec4(Φz)`; entry block
//!   `(i, k)` is the left-multiplication matrix of `φᵢₖ`.
//! * **SOCP** (standard conic form): variables `(t₁, z₁ᵣ, z₁ᵢ, z₁ⱼ, z₁ₖ, ..., tₙ, ...)`,
//!   objective `c = (1,0,0,0,0, ..., 1,0,0,0,0)`, equality rows stacked
//!   component-major as `ỹ = (y_r, y_i, y_j, y_k)`, and one second-order cone
//!   `‖(z_kᵣ, z_kᵢ, z_kⱼ, z_kₖ)‖₂ ≤ t_k` per coordinate.
//!
//! Dropping the zero `t` columns of the SOCP matrix and permuting its rows
//! from component-major to coordinate-major yields the compact operator.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{QMatrix, QVector, SCHEMA_VERSION};
use crate::quaternion::Quaternion;

/// Real matrix of `z ↦ φ·z` acting on `(z_r, z_i, z_j, z_k)`.
pub fn left_mul_block(phi: Quaternion) -> [[f64; 4]; 4] {
    let Quaternion { a: r, b: i, c: j, d: k } = phi;
    [[r, -i, -j, -k], [i, r, -k, j], [j, k, r, -i], [k, -j, i, r]]
}

pub fn vec4(x: &QVector) -> DVector<f64> {
    DVector::from_iterator(4 * x.len(), x.iter().flat_map(|q| q.to_array()))
}

pub fn unvec4(v: &[f64]) -> Result<QVector> {
    if v.len() % 4 != 0 {
        return Err(Error::BadLength { len: v.len(), group: 4 });
    }
    Ok(v.chunks_exact(4).map(|c| Quaternion::new(c[0], c[1], c[2], c[3])).collect())
}

/// Component-major stacking `(x_r, x_i, x_j, x_k)`.
pub fn stack_components(x: &QVector) -> DVector<f64> {
    let n = x.len();
    let mut out = DVector::zeros(4 * n);
    for (i, q) in x.iter().enumerate() {
        for (c, v) in q.to_array().into_iter().enumerate() {
            out[c * n + i] = v;
        }
    }
    out
}

/// Reassembles `x#` from a real solution in either the 5-slot SOCP layout
/// (`t` slots skipped) or the 4-slot vec4 layout, for a signal of length `n`.
pub fn extract_solution(x_tilde: &[f64], n: usize) -> Result<QVector> {
    if x_tilde.len() == 5 * n {
        Ok(x_tilde.chunks_exact(5).map(|c| Quaternion::new(c[1], c[2], c[3], c[4])).collect())
    } else if x_tilde.len() == 4 * n {
        unvec4(x_tilde)
    } else {
        Err(Error::BadLength { len: x_tilde.len(), group: if n == 0 { 4 } else { n } })
    }
}

/// Real data for one recovery instance.
#[derive(Clone, Debug)]
pub struct RealEmbedding {
    pub m: usize,
    pub n: usize,
    /// `4m×4n`, vec4 → vec4.
    pub a_compact: DMatrix<f64>,
    /// `vec4(y)`.
    pub y_vec4: DVector<f64>,
    /// `ỹ`, component-major.
    pub y_tilde: DVector<f64>,
}

pub fn build_embedding(phi: &QMatrix, y: &QVector) -> Result<RealEmbedding> {
    let (m, n) = phi.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!("{m}x{n} matrix with measurement vector of length {}", y.len())));
    }
    Ok(RealEmbedding {
        m,
        n,
        a_compact: compact_operator(phi),
        y_vec4: vec4(y),
        y_tilde: stack_components(y),
    })
}

pub fn compact_operator(phi: &QMatrix) -> DMatrix<f64> {
    let (m, n) = phi.shape();
    let mut a = DMatrix::zeros(4 * m, 4 * n);
    for i in 0..m {
        for k in 0..n {
            let blk = left_mul_block(phi.get(i, k));
            for (r, row) in blk.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    a[(4 * i + r, 4 * k + c)] = v;
                }
            }
        }
    }
    a
}

impl RealEmbedding {
    /// `Φ̃ ∈ R^{4m×5n}`: component-major rows, `(t_k, z_kᵣ, z_kᵢ, z_kⱼ, z_kₖ)` columns.
    pub fn socp_matrix(&self) -> DMatrix<f64> {
        let (m, n) = (self.m, self.n);
        let mut a = DMatrix::zeros(4 * m, 5 * n);
        for i in 0..m {
            for r in 0..4 {
                for k in 0..n {
                    for c in 0..4 {
                        a[(r * m + i, 5 * k + 1 + c)] = self.a_compact[(4 * i + r, 4 * k + c)];
                    }
                }
            }
        }
        a
    }

    pub fn cost_vector(&self) -> DVector<f64> {
        DVector::from_fn(5 * self.n, |i, _| if i % 5 == 0 { 1.0 } else { 0.0 })
    }

    pub fn socp_data(&self) -> SocpData {
        let a = self.socp_matrix();
        SocpData {
            schema_version: SCHEMA_VERSION,
            m: self.m,
            n: self.n,
            rows: a.nrows(),
            cols: a.ncols(),
            a: (0..a.nrows()).flat_map(|i| a.row(i).iter().copied().collect::<Vec<_>>()).collect(),
            b: self.y_tilde.iter().copied().collect(),
            c: self.cost_vector().iter().copied().collect(),
            cones: (0..self.n).map(|k| SecondOrderCone { head: 5 * k, tail: (5 * k + 1..5 * k + 5).collect() }).collect(),
        }
    }
}

/// Standard-form SOCP `min cᵀz s.t. A z = b, ‖z[tail]‖₂ ≤ z[head]` for external solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SocpData {
    pub schema_version: u32,
    pub m: usize,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cones: Vec<SecondOrderCone>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderCone {
    pub head: usize,
    pub tail: Vec<usize>,
}

impl SocpData {
    /// Writes `A.csv` (dense, no header), `b.csv`, `c.csv` (one value per line)
    /// and `cones.csv` (`head,tail0,tail1,tail2,tail3`) into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut a = String::new();
        for row in self.a.chunks(self.cols.max(1)) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(a, "{}", cells.join(","));
        }
        std::fs::write(dir.join("A.csv"), a)?;
        let column = |v: &[f64]| v.iter().map(|x| format!("{x:e}\n")).collect::<String>();
        std::fs::write(dir.join("b.csv"), column(&self.b))?;
        std::fs::write(dir.join("c.csv"), column(&self.c))?;
        let mut cones = String::from("head,tail0,tail1,tail2,tail3\n");
        for cone in &self.cones {
            let tail: Vec<String> = cone.tail.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(cones, "{},{}", cone.head, tail.join(","));
        }
        std::fs::write(dir.join("cones.csv"), cones)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion as Q;

    fn block_of(phi: Q) -> DMatrix<f64> {
        let a = QMatrix::from_row_major(1, 1, vec![phi]).unwrap();
        compact_operator(&a)
    }

    #[test]
    fn block_of_i() {
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0],
        );
        assert_eq!(block_of(Q::I), expected);
    }

    #[test]
    fn block_of_one_is_identity() {
        assert_eq!(block_of(Q::ONE), DMatrix::identity(4, 4));
    }

    #[test]
    fn vec4_layout() {
        let x = QVector::from_vec(vec![Q::new(1.0, 2.0, 3.0, 4.0)]);
        assert_eq!(vec4(&x).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(unvec4(&[1.0, 2.0, 3.0]), Err(Error::BadLength { len: 3, group: 4 })));
    }

    #[test]
    fn extract_drops_t_slots() {
        let x = extract_solution(&[2.0, 1.0, 0.0, 0.0, 1.0], 1).unwrap();
        assert_eq!(x[0], Q::new(1.0, 0.0, 0.0, 1.0));
        assert_eq!(extract_solution(&[0.0; 10], 2).unwrap(), QVector::zeros(2));
        assert_eq!(extract_solution(&[0.0; 8], 2).unwrap(), QVector::zeros(2));
        assert!(extract_solution(&[0.0; 7], 2).is_err());
    }

    #[test]
    fn socp_layout() {
        let phi = QMatrix::from_fn(2, 3, |i, k| Q::new(1.0 + i as f64, k as f64, -(i as f64), 0.5));
        let y = QVector::from_vec(vec![Q::new(1.0, 2.0, 3.0, 4.0), Q::new(5.0, 6.0, 7.0, 8.0)]);
        let emb = build_embedding(&phi, &y).unwrap();
        let s = emb.socp_matrix();
        assert_eq!(s.shape(), (8, 15));
        for k in 0..3 {
            assert!(s.column(5 * k).iter().all(|&v| v == 0.0));
        }
        // first row block: φ_r, −φ_i, −φ_j, −φ_k against coordinate k
        let p = phi.get(1, 2);
        assert_eq!(s[(1, 11)], p.a);
        assert_eq!(s[(1, 12)], -p.b);
        assert_eq!(s[(1, 13)], -p.c);
        assert_eq!(s[(1, 14)], -p.d);
        assert_eq!(emb.y_tilde.as_slice(), &[1.0, 5.0, 2.0, 6.0, 3.0, 7.0, 4.0, 8.0]);
        let c = emb.cost_vector();
        assert_eq!(c.iter().sum::<f64>(), 3.0);
        assert_eq!(c[5], 1.0);
        let data = emb.socp_data();
        assert_eq!(data.cones[1], SecondOrderCone { head: 5, tail: vec![6, 7, 8, 9] });
        assert_eq!(data.a.len(), 8 * 15);
    }

    #[test]
    fn dimension_mismatch() {
        let phi = QMatrix::zeros(2, 3);
        assert!(matches!(build_embedding(&phi, &QVector::zeros(3)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn socp_csv_files() {
        let phi = QMatrix::identity(2);
        let emb = build_embedding(&phi, &QVector::zeros(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emb.socp_data().write_csv(dir.path()).unwrap();
        let a = std::fs::read_to_string(dir.path().join("A.csv")).unwrap();
        assert_eq!(a.lines().count(), 8);
        assert_eq!(a.lines().next().unwrap().split(',').count(), 10);
        let cones = std::fs::read_to_string(dir.path().join("cones.csv")).unwrap();
        assert_eq!(cones.lines().nth(2), Some("5,6,7,8,9"));
    }
}
