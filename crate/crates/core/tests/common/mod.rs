//! Reference computations used to cross-check the library. None of them call
//! the spectral, embedding or solver code under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use quatcs::random::{sample_dense_signal, sample_quaternion_gaussian, sample_support};
use quatcs::{QMatrix, QVector, Quaternion, RngStream, ScalarMode, SupportSet};

pub fn random_quaternion(rng: &mut RngStream) -> Quaternion {
    Quaternion::new(rng.standard_normal(), rng.standard_normal(), rng.standard_normal(), rng.standard_normal())
}

pub fn random_vector(rng: &mut RngStream, n: usize) -> QVector {
    (0..n).map(|_| random_quaternion(rng)).collect()
}

pub fn random_matrix(rng: &mut RngStream, m: usize, n: usize) -> QMatrix {
    QMatrix::from_fn(m, n, |_, _| random_quaternion(rng))
}

pub fn random_hermitian(rng: &mut RngStream, n: usize) -> QMatrix {
    let a = random_matrix(rng, n, n);
    QMatrix::from_fn(n, n, |i, j| (a.get(i, j) + a.get(j, i).conj()) * 0.5)
}

/// `‖M‖₂→₂` of a Hermitian quaternion matrix by power iteration on `M²`,
/// carried out in quaternion arithmetic.
pub fn power_opnorm(m: &QMatrix, rng: &mut RngStream) -> f64 {
    let mut v = random_vector(rng, m.cols());
    v = v.scale(1.0 / v.norm2());
    let mut est = 0.0;
    for it in 0..1_000_000 {
        let w = m.matvec(&m.matvec(&v).unwrap()).unwrap();
        let nw = w.norm2();
        if nw == 0.0 {
            return 0.0;
        }
        v = w.scale(1.0 / nw);
        let next = m.matvec(&v).unwrap().norm2();
        if it > 20 && (next - est).abs() <= 1e-16 * next.max(1e-300) {
            return next;
        }
        est = next;
    }
    est
}

/// `Φ_S*Φ_S − I` computed entry by entry from the Hermitian form.
pub fn gram_minus_identity(phi: &QMatrix, support: &[usize]) -> QMatrix {
    let cols: Vec<QVector> = support.iter().map(|&k| phi.column(k)).collect();
    QMatrix::from_fn(support.len(), support.len(), |i, j| {
        // (Φ*Φ)_ij = Σ_r conj(φ_ri) φ_rj
        let g: Quaternion = (0..phi.rows()).map(|r| cols[i][r].conj() * cols[j][r]).sum();
        if i == j {
            g - Quaternion::ONE
        } else {
            g
        }
    })
}

/// `δs` by enumerating supports and applying [`power_opnorm`].
pub fn power_delta(phi: &QMatrix, s: usize, rng: &mut RngStream) -> f64 {
    let n = phi.cols();
    let mut best: f64 = 0.0;
    let mut comb: Vec<usize> = (0..s).collect();
    loop {
        best = best.max(power_opnorm(&gram_minus_identity(phi, &comb), rng));
        let mut i = s;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if comb[i] < n - s + i {
                comb[i] += 1;
                for j in i + 1..s {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Definition-side estimate `max |‖Φx‖₂² − ‖x‖₂²|` over random `s`-sparse unit vectors.
pub fn sampled_definition_delta(phi: &QMatrix, s: usize, samples: usize, rng: &mut RngStream) -> f64 {
    let (m, n) = phi.shape();
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let support = sample_support(rng, n, s).unwrap();
        let vals = sample_dense_signal(rng, s, 1.0, ScalarMode::Quaternion).unwrap();
        let norm = vals.norm2();
        let mut y = vec![Quaternion::ZERO; m];
        for (slot, &k) in support.indices().iter().enumerate() {
            let a = vals[slot] * (1.0 / norm);
            for (r, yr) in y.iter_mut().enumerate() {
                *yr += phi.get(r, k) * a;
            }
        }
        let energy: f64 = y.iter().map(|q| q.norm_sqr()).sum();
        best = best.max((energy - 1.0).abs());
    }
    best
}

/// Real matrix of `z ↦ Φz` in the basis `(z_k)_c`, column `4k + c`, row `4i + c'`,
/// assembled by applying `Φ` to basis vectors.
pub fn real_operator(phi: &QMatrix) -> DMatrix<f64> {
    let (m, n) = phi.shape();
    let units = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let mut a = DMatrix::zeros(4 * m, 4 * n);
    for k in 0..n {
        for (c, &u) in units.iter().enumerate() {
            let mut e = QVector::zeros(n);
            e[k] = u;
            let col = phi.matvec(&e).unwrap();
            for i in 0..m {
                let q = col[i].to_array();
                for (cc, v) in q.iter().enumerate() {
                    a[(4 * i + cc, 4 * k + c)] = *v;
                }
            }
        }
    }
    a
}

fn real_vec(v: &QVector) -> DVector<f64> {
    DVector::from_iterator(4 * v.len(), v.iter().flat_map(|q| q.to_array()))
}

fn to_qvector(z: &DVector<f64>) -> QVector {
    (0..z.len() / 4).map(|k| Quaternion::new(z[4 * k], z[4 * k + 1], z[4 * k + 2], z[4 * k + 3])).collect()
}

/// Minimizer of `Σ_k sqrt(‖z_k‖² + ε²)` subject to `Az = y`, by iteratively
/// reweighted least squares with `ε` decreasing to `1e-10`.
fn irls(a: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let groups = a.ncols() / 4;
    let mut z = a.transpose() * (a * a.transpose()).lu().solve(y).unwrap();
    let mut eps = 1.0;
    while eps >= 1e-10 {
        for _ in 0..40 {
            let w: Vec<f64> = (0..groups).map(|k| (z.rows(4 * k, 4).norm_squared() + eps * eps).sqrt()).collect();
            let mut ad = a.clone();
            for k in 0..groups {
                for c in 0..4 {
                    ad.column_mut(4 * k + c).scale_mut(w[k]);
                }
            }
            let lhs = &ad * a.transpose();
            let Some(sol) = lhs.lu().solve(y) else { break };
            z = ad.transpose() * sol;
        }
        eps /= 10.0;
    }
    z
}

/// Value of `min ‖z‖₁ s.t. Φz = y`, as the best of (a) least squares on every
/// support of at most `m` coordinates that reproduces `y`, and (b) IRLS.
pub fn brute_force_l1(phi: &QMatrix, y: &QVector) -> (f64, QVector) {
    let (m, n) = phi.shape();
    let a = real_operator(phi);
    let yr = real_vec(y);
    let mut best = {
        let z = irls(&a, &yr);
        let zq = to_qvector(&z);
        (zq.norm1(), zq)
    };
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        if support.len() > m {
            continue;
        }
        let cols: Vec<usize> = support.iter().flat_map(|&k| 4 * k..4 * k + 4).collect();
        let a_s = a.select_columns(cols.iter());
        let Some(coef) = (a_s.transpose() * &a_s).lu().solve(&(a_s.transpose() * &yr)) else { continue };
        if (&a_s * &coef - &yr).norm() > 1e-9 * yr.norm().max(1.0) {
            continue;
        }
        let mut z = DVector::zeros(4 * n);
        for (slot, &col) in cols.iter().enumerate() {
            z[col] = coef[slot];
        }
        let zq = to_qvector(&z);
        if zq.norm1() < best.0 {
            best = (zq.norm1(), zq);
        }
    }
    best
}

/// Rows orthonormalized by Gram–Schmidt (`ΦΦ* = I`), then columns scaled to unit norm.
pub fn normalized_frame(phi: &QMatrix) -> QMatrix {
    let (m, n) = phi.shape();
    let mut rows: Vec<Vec<Quaternion>> = (0..m).map(|i| (0..n).map(|k| phi.get(i, k)).collect()).collect();
    for i in 0..m {
        for j in 0..i {
            // (ΦΦ*)_ij = Σ_k φ_ik conj(φ_jk); remove it by a left multiple of row j
            let c: Quaternion = (0..n).map(|k| rows[i][k] * rows[j][k].conj()).sum();
            for k in 0..n {
                let d = c * rows[j][k];
                rows[i][k] -= d;
            }
        }
        let norm = rows[i].iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        for q in rows[i].iter_mut() {
            *q = *q * (1.0 / norm);
        }
    }
    let col_norm: Vec<f64> = (0..n).map(|k| rows.iter().map(|r| r[k].norm_sqr()).sum::<f64>().sqrt()).collect();
    QMatrix::from_fn(m, n, |i, k| rows[i][k] * (1.0 / col_norm[k]))
}

/// `‖x − x_s‖₁` computed by sorting magnitudes.
pub fn tail_l1(x: &QVector, s: usize) -> f64 {
    let mut mags: Vec<f64> = x.iter().map(|q| q.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags[s.min(mags.len())..].iter().sum()
}

pub fn quaternion_gaussian_vector(rng: &mut RngStream, n: usize, sigma2: f64) -> QVector {
    (0..n).map(|_| sample_quaternion_gaussian(rng, sigma2).unwrap()).collect()
}

pub fn support_of(x: &QVector) -> SupportSet {
    x.support()
}
