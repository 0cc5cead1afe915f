use std::ops::{Add, Index, IndexMut, Sub};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Which `ℓp` norm to evaluate; coordinates contribute their quaternion modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpNorm {
    /// Number of nonzero coordinates.
    Zero,
    One,
    Two,
    Inf,
}

/// Strictly increasing set of coordinate indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Sorts and validates; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("duplicate index in support {indices:?}")));
        }
        Ok(SupportSet(indices))
    }

    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        SupportSet((0..n).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.0.iter().all(|i| !other.contains(*i))
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        SupportSet(v)
    }

    pub(crate) fn check_bound(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n => Err(Error::IndexOutOfRange { index: last, len: n }),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for SupportSet {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        SupportSet::new(v)
    }
}

impl From<SupportSet> for Vec<usize> {
    fn from(s: SupportSet) -> Vec<usize> {
        s.0
    }
}

/// Column vector in `Hⁿ`, viewed as a right `H`-module.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QVector(Vec<Quaternion>);

impl QVector {
    pub fn zeros(n: usize) -> Self {
        QVector(vec![Quaternion::ZERO; n])
    }

    pub fn from_vec(entries: Vec<Quaternion>) -> Self {
        QVector(entries)
    }

    pub fn from_real(values: &[f64]) -> Self {
        QVector(values.iter().map(|&v| Quaternion::real(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Quaternion] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<Quaternion> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Quaternion> {
        self.0.iter()
    }

    /// Right scalar multiplication `x·q`.
    pub fn mul_right(&self, q: Quaternion) -> QVector {
        QVector(self.0.iter().map(|&x| x * q).collect())
    }

    /// Left scalar multiplication `q·x`.
    pub fn mul_left(&self, q: Quaternion) -> QVector {
        QVector(self.0.iter().map(|&x| q * x).collect())
    }

    pub fn scale(&self, s: f64) -> QVector {
        QVector(self.0.iter().map(|&x| x.scale(s)).collect())
    }

    pub fn lp_norm(&self, p: LpNorm) -> f64 {
        match p {
            LpNorm::Zero => self.0.iter().filter(|q| !q.is_zero()).count() as f64,
            LpNorm::One => self.0.iter().map(|q| q.norm()).sum(),
            LpNorm::Two => self.0.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt(),
            LpNorm::Inf => self.0.iter().map(|q| q.norm()).fold(0.0, f64::max),
        }
    }

    pub fn norm1(&self) -> f64 {
        self.lp_norm(LpNorm::One)
    }

    pub fn norm2(&self) -> f64 {
        self.lp_norm(LpNorm::Two)
    }

    /// Indices of the nonzero coordinates.
    pub fn support(&self) -> SupportSet {
        SupportSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, q)| !q.is_zero())
                .map(|(i, _)| i)
                .collect(),
        )
    }

    /// `h_T`: keeps the coordinates in `t`, zeroes the others.
    pub fn restrict(&self, t: &SupportSet) -> Result<QVector> {
        t.check_bound(self.len())?;
        let mut out = QVector::zeros(self.len());
        for &i in t.indices() {
            out.0[i] = self.0[i];
        }
        Ok(out)
    }

    /// The coordinates listed in `t`, in order, as a shorter vector.
    pub fn gather(&self, t: &SupportSet) -> Result<QVector> {
        t.check_bound(self.len())?;
        Ok(QVector(t.indices().iter().map(|&i| self.0[i]).collect()))
    }

    /// Inverse of [`gather`](Self::gather): places `values` at the indices of `t`.
    pub fn scatter(n: usize, t: &SupportSet, values: &QVector) -> Result<QVector> {
        t.check_bound(n)?;
        if values.len() != t.len() {
            return Err(Error::DimensionMismatch(format!(
                "scatter of {} values onto a support of size {}",
                values.len(),
                t.len()
            )));
        }
        let mut out = QVector::zeros(n);
        for (&i, &v) in t.indices().iter().zip(values.iter()) {
            out.0[i] = v;
        }
        Ok(out)
    }

    /// Best `s`-term approximation: the `s` largest-modulus entries survive,
    /// ties going to the lower index.
    pub fn best_s_sparse(&self, s: usize) -> Result<QVector> {
        let n = self.len();
        if s > n {
            return Err(Error::SparsityOutOfRange { s, n });
        }
        let keep = self.largest_indices(s);
        self.restrict(&keep)
    }

    /// Indices of the `s` largest moduli (lowest index wins ties).
    pub fn largest_indices(&self, s: usize) -> SupportSet {
        let mut order: Vec<usize> = (0..self.len()).collect();
        let mods: Vec<f64> = self.0.iter().map(|q| q.norm()).collect();
        // stable sort keeps lower indices first among equal moduli
        order.sort_by(|&i, &j| mods[j].partial_cmp(&mods[i]).unwrap_or(std::cmp::Ordering::Equal));
        order.truncate(s.min(order.len()));
        order.sort_unstable();
        SupportSet(order)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|q| q.is_finite())
    }

    pub fn approx_eq(&self, other: &QVector, tol: f64) -> bool {
        self.len() == other.len() && self.0.iter().zip(other.0.iter()).all(|(a, b)| a.approx_eq(*b, tol))
    }

    pub(crate) fn check_len(&self, other: &QVector, what: &str) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "{what}: lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &QVector) -> Result<QVector> {
        self.check_len(other, "vector addition")?;
        Ok(QVector(self.0.iter().zip(other.0.iter()).map(|(&a, &b)| a + b).collect()))
    }

    pub fn try_sub(&self, other: &QVector) -> Result<QVector> {
        self.check_len(other, "vector subtraction")?;
        Ok(QVector(self.0.iter().zip(other.0.iter()).map(|(&a, &b)| a - b).collect()))
    }
}

/// `⟨x, y⟩ = y*x = Σ ȳᵢ xᵢ`. The factor order matters.
pub fn hermitian_inner(x: &QVector, y: &QVector) -> Result<Quaternion> {
    x.check_len(y, "hermitian inner product")?;
    Ok(x.iter().zip(y.iter()).map(|(&xi, &yi)| yi.conj() * xi).sum())
}

impl Index<usize> for QVector {
    type Output = Quaternion;
    fn index(&self, i: usize) -> &Quaternion {
        &self.0[i]
    }
}

impl IndexMut<usize> for QVector {
    fn index_mut(&mut self, i: usize) -> &mut Quaternion {
        &mut self.0[i]
    }
}

impl FromIterator<Quaternion> for QVector {
    fn from_iter<I: IntoIterator<Item = Quaternion>>(iter: I) -> Self {
        QVector(iter.into_iter().collect())
    }
}

/// Panics on length mismatch; use [`QVector::try_add`] for checked addition.
impl Add for &QVector {
    type Output = QVector;
    fn add(self, rhs: &QVector) -> QVector {
        self.try_add(rhs).expect("vector lengths differ")
    }
}

/// Panics on length mismatch; use [`QVector::try_sub`] for checked subtraction.
impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, rhs: &QVector) -> QVector {
        self.try_sub(rhs).expect("vector lengths differ")
    }
}
