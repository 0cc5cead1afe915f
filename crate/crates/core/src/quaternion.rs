//! Quaternion scalars `q = a + bi + cj + dk` over `f64`.
//!
//! Multiplication follows `i² = j² = k² = ijk = −1`, so `ij = k = −ji`,
//! `jk = i = −kj` and `ki = j = −ik`. Everything here is plain value
//! arithmetic on four doubles.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Norms below this are treated as zero by [`Quaternion::inv`].
pub const ZERO_DIVISOR_THRESHOLD: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    /// Scalar part.
    pub a: f64,
    /// `i` component.
    pub b: f64,
    /// `j` component.
    pub c: f64,
    /// `k` component.
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub const fn real(a: f64) -> Self {
        Quaternion::new(a, 0.0, 0.0, 0.0)
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Quaternion::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    /// `|q|² = q·q̄`.
    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> f64 {
        // hypot-style scaling is not needed at the magnitudes we handle.
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.a == 0.0 && self.b == 0.0 && self.c == 0.0 && self.d == 0.0
    }

    /// Multiplicative inverse `q̄ / |q|²`.
    pub fn inv(self) -> Result<Self> {
        let n = self.norm();
        if n < ZERO_DIVISOR_THRESHOLD {
            return Err(Error::ZeroDivisor(self.to_string()));
        }
        let n2 = n * n;
        Ok(self.conj().scale(1.0 / n2))
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Componentwise comparison with an absolute tolerance.
    pub fn approx_eq(self, other: Quaternion, tol: f64) -> bool {
        (self.a - other.a).abs() <= tol
            && (self.b - other.b).abs() <= tol
            && (self.c - other.c).abs() <= tol
            && (self.d - other.d).abs() <= tol
    }

    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, r: Quaternion) {
        *self = *self + r;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, r: Quaternion) {
        *self = *self - r;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        let p = self;
        Quaternion::new(
            p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
            p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
            p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
            p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
        )
    }
}

impl MulAssign for Quaternion {
    fn mul_assign(&mut self, q: Quaternion) {
        *self = *self * q;
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        self.scale(1.0 / s)
    }
}

impl Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |acc, q| acc + q)
    }
}

impl From<f64> for Quaternion {
    fn from(a: f64) -> Self {
        Quaternion::real(a)
    }
}

/// Renders as `a+bi+cj+dk` with every sign written out, e.g. `1-2i+0j+0.5k`.
impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.a)?;
        for (v, unit) in [(self.b, 'i'), (self.c, 'j'), (self.d, 'k')] {
            if v.is_sign_negative() {
                write!(f, "-{}{}", -v, unit)?;
            } else {
                write!(f, "+{}{}", v, unit)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Quaternion {
    type Err = Error;

    /// Parses the full `a+bi+cj+dk` form written by `Display`. Components
    /// may be omitted (`1+k`, `-j`), but each unit may appear only once.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse quaternion from {s:?}"));
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(bad());
        }
        let mut parts = [None; 4];
        let bytes = text.as_bytes();
        let mut start = 0;
        while start < bytes.len() {
            // A term ends at the next sign that is not part of an exponent.
            let mut end = start + 1;
            while end < bytes.len() {
                let ch = bytes[end];
                let prev = bytes[end - 1];
                if (ch == b'+' || ch == b'-') && prev != b'e' && prev != b'E' {
                    break;
                }
                end += 1;
            }
            let term = &text[start..end];
            let (slot, num) = match term.chars().last() {
                Some('i') => (1, &term[..term.len() - 1]),
                Some('j') => (2, &term[..term.len() - 1]),
                Some('k') => (3, &term[..term.len() - 1]),
                _ => (0, term),
            };
            let value = match num {
                "" | "+" => 1.0,
                "-" => -1.0,
                _ => num.parse::<f64>().map_err(|_| bad())?,
            };
            if parts[slot].replace(value).is_some() {
                return Err(bad());
            }
            start = end;
        }
        Ok(Quaternion::new(
            parts[0].unwrap_or(0.0),
            parts[1].unwrap_or(0.0),
            parts[2].unwrap_or(0.0),
            parts[3].unwrap_or(0.0),
        ))
    }
}

impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        <[f64; 4]>::deserialize(deserializer).map(Quaternion::from_array)
    }
}
