use num_complex::Complex64 as Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{DiskPoint, Parameters};
use crate::error::{Error, Result};
use crate::sum;

/// Truncated Taylor coefficients `a_0, ..., a_D` of an analytic function on the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefSeq {
    coeffs: Vec<Complex>,
}

impl CoefSeq {
    pub fn new(coeffs: Vec<Complex>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition(
                "coefficient sequence must have at least one entry".into(),
            ));
        }
        if let Some(k) = coeffs
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Precondition(format!(
                "coefficient {k} is not finite"
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn constant(c: Complex) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `z^m`.
    pub fn monomial(m: usize) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); m + 1];
        coeffs[m] = Complex::new(1.0, 0.0);
        Self { coeffs }
    }

    /// Crate-internal constructor for vectors already known to be finite and nonempty.
    pub(crate) fn from_vec(coeffs: Vec<Complex>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, k: usize) -> Complex {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Degree after dropping trailing exact zeros.
    pub fn effective_degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != Complex::new(0.0, 0.0))
            .unwrap_or(0)
    }

    /// Multiplication by `z^n`.
    pub fn shift(&self, n: usize) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); n];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    pub fn scale(&self, c: Complex) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self {
            coeffs: (0..n).map(|k| self.get(k) + other.get(k)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self {
            coeffs: (0..n).map(|k| self.get(k) - other.get(k)).collect(),
        }
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); self.len() + other.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == Complex::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self { coeffs }
    }

    /// `prod (1 - z / w)` over the given points.
    pub fn from_roots<'a, I: IntoIterator<Item = &'a Complex>>(roots: I) -> Self {
        let mut poly = Self::constant(Complex::new(1.0, 0.0));
        for w in roots {
            let factor = Self {
                coeffs: vec![Complex::new(1.0, 0.0), -1.0 / w],
            };
            poly = poly.mul(&factor);
        }
        poly
    }

    /// Largest |coefficient| distance between two sequences, padding the shorter with zeros.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn truncate(&self, degree: usize) -> Self {
        Self {
            coeffs: self.coeffs[..(degree + 1).min(self.len())].to_vec(),
        }
    }
}

impl Serialize for CoefSeq {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoefSeq {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        CoefSeq::new(
            pairs
                .into_iter()
                .map(|[re, im]| Complex::new(re, im))
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// `|z|^(s-1) * conj(z)`, with the value 0 at the origin.
pub fn signed_power(z: Complex, s: f64) -> Complex {
    let r = z.norm();
    if r == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    if s == 1.0 {
        return z.conj();
    }
    z.conj() * r.powf(s - 1.0)
}

pub fn seq_signed_power(a: &CoefSeq, s: f64) -> CoefSeq {
    CoefSeq::from_vec(a.coeffs.iter().map(|&z| signed_power(z, s)).collect())
}

/// `sum |a_k|^p`, accumulated after scaling by the largest modulus.
pub fn p_norm_pow(a: &CoefSeq, params: Parameters) -> f64 {
    slice_norm_pow(a.coeffs(), params.p())
}

pub fn p_norm(a: &CoefSeq, params: Parameters) -> f64 {
    slice_norm(a.coeffs(), params.p())
}

pub(crate) fn slice_norm_pow(a: &[Complex], p: f64) -> f64 {
    let (scale, s) = scaled_power_sum(a, p);
    if scale == 0.0 {
        0.0
    } else {
        scale.powf(p) * s
    }
}

pub(crate) fn slice_norm(a: &[Complex], p: f64) -> f64 {
    let (scale, s) = scaled_power_sum(a, p);
    if scale == 0.0 {
        0.0
    } else {
        scale * s.powf(1.0 / p)
    }
}

fn scaled_power_sum(a: &[Complex], p: f64) -> (f64, f64) {
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    (
        scale,
        sum::sum(a.iter().map(|c| (c.norm() / scale).powf(p))),
    )
}

/// `sum a_k b_k`; no conjugation.
pub fn bilinear_pairing(a: &CoefSeq, b: &CoefSeq) -> Complex {
    sum::complex_sum(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y))
}

/// Pairing of `a^<p-1>` against `b`; zero exactly when `a` is orthogonal to `b` in the
/// Birkhoff-James sense (for this one direction).
pub fn bj_residual(a: &CoefSeq, b: &CoefSeq, params: Parameters) -> Complex {
    let s = params.p() - 1.0;
    sum::complex_sum(
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| signed_power(*x, s) * y),
    )
}

/// `(f(z) - f(w)) / (z - w)` by synthetic division.
pub fn difference_quotient(f: &CoefSeq, w: DiskPoint) -> CoefSeq {
    let a = f.coeffs();
    let d = a.len() - 1;
    if d == 0 {
        return CoefSeq::constant(Complex::new(0.0, 0.0));
    }
    let w = w.value();
    let mut g = vec![Complex::new(0.0, 0.0); d];
    g[d - 1] = a[d];
    for n in (0..d - 1).rev() {
        g[n] = a[n + 1] + w * g[n + 1];
    }
    CoefSeq::from_vec(g)
}

/// `f^(m)(z)` by Horner's rule on the differentiated coefficients.
pub fn eval(f: &CoefSeq, z: Complex, deriv_order: usize) -> Complex {
    let a = f.coeffs();
    if deriv_order >= a.len() {
        return Complex::new(0.0, 0.0);
    }
    let mut acc = Complex::new(0.0, 0.0);
    for k in (deriv_order..a.len()).rev() {
        acc = acc * z + a[k] * falling_factorial(k, deriv_order);
    }
    acc
}

fn falling_factorial(k: usize, m: usize) -> f64 {
    ((k - m + 1)..=k).fold(1.0, |acc, j| acc * j as f64)
}
