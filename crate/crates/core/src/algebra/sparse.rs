use std::collections::BTreeMap;

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CoefSeq, Parameters};
use crate::error::{Error, Result};
use crate::sum::Accumulator;

/// Polynomial stored as exponent -> coefficient, with exact zeros dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparsePoly {
    terms: BTreeMap<u64, Complex>,
}

impl SparsePoly {
    pub fn one() -> Self {
        Self::from_terms([(0, Complex::new(1.0, 0.0))])
    }

    pub fn from_terms<I: IntoIterator<Item = (u64, Complex)>>(terms: I) -> Self {
        let mut poly = Self::default();
        for (e, c) in terms {
            poly.add_term(e, c);
        }
        poly
    }

    pub fn add_term(&mut self, exponent: u64, coeff: Complex) {
        let entry = self.terms.entry(exponent).or_default();
        *entry += coeff;
        if *entry == Complex::new(0.0, 0.0) {
            self.terms.remove(&exponent);
        }
    }

    pub fn terms(&self) -> &BTreeMap<u64, Complex> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    pub fn coeff(&self, exponent: u64) -> Complex {
        self.terms.get(&exponent).copied().unwrap_or_default()
    }

    /// Dense coefficients, refusing anything beyond `max_degree`.
    pub fn to_dense(&self, max_degree: u64) -> Result<CoefSeq> {
        let degree = self.degree().unwrap_or(0);
        if degree > max_degree {
            return Err(Error::Limit(format!(
                "degree {degree} exceeds the densification cap {max_degree}"
            )));
        }
        let mut coeffs = vec![Complex::new(0.0, 0.0); degree as usize + 1];
        for (&e, &c) in &self.terms {
            coeffs[e as usize] = c;
        }
        CoefSeq::new(coeffs)
    }

    pub fn from_dense(a: &CoefSeq) -> Self {
        Self::from_terms(a.coeffs().iter().enumerate().map(|(k, &c)| (k as u64, c)))
    }

    /// Value at `z`, summing terms in exponent order.
    pub fn eval(&self, z: Complex) -> Complex {
        let mut re = Accumulator::new();
        let mut im = Accumulator::new();
        for (&e, &c) in &self.terms {
            let term = c * z.powf(e as f64);
            re.add(term.re);
            im.add(term.im);
        }
        Complex::new(re.value(), im.value())
    }

    /// Value at `exp(log_modulus) * exp(2 pi i index / count)`.
    ///
    /// Angles are reduced exactly (`e * index mod count`) so huge exponents keep full
    /// phase accuracy; magnitudes are formed as `exp(e * log_modulus)`.
    pub fn eval_at_root(&self, log_modulus: f64, index: u64, count: u64) -> Complex {
        let count = count.max(1);
        let mut re = Accumulator::new();
        let mut im = Accumulator::new();
        for (&e, &c) in &self.terms {
            let turn = ((e as u128 * index as u128) % count as u128) as f64 / count as f64;
            let z_e =
                Complex::from_polar((e as f64 * log_modulus).exp(), std::f64::consts::TAU * turn);
            let term = c * z_e;
            re.add(term.re);
            im.add(term.im);
        }
        Complex::new(re.value(), im.value())
    }
}

/// Product with like terms collected.
pub fn sparse_multiply(a: &SparsePoly, b: &SparsePoly) -> Result<SparsePoly> {
    let mut out = SparsePoly::default();
    for (&ea, &ca) in &a.terms {
        for (&eb, &cb) in &b.terms {
            let e = ea.checked_add(eb).ok_or(Error::ExponentOverflow {
                left: ea,
                right: eb,
            })?;
            out.add_term(e, ca * cb);
        }
    }
    Ok(out)
}

/// Product in which every exponent sum must be new; a repeated exponent is an error.
pub fn sparse_multiply_disjoint(a: &SparsePoly, b: &SparsePoly) -> Result<SparsePoly> {
    let mut out: BTreeMap<u64, Complex> = BTreeMap::new();
    for (&ea, &ca) in &a.terms {
        for (&eb, &cb) in &b.terms {
            let e = ea.checked_add(eb).ok_or(Error::ExponentOverflow {
                left: ea,
                right: eb,
            })?;
            if out.insert(e, ca * cb).is_some() {
                return Err(Error::ExponentCollision {
                    exponent: e,
                    left: ea,
                    right: eb,
                });
            }
        }
    }
    Ok(SparsePoly::from_terms(out))
}

pub fn sparse_p_norm(a: &SparsePoly, params: Parameters) -> f64 {
    sparse_norm_pow(a, params).powf(1.0 / params.p())
}

pub(crate) fn sparse_norm_pow(a: &SparsePoly, params: Parameters) -> f64 {
    let scale = a.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut acc = Accumulator::new();
    for c in a.terms.values() {
        acc.add((c.norm() / scale).powf(params.p()));
    }
    scale.powf(params.p()) * acc.value()
}

impl Serialize for SparsePoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            map.serialize_entry(&e.to_string(), &[c.re, c.im])?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for SparsePoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, [f64; 2]>::deserialize(deserializer)?;
        let mut poly = SparsePoly::default();
        for (key, [re, im]) in raw {
            let e: u64 = key
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad exponent {key:?}")))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(serde::de::Error::custom(format!(
                    "coefficient of z^{e} is not finite"
                )));
            }
            poly.add_term(e, Complex::new(re, im));
        }
        Ok(poly)
    }
}
