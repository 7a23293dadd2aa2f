use std::collections::HashMap;

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use super::CoefSeq;
use crate::error::{Error, Result};

/// Points closer than this are merged into one zero of higher multiplicity.
pub const COINCIDENCE_RADIUS: f64 = 1e-8;

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiskPoint(Complex);

impl DiskPoint {
    pub fn new(value: Complex) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Precondition(format!("point {value} is not finite")));
        }
        if value.norm() >= 1.0 {
            return Err(Error::Precondition(format!(
                "point {value} lies outside the open unit disk"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> Complex {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }
}

/// Distinct nonzero disk points with multiplicities, in the order given.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSetSpec {
    zeros: Vec<(DiskPoint, u32)>,
    warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawZero {
    re: f64,
    im: f64,
    #[serde(default = "one")]
    mult: u32,
}

fn one() -> u32 {
    1
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    zeros: Vec<RawZero>,
}

impl ZeroSetSpec {
    /// Validates the entries and merges points closer than [`COINCIDENCE_RADIUS`].
    pub fn new(entries: Vec<(Complex, u32)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Precondition("zero set is empty".into()));
        }
        let mut zeros: Vec<(DiskPoint, u32)> = Vec::with_capacity(entries.len());
        let mut warnings = Vec::new();
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let cell = |z: Complex| {
            (
                (z.re / COINCIDENCE_RADIUS).floor() as i64,
                (z.im / COINCIDENCE_RADIUS).floor() as i64,
            )
        };
        for (value, mult) in entries {
            if mult == 0 {
                return Err(Error::Precondition(format!(
                    "zero {value} has multiplicity 0"
                )));
            }
            if value.norm() == 0.0 {
                return Err(Error::Precondition("zeros must be nonzero".into()));
            }
            let point = DiskPoint::new(value)?;
            let (cx, cy) = cell(value);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(ids) = grid.get(&(cx + dx, cy + dy)) {
                        for &id in ids {
                            if (zeros[id].0.value() - value).norm() < COINCIDENCE_RADIUS {
                                found = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
            match found {
                Some(id) => {
                    warnings.push(format!(
                        "zero {value} lies within {COINCIDENCE_RADIUS:e} of {}; merged into one zero of multiplicity {}",
                        zeros[id].0.value(),
                        zeros[id].1 + mult
                    ));
                    zeros[id].1 += mult;
                }
                None => {
                    grid.entry((cx, cy)).or_default().push(zeros.len());
                    zeros.push((point, mult));
                }
            }
        }
        Ok(Self { zeros, warnings })
    }

    pub fn simple(points: &[Complex]) -> Result<Self> {
        Self::new(points.iter().map(|&z| (z, 1)).collect())
    }

    pub fn zeros(&self) -> &[(DiskPoint, u32)] {
        &self.zeros
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Number of distinct points.
    pub fn distinct_len(&self) -> usize {
        self.zeros.len()
    }

    /// Total number of zeros counted with multiplicity.
    pub fn total_multiplicity(&self) -> usize {
        self.zeros.iter().map(|(_, m)| *m as usize).sum()
    }

    /// The zeros with multiplicities repeated, in order.
    pub fn expanded(&self) -> Vec<Complex> {
        self.zeros
            .iter()
            .flat_map(|(w, m)| std::iter::repeat(w.value()).take(*m as usize))
            .collect()
    }

    /// The first `n` zeros of the expanded sequence.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.total_multiplicity() {
            return Err(Error::Precondition(format!(
                "prefix length {n} outside 1..={}",
                self.total_multiplicity()
            )));
        }
        let mut zeros = Vec::new();
        let mut left = n as u32;
        for &(w, m) in &self.zeros {
            if left == 0 {
                break;
            }
            let take = m.min(left);
            zeros.push((w, take));
            left -= take;
        }
        Ok(Self {
            zeros,
            warnings: Vec::new(),
        })
    }

    pub fn max_modulus(&self) -> f64 {
        self.zeros
            .iter()
            .map(|(w, _)| w.modulus())
            .fold(0.0, f64::max)
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.zeros.iter().map(|(_, m)| *m).max().unwrap_or(0)
    }

    /// `prod (1 - z / w)^mult`, normalized to the value 1 at the origin.
    pub fn polynomial(&self) -> CoefSeq {
        CoefSeq::from_roots(self.expanded().iter())
    }

    /// True when every zero of `self` appears in `other` with at least the same multiplicity.
    pub fn is_contained_in(&self, other: &Self) -> bool {
        self.zeros.iter().all(|(w, m)| {
            other
                .zeros
                .iter()
                .any(|(v, n)| (v.value() - w.value()).norm() < COINCIDENCE_RADIUS && n >= m)
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(
            raw.zeros
                .into_iter()
                .map(|z| (Complex::new(z.re, z.im), z.mult))
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let raw = RawSpec {
            zeros: self
                .zeros
                .iter()
                .map(|(w, m)| RawZero {
                    re: w.value().re,
                    im: w.value().im,
                    mult: *m,
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("plain data serializes")
    }
}

impl Serialize for ZeroSetSpec {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        RawSpec {
            zeros: self
                .zeros
                .iter()
                .map(|(w, m)| RawZero {
                    re: w.value().re,
                    im: w.value().im,
                    mult: *m,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ZeroSetSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = RawSpec::deserialize(deserializer)?;
        Self::new(
            raw.zeros
                .into_iter()
                .map(|z| (Complex::new(z.re, z.im), z.mult))
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn disk_point_bounds() {
        assert!(DiskPoint::new(c(0.0, 0.0)).is_ok());
        assert!(DiskPoint::new(c(0.6, 0.79)).is_ok());
        assert!(DiskPoint::new(c(1.0, 0.0)).is_err());
        assert!(DiskPoint::new(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn rejects_bad_sets() {
        assert!(ZeroSetSpec::new(vec![]).is_err());
        let err = ZeroSetSpec::simple(&[c(0.5, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(err.to_string().contains("zeros must be nonzero"));
        assert!(ZeroSetSpec::new(vec![(c(0.5, 0.0), 0)]).is_err());
        assert!(ZeroSetSpec::simple(&[c(1.5, 0.0)]).is_err());
    }

    #[test]
    fn merges_near_coincident_points() {
        let spec = ZeroSetSpec::new(vec![
            (c(0.5, 0.0), 1),
            (c(0.3, 0.0), 2),
            (c(0.5 + 1e-10, 0.0), 2),
        ])
        .unwrap();
        assert_eq!(spec.distinct_len(), 2);
        assert_eq!(spec.zeros()[0].1, 3);
        assert_eq!(spec.warnings().len(), 1);
        assert_eq!(spec.total_multiplicity(), 5);
        assert_eq!(
            spec.expanded(),
            vec![c(0.5, 0.0); 3]
                .into_iter()
                .chain(vec![c(0.3, 0.0); 2])
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn prefixes_split_multiplicities() {
        let spec = ZeroSetSpec::new(vec![(c(0.5, 0.0), 2), (c(0.0, 0.3), 1)]).unwrap();
        assert_eq!(spec.prefix(1).unwrap().zeros()[0].1, 1);
        assert_eq!(spec.prefix(3).unwrap(), spec.prefix(3).unwrap());
        assert_eq!(spec.prefix(3).unwrap().distinct_len(), 2);
        assert!(spec.prefix(0).is_err());
        assert!(spec.prefix(4).is_err());
        assert!(spec.prefix(2).unwrap().is_contained_in(&spec));
        assert!(!spec.is_contained_in(&spec.prefix(2).unwrap()));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"zeros":[{"re":0.5,"im":0.0,"mult":2},{"re":0.0,"im":-0.25}]}"#;
        let spec = ZeroSetSpec::from_json(text).unwrap();
        assert_eq!(spec.total_multiplicity(), 3);
        let again = ZeroSetSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
        assert!(ZeroSetSpec::from_json(r#"{"zeros":[]}"#).is_err());
        assert!(ZeroSetSpec::from_json("not json").is_err());
    }

    #[test]
    fn polynomial_has_unit_constant_term() {
        let spec = ZeroSetSpec::new(vec![(c(0.5, 0.0), 2)]).unwrap();
        let f = spec.polynomial();
        assert_eq!(f.coeffs(), &[c(1.0, 0.0), c(-4.0, 0.0), c(4.0, 0.0)]);
    }
}
