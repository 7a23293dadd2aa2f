use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The exponent `p` together with its conjugate `p' = p / (p - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParameters", into = "RawParameters")]
pub struct Parameters {
    p: f64,
    p_conj: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParameters {
    p: f64,
}

impl TryFrom<RawParameters> for Parameters {
    type Error = Error;
    fn try_from(raw: RawParameters) -> Result<Self> {
        Parameters::new(raw.p)
    }
}

impl From<Parameters> for RawParameters {
    fn from(params: Parameters) -> Self {
        RawParameters { p: params.p }
    }
}

impl Parameters {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "exponent must satisfy 1 < p < infinity, got {p}"
            )));
        }
        Ok(Self {
            p,
            p_conj: p / (p - 1.0),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }

    /// Parameters for the conjugate exponent.
    pub fn dual(&self) -> Self {
        Self {
            p: self.p_conj,
            p_conj: self.p,
        }
    }
}
