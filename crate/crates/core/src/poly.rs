//! Low-degree polynomials used for the nonlinearity perturbations `g_l`, `g_r`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 3;

/// Polynomial with ascending coefficients, `c[0] + c[1] u + c[2] u^2 + c[3] u^3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Poly {
    coeffs: [f64; MAX_DEGREE + 1],
}

impl Poly {
    pub const ZERO: Poly = Poly { coeffs: [0.0; 4] };

    pub fn new(coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidParameter(format!(
                "polynomial degree {} exceeds {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coefficient {c}")));
        }
        let mut out = [0.0; MAX_DEGREE + 1];
        out[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Poly { coeffs: out })
    }

    pub fn constant(c: f64) -> Self {
        Poly { coeffs: [c, 0.0, 0.0, 0.0] }
    }

    pub fn coeffs(&self) -> &[f64; MAX_DEGREE + 1] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    /// True when `p(-u) = -p(u)`.
    pub fn is_odd(&self) -> bool {
        self.coeffs[0] == 0.0 && self.coeffs[2] == 0.0
    }

    pub fn eval(&self, u: f64) -> f64 {
        let c = &self.coeffs;
        ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let c = &self.coeffs;
        (3.0 * c[3] * u + 2.0 * c[2]) * u + c[1]
    }

    /// `∫_0^u p(s) ds`.
    pub fn integral(&self, u: f64) -> f64 {
        let c = &self.coeffs;
        (((c[3] / 4.0 * u + c[2] / 3.0) * u + c[1] / 2.0) * u + c[0]) * u
    }

    pub fn scaled(&self, factor: f64) -> Poly {
        let mut coeffs = self.coeffs;
        coeffs.iter_mut().for_each(|c| *c *= factor);
        Poly { coeffs }
    }
}

impl fmt::Display for Poly {
    /// Comma-separated ascending coefficients, trailing zeros dropped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        for (i, c) in self.coeffs[..=d].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c:?}")?;
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad polynomial coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Poly::new(&coeffs)
    }
}
