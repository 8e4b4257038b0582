use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Lebesgue exponent `p` paired with a law exponent `r`, both in `(1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    p: f64,
    r: f64,
}

/// Hölder conjugate `x / (x - 1)`.
#[inline]
pub fn conjugate(x: f64) -> f64 {
    x / (x - 1.0)
}

pub(crate) fn check_exponent(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "(1, inf)",
        })
    }
}

impl Params {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("r", r)?;
        Ok(Self { p, r })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn q(&self) -> f64 {
        conjugate(self.p)
    }

    #[inline]
    pub fn r_prime(&self) -> f64 {
        conjugate(self.r)
    }

    /// The parameters of the dual law: `(q, r')`.
    pub fn dual(&self) -> Self {
        Self {
            p: self.q(),
            r: self.r_prime(),
        }
    }

    /// `1 < p <= 2 <= r <= q`, where the lower law carries the minimized constant.
    pub fn in_minimized_region(&self) -> bool {
        self.p <= 2.0 && self.r >= 2.0 && self.r <= self.q()
    }
}
