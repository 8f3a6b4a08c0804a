//! Marchenko-Pastur limiting spectral law for null sample covariance matrices.

use core::f64::consts::PI;
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the ratio `c` was formed from a `p`-variable, `n`-sample panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum RatioConvention {
    /// `c = p / n`, the usual choice; `c > 1` puts mass `1 - 1/c` at zero.
    DimensionOverSamples,
    /// `c = n / p`.
    SamplesOverDimension,
    /// `c` supplied directly.
    Given,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MarchenkoPasturLaw {
    pub ratio: f64,
    pub convention: RatioConvention,
    pub x_min: f64,
    pub x_max: f64,
}

pub fn mp_law(c: f64) -> Result<MarchenkoPasturLaw> {
    MarchenkoPasturLaw::new(c, RatioConvention::Given)
}

pub fn mp_density(law: &MarchenkoPasturLaw, x: f64) -> f64 {
    law.density(x)
}

impl MarchenkoPasturLaw {
    pub fn new(c: f64, convention: RatioConvention) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("ratio must be positive and finite, got {c}")));
        }
        let r = c.sqrt();
        Ok(Self { ratio: c, convention, x_min: (1.0 - r) * (1.0 - r), x_max: (1.0 + r) * (1.0 + r) })
    }

    pub fn from_dimensions(p: usize, n: usize, convention: RatioConvention) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::InvalidParameter("dimensions must be positive".into()));
        }
        let c = match convention {
            RatioConvention::SamplesOverDimension => n as f64 / p as f64,
            _ => p as f64 / n as f64,
        };
        let convention = match convention {
            RatioConvention::Given => RatioConvention::DimensionOverSamples,
            other => other,
        };
        Self::new(c, convention)
    }

    /// Absolutely continuous part of the density; zero off the support.
    pub fn density(&self, x: f64) -> f64 {
        if x <= self.x_min || x >= self.x_max || x <= 0.0 {
            return 0.0;
        }
        ((self.x_max - x) * (x - self.x_min)).sqrt() / (2.0 * PI * self.ratio * x)
    }

    /// Point mass at zero, present when `c > 1`.
    pub fn atom_mass(&self) -> f64 {
        if self.ratio > 1.0 {
            1.0 - 1.0 / self.ratio
        } else {
            0.0
        }
    }

    pub fn mean(&self) -> f64 {
        1.0
    }
}
