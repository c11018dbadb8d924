//! Linear perceived-intensity model from magnitude estimation.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Unit the intensity coefficients expect optical power in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerUnit {
    Watt,
    Milliwatt,
}

impl PowerUnit {
    /// Multiplier taking watts into this unit.
    pub fn per_watt(self) -> f64 {
        match self {
            PowerUnit::Watt => 1.0,
            PowerUnit::Milliwatt => 1e3,
        }
    }
}

/// `I = alpha * P + beta`, with `P` in `unit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptualModel<S> {
    pub alpha: S,
    pub beta: S,
    pub unit: PowerUnit,
}

impl<S: Scalar> Default for PerceptualModel<S> {
    /// Reference regression. The power unit is not stated with it; milliwatts
    /// are the reading that keeps intensities positive over the device range.
    fn default() -> Self {
        Self {
            alpha: S::lit(0.0197),
            beta: S::lit(-0.2693),
            unit: PowerUnit::Milliwatt,
        }
    }
}

/// A value that may have been clamped to its valid range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped<S> {
    pub value: S,
    pub clamped: bool,
}

impl<S: Scalar> PerceptualModel<S> {
    /// Intensity for a power given in the model's own unit.
    pub fn intensity(&self, power: S) -> S {
        self.alpha * power + self.beta
    }

    /// Intensity for a power given in watts.
    pub fn intensity_from_watts(&self, watts: S) -> S {
        self.intensity(watts * S::lit(self.unit.per_watt()))
    }

    /// Power (model unit) needed for intensity `i`, clamped at zero power.
    pub fn power_for(&self, i: S) -> Clamped<S> {
        let p = (i - self.beta) / self.alpha;
        if p < S::zero() {
            Clamped {
                value: S::zero(),
                clamped: true,
            }
        } else {
            Clamped {
                value: p,
                clamped: false,
            }
        }
    }
}

/// Intensity with the reference coefficients.
pub fn perceived_intensity<S: Scalar>(power: S) -> S {
    PerceptualModel::default().intensity(power)
}

/// Inverse of [`perceived_intensity`], clamped at zero power.
pub fn power_for_intensity<S: Scalar>(i: S) -> Clamped<S> {
    PerceptualModel::default().power_for(i)
}
