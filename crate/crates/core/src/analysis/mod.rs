//! Scalar metrics and regressions over simulated or measured series.

mod peaks;
mod perceptual;
mod regression;

pub use peaks::{peak, peak_of, pp_decompose, PpDecomposition, MIN_CYCLES};
pub use perceptual::{
    perceived_intensity, power_for_intensity, Clamped, PerceptualModel, PowerUnit,
};
pub use regression::{cooling_fit, linear_fit, loglog_fit, FitResult, LinearFit};
