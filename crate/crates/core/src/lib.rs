//! Lumped-parameter model of a light-driven thermopneumatic haptic actuator.
//!
//! An LED heats a graphite absorber inside a sealed air cavity; the warmed
//! air pushes on an elastomer membrane. The crate covers the drive programs,
//! the absorber and cavity thermal network, the gas-law mechanics, a
//! fixed-step integrator with parameter sweeps, trace analysis, and
//! calibration against reference measurements.
//!
//! All physics is generic over [`Scalar`] (`f32` or `f64`). Drive arithmetic
//! only needs [`Quantity`], so exact rationals work there too.
//!
//! ```
//! use hled::{derive_defaults, simulate, Device, Program, SimConfig};
//!
//! let device: Device = derive_defaults();
//! let pulse = Program::single(0.1, 2.5, 0.5).unwrap();
//! let trace = simulate(&device, &pulse, &SimConfig::new(0.5)).unwrap();
//! let peak = trace.force.iter().cloned().fold(0.0, f64::max);
//! assert!((peak - 0.4004).abs() < 1e-3);
//! ```

// `!(x > 0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calibration;
pub mod drive;
pub mod engine;
mod error;
pub mod model;
pub mod optim;
pub mod pneumo;
mod scalar;
pub mod thermal;

pub use calibration::{derive_defaults, fit_to_trace, FitTarget, FreeParam};
pub use drive::{expand_periodic, DriveProgram, LedMap, PeriodicDrive, Pulse};
pub use engine::{run_sweep, simulate, Envelope, SimConfig, SweepSpec};
pub use error::{Error, Result};
pub use model::{Channel, DeviceParams, Trace};
pub use scalar::{rel_diff, Quantity, Scalar};

pub type Device = DeviceParams<f64>;
pub type Device32 = DeviceParams<f32>;
pub type Program = DriveProgram<f64>;
pub type Program32 = DriveProgram<f32>;
pub type Series = Trace<f64>;
pub type Series32 = Trace<f32>;
