//! Fixed-step time integration of the device model and the sweep harness.
//!
//! Steps lie on the global grid `k * dt`. A pulse edge falling strictly
//! inside a step splits that step, so the piecewise-constant drive is never
//! smeared across an edge. Output samples stay on the uniform grid.

mod integrator;
mod sweep;

pub use integrator::rk4_step;
pub use sweep::{run_sweep, Combination, Envelope, SweepAxis, SweepSpec};

use crate::drive::DriveProgram;
use crate::error::{Error, Result};
use crate::model::{validate_device, DeviceParams, Trace};
use crate::pneumo::mechanical_output;
use crate::scalar::Scalar;
use crate::thermal::{air_rise_from_abs, thermal_rhs, ThermalState};

/// Default integration step, s.
pub const DEFAULT_DT: f64 = 1e-5;

/// Edges closer than this fraction of a step to a grid point are snapped onto it.
const SNAP_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<S> {
    /// Integration step, s.
    pub dt: S,
    /// Simulated span, s.
    pub t_end: S,
    /// Keep every n-th step in the output trace.
    pub record_every: usize,
}

impl<S: Scalar> SimConfig<S> {
    pub fn new(t_end: S) -> Self {
        Self {
            dt: S::lit(DEFAULT_DT),
            t_end,
            record_every: 1,
        }
    }

    pub fn with_dt(self, dt: S) -> Self {
        Self { dt, ..self }
    }

    pub fn with_record_every(self, record_every: usize) -> Self {
        Self {
            record_every,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > S::zero()) || self.dt.is_infinite() {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.t_end >= self.dt) || self.t_end.is_infinite() {
            return Err(Error::Config("t_end must be at least one step".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of integration steps covering `t_end`.
    pub fn steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let nearest = ratio.round();
        let tol = S::lit(1e-9).max(S::lit(64.0) * S::epsilon());
        let n = if (ratio - nearest).abs() <= tol * nearest.max(S::one()) {
            nearest
        } else {
            ratio.ceil()
        };
        n.to_usize().unwrap_or(usize::MAX)
    }

    /// Sample interval of the output trace, s.
    pub fn sample_dt(&self) -> S {
        self.dt * S::from_count(self.record_every)
    }
}

/// Pulse edges that do not fall on the step grid, ascending.
fn off_grid_edges<S: Scalar>(prog: &DriveProgram<S>, dt: S) -> Vec<S> {
    let slack = S::lit(64.0) * S::epsilon();
    prog.edges()
        .into_iter()
        .filter(|&e| {
            let k = (e / dt).round();
            (e - k * dt).abs() > S::lit(SNAP_FRACTION) * dt + slack * e.abs()
        })
        .collect()
}

/// Integrates the device under `prog` and records every channel.
///
/// Deterministic: identical inputs give bit-identical traces.
pub fn simulate<S: Scalar>(
    device: &DeviceParams<S>,
    prog: &DriveProgram<S>,
    cfg: &SimConfig<S>,
) -> Result<Trace<S>> {
    validate_device(device)?;
    cfg.validate()?;
    let dt = cfg.dt;
    if let Some(shortest) = prog.shortest_pulse() {
        if dt > shortest {
            return Err(Error::Config(format!(
                "step {} s is longer than the shortest pulse {} s",
                dt.to_f64().unwrap_or(f64::NAN),
                shortest.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }

    let thermal = device.thermal;
    let half = S::lit(0.5);
    let n_steps = cfg.steps();
    let n_samples = n_steps / cfg.record_every + 1;
    let mut trace = Trace::with_capacity(cfg.sample_dt(), n_samples);
    let edges = off_grid_edges(prog, dt);
    let mut next_edge = 0usize;

    let record = |trace: &mut Trace<S>, t: S, dt_abs: S| -> Result<()> {
        let dt_air = air_rise_from_abs(dt_abs, thermal.kappa);
        let mech = mechanical_output(dt_air, device)?;
        // right-continuous drive value, matching the half-open pulse intervals
        trace.p_opt.push(prog.power_or_zero(t + half * dt));
        trace.t_abs.push(dt_abs);
        trace.t_air.push(dt_air);
        trace.pressure_delta.push(mech.pressure_delta);
        trace.force.push(mech.force);
        trace.displacement.push(mech.displacement);
        Ok(())
    };

    let mut dt_abs = S::zero();
    record(&mut trace, S::zero(), dt_abs)?;
    let mut cuts: Vec<S> = Vec::with_capacity(4);
    for k in 0..n_steps {
        let t_a = S::from_count(k) * dt;
        let t_b = S::from_count(k + 1) * dt;

        cuts.clear();
        cuts.push(t_a);
        while next_edge < edges.len() && edges[next_edge] < t_b {
            if edges[next_edge] > t_a {
                cuts.push(edges[next_edge]);
            }
            next_edge += 1;
        }
        cuts.push(t_b);

        for seg in cuts.windows(2) {
            let (s0, s1) = (seg[0], seg[1]);
            let p_abs = thermal.epsilon * prog.power_or_zero(half * (s0 + s1));
            dt_abs = rk4_step(s0, dt_abs, s1 - s0, |_, y| {
                thermal_rhs(ThermalState { dt_abs: y }, p_abs, &thermal)
            });
        }

        if (k + 1) % cfg.record_every == 0 {
            record(&mut trace, t_b, dt_abs)?;
        }
    }
    Ok(trace)
}
