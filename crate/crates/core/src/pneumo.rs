//! Cavity gas to membrane: pressure, blocked force, free displacement, and
//! the exterior surface temperature node.
//!
//! Blocked force follows the ideal gas at constant volume,
//! `F = P0 * A * dT_air / T0`, with `A` the aperture area. Its inverse is the
//! air-temperature reconstruction `T_air = T0 * (F / (A * P0) + 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeviceParams, GasReference, Geometry};
use crate::scalar::Scalar;

/// Pressure, force and displacement derived from one air-rise value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MechanicalOutput<S> {
    /// Gauge pressure in the blocked cavity, Pa.
    pub pressure_delta: S,
    /// Blocked (isometric) force, N.
    pub force: S,
    /// Free centre displacement, m.
    pub displacement: S,
}

/// Thermal constants of the exterior surface node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceThermalParams<S> {
    /// Air-to-surface conductance through the membrane, W/K.
    pub g_through: S,
    /// Extra lateral loss added by a graphite spreading layer, W/K.
    pub g_spread: S,
    /// Effective surface heat capacity, J/K.
    pub c_surf: S,
}

impl<S: Scalar> SurfaceThermalParams<S> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g_through", self.g_through),
            ("g_spread", self.g_spread),
            ("c_surf", self.c_surf),
        ] {
            if !(v >= S::zero()) || v.is_infinite() {
                return Err(Error::NonPositiveField(name));
            }
        }
        if self.c_surf == S::zero() {
            return Err(Error::NonPositiveField("c_surf"));
        }
        Ok(())
    }

    /// Same node with the spreading path removed.
    pub fn without_spreader(&self) -> Self {
        Self {
            g_spread: S::zero(),
            ..*self
        }
    }
}

/// Blocked gauge pressure for an air rise, Pa.
pub fn pressure_from_air_rise<S: Scalar>(dt_air: S, gas: &GasReference<S>) -> S {
    gas.p0 * dt_air / gas.t0
}

/// Blocked force for an air rise, N.
pub fn force_from_air_rise<S: Scalar>(
    dt_air: S,
    gas: &GasReference<S>,
    geom: &Geometry<S>,
) -> Result<S> {
    if !(dt_air > -gas.t0) {
        return Err(Error::NonPhysicalTemperature(
            dt_air.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(pressure_from_air_rise(dt_air, gas) * geom.aperture_area())
}

/// Air rise implied by a measured blocked force, K.
pub fn air_rise_from_force<S: Scalar>(force: S, gas: &GasReference<S>, geom: &Geometry<S>) -> S {
    gas.t0 * force / (geom.aperture_area() * gas.p0)
}

/// Spherical-cap volume swept by a membrane of aperture diameter `d` bulging `z`.
pub fn cap_volume<S: Scalar>(z: S, d: S) -> S {
    let a = d / S::lit(2.0);
    S::PI() * z / S::lit(6.0) * (S::lit(3.0) * a * a + z * z)
}

/// Free centre displacement of the membrane for an air rise.
///
/// Without volume feedback this is `F / k_eff`. With it, the membrane bulge
/// grows the cavity and the equilibrium `p_gauge(z) * A = k_eff * z` is
/// solved by bisection on `[0, d_aperture]`.
pub fn free_displacement<S: Scalar>(dt_air: S, device: &DeviceParams<S>) -> Result<S> {
    let force = force_from_air_rise(dt_air, &device.gas, &device.geometry)?;
    let k = device.membrane.k_eff;
    if !device.membrane.volume_feedback {
        return Ok(force / k);
    }
    if dt_air < S::zero() {
        return Err(Error::Precondition(
            "volume feedback needs a non-negative air rise".into(),
        ));
    }
    if dt_air == S::zero() {
        return Ok(S::zero());
    }

    let g = &device.geometry;
    let gas = &device.gas;
    let area = g.aperture_area();
    let heated = gas.p0 * (gas.t0 + dt_air) / gas.t0;
    // net outward force on the membrane at deflection z; strictly decreasing
    let residual = |z: S| {
        let p = heated * g.v0 / (g.v0 + cap_volume(z, g.d_aperture));
        (p - gas.p0) * area - k * z
    };

    let (mut lo, mut hi) = (S::zero(), g.d_aperture);
    if residual(hi) > S::zero() {
        return Err(Error::NoConvergence(format!(
            "membrane equilibrium lies beyond one aperture diameter ({} m)",
            hi.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let tol = S::lit(1e-12) * g.d_aperture;
    for _ in 0..200 {
        let mid = (lo + hi) / S::lit(2.0);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        if residual(mid) > S::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / S::lit(2.0))
}

/// Pressure, blocked force and free displacement for one air rise.
pub fn mechanical_output<S: Scalar>(
    dt_air: S,
    device: &DeviceParams<S>,
) -> Result<MechanicalOutput<S>> {
    let force = force_from_air_rise(dt_air, &device.gas, &device.geometry)?;
    Ok(MechanicalOutput {
        pressure_delta: pressure_from_air_rise(dt_air, &device.gas),
        force,
        displacement: free_displacement(dt_air, device)?,
    })
}

/// Integrates the exterior surface node driven by an air-rise series.
///
/// `C dTs/dt = G_through (dT_air - dTs) - G_spread dTs`, classical RK4 with
/// the air rise linearly interpolated between samples. Starts from zero.
pub fn surface_rise<S: Scalar>(
    air_rise: &[S],
    params: &SurfaceThermalParams<S>,
    dt: S,
) -> Result<Vec<S>> {
    if !(dt > S::zero()) {
        return Err(Error::NonPositiveField("dt"));
    }
    params.validate()?;
    let rhs =
        |ts: S, air: S| (params.g_through * (air - ts) - params.g_spread * ts) / params.c_surf;
    let half = S::lit(0.5);
    let two = S::lit(2.0);
    let sixth = dt / S::lit(6.0);

    let mut out = Vec::with_capacity(air_rise.len());
    let mut ts = S::zero();
    for (k, &a0) in air_rise.iter().enumerate() {
        out.push(ts);
        let Some(&a1) = air_rise.get(k + 1) else {
            break;
        };
        let am = half * (a0 + a1);
        let k1 = rhs(ts, a0);
        let k2 = rhs(ts + half * dt * k1, am);
        let k3 = rhs(ts + half * dt * k2, am);
        let k4 = rhs(ts + dt * k3, a1);
        ts = ts + sixth * (k1 + two * k2 + two * k3 + k4);
    }
    Ok(out)
}
