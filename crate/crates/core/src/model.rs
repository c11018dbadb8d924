//! Device parameters, traces and their validation.
//!
//! Temperatures carried by [`Trace`] are rises above ambient in kelvin. They
//! become absolute only at output boundaries, via [`GasReference::t0`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Standard lab ambient used when nothing else is configured.
pub const AMBIENT_T0_K: f64 = 298.15;
pub const AMBIENT_P0_PA: f64 = 101_325.0;
/// Cylinder-stack estimate of the sealed cavity volume (30 uL).
pub const DEFAULT_CAVITY_VOLUME_M3: f64 = 3.0e-8;

/// Initial cavity gas state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasReference<S> {
    /// Ambient pressure, Pa.
    pub p0: S,
    /// Ambient absolute temperature, K.
    pub t0: S,
}

impl<S: Scalar> Default for GasReference<S> {
    fn default() -> Self {
        Self {
            p0: S::lit(AMBIENT_P0_PA),
            t0: S::lit(AMBIENT_T0_K),
        }
    }
}

/// Pixel geometry, all lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry<S> {
    /// Working-membrane aperture diameter; this is the `d` of the force law.
    pub d_aperture: S,
    pub d_absorber: S,
    pub t_absorber: S,
    pub t_membrane: S,
    /// Initial cavity gas volume, m^3. Only read when volume feedback is on.
    pub v0: S,
}

impl<S: Scalar> Default for Geometry<S> {
    fn default() -> Self {
        Self {
            d_aperture: S::lit(5.0e-3),
            d_absorber: S::lit(3.3e-3),
            t_absorber: S::lit(17.0e-6),
            t_membrane: S::lit(250.0e-6),
            v0: S::lit(DEFAULT_CAVITY_VOLUME_M3),
        }
    }
}

impl<S: Scalar> Geometry<S> {
    /// Area of the working aperture, m^2.
    pub fn aperture_area(&self) -> S {
        let r = self.d_aperture / S::lit(2.0);
        S::PI() * r * r
    }
}

/// Photoabsorber thermal constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalParams<S> {
    /// Absorber-to-environment effective resistance, K/W.
    pub r_abs: S,
    /// Absorber heat capacity, J/K.
    pub c_abs: S,
    /// Quasi-static fraction of the absorber rise seen by the cavity air.
    pub kappa: S,
    /// Absorbed fraction of incident optical power.
    pub epsilon: S,
}

impl<S: Scalar> ThermalParams<S> {
    /// Thermal time constant `R * C`, s.
    pub fn tau(&self) -> S {
        self.r_abs * self.c_abs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembraneParams<S> {
    /// Effective stiffness relating blocked force to free centre deflection, N/m.
    pub k_eff: S,
    /// Let free-mode gas expansion lower the cavity pressure.
    #[serde(default)]
    pub volume_feedback: bool,
}

/// Everything needed to simulate one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams<S> {
    pub geometry: Geometry<S>,
    pub gas: GasReference<S>,
    pub thermal: ThermalParams<S>,
    pub membrane: MembraneParams<S>,
}

/// Dotted paths of every numeric field, in declaration order.
pub const PARAMETER_PATHS: [&str; 12] = [
    "geometry.d_aperture",
    "geometry.d_absorber",
    "geometry.t_absorber",
    "geometry.t_membrane",
    "geometry.v0",
    "gas.p0",
    "gas.t0",
    "thermal.r_abs",
    "thermal.c_abs",
    "thermal.kappa",
    "thermal.epsilon",
    "membrane.k_eff",
];

impl<S: Scalar> DeviceParams<S> {
    fn field_mut(&mut self, path: &str) -> Option<&mut S> {
        Some(match path {
            "geometry.d_aperture" => &mut self.geometry.d_aperture,
            "geometry.d_absorber" => &mut self.geometry.d_absorber,
            "geometry.t_absorber" => &mut self.geometry.t_absorber,
            "geometry.t_membrane" => &mut self.geometry.t_membrane,
            "geometry.v0" => &mut self.geometry.v0,
            "gas.p0" => &mut self.gas.p0,
            "gas.t0" => &mut self.gas.t0,
            "thermal.r_abs" => &mut self.thermal.r_abs,
            "thermal.c_abs" => &mut self.thermal.c_abs,
            "thermal.kappa" => &mut self.thermal.kappa,
            "thermal.epsilon" => &mut self.thermal.epsilon,
            "membrane.k_eff" => &mut self.membrane.k_eff,
            _ => return None,
        })
    }

    /// Reads a numeric field by dotted path, e.g. `thermal.r_abs`.
    pub fn get(&self, path: &str) -> Result<S> {
        let mut copy = *self;
        copy.field_mut(path)
            .map(|v| *v)
            .ok_or_else(|| Error::UnknownParameter(path.to_owned()))
    }

    /// Returns a copy with one numeric field replaced.
    pub fn with(&self, path: &str, value: S) -> Result<Self> {
        let mut copy = *self;
        *copy
            .field_mut(path)
            .ok_or_else(|| Error::UnknownParameter(path.to_owned()))? = value;
        Ok(copy)
    }

    /// Checks every field bound; the error names the first violation found.
    pub fn validate(&self) -> Result<()> {
        validate_device(self)
    }
}

fn positive<S: Scalar>(name: &'static str, v: S) -> Result<()> {
    if v.is_nan() || v.is_infinite() {
        return Err(Error::NonFinite(name));
    }
    if v > S::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveField(name))
    }
}

fn fraction<S: Scalar>(name: &'static str, v: S, lo_inclusive: bool) -> Result<()> {
    if v.is_nan() {
        return Err(Error::NonFinite(name));
    }
    let lo_ok = if lo_inclusive {
        v >= S::zero()
    } else {
        v > S::zero()
    };
    if lo_ok && v <= S::one() {
        Ok(())
    } else {
        Err(Error::FractionOutOfRange(name))
    }
}

/// Succeeds iff every parameter invariant holds.
pub fn validate_device<S: Scalar>(p: &DeviceParams<S>) -> Result<()> {
    let g = &p.geometry;
    positive("d_aperture", g.d_aperture)?;
    positive("d_absorber", g.d_absorber)?;
    positive("t_absorber", g.t_absorber)?;
    positive("t_membrane", g.t_membrane)?;
    positive("v0", g.v0)?;
    positive("p0", p.gas.p0)?;
    positive("t0", p.gas.t0)?;
    let th = &p.thermal;
    positive("r_abs", th.r_abs)?;
    positive("c_abs", th.c_abs)?;
    fraction("kappa", th.kappa, true)?;
    fraction("epsilon", th.epsilon, false)?;
    positive("k_eff", p.membrane.k_eff)?;
    Ok(())
}

/// Named channels of a [`Trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Emitted optical power, W.
    POpt,
    /// Photoabsorber rise, K.
    TAbs,
    /// Cavity air rise, K.
    TAir,
    /// Gauge pressure, Pa.
    PressureDelta,
    /// Blocked force, N.
    Force,
    /// Free centre displacement, m.
    Displacement,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::POpt,
        Channel::TAbs,
        Channel::TAir,
        Channel::PressureDelta,
        Channel::Force,
        Channel::Displacement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::POpt => "p_opt",
            Channel::TAbs => "t_abs",
            Channel::TAir => "t_air",
            Channel::PressureDelta => "pressure_delta",
            Channel::Force => "force",
            Channel::Displacement => "displacement",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Uniformly sampled multi-channel series; sample `k` sits at `k * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S> {
    pub dt: S,
    pub p_opt: Vec<S>,
    pub t_abs: Vec<S>,
    pub t_air: Vec<S>,
    pub pressure_delta: Vec<S>,
    pub force: Vec<S>,
    pub displacement: Vec<S>,
}

impl<S: Scalar> Trace<S> {
    pub fn with_capacity(dt: S, n: usize) -> Self {
        Self {
            dt,
            p_opt: Vec::with_capacity(n),
            t_abs: Vec::with_capacity(n),
            t_air: Vec::with_capacity(n),
            pressure_delta: Vec::with_capacity(n),
            force: Vec::with_capacity(n),
            displacement: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.force.len()
    }

    pub fn is_empty(&self) -> bool {
        self.force.is_empty()
    }

    pub fn channel(&self, ch: Channel) -> &[S] {
        match ch {
            Channel::POpt => &self.p_opt,
            Channel::TAbs => &self.t_abs,
            Channel::TAir => &self.t_air,
            Channel::PressureDelta => &self.pressure_delta,
            Channel::Force => &self.force,
            Channel::Displacement => &self.displacement,
        }
    }

    pub fn channel_mut(&mut self, ch: Channel) -> &mut Vec<S> {
        match ch {
            Channel::POpt => &mut self.p_opt,
            Channel::TAbs => &mut self.t_abs,
            Channel::TAir => &mut self.t_air,
            Channel::PressureDelta => &mut self.pressure_delta,
            Channel::Force => &mut self.force,
            Channel::Displacement => &mut self.displacement,
        }
    }

    pub fn time(&self, k: usize) -> S {
        S::from_count(k) * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = S> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    /// Checks equal channel lengths and a positive sample interval.
    pub fn check(&self) -> Result<()> {
        if !(self.dt > S::zero()) {
            return Err(Error::NonPositiveField("dt"));
        }
        let n = self.len();
        if Channel::ALL.iter().any(|&c| self.channel(c).len() != n) {
            return Err(Error::Precondition(
                "trace channels differ in length".into(),
            ));
        }
        Ok(())
    }
}
