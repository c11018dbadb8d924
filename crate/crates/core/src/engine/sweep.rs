use serde::{Deserialize, Serialize};

use super::{simulate, SimConfig};
use crate::drive::DriveProgram;
use crate::error::{Error, Result};
use crate::model::{Channel, DeviceParams, Trace};
use crate::scalar::Scalar;

/// How per-parameter value lists are combined into sweep members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    /// Every combination, row-major (last axis varies fastest).
    #[default]
    Cartesian,
    /// The i-th member takes the i-th value of every axis.
    Paired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis<S> {
    /// Dotted parameter path, e.g. `thermal.r_abs`.
    pub path: String,
    pub values: Vec<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec<S> {
    pub axes: Vec<SweepAxis<S>>,
    #[serde(default)]
    pub mode: Combination,
}

impl<S: Scalar> SweepSpec<S> {
    /// Scales each listed parameter of `base` by every factor.
    pub fn relative(base: &DeviceParams<S>, paths: &[&str], factors: &[S]) -> Result<Self> {
        let axes = paths
            .iter()
            .map(|&p| {
                let v = base.get(p)?;
                Ok(SweepAxis {
                    path: p.to_owned(),
                    values: factors.iter().map(|&f| f * v).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            axes,
            mode: Combination::Cartesian,
        })
    }

    /// Artifact default uncertainty band: +-10% on the four most influential constants.
    pub fn default_uncertainty(base: &DeviceParams<S>) -> Result<Self> {
        Self::relative(
            base,
            &[
                "thermal.r_abs",
                "thermal.c_abs",
                "thermal.kappa",
                "geometry.d_aperture",
            ],
            &[S::lit(0.9), S::one(), S::lit(1.1)],
        )
    }

    /// Expands the spec into concrete devices in deterministic order.
    pub fn members(&self, base: &DeviceParams<S>) -> Result<Vec<DeviceParams<S>>> {
        if self.axes.is_empty() {
            return Err(Error::Precondition(
                "sweep needs at least one parameter".into(),
            ));
        }
        for axis in &self.axes {
            base.get(&axis.path)?;
            if axis.values.is_empty() {
                return Err(Error::Precondition(format!(
                    "sweep axis `{}` has no values",
                    axis.path
                )));
            }
        }
        match self.mode {
            Combination::Paired => {
                let n = self.axes[0].values.len();
                if self.axes.iter().any(|a| a.values.len() != n) {
                    return Err(Error::Precondition(
                        "paired sweep axes must have equal lengths".into(),
                    ));
                }
                (0..n)
                    .map(|i| {
                        self.axes
                            .iter()
                            .try_fold(*base, |d, a| d.with(&a.path, a.values[i]))
                    })
                    .collect()
            }
            Combination::Cartesian => {
                let mut out = vec![*base];
                for axis in &self.axes {
                    let mut next = Vec::with_capacity(out.len() * axis.values.len());
                    for d in &out {
                        for &v in &axis.values {
                            next.push(d.with(&axis.path, v)?);
                        }
                    }
                    out = next;
                }
                Ok(out)
            }
        }
    }
}

/// Pointwise band over a family of simulations plus the base trace.
///
/// `min` and `max` span the sweep members only; they bound `nominal` whenever
/// the base device is itself one of the members.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<S> {
    pub nominal: Trace<S>,
    pub min: Trace<S>,
    pub max: Trace<S>,
    pub members: usize,
}

impl<S: Scalar> Envelope<S> {
    fn seed(nominal: Trace<S>, first: &Trace<S>) -> Self {
        Self {
            nominal,
            min: first.clone(),
            max: first.clone(),
            members: 1,
        }
    }

    fn absorb(&mut self, t: &Trace<S>) {
        for ch in Channel::ALL {
            let src = t.channel(ch);
            for (m, &v) in self.min.channel_mut(ch).iter_mut().zip(src) {
                *m = m.min(v);
            }
            for (m, &v) in self.max.channel_mut(ch).iter_mut().zip(src) {
                *m = m.max(v);
            }
        }
        self.members += 1;
    }
}

/// Simulates every sweep member and reduces them to a pointwise envelope.
///
/// With `threads > 1` members run on scoped worker threads; the reduction
/// is order-independent so the result does not depend on scheduling.
pub fn run_sweep<S: Scalar>(
    base: &DeviceParams<S>,
    spec: &SweepSpec<S>,
    prog: &DriveProgram<S>,
    cfg: &SimConfig<S>,
    threads: usize,
) -> Result<Envelope<S>> {
    let members = spec.members(base)?;
    let nominal = simulate(base, prog, cfg)?;
    let traces = simulate_all(&members, prog, cfg, threads)?;
    let mut iter = traces.iter();
    let first = iter.next().ok_or(Error::EmptyTrace)?;
    let mut env = Envelope::seed(nominal, first);
    for t in iter {
        env.absorb(t);
    }
    Ok(env)
}

fn simulate_all<S: Scalar>(
    members: &[DeviceParams<S>],
    prog: &DriveProgram<S>,
    cfg: &SimConfig<S>,
    threads: usize,
) -> Result<Vec<Trace<S>>> {
    if threads <= 1 || members.len() <= 1 {
        return members.iter().map(|d| simulate(d, prog, cfg)).collect();
    }
    let chunk = members.len().div_ceil(threads);
    let results: Vec<Result<Vec<Trace<S>>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = members
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|d| simulate(d, prog, cfg)).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(members.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
