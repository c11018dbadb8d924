//! Optical drive schedules and the LED current-to-power map.
//!
//! Schedule arithmetic is generic over [`Quantity`] so it can be checked in
//! exact rational arithmetic as well as in floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Quantity, Scalar};

/// Maximum LED current used in the reference experiments, A.
pub const REFERENCE_MAX_CURRENT_A: f64 = 2.4;
/// Emitted optical power at [`REFERENCE_MAX_CURRENT_A`], W.
pub const REFERENCE_MAX_POWER_W: f64 = 2.5;

fn as_f64<T: Quantity>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// One constant-power light pulse on `[t_start, t_start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse<T> {
    pub t_start: T,
    pub duration: T,
    /// Emitted optical power, W.
    pub power: T,
}

impl<T: Quantity> Pulse<T> {
    pub fn t_stop(&self) -> T {
        self.t_start + self.duration
    }

    pub fn contains(&self, t: T) -> bool {
        t >= self.t_start && t < self.t_stop()
    }

    fn check(&self) -> Result<()> {
        if !(self.duration > T::zero()) {
            return Err(Error::InvalidDrive(format!(
                "pulse duration {} must be positive",
                as_f64(self.duration)
            )));
        }
        if !(self.power >= T::zero()) {
            return Err(Error::InvalidDrive(format!(
                "pulse power {} must be non-negative",
                as_f64(self.power)
            )));
        }
        if !(self.t_start >= T::zero()) {
            return Err(Error::InvalidDrive(format!(
                "pulse start {} must be non-negative",
                as_f64(self.t_start)
            )));
        }
        Ok(())
    }
}

/// A periodic pulse train described by rate and duty cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicDrive<T> {
    /// Pulse rate, Hz.
    pub rate_f: T,
    /// On-time fraction `t_p / period`, strictly inside (0, 1).
    pub duty: T,
    /// Emitted optical power during each pulse, W.
    pub power: T,
    pub n_pulses: usize,
}

impl<T: Quantity> PeriodicDrive<T> {
    pub fn period(&self) -> T {
        T::one() / self.rate_f
    }

    pub fn pulse_width(&self) -> T {
        self.duty / self.rate_f
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate_f > T::zero()) {
            return Err(Error::InvalidDrive("pulse rate must be positive".into()));
        }
        if !(self.duty > T::zero() && self.duty < T::one()) {
            return Err(Error::InvalidDrive(format!(
                "duty {} must lie strictly inside (0, 1)",
                as_f64(self.duty)
            )));
        }
        if !(self.power >= T::zero()) {
            return Err(Error::InvalidDrive("power must be non-negative".into()));
        }
        if self.n_pulses == 0 {
            return Err(Error::InvalidDrive("need at least one pulse".into()));
        }
        Ok(())
    }
}

/// Piecewise-constant optical power schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveProgram<T> {
    pulses: Vec<Pulse<T>>,
    t_end: T,
}

impl<T: Quantity> DriveProgram<T> {
    /// Builds a program, checking ordering, overlap and the end time.
    /// Abutting pulses are allowed since intervals are half-open.
    pub fn new(pulses: Vec<Pulse<T>>, t_end: T) -> Result<Self> {
        for p in &pulses {
            p.check()?;
        }
        for w in pulses.windows(2) {
            if w[1].t_start < w[0].t_start {
                return Err(Error::InvalidDrive("pulses are not sorted by start".into()));
            }
            if w[1].t_start < w[0].t_stop() {
                return Err(Error::InvalidDrive(format!(
                    "pulse at {} overlaps the previous one",
                    as_f64(w[1].t_start)
                )));
            }
        }
        if let Some(last) = pulses.last() {
            if last.t_stop() > t_end {
                return Err(Error::InvalidDrive(format!(
                    "last pulse ends at {} after program end {}",
                    as_f64(last.t_stop()),
                    as_f64(t_end)
                )));
            }
        }
        if !(t_end >= T::zero()) {
            return Err(Error::InvalidDrive(
                "program end must be non-negative".into(),
            ));
        }
        Ok(Self { pulses, t_end })
    }

    /// One pulse starting at t = 0.
    pub fn single(duration: T, power: T, t_end: T) -> Result<Self> {
        Self::new(
            vec![Pulse {
                t_start: T::zero(),
                duration,
                power,
            }],
            t_end,
        )
    }

    /// A program with no light at all.
    pub fn dark(t_end: T) -> Result<Self> {
        Self::new(Vec::new(), t_end)
    }

    pub fn pulses(&self) -> &[Pulse<T>] {
        &self.pulses
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    /// Extends the program end, keeping the pulses.
    pub fn with_t_end(mut self, t_end: T) -> Result<Self> {
        self.t_end = t_end;
        Self::new(self.pulses, self.t_end)
    }

    /// Power of the pulse containing `t`, or zero. No range check.
    pub fn power_or_zero(&self, t: T) -> T {
        // pulses are sorted: find the last pulse starting at or before t
        let idx = self.pulses.partition_point(|p| p.t_start <= t);
        if idx == 0 {
            return T::zero();
        }
        let p = &self.pulses[idx - 1];
        if p.contains(t) {
            p.power
        } else {
            T::zero()
        }
    }

    /// Power at `t`, with `t` required to lie within `[0, t_end]`.
    pub fn power_at(&self, t: T) -> Result<T> {
        power_at(self, t)
    }

    /// Every pulse start and stop time, ascending, deduplicated.
    pub fn edges(&self) -> Vec<T> {
        let mut out: Vec<T> = Vec::with_capacity(2 * self.pulses.len());
        for p in &self.pulses {
            for e in [p.t_start, p.t_stop()] {
                if out.last().is_none_or(|&last| e > last) {
                    out.push(e);
                }
            }
        }
        out
    }

    /// Shortest pulse duration, if any pulse exists.
    pub fn shortest_pulse(&self) -> Option<T> {
        self.pulses
            .iter()
            .map(|p| p.duration)
            .fold(None, |acc, d| match acc {
                Some(a) if a <= d => Some(a),
                _ => Some(d),
            })
    }

    /// Emitted optical energy delivered over `[0, t]`, J.
    pub fn emitted_energy_until(&self, t: T) -> T {
        self.pulses.iter().fold(T::zero(), |acc, p| {
            let stop = if p.t_stop() < t { p.t_stop() } else { t };
            if stop > p.t_start {
                acc + p.power * (stop - p.t_start)
            } else {
                acc
            }
        })
    }
}

/// Expands a periodic spec: pulse `k` starts at `k / f` and lasts `duty / f`.
pub fn expand_periodic<T: Quantity>(spec: &PeriodicDrive<T>) -> Result<DriveProgram<T>> {
    spec.validate()?;
    let width = spec.pulse_width();
    let pulses = (0..spec.n_pulses)
        .map(|k| {
            let k = T::from_usize(k).ok_or_else(|| Error::InvalidDrive("pulse count".into()))?;
            Ok(Pulse {
                t_start: k / spec.rate_f,
                duration: width,
                power: spec.power,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n =
        T::from_usize(spec.n_pulses).ok_or_else(|| Error::InvalidDrive("pulse count".into()))?;
    DriveProgram::new(pulses, n / spec.rate_f)
}

/// Power of the pulse containing `t` on half-open intervals, else zero.
pub fn power_at<T: Quantity>(prog: &DriveProgram<T>, t: T) -> Result<T> {
    if !(t >= T::zero() && t <= prog.t_end) {
        return Err(Error::TimeOutOfRange {
            t: as_f64(t),
            t_end: as_f64(prog.t_end),
        });
    }
    Ok(prog.power_or_zero(t))
}

/// Optical power converted to heat in the absorber.
pub fn absorbed_power<T: Quantity>(p_l: T, epsilon: T) -> T {
    epsilon * p_l
}

/// Absorbed energy per pulse of a periodic drive, `epsilon * P * duty / f`.
pub fn per_pulse_absorbed_energy<T: Quantity>(spec: &PeriodicDrive<T>, epsilon: T) -> T {
    absorbed_power(spec.power, epsilon) * spec.pulse_width()
}

/// LED electro-optical map: linear through the origin, or a user table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedMap<S> {
    /// W per A, used when `table` is empty.
    pub slope: S,
    /// Largest accepted drive current, A.
    pub max_current: S,
    /// Optional `(current A, power W)` points, ascending in current.
    #[serde(default)]
    pub table: Vec<(S, S)>,
}

impl<S: Scalar> Default for LedMap<S> {
    fn default() -> Self {
        Self {
            slope: S::lit(REFERENCE_MAX_POWER_W) / S::lit(REFERENCE_MAX_CURRENT_A),
            max_current: S::lit(REFERENCE_MAX_CURRENT_A),
            table: Vec::new(),
        }
    }
}

impl<S: Scalar> LedMap<S> {
    pub fn power_from_current(&self, current: S) -> Result<S> {
        if !(current >= S::zero() && current <= self.max_current) {
            return Err(Error::CurrentOutOfRange {
                current: current.to_f64().unwrap_or(f64::NAN),
                max: self.max_current.to_f64().unwrap_or(f64::NAN),
            });
        }
        if self.table.is_empty() {
            return Ok(self.slope * current);
        }
        Ok(interpolate_table(&self.table, current))
    }
}

/// Piecewise-linear interpolation with linear extrapolation at both ends.
fn interpolate_table<S: Scalar>(table: &[(S, S)], x: S) -> S {
    if table.len() == 1 {
        let (x0, y0) = table[0];
        return if x0 == S::zero() { y0 } else { y0 * x / x0 };
    }
    let i = table
        .partition_point(|&(xi, _)| xi <= x)
        .clamp(1, table.len() - 1);
    let (x0, y0) = table[i - 1];
    let (x1, y1) = table[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Maps drive current to emitted power with the default linear map.
pub fn power_from_current<S: Scalar>(current: S) -> Result<S> {
    LedMap::default().power_from_current(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_rational::Ratio;
    use proptest::prelude::*;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    #[test]
    fn periodic_10hz_three_pulses() {
        let spec = PeriodicDrive {
            rate_f: q(10, 1),
            duty: q(1, 5),
            power: q(5, 2),
            n_pulses: 3,
        };
        let prog = expand_periodic(&spec).unwrap();
        let starts: Vec<Q> = prog.pulses().iter().map(|p| p.t_start).collect();
        assert_eq!(starts, vec![q(0, 1), q(1, 10), q(2, 10)]);
        assert!(prog
            .pulses()
            .iter()
            .all(|p| p.duration == q(2, 100) && p.power == q(5, 2)));
        assert_eq!(prog.t_end(), q(3, 10));
    }

    #[test]
    fn periodic_5hz_duty_point_three_is_60ms() {
        let spec = PeriodicDrive {
            rate_f: q(5, 1),
            duty: q(3, 10),
            power: q(5, 2),
            n_pulses: 1,
        };
        let prog = expand_periodic(&spec).unwrap();
        assert_eq!(prog.pulses().len(), 1);
        assert_eq!(prog.pulses()[0].duration, q(6, 100));
    }

    #[test]
    fn periodic_200hz_width_is_1ms() {
        let spec = PeriodicDrive {
            rate_f: 200.0,
            duty: 0.2,
            power: 2.5,
            n_pulses: 4,
        };
        assert_relative_eq!(spec.pulse_width(), 1e-3, max_relative = 1e-15);
        assert_eq!(expand_periodic(&spec).unwrap().pulses().len(), 4);
    }

    #[test]
    fn invalid_periodic_specs() {
        let ok = PeriodicDrive {
            rate_f: 10.0,
            duty: 0.2,
            power: 1.0,
            n_pulses: 1,
        };
        assert!(ok.validate().is_ok());
        for bad in [
            PeriodicDrive { duty: 1.0, ..ok },
            PeriodicDrive { duty: 0.0, ..ok },
            PeriodicDrive { rate_f: 0.0, ..ok },
            PeriodicDrive { n_pulses: 0, ..ok },
            PeriodicDrive { power: -1.0, ..ok },
        ] {
            assert!(matches!(expand_periodic(&bad), Err(Error::InvalidDrive(_))));
        }
    }

    #[test]
    fn current_map_anchor_points() {
        assert_relative_eq!(
            power_from_current(2.4f64).unwrap(),
            2.5,
            max_relative = 1e-15
        );
        assert_eq!(power_from_current(0.0f64).unwrap(), 0.0);
        // oracle: slope 2.5/2.4 times 1.2 A by hand
        assert_relative_eq!(
            power_from_current(1.2f64).unwrap(),
            1.25,
            max_relative = 1e-15
        );
        assert!(matches!(
            power_from_current(2.5f64),
            Err(Error::CurrentOutOfRange { .. })
        ));
        assert!(matches!(
            power_from_current(-0.1f64),
            Err(Error::CurrentOutOfRange { .. })
        ));
    }

    #[test]
    fn current_map_table_interpolates() {
        let map = LedMap {
            slope: 1.0,
            max_current: 2.4,
            table: vec![(0.0, 0.0), (1.0, 1.2), (2.4, 2.5)],
        };
        assert_relative_eq!(
            map.power_from_current(0.5).unwrap(),
            0.6,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            map.power_from_current(2.4).unwrap(),
            2.5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            map.power_from_current(1.7).unwrap(),
            1.2 + 1.3 * 0.7 / 1.4,
            max_relative = 1e-12
        );
    }

    #[test]
    fn absorbed_power_examples() {
        assert_relative_eq!(absorbed_power(2.5f64, 0.72), 1.8, max_relative = 1e-15);
        assert_eq!(absorbed_power(0.0f64, 0.72), 0.0);
        assert_eq!(absorbed_power(1.0f64, 0.5), 0.5);
        assert_eq!(absorbed_power(q(5, 2), q(72, 100)), q(9, 5));
    }

    #[test]
    fn power_at_uses_half_open_intervals() {
        let prog = DriveProgram::single(0.1f64, 2.5, 0.5).unwrap();
        assert_eq!(power_at(&prog, 0.05).unwrap(), 2.5);
        assert_eq!(power_at(&prog, 0.1).unwrap(), 0.0);
        assert_eq!(power_at(&prog, 0.3).unwrap(), 0.0);
        assert_eq!(power_at(&prog, 0.0).unwrap(), 2.5);
        assert!(matches!(
            power_at(&prog, 0.6),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            power_at(&prog, -0.1),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn abutting_pulses_do_not_double_count() {
        let prog = DriveProgram::new(
            vec![
                Pulse {
                    t_start: q(0, 1),
                    duration: q(1, 10),
                    power: q(1, 1),
                },
                Pulse {
                    t_start: q(1, 10),
                    duration: q(1, 10),
                    power: q(2, 1),
                },
            ],
            q(1, 1),
        )
        .unwrap();
        assert_eq!(prog.power_at(q(1, 10)).unwrap(), q(2, 1));
        assert_eq!(prog.edges(), vec![q(0, 1), q(1, 10), q(2, 10)]);
        assert_eq!(prog.emitted_energy_until(q(1, 1)), q(3, 10));
        // 0.1 s at 1 W plus 0.05 s at 2 W
        assert_eq!(prog.emitted_energy_until(q(15, 100)), q(2, 10));
    }

    #[test]
    fn overlapping_or_unsorted_programs_are_rejected() {
        let a = Pulse {
            t_start: 0.0,
            duration: 0.2,
            power: 1.0,
        };
        let b = Pulse {
            t_start: 0.1,
            duration: 0.2,
            power: 1.0,
        };
        assert!(DriveProgram::new(vec![a, b], 1.0).is_err());
        assert!(DriveProgram::new(vec![b, a], 1.0).is_err());
        assert!(DriveProgram::new(vec![a], 0.1).is_err());
    }

    #[test]
    fn per_pulse_energy_scales_exactly_as_inverse_rate() {
        let eps = q(72, 100);
        let energy = |f: i64| {
            per_pulse_absorbed_energy(
                &PeriodicDrive {
                    rate_f: q(f, 1),
                    duty: q(1, 5),
                    power: q(5, 2),
                    n_pulses: 1,
                },
                eps,
            )
        };
        let reference = energy(5) * q(5, 1);
        for f in [5, 10, 20, 50, 100, 200] {
            assert_eq!(energy(f) * q(f, 1), reference);
            assert_eq!(energy(f), eps * q(5, 2) * q(1, 5) / q(f, 1));
        }
    }

    proptest! {
        #[test]
        fn expanded_programs_satisfy_invariants(
            f_num in 1i64..2000,
            f_den in 1i64..10,
            duty_num in 1i64..99,
            p_num in 0i64..300,
            n in 1usize..200,
        ) {
            let spec = PeriodicDrive {
                rate_f: q(f_num, f_den),
                duty: q(duty_num, 100),
                power: q(p_num, 100),
                n_pulses: n,
            };
            let prog = expand_periodic(&spec).unwrap();
            prop_assert_eq!(prog.pulses().len(), n);
            // re-validate through the public constructor
            let again = DriveProgram::new(prog.pulses().to_vec(), prog.t_end());
            prop_assert!(again.is_ok());
            let total = prog.emitted_energy_until(prog.t_end());
            prop_assert_eq!(total, spec.power * spec.pulse_width() * q(n as i64, 1));
        }

        #[test]
        fn expanded_float_programs_satisfy_invariants(
            f in 0.5f64..500.0,
            duty in 0.01f64..0.99,
            n in 1usize..100,
        ) {
            let spec = PeriodicDrive { rate_f: f, duty, power: 1.0, n_pulses: n };
            let prog = expand_periodic(&spec).unwrap();
            prop_assert_eq!(prog.pulses().len(), n);
        }
    }
}
