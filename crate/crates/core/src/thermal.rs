//! Single-node photoabsorber model and the quasi-static air coupling.
//!
//! All temperatures are rises above ambient. Under constant absorbed power
//! the absorber relaxes exponentially toward `epsilon * P_L * R` with time
//! constant `tau = R * C`.

use crate::model::ThermalParams;
use crate::scalar::Scalar;

/// Absorber state, as a rise above ambient.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermalState<S> {
    pub dt_abs: S,
}

/// Closed-form absorber rise after `t` seconds of constant emitted power
/// `p_l`, starting from `dt_init`.
pub fn t_abs_step<S: Scalar>(t: S, p_l: S, thermal: &ThermalParams<S>, dt_init: S) -> S {
    let decay = (-t / thermal.tau()).exp();
    thermal.epsilon * p_l * thermal.r_abs * (S::one() - decay) + dt_init * decay
}

/// Time derivative of the absorber rise, K/s, for absorbed power `p_abs`.
pub fn thermal_rhs<S: Scalar>(state: ThermalState<S>, p_abs: S, thermal: &ThermalParams<S>) -> S {
    (p_abs - state.dt_abs / thermal.r_abs) / thermal.c_abs
}

/// Cavity air rise seen for a given absorber rise.
pub fn air_rise_from_abs<S: Scalar>(dt_abs: S, kappa: S) -> S {
    kappa * dt_abs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(r: f64, tau: f64) -> ThermalParams<f64> {
        ThermalParams {
            r_abs: r,
            c_abs: tau / r,
            kappa: 0.19,
            epsilon: 0.72,
        }
    }

    #[test]
    fn steady_state_is_absorbed_power_times_resistance() {
        let th = params(862.0, 0.44);
        // oracle: 0.72 * 2.5 * 862 by hand
        assert_relative_eq!(
            t_abs_step(44.0, 2.5, &th, 0.0),
            1551.6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn hundred_ms_pulse_reaches_about_315_k() {
        let th = params(862.0, 0.44);
        let rise = t_abs_step(0.1, 2.5, &th, 0.0);
        assert!((rise - 315.5).abs() < 0.2, "{rise}");
        // 25 C ambient puts the absorber near 340 C
        assert!((rise + 25.0 - 340.6).abs() < 0.5);
    }

    #[test]
    fn initial_condition_is_returned_at_t0() {
        let th = params(862.0, 0.44);
        assert_eq!(t_abs_step(0.0, 2.5, &th, 7.0), 7.0);
    }

    #[test]
    fn rhs_examples() {
        let th = ThermalParams {
            r_abs: 862.0,
            c_abs: 5.104e-4,
            kappa: 0.19,
            epsilon: 0.72,
        };
        // oracle: P / C = 1.8 / 5.104e-4
        assert_relative_eq!(
            thermal_rhs(ThermalState { dt_abs: 0.0 }, 1.8, &th),
            3526.645768,
            max_relative = 1e-9
        );
        // oracle: -dT / (R C) = -100 / (862 * 5.104e-4)
        assert_relative_eq!(
            thermal_rhs(ThermalState { dt_abs: 100.0 }, 0.0, &th),
            -227.290_910_545_570_9,
            max_relative = 1e-6
        );
        let ss = ThermalState {
            dt_abs: 0.72 * 2.5 * 862.0f64,
        };
        assert!(thermal_rhs(ss, 0.72 * 2.5, &th).abs() < 1e-9);
    }

    #[test]
    fn air_coupling() {
        let air = air_rise_from_abs(315.5f64, 60.0 / 315.5);
        assert_relative_eq!(air, 60.0, max_relative = 1e-14);
        assert!((air + 25.0 - 85.0).abs() < 1e-9);
        assert_eq!(air_rise_from_abs(0.0, 0.3), 0.0);
        assert_eq!(air_rise_from_abs(100.0, 0.5), 50.0);
    }

    #[test]
    fn cooling_is_log_affine_with_slope_minus_inverse_tau() {
        let th = params(862.0, 0.44);
        let t0 = 100.0;
        let samples: Vec<(f64, f64)> = (0..50)
            .map(|k| {
                let t = k as f64 * 0.02;
                (t, t_abs_step(t, 0.0, &th, t0).ln())
            })
            .collect();
        for w in samples.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            assert_relative_eq!(slope, -1.0 / 0.44, max_relative = 1e-9);
        }
    }

    #[test]
    fn generic_over_f32() {
        let th = ThermalParams::<f32> {
            r_abs: 862.0,
            c_abs: 0.44 / 862.0,
            kappa: 0.19,
            epsilon: 0.72,
        };
        let rise = t_abs_step(0.1f32, 2.5, &th, 0.0);
        assert!((rise - 315.43).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn step_response_is_linear_in_power(
            t in 0.0f64..5.0,
            p in 0.0f64..10.0,
            r in 10.0f64..5000.0,
            tau in 0.01f64..5.0,
        ) {
            let th = params(r, tau);
            let one = t_abs_step(t, p, &th, 0.0);
            let two = t_abs_step(t, 2.0 * p, &th, 0.0);
            prop_assert!((two - 2.0 * one).abs() <= 1e-12 * two.abs().max(1e-300));
        }

        #[test]
        fn heating_rises_and_cooling_falls(
            r in 10.0f64..5000.0,
            tau in 0.01f64..5.0,
            p in 0.01f64..10.0,
        ) {
            let th = params(r, tau);
            let mut prev_up = -1.0;
            let mut prev_down = f64::INFINITY;
            for k in 1..200 {
                let t = k as f64 * tau / 50.0;
                let up = t_abs_step(t, p, &th, 0.0);
                let down = t_abs_step(t, 0.0, &th, 50.0);
                prop_assert!(up > prev_up);
                prop_assert!(down < prev_down);
                prev_up = up;
                prev_down = down;
            }
        }
    }
}
