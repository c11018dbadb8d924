use hled::analysis::pp_decompose;
use hled::drive::Pulse;
use hled::{
    derive_defaults, expand_periodic, simulate, Channel, Device, PeriodicDrive, Program, SimConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn device() -> Device {
    derive_defaults()
}

/// Up to four non-overlapping pulses with arbitrary (off-grid) edges.
fn random_program(seed: u64, t_end: f64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let slot = t_end / n as f64;
    let pulses = (0..n)
        .map(|i| {
            let start = i as f64 * slot + rng.gen_range(0.0..0.3) * slot;
            Pulse {
                t_start: start,
                duration: rng.gen_range(0.1..0.6) * slot,
                power: rng.gen_range(0.0..2.5),
            }
        })
        .collect();
    Program::new(pulses, t_end).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn absorbed_energy_is_stored_or_conducted(seed in any::<u64>()) {
        let d = device();
        let prog = random_program(seed, 0.4);
        let tr = simulate(&d, &prog, &SimConfig::new(0.4)).unwrap();
        let e_in = d.thermal.epsilon * prog.emitted_energy_until(0.4);
        prop_assume!(e_in > 1e-6);
        let stored = d.thermal.c_abs * tr.t_abs[tr.len() - 1];
        let lost = tr.t_abs.windows(2).map(|w| 0.5 * (w[0] + w[1]) * tr.dt).sum::<f64>() / d.thermal.r_abs;
        prop_assert!(((stored + lost) - e_in).abs() <= 1e-6 * e_in);
    }

    #[test]
    fn thermal_node_superposes(
        w1 in 0.005f64..0.1, w2 in 0.005f64..0.1, gap in 0.0f64..0.2,
        p1 in 0.1f64..2.5, p2 in 0.1f64..2.5,
    ) {
        let d = device();
        let t_end = 0.5;
        let a = Pulse { t_start: 0.01, duration: w1, power: p1 };
        let b = Pulse { t_start: 0.01 + w1 + gap, duration: w2, power: p2 };
        let run = |ps: Vec<Pulse<f64>>| simulate(&d, &Program::new(ps, t_end).unwrap(), &SimConfig::new(t_end)).unwrap();
        let (sa, sb, both) = (run(vec![a]), run(vec![b]), run(vec![a, b]));
        let scale = both.t_abs.iter().cloned().fold(0.0, f64::max);
        for k in 0..both.len() {
            prop_assert!((sa.t_abs[k] + sb.t_abs[k] - both.t_abs[k]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn repeated_runs_are_bit_identical(seed in any::<u64>()) {
        let d = device();
        let prog = random_program(seed, 0.3);
        let cfg = SimConfig::new(0.3).with_record_every(3);
        prop_assert_eq!(simulate(&d, &prog, &cfg).unwrap(), simulate(&d, &prog, &cfg).unwrap());
    }

    #[test]
    fn f32_tracks_f64(seed in any::<u64>()) {
        let d = device();
        let prog = random_program(seed, 0.3);
        let t64 = simulate(&d, &prog, &SimConfig::new(0.3).with_record_every(10)).unwrap();
        let d32 = derive_defaults::<f32>();
        let pulses: Vec<Pulse<f32>> = prog
            .pulses()
            .iter()
            .map(|p| Pulse { t_start: p.t_start as f32, duration: p.duration as f32, power: p.power as f32 })
            .collect();
        let prog32 = hled::Program32::new(pulses, 0.3).unwrap();
        let t32 = simulate(&d32, &prog32, &SimConfig::new(0.3f32).with_record_every(10)).unwrap();
        prop_assert_eq!(t32.len(), t64.len());
        let scale = t64.force.iter().cloned().fold(1e-6, f64::max);
        for k in 0..t64.len() {
            prop_assert!((t32.force[k] as f64 - t64.force[k]).abs() <= 1e-3 * scale);
        }
    }
}

#[test]
fn slow_force_component_is_rate_independent_at_high_rates() {
    let d = device();
    let f0: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&f| {
            let prog = expand_periodic(&PeriodicDrive {
                rate_f: f,
                duty: 0.2,
                power: 2.5,
                n_pulses: (5.0 * f) as usize,
            })
            .unwrap();
            let tr = simulate(
                &d,
                &prog,
                &SimConfig::new(prog.t_end()).with_record_every(10),
            )
            .unwrap();
            pp_decompose(&tr, Channel::Force, f).unwrap().f0
        })
        .collect();
    let lo = f0.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = f0.iter().cloned().fold(0.0, f64::max);
    assert!((hi - lo) / lo < 0.10, "{f0:?}");
}

#[test]
fn ripple_matches_periodic_steady_state_closed_form() {
    let d = device();
    let (f, duty, p) = (50.0, 0.2, 2.5);
    let prog = expand_periodic(&PeriodicDrive { rate_f: f, duty, power: p, n_pulses: 250 }).unwrap();
    let tr = simulate(&d, &prog, &SimConfig::new(prog.t_end()).with_record_every(10)).unwrap();
    let pp = pp_decompose(&tr, Channel::Force, f).unwrap();

    // square-wave drive of a first-order node: T_max = T_ss (1 - a) / (1 - a b), T_min = b T_max
    let tau = d.thermal.tau();
    let a = (-duty / f / tau).exp();
    let b = (-(1.0 - duty) / f / tau).exp();
    let t_ss = d.thermal.epsilon * p * d.thermal.r_abs;
    let t_max = t_ss * (1.0 - a) / (1.0 - a * b);
    let newtons_per_kelvin = d.gas.p0 * d.geometry.aperture_area() / d.gas.t0 * d.thermal.kappa;
    let oracle = newtons_per_kelvin * t_max * (1.0 - b);
    assert!((pp.fpp - oracle).abs() / oracle < 1e-4, "{} vs {oracle}", pp.fpp);
    assert!((oracle * 1e3 - 14.32).abs() < 0.01);
}
