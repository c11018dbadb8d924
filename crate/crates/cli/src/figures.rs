//! Data behind each reference figure, regenerated from the calibrated device.

use hled::analysis::{cooling_fit, linear_fit, loglog_fit, peak_of, pp_decompose, PerceptualModel};
use hled::calibration::{anchors, derive_surface_defaults, surface_reference_drive};
use hled::pneumo::surface_rise;
use hled::{
    expand_periodic, run_sweep, simulate, Channel, Device, PeriodicDrive, Program, SimConfig,
    SweepSpec,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{column_name, table_csv, to_column, trace_csv};

pub const NAMES: [&str; 7] = [
    "fig2b",
    "fig2c",
    "fig2d",
    "fig3a",
    "fig3b",
    "thermal",
    "perceptual",
];

/// Sample spacing of written curves, s.
const RECORD_EVERY: usize = 10;

const PULSE_WIDTHS_S: [f64; 5] = [0.005, 0.010, 0.025, 0.050, 0.100];
const RATES_HZ: [f64; 6] = [5.0, 10.0, 20.0, 50.0, 100.0, 200.0];
const TRAIN_DUTY: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub quantity: String,
    pub unit: &'static str,
    pub anchor: Option<f64>,
    pub computed: f64,
    pub rel_error: Option<f64>,
    pub provenance: &'static str,
}

impl ManifestEntry {
    fn new(
        quantity: impl Into<String>,
        unit: &'static str,
        anchor: Option<f64>,
        computed: f64,
        provenance: &'static str,
    ) -> Self {
        Self {
            quantity: quantity.into(),
            unit,
            anchor,
            computed,
            rel_error: anchor.map(|a| (computed - a) / a),
            provenance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub figure: String,
    pub device: Device,
    pub files: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub files: Vec<(String, Vec<u8>)>,
    pub manifest: Manifest,
}

pub fn generate(name: &str, device: &Device, threads: usize) -> CliResult<Figure> {
    let (files, entries) = match name {
        "fig2b" => fig2b(device, threads)?,
        "fig2c" => fig2c(device)?,
        "fig2d" => fig2d(device)?,
        "fig3a" => fig3a(device)?,
        "fig3b" => fig3b(device)?,
        "thermal" => thermal(device)?,
        "perceptual" => perceptual()?,
        other => return Err(CliError::UnknownFigure(other.to_owned())),
    };
    Ok(Figure {
        manifest: Manifest {
            figure: name.to_owned(),
            device: *device,
            files: files.iter().map(|f| f.0.clone()).collect(),
            entries,
        },
        files,
    })
}

type Parts = (Vec<(String, Vec<u8>)>, Vec<ManifestEntry>);

fn pulse_trace(device: &Device, width: f64, power: f64, t_end: f64) -> CliResult<hled::Series> {
    let prog = Program::single(width, power, t_end)?;
    Ok(simulate(
        device,
        &prog,
        &SimConfig::new(t_end).with_record_every(RECORD_EVERY),
    )?)
}

fn force_csv(trace: &hled::Series) -> CliResult<Vec<u8>> {
    table_csv(
        &["t_s", "F_N"],
        (0..trace.len()).map(|k| vec![trace.time(k), trace.force[k]]),
    )
}

fn fig2b(device: &Device, threads: usize) -> CliResult<Parts> {
    let t_end = 1.5;
    let prog = Program::single(anchors::PULSE_S, anchors::POWER_W, t_end)?;
    let cfg = SimConfig::new(t_end).with_record_every(RECORD_EVERY);
    let env = run_sweep(
        device,
        &SweepSpec::default_uncertainty(device)?,
        &prog,
        &cfg,
        threads,
    )?;
    let tr = &env.nominal;
    let gas = &device.gas;

    let channels = [
        Channel::TAbs,
        Channel::TAir,
        Channel::Force,
        Channel::Displacement,
    ];
    let mut header = vec!["t_s".to_owned()];
    for ch in channels {
        for tag in ["min", "nom", "max"] {
            header.push(format!("{}_{tag}", column_name(ch)));
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..tr.len()).map(|k| {
        let mut row = vec![tr.time(k)];
        for ch in channels {
            for t in [&env.min, &env.nominal, &env.max] {
                row.push(to_column(ch, t.channel(ch)[k], gas));
            }
        }
        row
    });
    let files = vec![
        ("fig2b_trace.csv".to_owned(), trace_csv(tr, gas)?),
        ("fig2b_envelope.csv".to_owned(), table_csv(&header, rows)?),
    ];

    let pk = |ch| peak_of(tr.channel(ch)).map(|p| p.1);
    let t_abs = pk(Channel::TAbs)?;
    let t_air = pk(Channel::TAir)?;
    let force = pk(Channel::Force)?;
    let z = pk(Channel::Displacement)?;
    let off = (anchors::PULSE_S / tr.dt).round() as usize;
    let tau = cooling_fit(&tr.force[off..], tr.dt)?
        .param("tau")
        .unwrap_or(f64::NAN);
    let entries = vec![
        ManifestEntry::new(
            "peak absorber rise",
            "K",
            Some(anchors::ABSORBER_RISE_K),
            t_abs,
            "simulated absorber peak, 100 ms at 2.5 W",
        ),
        ManifestEntry::new(
            "peak absorber temperature",
            "C",
            Some(anchors::ABSORBER_PEAK_C),
            to_column(Channel::TAbs, t_abs, gas),
            "simulated absorber peak, 100 ms at 2.5 W",
        ),
        ManifestEntry::new(
            "peak air temperature",
            "C",
            Some(anchors::AIR_PEAK_C),
            to_column(Channel::TAir, t_air, gas),
            "measured cavity air peak",
        ),
        ManifestEntry::new(
            "peak blocked force",
            "N",
            Some(anchors::FORCE_N),
            force,
            "measured peak force; the ideal-gas force at a 5 mm aperture is about 0.400 N",
        ),
        ManifestEntry::new(
            "peak free displacement",
            "m",
            Some(anchors::DISPLACEMENT_M),
            z,
            "measured peak displacement",
        ),
        ManifestEntry::new(
            "cooling time constant",
            "s",
            Some(anchors::TAU_S),
            tau,
            "fit to force after light off",
        ),
    ];
    Ok((files, entries))
}

fn fig2c(device: &Device) -> CliResult<Parts> {
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for w in PULSE_WIDTHS_S {
        let tr = pulse_trace(device, w, anchors::POWER_W, 0.6)?;
        let ms = (w * 1e3).round() as u32;
        files.push((format!("fig2c_tp_{ms:03}ms.csv"), force_csv(&tr)?));
        let anchor = (w == anchors::PULSE_S).then_some(anchors::FORCE_N);
        entries.push(ManifestEntry::new(
            format!("peak force, {ms} ms pulse"),
            "N",
            anchor,
            peak_of(&tr.force)?.1,
            if anchor.is_some() {
                "measured peak force"
            } else {
                "no reference value"
            },
        ));
    }
    Ok((files, entries))
}

fn fig2d(device: &Device) -> CliResult<Parts> {
    let powers: Vec<f64> = (1..=10).map(|i| 0.25 * i as f64).collect();
    let mut rows = Vec::new();
    for &p in &powers {
        let tr = pulse_trace(device, anchors::PULSE_S, p, 0.2)?;
        rows.push(vec![p, peak_of(&tr.force)?.1]);
    }
    let top = rows[rows.len() - 1][1];
    let files = vec![(
        "fig2d_peak_force.csv".to_owned(),
        table_csv(&["P_opt_W", "F_peak_N"], rows)?,
    )];
    let entries = vec![
        ManifestEntry::new(
            "peak force at 2.5 W",
            "N",
            Some(anchors::FORCE_N),
            top,
            "measured peak force",
        ),
        ManifestEntry::new(
            "peak force at 2.5 W, gas law",
            "N",
            Some(0.400),
            top,
            "ideal-gas force at a 5 mm aperture",
        ),
    ];
    Ok((files, entries))
}

/// Steady pulse-train response at one rate: at least ten cycles and about
/// eleven cooling time constants.
fn train(device: &Device, rate: f64) -> CliResult<hled::Series> {
    let span = (11.0 * device.thermal.tau()).max(10.0 / rate);
    let n = (span * rate).ceil() as usize;
    let prog = expand_periodic(&PeriodicDrive {
        rate_f: rate,
        duty: TRAIN_DUTY,
        power: anchors::POWER_W,
        n_pulses: n,
    })?;
    Ok(simulate(
        device,
        &prog,
        &SimConfig::new(prog.t_end()).with_record_every(RECORD_EVERY),
    )?)
}

fn ripple_points(device: &Device) -> CliResult<Vec<(f64, f64, f64)>> {
    RATES_HZ
        .iter()
        .map(|&f| {
            let tr = train(device, f)?;
            let pp = pp_decompose(&tr, Channel::Force, f)?;
            Ok((f, pp.f0 * 1e3, pp.fpp * 1e3))
        })
        .collect()
}

fn fig3a(device: &Device) -> CliResult<Parts> {
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for f in RATES_HZ {
        let tr = train(device, f)?;
        let pp = pp_decompose(&tr, Channel::Force, f)?;
        files.push((format!("fig3a_rate_{:03}hz.csv", f as u32), force_csv(&tr)?));
        entries.push(ManifestEntry::new(
            format!("mean force, {f} Hz"),
            "mN",
            None,
            pp.f0 * 1e3,
            "no reference value",
        ));
        let anchor = (f == 200.0).then_some(anchors::RIPPLE_200HZ_MN);
        entries.push(ManifestEntry::new(
            format!("peak-to-peak force, {f} Hz"),
            "mN",
            anchor,
            pp.fpp * 1e3,
            if anchor.is_some() {
                "lowest measured ripple"
            } else {
                "no reference value"
            },
        ));
    }
    Ok((files, entries))
}

fn fig3b(device: &Device) -> CliResult<Parts> {
    let pts = ripple_points(device)?;
    let pairs: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.2)).collect();
    let fit = loglog_fit(&pairs)?;
    let alpha = fit.param("alpha").unwrap_or(f64::NAN);
    let beta = fit.param("beta").unwrap_or(f64::NAN);
    let line = |a: f64, b: f64, f: f64| 10f64.powf(a * f.log10() + b);
    let grid: Vec<f64> = (0..=40)
        .map(|i| 5.0 * 40f64.powf(i as f64 / 40.0))
        .collect();
    let files = vec![
        (
            "fig3b_points.csv".to_owned(),
            table_csv(
                &["f_Hz", "F0_mN", "Fpp_mN"],
                pts.iter().map(|p| vec![p.0, p.1, p.2]),
            )?,
        ),
        (
            "fig3b_fit.csv".to_owned(),
            table_csv(
                &["f_Hz", "Fpp_fit_mN", "Fpp_reference_mN"],
                grid.iter().map(|&f| {
                    vec![
                        f,
                        line(alpha, beta, f),
                        line(anchors::RIPPLE_ALPHA, anchors::RIPPLE_BETA_MN, f),
                    ]
                }),
            )?,
        ),
    ];
    let entries = vec![
        ManifestEntry::new(
            "log-log slope alpha",
            "1",
            Some(anchors::RIPPLE_ALPHA),
            alpha,
            "regression of measured ripple",
        ),
        ManifestEntry::new(
            "log-log intercept beta",
            "log10 mN",
            Some(anchors::RIPPLE_BETA_MN),
            beta,
            "regression of measured ripple",
        ),
        ManifestEntry::new(
            "log-log r2",
            "1",
            Some(0.99),
            fit.r2,
            "regression of measured ripple",
        ),
        ManifestEntry::new(
            "peak-to-peak force, 200 Hz",
            "mN",
            Some(anchors::RIPPLE_200HZ_MN),
            pts[5].2,
            "lowest measured ripple",
        ),
    ];
    Ok((files, entries))
}

fn thermal(device: &Device) -> CliResult<Parts> {
    let cal = derive_surface_defaults(device)?;
    let prog = surface_reference_drive(10.0)?;
    let tr = simulate(
        device,
        &prog,
        &SimConfig::new(prog.t_end()).with_record_every(RECORD_EVERY),
    )?;
    let bare = surface_rise(&tr.t_air, &cal.bare, tr.dt)?;
    let spread = surface_rise(&tr.t_air, &cal.spread, tr.dt)?;
    let at = |s: &[f64], t: f64| s[(t / tr.dt).round() as usize];
    let curve = |s: &[f64]| {
        table_csv(
            &["t_s", "T_surf_rise_K"],
            (0..s.len()).map(|k| vec![tr.time(k), s[k]]),
        )
    };
    let files = vec![
        ("thermal_bare.csv".to_owned(), curve(&bare)?),
        ("thermal_spread.csv".to_owned(), curve(&spread)?),
    ];
    let w = anchors::SURFACE_WINDOW_S;
    let entries = vec![
        ManifestEntry::new(
            "surface rise at 2.5 s, no spreader",
            "K",
            Some(anchors::SURFACE_RISE_BARE_K),
            at(&bare, w),
            "measured; calibration target",
        ),
        ManifestEntry::new(
            "surface rise at 2.5 s, spreader",
            "K",
            Some(anchors::SURFACE_RISE_SPREAD_K),
            at(&spread, w),
            "measured; calibration target",
        ),
        ManifestEntry::new(
            "surface rise at 10 s, spreader",
            "K",
            Some(anchors::SURFACE_RISE_SPREAD_10S_K),
            at(&spread, 10.0),
            "measured; not fitted",
        ),
        ManifestEntry::new(
            "surface conductance through membrane",
            "W/K",
            None,
            cal.bare.g_through,
            "calibrated",
        ),
        ManifestEntry::new(
            "spreader conductance",
            "W/K",
            None,
            cal.spread.g_spread,
            "calibrated",
        ),
        ManifestEntry::new(
            "surface heat capacity",
            "J/K",
            None,
            cal.bare.c_surf,
            "membrane disc over the aperture",
        ),
    ];
    Ok((files, entries))
}

fn perceptual() -> CliResult<Parts> {
    let model = PerceptualModel::<f64>::default();
    let p: Vec<f64> = (0..=25).map(|i| 100.0 * i as f64).collect();
    let i: Vec<f64> = p.iter().map(|&x| model.intensity(x)).collect();
    let fit = linear_fit(&p, &i)?;
    let files = vec![(
        "perceptual.csv".to_owned(),
        table_csv(
            &["P_opt_mW", "intensity"],
            p.iter().zip(&i).map(|(&a, &b)| vec![a, b]),
        )?,
    )];
    let entries = vec![
        ManifestEntry::new(
            "intensity slope",
            "1/mW",
            Some(anchors::INTENSITY_ALPHA),
            fit.slope,
            "magnitude-estimation regression",
        ),
        ManifestEntry::new(
            "intensity offset",
            "1",
            Some(anchors::INTENSITY_BETA),
            fit.intercept,
            "magnitude-estimation regression",
        ),
    ];
    Ok((files, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hled::derive_defaults;

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(
            generate("fig9", &derive_defaults(), 1),
            Err(CliError::UnknownFigure(n)) if n == "fig9"
        ));
    }

    #[test]
    fn perceptual_line_reproduces_coefficients() {
        let fig = generate("perceptual", &derive_defaults(), 1).unwrap();
        for e in &fig.manifest.entries {
            assert!(e.rel_error.unwrap().abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn entries_without_anchor_have_no_error() {
        let e = ManifestEntry::new("x", "N", None, 1.0, "none");
        assert_eq!(e.rel_error, None);
        let e = ManifestEntry::new("x", "N", Some(2.0), 1.0, "none");
        assert_eq!(e.rel_error, Some(-0.5));
    }
}
