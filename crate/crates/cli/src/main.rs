mod error;
mod figures;
mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hled::calibration::{fit_to_trace, FitTarget, FreeParam};
use hled::drive::LedMap;
use hled::engine::DEFAULT_DT;
use hled::{
    expand_periodic, run_sweep, simulate, Channel, Device, PeriodicDrive, Program, SimConfig,
    SweepSpec,
};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "hled",
    version,
    about = "Simulate and calibrate light-driven thermopneumatic haptic actuators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write the trace as CSV
    Simulate {
        /// Device JSON; the calibrated default device when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        drive: DriveArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Output CSV (stdout when omitted or `-`)
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Regenerate the data behind a reference figure
    Figure {
        /// fig2b, fig2c, fig2d, fig3a, fig3b, thermal or perceptual
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a parameter sweep and write the pointwise envelope
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sweep JSON; +-10% on r_abs, c_abs, kappa and d_aperture when omitted
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// Comma-separated output columns, e.g. F_N,z_m
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "P_opt_W,T_abs_C,T_air_C,dP_Pa,F_N,z_m"
        )]
        channels: Vec<String>,
        #[command(flatten)]
        drive: DriveArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fit device constants to a measured trace
    Fit {
        /// CSV with a `t_s` column and at least `F_N`; other trace columns are used when present
        #[arg(long)]
        data: PathBuf,
        /// Starting device JSON; the calibrated default when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated constants to fit: r_abs, c_abs, kappa, k_eff
        #[arg(long, value_delimiter = ',', default_value = "r_abs,c_abs,kappa,k_eff")]
        free: Vec<String>,
        #[command(flatten)]
        drive: DriveArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Drive program flags, SI units.
#[derive(Args, Debug, Clone)]
struct DriveArgs {
    /// Single pulse width, s
    #[arg(long, conflicts_with = "rate")]
    pulse: Option<f64>,
    /// Pulse rate, Hz
    #[arg(long, requires_all = ["duty", "n_pulses"])]
    rate: Option<f64>,
    /// Fraction of each period the LED is on
    #[arg(long)]
    duty: Option<f64>,
    #[arg(long)]
    n_pulses: Option<usize>,
    /// Emitted optical power, W
    #[arg(long, conflicts_with = "current")]
    power: Option<f64>,
    /// LED drive current, A (mapped to optical power)
    #[arg(long)]
    current: Option<f64>,
    /// Program end, s; the drive end plus five cooling time constants when omitted
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    /// Integration step, s
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Keep every n-th step
    #[arg(long, default_value_t = 10)]
    record_every: usize,
}

impl DriveArgs {
    fn program(&self, device: &Device) -> CliResult<Program> {
        let power = match (self.power, self.current) {
            (Some(p), _) => p,
            (None, Some(i)) => LedMap::default().power_from_current(i)?,
            (None, None) => return Err(CliError::Usage("give --power or --current".into())),
        };
        let prog = match (self.pulse, self.rate) {
            (Some(w), _) => Program::single(w, power, w)?,
            (None, Some(f)) => expand_periodic(&PeriodicDrive {
                rate_f: f,
                duty: self.duty.unwrap_or_default(),
                power,
                n_pulses: self.n_pulses.unwrap_or_default(),
            })?,
            (None, None) => return Err(CliError::Usage("give --pulse or --rate".into())),
        };
        let t_end = self
            .t_end
            .unwrap_or(prog.t_end() + 5.0 * device.thermal.tau());
        Ok(prog.with_t_end(t_end)?)
    }
}

fn threads() -> usize {
    std::env::var("HLED_SIM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

fn sim_config(prog: &Program, sim: &SimArgs) -> SimConfig<f64> {
    SimConfig::new(prog.t_end())
        .with_dt(sim.dt)
        .with_record_every(sim.record_every)
}

fn cmd_simulate(
    config: Option<&Path>,
    drive: &DriveArgs,
    sim: &SimArgs,
    output: Option<&Path>,
) -> CliResult<()> {
    let device = io::load_device(config)?;
    let prog = drive.program(&device)?;
    let trace = simulate(&device, &prog, &sim_config(&prog, sim))?;
    trace
        .check()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    io::emit(output, &io::trace_csv(&trace, &device.gas)?)
}

fn cmd_figure(name: &str, out_dir: &Path, config: Option<&Path>) -> CliResult<()> {
    if !figures::NAMES.contains(&name) {
        return Err(CliError::UnknownFigure(name.to_owned()));
    }
    let device = io::load_device(config)?;
    let fig = figures::generate(name, &device, threads())?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    for (file, bytes) in &fig.files {
        io::write_atomic(&out_dir.join(file), bytes)?;
    }
    io::write_atomic(
        &out_dir.join(format!("{name}_manifest.json")),
        &io::to_sorted_json(&fig.manifest)?,
    )
}

fn cmd_sweep(
    config: Option<&Path>,
    sweep: Option<&Path>,
    channels: &[String],
    drive: &DriveArgs,
    sim: &SimArgs,
    output: Option<&Path>,
) -> CliResult<()> {
    let device = io::load_device(config)?;
    let spec: SweepSpec<f64> = match sweep {
        Some(p) => io::read_json(p)?,
        None => SweepSpec::default_uncertainty(&device)?,
    };
    let chans: Vec<Channel> = channels
        .iter()
        .map(|c| {
            io::channel_from_column(c.trim())
                .ok_or_else(|| CliError::Usage(format!("unknown channel `{c}`")))
        })
        .collect::<CliResult<_>>()?;
    let prog = drive.program(&device)?;
    let env = run_sweep(&device, &spec, &prog, &sim_config(&prog, sim), threads())?;

    let mut header = vec!["t_s".to_owned()];
    for &ch in &chans {
        for tag in ["min", "nom", "max"] {
            header.push(format!("{}_{tag}", io::column_name(ch)));
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..env.nominal.len()).map(|k| {
        let mut row = vec![env.nominal.time(k)];
        for &ch in &chans {
            for t in [&env.min, &env.nominal, &env.max] {
                row.push(io::to_column(ch, t.channel(ch)[k], &device.gas));
            }
        }
        row
    });
    io::emit(output, &io::table_csv(&header, rows)?)
}

fn cmd_fit(
    data: &Path,
    config: Option<&Path>,
    free: &[String],
    drive: &DriveArgs,
    output: Option<&Path>,
) -> CliResult<()> {
    let init = io::load_device(config)?;
    let table = io::read_table(data)?;
    if table.rows() == 0 {
        return Err(CliError::parse(data, "no data rows"));
    }
    let t = table
        .column("t_s")
        .ok_or_else(|| CliError::parse(data, "missing `t_s` column"))?;
    if table.column("F_N").is_none() {
        return Err(CliError::parse(data, "missing `F_N` column"));
    }
    let dt = io::uniform_dt(data, t)?;
    let series: Vec<(Channel, Vec<f64>)> = table
        .header
        .iter()
        .zip(&table.columns)
        .filter_map(|(h, col)| io::channel_from_column(h).map(|ch| (ch, col)))
        .filter(|(ch, _)| *ch != Channel::POpt)
        .map(|(ch, col)| {
            (
                ch,
                col.iter()
                    .map(|&v| io::from_column(ch, v, &init.gas))
                    .collect(),
            )
        })
        .collect();
    let target = FitTarget::new(dt, series)?;
    let free: Vec<FreeParam> = free
        .iter()
        .map(|n| {
            FreeParam::from_name(n.trim())
                .ok_or_else(|| CliError::Usage(format!("unknown fit parameter `{n}`")))
        })
        .collect::<CliResult<_>>()?;

    let mut drive = drive.clone();
    drive.t_end.get_or_insert(t[t.len() - 1]);
    let prog = drive.program(&init)?;
    let fit = fit_to_trace(&target, &prog, &free, &init)?;
    io::emit(output, &io::to_sorted_json(&fit)?)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            config,
            drive,
            sim,
            output,
        } => cmd_simulate(config.as_deref(), &drive, &sim, output.as_deref()),
        Command::Figure {
            name,
            out_dir,
            config,
        } => cmd_figure(&name, &out_dir, config.as_deref()),
        Command::Sweep {
            config,
            sweep,
            channels,
            drive,
            sim,
            output,
        } => cmd_sweep(
            config.as_deref(),
            sweep.as_deref(),
            &channels,
            &drive,
            &sim,
            output.as_deref(),
        ),
        Command::Fit {
            data,
            config,
            free,
            drive,
            output,
        } => cmd_fit(&data, config.as_deref(), &free, &drive, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(2),
    }
}
