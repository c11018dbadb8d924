//! File formats: device JSON, trace and table CSV, sorted JSON, atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hled::model::GasReference;
use hled::{derive_defaults, Channel, Device, Series};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: [&str; 7] = [
    "t_s", "P_opt_W", "T_abs_C", "T_air_C", "dP_Pa", "F_N", "z_m",
];

const KELVIN_AT_ZERO_C: f64 = 273.15;

/// CSV column name for a trace channel.
pub fn column_name(ch: Channel) -> &'static str {
    match ch {
        Channel::POpt => "P_opt_W",
        Channel::TAbs => "T_abs_C",
        Channel::TAir => "T_air_C",
        Channel::PressureDelta => "dP_Pa",
        Channel::Force => "F_N",
        Channel::Displacement => "z_m",
    }
}

pub fn channel_from_column(name: &str) -> Option<Channel> {
    Channel::ALL.into_iter().find(|&c| column_name(c) == name)
}

/// Boundary value for a channel: temperature rises become absolute Celsius.
pub fn to_column(ch: Channel, v: f64, gas: &GasReference<f64>) -> f64 {
    match ch {
        Channel::TAbs | Channel::TAir => v + gas.t0 - KELVIN_AT_ZERO_C,
        _ => v,
    }
}

pub fn from_column(ch: Channel, v: f64, gas: &GasReference<f64>) -> f64 {
    match ch {
        Channel::TAbs | Channel::TAir => v - (gas.t0 - KELVIN_AT_ZERO_C),
        _ => v,
    }
}

/// 17 significant digits, so parsing gives back the same `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn table_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(header).map_err(internal)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_num(v)))
            .map_err(internal)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn trace_csv(trace: &Series, gas: &GasReference<f64>) -> CliResult<Vec<u8>> {
    let rows = (0..trace.len()).map(|k| {
        let mut row = vec![trace.time(k)];
        row.extend(
            Channel::ALL
                .iter()
                .map(|&ch| to_column(ch, trace.channel(ch)[k], gas)),
        );
        row
    });
    table_csv(&TRACE_HEADER, rows)
}

/// A parsed numeric CSV, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::parse(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::parse(path, e))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(CliError::parse(path, "empty CSV"));
    }
    let mut columns = vec![Vec::new(); header.len()];
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::parse(path, e))?;
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::parse(path, format!("row {}: `{field}` is not a number", i + 1))
            })?;
            col.push(v);
        }
    }
    Ok(Table { header, columns })
}

/// Sample spacing of a time column, rejecting jitter beyond rounding.
pub fn uniform_dt(path: &Path, t: &[f64]) -> CliResult<f64> {
    if t.len() < 2 {
        return Err(CliError::parse(path, "need at least two samples"));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if dt.is_nan() || dt <= 0.0 || t[0].abs() > 1e-9 * dt {
        return Err(CliError::NonUniformTimeBase {
            path: path.into(),
            row: 1,
        });
    }
    for (k, &tk) in t.iter().enumerate() {
        if (tk - k as f64 * dt).abs() > 1e-6 * dt {
            return Err(CliError::NonUniformTimeBase {
                path: path.into(),
                row: k + 1,
            });
        }
    }
    Ok(dt)
}

/// Pretty JSON with keys in lexicographic order.
pub fn to_sorted_json(value: &impl Serialize) -> CliResult<Vec<u8>> {
    // serde_json's Value map is ordered by key
    let v = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut out = serde_json::to_vec_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Device from a JSON config, or the calibrated default.
pub fn load_device(path: Option<&Path>) -> CliResult<Device> {
    let device = match path {
        None => derive_defaults(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::parse(p, e))?
        }
    };
    device.validate()?;
    Ok(device)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

/// Writes via a temp file in the target directory, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Writes to `path`, or stdout when it is absent or `-`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) if p != Path::new("-") => write_atomic(p, bytes),
        _ => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}
