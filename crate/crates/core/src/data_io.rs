//! File formats: scenario forecasts, frequency archives, plans, envelopes,
//! traces and reports.
//!
//! Everything tabular is plain CSV (UTF-8, decimal points, header row
//! required); plan and envelope files carry a small `# key=value` preamble.
//! Floats are written with Rust's shortest round-trip formatting, so
//! `read(write(x))` reproduces `x` exactly. Readers never panic on malformed
//! input: every defect is reported with its 1-based data-row number.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::budgets::{LoadScenarios, TimeGrid};
use crate::freq_stats::{FrequencyEnvelope, FrequencyRecord};
use crate::simulator::{HorizonReport, SimulationTrace};

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Error)]
pub enum DataIoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    Row {
        path: String,
        row: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}: JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl DataIoError {
    fn row(path: &Path, row: usize, message: impl Into<String>) -> Self {
        Self::Row {
            path: path.display().to_string(),
            row,
            message: message.into(),
        }
    }

    fn format(path: &Path, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, DataIoError> {
    fs::read_to_string(path).map_err(|source| DataIoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_string(path: &Path, content: &str) -> Result<(), DataIoError> {
    fs::write(path, content).map_err(|source| DataIoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_f64(path: &Path, row: usize, field: &str, value: &str) -> Result<f64, DataIoError> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| DataIoError::row(path, row, format!("cannot parse {field} from '{value}'")))?;
    if !v.is_finite() {
        return Err(DataIoError::row(path, row, format!("non-finite {field}")));
    }
    Ok(v)
}

fn parse_i64(path: &Path, row: usize, field: &str, value: &str) -> Result<i64, DataIoError> {
    value
        .trim()
        .parse()
        .map_err(|_| DataIoError::row(path, row, format!("cannot parse {field} from '{value}'")))
}

/// Split file content into (preamble key=value pairs, header line, data rows).
fn split_csv<'a>(
    path: &Path,
    content: &'a str,
) -> Result<(Vec<(&'a str, &'a str)>, &'a str, Vec<&'a str>), DataIoError> {
    let mut preamble = Vec::new();
    let mut header = None;
    let mut rows = Vec::new();
    for line in content.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| DataIoError::format(path, format!("malformed preamble '{trimmed}'")))?;
            preamble.push((k.trim(), v.trim()));
        } else if header.is_none() {
            header = Some(trimmed);
        } else {
            rows.push(trimmed);
        }
    }
    let header = header.ok_or_else(|| DataIoError::format(path, "missing header row"))?;
    Ok((preamble, header, rows))
}

fn expect_header(path: &Path, got: &str, want: &str) -> Result<(), DataIoError> {
    let norm = |s: &str| {
        s.split(',')
            .map(|c| c.trim().to_ascii_lowercase())
            .collect::<Vec<_>>()
    };
    if norm(got) != norm(want) {
        return Err(DataIoError::format(
            path,
            format!("expected header '{want}', got '{got}'"),
        ));
    }
    Ok(())
}

fn fields<'a>(
    path: &Path,
    row: usize,
    line: &'a str,
    expected: usize,
) -> Result<Vec<&'a str>, DataIoError> {
    let cols: Vec<&str> = line.split(',').collect();
    if cols.len() != expected {
        return Err(DataIoError::row(
            path,
            row,
            format!("expected {expected} columns, got {}", cols.len()),
        ));
    }
    Ok(cols)
}

// ---------------------------------------------------------------------------
// forecast scenarios: slot,l_hat_kw,l_up_kw,l_down_kw
// ---------------------------------------------------------------------------

pub const FORECAST_HEADER: &str = "slot,l_hat_kw,l_up_kw,l_down_kw";

pub fn load_forecast(path: &Path, grid: &TimeGrid) -> Result<LoadScenarios, DataIoError> {
    let content = read_to_string(path)?;
    let (_, header, rows) = split_csv(path, &content)?;
    expect_header(path, header, FORECAST_HEADER)?;
    if rows.len() != grid.slots() {
        return Err(DataIoError::format(
            path,
            format!("expected {} data rows, got {}", grid.slots(), rows.len()),
        ));
    }
    let mut hat = Vec::with_capacity(rows.len());
    let mut up = Vec::with_capacity(rows.len());
    let mut down = Vec::with_capacity(rows.len());
    for (i, line) in rows.iter().enumerate() {
        let row = i + 1;
        let cols = fields(path, row, line, 4)?;
        let slot = parse_i64(path, row, "slot", cols[0])?;
        if slot != i as i64 {
            return Err(DataIoError::row(
                path,
                row,
                format!("slot index {slot}, expected {i} (0-based, ascending)"),
            ));
        }
        let l_hat = parse_f64(path, row, "l_hat_kw", cols[1])?;
        let l_up = parse_f64(path, row, "l_up_kw", cols[2])?;
        let l_down = parse_f64(path, row, "l_down_kw", cols[3])?;
        if !(l_down <= l_hat && l_hat <= l_up) {
            return Err(DataIoError::row(
                path,
                row,
                format!("need l_down <= l_hat <= l_up, got {l_down} / {l_hat} / {l_up}"),
            ));
        }
        hat.push(l_hat);
        up.push(l_up);
        down.push(l_down);
    }
    LoadScenarios::new(hat, up, down, *grid)
        .map_err(|e| DataIoError::format(path, e.to_string()))
}

pub fn write_forecast(path: &Path, scen: &LoadScenarios) -> Result<(), DataIoError> {
    let mut out = String::new();
    out.push_str(FORECAST_HEADER);
    out.push('\n');
    for k in 0..scen.grid().slots() {
        writeln!(
            out,
            "{k},{},{},{}",
            scen.forecast()[k],
            scen.upper()[k],
            scen.lower()[k]
        )
        .expect("string write");
    }
    write_string(path, &out)
}

// ---------------------------------------------------------------------------
// frequency archive: epoch_seconds,frequency_hz (one or more UTC days)
// ---------------------------------------------------------------------------

pub const FREQUENCY_HEADER: &str = "epoch_seconds,frequency_hz";

/// Load a frequency archive, splitting samples into one record per UTC day.
pub fn load_frequency(path: &Path) -> Result<Vec<FrequencyRecord>, DataIoError> {
    let content = read_to_string(path)?;
    let (_, header, rows) = split_csv(path, &content)?;
    expect_header(path, header, FREQUENCY_HEADER)?;
    if rows.is_empty() {
        return Err(DataIoError::format(path, "no samples"));
    }
    let mut samples: Vec<(i64, f64)> = Vec::with_capacity(rows.len());
    for (i, line) in rows.iter().enumerate() {
        let row = i + 1;
        let cols = fields(path, row, line, 2)?;
        let t = parse_i64(path, row, "epoch_seconds", cols[0])?;
        let f = parse_f64(path, row, "frequency_hz", cols[1])?;
        if let Some((prev, _)) = samples.last() {
            if t <= *prev {
                return Err(DataIoError::row(
                    path,
                    row,
                    format!("timestamps must be strictly increasing ({t} after {prev})"),
                ));
            }
        }
        samples.push((t, f));
    }
    let mut records = Vec::new();
    let mut day_start = samples[0].0.div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY;
    let mut ts = Vec::new();
    let mut fs_ = Vec::new();
    for (t, f) in samples {
        let day = t.div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY;
        if day != day_start && !ts.is_empty() {
            records.push(
                FrequencyRecord::new(day_start, std::mem::take(&mut ts), std::mem::take(&mut fs_))
                    .map_err(|e| DataIoError::format(path, e.to_string()))?,
            );
            day_start = day;
        }
        ts.push(t);
        fs_.push(f);
    }
    if !ts.is_empty() {
        records.push(
            FrequencyRecord::new(day_start, ts, fs_)
                .map_err(|e| DataIoError::format(path, e.to_string()))?,
        );
    }
    Ok(records)
}

pub fn write_frequency(path: &Path, records: &[FrequencyRecord]) -> Result<(), DataIoError> {
    let mut out = String::new();
    out.push_str(FREQUENCY_HEADER);
    out.push('\n');
    for rec in records {
        for (t, f) in rec.timestamps().iter().zip(rec.frequency_hz()) {
            writeln!(out, "{t},{f}").expect("string write");
        }
    }
    write_string(path, &out)
}

// ---------------------------------------------------------------------------
// day-ahead plan: preamble + slot,f_kw,p_hat_kw
// ---------------------------------------------------------------------------

pub const PLAN_HEADER: &str = "slot,f_kw,p_hat_kw";

/// On-disk form of a day-ahead plan.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanDocument {
    pub alpha_kw_per_hz: f64,
    pub e_init_kwh: f64,
    pub date: String,
    pub offset_kw: Vec<f64>,
    pub dispatch_plan_kw: Vec<f64>,
}

impl PlanDocument {
    /// Forecast profile implied by the stored plan (`p_hat - f`).
    pub fn forecast_kw(&self) -> Vec<f64> {
        self.dispatch_plan_kw
            .iter()
            .zip(&self.offset_kw)
            .map(|(p, f)| p - f)
            .collect()
    }
}

pub fn write_plan(path: &Path, plan: &PlanDocument) -> Result<(), DataIoError> {
    let mut out = String::new();
    writeln!(out, "# alpha_kw_per_hz={}", plan.alpha_kw_per_hz).expect("string write");
    writeln!(out, "# e_init_kwh={}", plan.e_init_kwh).expect("string write");
    writeln!(out, "# date={}", plan.date).expect("string write");
    out.push_str(PLAN_HEADER);
    out.push('\n');
    for (k, (f, p)) in plan.offset_kw.iter().zip(&plan.dispatch_plan_kw).enumerate() {
        writeln!(out, "{k},{f},{p}").expect("string write");
    }
    write_string(path, &out)
}

pub fn read_plan(path: &Path) -> Result<PlanDocument, DataIoError> {
    let content = read_to_string(path)?;
    let (preamble, header, rows) = split_csv(path, &content)?;
    expect_header(path, header, PLAN_HEADER)?;
    let lookup = |key: &str| -> Result<&str, DataIoError> {
        preamble
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| DataIoError::format(path, format!("missing preamble key '{key}'")))
    };
    let alpha = parse_f64(path, 0, "alpha_kw_per_hz", lookup("alpha_kw_per_hz")?)?;
    if alpha < 0.0 {
        return Err(DataIoError::format(path, "alpha_kw_per_hz must be >= 0"));
    }
    let e_init = parse_f64(path, 0, "e_init_kwh", lookup("e_init_kwh")?)?;
    let date = lookup("date")?.to_string();
    if rows.is_empty() {
        return Err(DataIoError::format(path, "plan has no slots"));
    }
    let mut offset = Vec::with_capacity(rows.len());
    let mut p_hat = Vec::with_capacity(rows.len());
    for (i, line) in rows.iter().enumerate() {
        let row = i + 1;
        let cols = fields(path, row, line, 3)?;
        let slot = parse_i64(path, row, "slot", cols[0])?;
        if slot != i as i64 {
            return Err(DataIoError::row(
                path,
                row,
                format!("slot index {slot}, expected {i}"),
            ));
        }
        offset.push(parse_f64(path, row, "f_kw", cols[1])?);
        p_hat.push(parse_f64(path, row, "p_hat_kw", cols[2])?);
    }
    Ok(PlanDocument {
        alpha_kw_per_hz: alpha,
        e_init_kwh: e_init,
        date,
        offset_kw: offset,
        dispatch_plan_kw: p_hat,
    })
}

// ---------------------------------------------------------------------------
// frequency envelope: preamble + slot,mean_hzh,std_hzh,w_down_hzh,w_up_hzh
// ---------------------------------------------------------------------------

pub const ENVELOPE_HEADER: &str = "slot,mean_hzh,std_hzh,w_down_hzh,w_up_hzh";

pub fn write_envelope(path: &Path, env: &FrequencyEnvelope) -> Result<(), DataIoError> {
    let mut out = String::new();
    writeln!(out, "# horizon_hours={}", env.grid().horizon_hours()).expect("string write");
    writeln!(out, "# confidence_z={}", env.confidence_z()).expect("string write");
    out.push_str(ENVELOPE_HEADER);
    out.push('\n');
    for k in 0..env.grid().slots() {
        writeln!(
            out,
            "{k},{},{},{},{}",
            env.mean()[k],
            env.std()[k],
            env.w_down()[k],
            env.w_up()[k]
        )
        .expect("string write");
    }
    write_string(path, &out)
}

pub fn read_envelope(path: &Path) -> Result<FrequencyEnvelope, DataIoError> {
    let content = read_to_string(path)?;
    let (preamble, header, rows) = split_csv(path, &content)?;
    expect_header(path, header, ENVELOPE_HEADER)?;
    let lookup = |key: &str| -> Result<&str, DataIoError> {
        preamble
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| DataIoError::format(path, format!("missing preamble key '{key}'")))
    };
    let horizon = parse_f64(path, 0, "horizon_hours", lookup("horizon_hours")?)?;
    let z = parse_f64(path, 0, "confidence_z", lookup("confidence_z")?)?;
    if rows.is_empty() {
        return Err(DataIoError::format(path, "envelope has no slots"));
    }
    let grid = TimeGrid::new(horizon, rows.len())
        .map_err(|e| DataIoError::format(path, e.to_string()))?;
    let (mut mean, mut std, mut down, mut up) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, line) in rows.iter().enumerate() {
        let row = i + 1;
        let cols = fields(path, row, line, 5)?;
        let slot = parse_i64(path, row, "slot", cols[0])?;
        if slot != i as i64 {
            return Err(DataIoError::row(
                path,
                row,
                format!("slot index {slot}, expected {i}"),
            ));
        }
        mean.push(parse_f64(path, row, "mean_hzh", cols[1])?);
        std.push(parse_f64(path, row, "std_hzh", cols[2])?);
        down.push(parse_f64(path, row, "w_down_hzh", cols[3])?);
        up.push(parse_f64(path, row, "w_up_hzh", cols[4])?);
    }
    FrequencyEnvelope::from_parts(up, down, mean, std, z, grid)
        .map_err(|e| DataIoError::format(path, e.to_string()))
}

// ---------------------------------------------------------------------------
// 1 Hz load realization: epoch_seconds,load_kw
// ---------------------------------------------------------------------------

pub const REALIZATION_HEADER: &str = "epoch_seconds,load_kw";

/// Load a contiguous 1 Hz realization series. Returns the first epoch and
/// the samples.
pub fn load_realization(path: &Path) -> Result<(i64, Vec<f64>), DataIoError> {
    let content = read_to_string(path)?;
    let (_, header, rows) = split_csv(path, &content)?;
    expect_header(path, header, REALIZATION_HEADER)?;
    if rows.is_empty() {
        return Err(DataIoError::format(path, "no samples"));
    }
    let mut start = 0i64;
    let mut values = Vec::with_capacity(rows.len());
    for (i, line) in rows.iter().enumerate() {
        let row = i + 1;
        let cols = fields(path, row, line, 2)?;
        let t = parse_i64(path, row, "epoch_seconds", cols[0])?;
        if i == 0 {
            start = t;
        } else if t != start + i as i64 {
            return Err(DataIoError::row(
                path,
                row,
                format!("expected contiguous 1 s samples ({} expected, {t} found)", start + i as i64),
            ));
        }
        values.push(parse_f64(path, row, "load_kw", cols[1])?);
    }
    Ok((start, values))
}

pub fn write_realization(path: &Path, start_epoch_s: i64, values: &[f64]) -> Result<(), DataIoError> {
    let mut out = String::new();
    out.push_str(REALIZATION_HEADER);
    out.push('\n');
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{},{v}", start_epoch_s + i as i64).expect("string write");
    }
    write_string(path, &out)
}

// ---------------------------------------------------------------------------
// trace, budget layers, report
// ---------------------------------------------------------------------------

pub const TRACE_HEADER: &str =
    "epoch_s,slot,f_hz,feeder_kw,b_fr_kw,b_d_kw,b_total_kw,soe_kwh,eps_kw";

pub fn write_trace(path: &Path, trace: &SimulationTrace) -> Result<(), DataIoError> {
    let mut out = String::with_capacity(trace.rows.len() * 64);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.epoch_s,
            r.slot,
            r.f_hz,
            r.feeder_kw,
            r.b_fr_kw,
            r.b_d_kw,
            r.b_total_kw,
            r.soe_kwh,
            r.eps_kw
        )
        .expect("string write");
    }
    write_string(path, &out)
}

pub const BUDGET_HEADER: &str =
    "slot,e_lower_kwh,e_upper_kwh,e_disp_lower_kwh,e_disp_upper_kwh,soe_kwh";

/// Plot-ready budget layers: total and dispatch-only energy bands (absolute
/// stored energy) plus the realized stored energy at each slot end.
pub fn write_budget_csv(
    path: &Path,
    total: &crate::budgets::IntervalSequence,
    dispatch: &crate::budgets::IntervalSequence,
    soe_at_slot_ends: &[f64],
) -> Result<(), DataIoError> {
    let n = total.grid().slots();
    let mut out = String::new();
    out.push_str(BUDGET_HEADER);
    out.push('\n');
    for k in 0..n {
        writeln!(
            out,
            "{k},{},{},{},{},{}",
            total.lower()[k],
            total.upper()[k],
            dispatch.lower()[k],
            dispatch.upper()[k],
            soe_at_slot_ends[k]
        )
        .expect("string write");
    }
    write_string(path, &out)
}

pub fn write_report(path: &Path, report: &HorizonReport) -> Result<(), DataIoError> {
    let json = serde_json::to_string_pretty(report).map_err(|source| DataIoError::Json {
        path: path.display().to_string(),
        source,
    })?;
    write_string(path, &(json + "\n"))
}

pub fn read_report(path: &Path) -> Result<HorizonReport, DataIoError> {
    let content = read_to_string(path)?;
    serde_json::from_str(&content).map_err(|source| DataIoError::Json {
        path: path.display().to_string(),
        source,
    })
}
