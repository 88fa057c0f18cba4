//! Statistics of grid-frequency deviations.
//!
//! The energy a droop-controlled battery spends on frequency regulation over
//! a day scales linearly with the running integral of the frequency deviation,
//! `W_f` (in Hz*h). This module computes daily `W_f` trajectories from 1 Hz
//! frequency records and fits per-slot Gaussian confidence envelopes
//! `[w_down, w_up] = mean -/+ z * std` across a population of days. The
//! envelopes become the robust energy bounds of the day-ahead problem.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

use crate::budgets::{FrParams, TimeGrid};

/// Frequency samples outside this band indicate corrupt data, not grid
/// behaviour.
pub const DEFAULT_PLAUSIBLE_RANGE_HZ: (f64, f64) = (45.0, 55.0);

/// Gaps longer than this invalidate a day; shorter ones are interpolated.
pub const DEFAULT_MAX_GAP_S: i64 = 60;

#[derive(Debug, Error, PartialEq)]
pub enum FreqStatsError {
    #[error("timestamps must be strictly increasing (violation at sample {index})")]
    NonMonotonicTimestamps { index: usize },
    #[error("timestamp/frequency arrays differ in length ({timestamps} vs {frequencies})")]
    LengthMismatch { timestamps: usize, frequencies: usize },
    #[error("empty frequency record")]
    EmptyRecord,
    #[error("frequency {value} Hz at sample {index} outside plausible range [{lo}, {hi}] Hz")]
    ImplausibleFrequency {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("record gap of {gap_s} s at epoch {epoch_s} exceeds the {max_gap_s} s limit")]
    CoverageGap {
        epoch_s: i64,
        gap_s: i64,
        max_gap_s: i64,
    },
    #[error("record covers [{have_start}, {have_end}] but the horizon needs [{want_start}, {want_end}]")]
    IncompleteCoverage {
        have_start: i64,
        have_end: i64,
        want_start: i64,
        want_end: i64,
    },
    #[error("grid slot duration must be a whole number of seconds")]
    FractionalSlotSeconds,
    #[error("envelope fit needs at least 2 daily trajectories, got {0}")]
    TooFewDays(usize),
    #[error("daily trajectory {index} has {got} slots, expected {expected}")]
    TrajectoryLength {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("envelope bounds crossed at slot {slot}")]
    EnvelopeCrossed { slot: usize },
    #[error("negative standard deviation at slot {slot}")]
    NegativeStd { slot: usize },
    #[error("chi-square test needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("chi-square test needs at least 5 bins, got {0}")]
    TooFewBins(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
}

/// One day of 1 Hz grid-frequency measurements, anchored at `start_epoch_s`.
/// Timestamps are UTC epoch seconds; samples may be missing (gaps are handled
/// during `compute_wf`).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRecord {
    start_epoch_s: i64,
    timestamps: Vec<i64>,
    frequency_hz: Vec<f64>,
}

impl FrequencyRecord {
    pub fn new(
        start_epoch_s: i64,
        timestamps: Vec<i64>,
        frequency_hz: Vec<f64>,
    ) -> Result<Self, FreqStatsError> {
        Self::with_plausible_range(
            start_epoch_s,
            timestamps,
            frequency_hz,
            DEFAULT_PLAUSIBLE_RANGE_HZ,
        )
    }

    pub fn with_plausible_range(
        start_epoch_s: i64,
        timestamps: Vec<i64>,
        frequency_hz: Vec<f64>,
        range_hz: (f64, f64),
    ) -> Result<Self, FreqStatsError> {
        if timestamps.len() != frequency_hz.len() {
            return Err(FreqStatsError::LengthMismatch {
                timestamps: timestamps.len(),
                frequencies: frequency_hz.len(),
            });
        }
        if timestamps.is_empty() {
            return Err(FreqStatsError::EmptyRecord);
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(FreqStatsError::NonMonotonicTimestamps { index: i + 1 });
            }
        }
        for (i, &f) in frequency_hz.iter().enumerate() {
            if !f.is_finite() || f < range_hz.0 || f > range_hz.1 {
                return Err(FreqStatsError::ImplausibleFrequency {
                    index: i,
                    value: f,
                    lo: range_hz.0,
                    hi: range_hz.1,
                });
            }
        }
        Ok(Self {
            start_epoch_s,
            timestamps,
            frequency_hz,
        })
    }

    pub fn start_epoch_s(&self) -> i64 {
        self.start_epoch_s
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn frequency_hz(&self) -> &[f64] {
        &self.frequency_hz
    }
}

/// Resample a record onto the dense 1 s grid `[start, start + n_seconds)`,
/// filling gaps up to `max_gap_s` by linear interpolation (flat at the record
/// edges).
fn dense_frequency(
    record: &FrequencyRecord,
    n_seconds: usize,
    max_gap_s: i64,
) -> Result<Vec<f64>, FreqStatsError> {
    let start = record.start_epoch_s;
    let end = start + n_seconds as i64;
    let ts = &record.timestamps;
    let first = ts[0];
    let last = *ts.last().unwrap();
    if first - start > max_gap_s || end - 1 - last > max_gap_s || first >= end || last < start {
        return Err(FreqStatsError::IncompleteCoverage {
            have_start: first,
            have_end: last,
            want_start: start,
            want_end: end - 1,
        });
    }
    for w in ts.windows(2) {
        let gap = w[1] - w[0];
        if gap > max_gap_s {
            return Err(FreqStatsError::CoverageGap {
                epoch_s: w[0],
                gap_s: gap,
                max_gap_s,
            });
        }
    }

    let mut dense = Vec::with_capacity(n_seconds);
    let mut idx = 0usize;
    for t in start..end {
        while idx + 1 < ts.len() && ts[idx + 1] <= t {
            idx += 1;
        }
        let f = if t <= ts[0] {
            record.frequency_hz[0]
        } else if t >= last {
            record.frequency_hz[ts.len() - 1]
        } else if ts[idx] == t {
            record.frequency_hz[idx]
        } else {
            // between ts[idx] < t < ts[idx+1]
            let t0 = ts[idx];
            let t1 = ts[idx + 1];
            let f0 = record.frequency_hz[idx];
            let f1 = record.frequency_hz[idx + 1];
            f0 + (f1 - f0) * (t - t0) as f64 / (t1 - t0) as f64
        };
        dense.push(f);
    }
    Ok(dense)
}

/// Running integral of the frequency deviation, sampled at slot boundaries.
///
/// Each 1 s sample contributes `(f - f_n) / 3600` Hz*h; the integral
/// accumulates across the whole day (it does not reset per slot), and
/// `result[k]` is its value at the end of slot `k`.
pub fn compute_wf(
    day: &FrequencyRecord,
    fr: &FrParams,
    grid: &TimeGrid,
) -> Result<Vec<f64>, FreqStatsError> {
    compute_wf_with_max_gap(day, fr, grid, DEFAULT_MAX_GAP_S)
}

pub fn compute_wf_with_max_gap(
    day: &FrequencyRecord,
    fr: &FrParams,
    grid: &TimeGrid,
    max_gap_s: i64,
) -> Result<Vec<f64>, FreqStatsError> {
    let spt = grid
        .seconds_per_slot()
        .ok_or(FreqStatsError::FractionalSlotSeconds)?;
    let n_seconds = spt * grid.slots();
    let dense = dense_frequency(day, n_seconds, max_gap_s)?;
    let mut out = Vec::with_capacity(grid.slots());
    let mut acc = 0.0;
    for k in 0..grid.slots() {
        for s in 0..spt {
            acc += (dense[k * spt + s] - fr.f_nominal_hz) / 3600.0;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Per-slot Gaussian confidence envelope of daily `W_f` trajectories.
///
/// `w_up = mean + z * std` and `w_down = mean - z * std` with the sample
/// statistics taken slot-wise across days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEnvelope {
    w_up: Vec<f64>,
    w_down: Vec<f64>,
    mean: Vec<f64>,
    std: Vec<f64>,
    confidence_z: f64,
    grid: TimeGrid,
}

impl FrequencyEnvelope {
    /// Assemble an envelope from precomputed per-slot statistics (e.g. read
    /// back from a file). Validates ordering and lengths.
    pub fn from_parts(
        w_up: Vec<f64>,
        w_down: Vec<f64>,
        mean: Vec<f64>,
        std: Vec<f64>,
        confidence_z: f64,
        grid: TimeGrid,
    ) -> Result<Self, FreqStatsError> {
        let n = grid.slots();
        for v in [&w_up, &w_down, &mean, &std] {
            if v.len() != n {
                return Err(FreqStatsError::TrajectoryLength {
                    index: 0,
                    got: v.len(),
                    expected: n,
                });
            }
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(FreqStatsError::NonFinite(i));
            }
        }
        for k in 0..n {
            if std[k] < 0.0 {
                return Err(FreqStatsError::NegativeStd { slot: k });
            }
            if !(w_down[k] <= mean[k] && mean[k] <= w_up[k]) {
                return Err(FreqStatsError::EnvelopeCrossed { slot: k });
            }
        }
        Ok(Self {
            w_up,
            w_down,
            mean,
            std,
            confidence_z,
            grid,
        })
    }

    /// Degenerate zero envelope (no frequency-regulation energy uncertainty).
    pub fn zero(grid: TimeGrid) -> Self {
        let n = grid.slots();
        Self {
            w_up: vec![0.0; n],
            w_down: vec![0.0; n],
            mean: vec![0.0; n],
            std: vec![0.0; n],
            confidence_z: 1.96,
            grid,
        }
    }

    pub fn w_up(&self) -> &[f64] {
        &self.w_up
    }

    pub fn w_down(&self) -> &[f64] {
        &self.w_down
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn confidence_z(&self) -> f64 {
        self.confidence_z
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }
}

/// Fit the per-slot envelope from a population of daily `W_f` trajectories.
/// Uses the n-1 sample standard deviation; needs at least two days.
pub fn fit_envelope(
    days: &[Vec<f64>],
    confidence_z: f64,
    grid: &TimeGrid,
) -> Result<FrequencyEnvelope, FreqStatsError> {
    if days.len() < 2 {
        return Err(FreqStatsError::TooFewDays(days.len()));
    }
    let n = grid.slots();
    for (index, d) in days.iter().enumerate() {
        if d.len() != n {
            return Err(FreqStatsError::TrajectoryLength {
                index,
                got: d.len(),
                expected: n,
            });
        }
        if let Some(i) = d.iter().position(|x| !x.is_finite()) {
            return Err(FreqStatsError::NonFinite(i));
        }
    }
    let m = days.len() as f64;
    let mut mean = vec![0.0; n];
    let mut std = vec![0.0; n];
    for k in 0..n {
        let mu = days.iter().map(|d| d[k]).sum::<f64>() / m;
        let var = days.iter().map(|d| (d[k] - mu).powi(2)).sum::<f64>() / (m - 1.0);
        mean[k] = mu;
        std[k] = var.max(0.0).sqrt();
    }
    let w_up: Vec<f64> = mean
        .iter()
        .zip(&std)
        .map(|(m, s)| m + confidence_z * s)
        .collect();
    let w_down: Vec<f64> = mean
        .iter()
        .zip(&std)
        .map(|(m, s)| m - confidence_z * s)
        .collect();
    FrequencyEnvelope::from_parts(w_up, w_down, mean, std, confidence_z, *grid)
}

/// Outcome of the chi-square goodness-of-fit test against a fitted normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityDiagnostic {
    pub statistic: f64,
    pub critical_value: f64,
    pub degrees_of_freedom: usize,
    /// True when normality is rejected at the 5% significance level.
    pub reject: bool,
}

/// Suggested bin count for `normality_diagnostic`: `max(5, n / 50)`.
pub fn default_bin_count(n_samples: usize) -> usize {
    (n_samples / 50).max(5)
}

/// Pearson chi-square test of the samples against a normal with the sample
/// mean and (n-1) standard deviation, using equal-probability bins. Degrees
/// of freedom are `bins - 3` (two estimated parameters). Degenerate samples
/// (zero variance) are reported as rejected.
pub fn normality_diagnostic(
    samples: &[f64],
    bins: usize,
) -> Result<NormalityDiagnostic, FreqStatsError> {
    const MIN_SAMPLES: usize = 30;
    if samples.len() < MIN_SAMPLES {
        return Err(FreqStatsError::TooFewSamples {
            got: samples.len(),
            min: MIN_SAMPLES,
        });
    }
    if bins < 5 {
        return Err(FreqStatsError::TooFewBins(bins));
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(FreqStatsError::NonFinite(i));
    }
    let n = samples.len() as f64;
    let mu = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0);
    let dof = bins - 3;
    let chi = ChiSquared::new(dof as f64).expect("dof >= 2");
    let critical_value = chi.inverse_cdf(0.95);
    if var <= 0.0 {
        // all mass in one bin: the statistic diverges
        return Ok(NormalityDiagnostic {
            statistic: f64::INFINITY,
            critical_value,
            degrees_of_freedom: dof,
            reject: true,
        });
    }
    let normal = Normal::new(mu, var.sqrt()).expect("positive std");
    // bin edges at equal probability under the fitted normal
    let edges: Vec<f64> = (1..bins)
        .map(|i| normal.inverse_cdf(i as f64 / bins as f64))
        .collect();
    let mut observed = vec![0usize; bins];
    for &x in samples {
        let b = edges.partition_point(|e| *e < x);
        observed[b] += 1;
    }
    let expected = n / bins as f64;
    let statistic = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    Ok(NormalityDiagnostic {
        statistic,
        critical_value,
        degrees_of_freedom: dof,
        reject: statistic > critical_value,
    })
}
