//! Interval-sequence algebra for power and energy budgets.
//!
//! A budget describes, per time slot, the closed interval of power (kW) or
//! cumulative energy (kWh) that a service may require from the battery over
//! the scheduling horizon. Budgets of independent services add componentwise,
//! and the width of a sum is the sum of the widths, which is what makes the
//! day-ahead allocation problem linear.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freq_stats::FrequencyEnvelope;

#[derive(Debug, Error, PartialEq)]
pub enum BudgetError {
    #[error("time grid must have a positive horizon and at least one slot (got T={horizon_hours} h, N={slots})")]
    InvalidGrid { horizon_hours: f64, slots: usize },
    #[error("operands use different time grids ({0:?} vs {1:?})")]
    GridMismatch(TimeGrid, TimeGrid),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("interval bounds crossed at slot {slot}: lower {lower} > upper {upper}")]
    BoundsCrossed { slot: usize, lower: f64, upper: f64 },
    #[error("load scenarios must satisfy lower <= forecast <= upper, violated at slot {slot}")]
    ScenarioOrdering { slot: usize },
    #[error("non-finite value at slot {slot}")]
    NonFinite { slot: usize },
    #[error("PFR coefficient alpha must be nonnegative, got {0}")]
    NegativeAlpha(f64),
    #[error("delta_f_max must be positive, got {0}")]
    InvalidFrParams(f64),
    #[error("cannot sum an empty list of budgets")]
    EmptySum,
}

/// Uniform discretisation of the scheduling horizon: `slots` steps of
/// `horizon_hours / slots` hours each. `dt * N = T` holds by construction
/// since `dt` is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon_hours: f64,
    slots: usize,
}

impl TimeGrid {
    pub fn new(horizon_hours: f64, slots: usize) -> Result<Self, BudgetError> {
        if !(horizon_hours > 0.0) || !horizon_hours.is_finite() || slots == 0 {
            return Err(BudgetError::InvalidGrid {
                horizon_hours,
                slots,
            });
        }
        Ok(Self {
            horizon_hours,
            slots,
        })
    }

    /// 24 h horizon at 5-minute resolution (288 slots).
    pub fn standard_day() -> Self {
        Self {
            horizon_hours: 24.0,
            slots: 288,
        }
    }

    pub fn horizon_hours(&self) -> f64 {
        self.horizon_hours
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn dt_hours(&self) -> f64 {
        self.horizon_hours / self.slots as f64
    }

    /// Whole seconds per slot, if the slot duration is a whole number of
    /// seconds (required by the 1 Hz real-time layer).
    pub fn seconds_per_slot(&self) -> Option<usize> {
        let s = self.dt_hours() * 3600.0;
        let rounded = s.round();
        if (s - rounded).abs() < 1e-9 && rounded >= 1.0 {
            Some(rounded as usize)
        } else {
            None
        }
    }

    fn check_len(&self, values: &[f64]) -> Result<(), BudgetError> {
        if values.len() != self.slots {
            return Err(BudgetError::LengthMismatch {
                expected: self.slots,
                got: values.len(),
            });
        }
        Ok(())
    }
}

fn check_finite(values: &[f64]) -> Result<(), BudgetError> {
    if let Some(slot) = values.iter().position(|v| !v.is_finite()) {
        return Err(BudgetError::NonFinite { slot });
    }
    Ok(())
}

/// Per-slot `[lower, upper]` band over the horizon. Holds power budgets in kW
/// or cumulative energy budgets in kWh, depending on context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSequence {
    lower: Vec<f64>,
    upper: Vec<f64>,
    grid: TimeGrid,
}

impl IntervalSequence {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, grid: TimeGrid) -> Result<Self, BudgetError> {
        grid.check_len(&lower)?;
        grid.check_len(&upper)?;
        check_finite(&lower)?;
        check_finite(&upper)?;
        for (slot, (&lo, &up)) in lower.iter().zip(&upper).enumerate() {
            if lo > up {
                return Err(BudgetError::BoundsCrossed {
                    slot,
                    lower: lo,
                    upper: up,
                });
            }
        }
        Ok(Self { lower, upper, grid })
    }

    pub fn zero(grid: TimeGrid) -> Self {
        Self {
            lower: vec![0.0; grid.slots()],
            upper: vec![0.0; grid.slots()],
            grid,
        }
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Shift both bounds by a constant (e.g. anchor an energy budget at the
    /// initial stored energy).
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|v| v + offset).collect(),
            upper: self.upper.iter().map(|v| v + offset).collect(),
            grid: self.grid,
        }
    }
}

/// Per-slot band width `upper[k] - lower[k]`.
pub fn width(seq: &IntervalSequence) -> Vec<f64> {
    seq.upper
        .iter()
        .zip(&seq.lower)
        .map(|(u, l)| u - l)
        .collect()
}

/// Componentwise sum of budgets across services. Summation runs in list
/// order so results are bit-reproducible.
pub fn sum_budgets(budgets: &[IntervalSequence]) -> Result<IntervalSequence, BudgetError> {
    let first = budgets.first().ok_or(BudgetError::EmptySum)?;
    let grid = first.grid;
    let mut lower = vec![0.0; grid.slots()];
    let mut upper = vec![0.0; grid.slots()];
    for b in budgets {
        if b.grid != grid {
            return Err(BudgetError::GridMismatch(grid, b.grid));
        }
        for k in 0..grid.slots() {
            lower[k] += b.lower[k];
            upper[k] += b.upper[k];
        }
    }
    IntervalSequence::new(lower, upper, grid)
}

/// Day-ahead feeder demand scenarios: the forecast profile and the absolute
/// profiles of the highest- and lowest-demand scenarios. All three are stored
/// as absolute per-slot powers in kW (deviation-style data must be normalised
/// by adding the forecast before construction), so `lower <= forecast <=
/// upper` holds slot-wise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadScenarios {
    forecast: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    grid: TimeGrid,
}

impl LoadScenarios {
    pub fn new(
        forecast: Vec<f64>,
        upper: Vec<f64>,
        lower: Vec<f64>,
        grid: TimeGrid,
    ) -> Result<Self, BudgetError> {
        grid.check_len(&forecast)?;
        grid.check_len(&upper)?;
        grid.check_len(&lower)?;
        check_finite(&forecast)?;
        check_finite(&upper)?;
        check_finite(&lower)?;
        for k in 0..grid.slots() {
            if !(lower[k] <= forecast[k] && forecast[k] <= upper[k]) {
                return Err(BudgetError::ScenarioOrdering { slot: k });
            }
        }
        Ok(Self {
            forecast,
            upper,
            lower,
            grid,
        })
    }

    pub fn forecast(&self) -> &[f64] {
        &self.forecast
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }
}

/// Primary frequency regulation parameters: nominal grid frequency and the
/// deviation at which reserves are fully activated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrParams {
    pub f_nominal_hz: f64,
    pub delta_f_max_hz: f64,
}

impl FrParams {
    pub fn new(f_nominal_hz: f64, delta_f_max_hz: f64) -> Result<Self, BudgetError> {
        if !(delta_f_max_hz > 0.0) || !delta_f_max_hz.is_finite() || !f_nominal_hz.is_finite() {
            return Err(BudgetError::InvalidFrParams(delta_f_max_hz));
        }
        Ok(Self {
            f_nominal_hz,
            delta_f_max_hz,
        })
    }
}

impl Default for FrParams {
    /// European grid: 50 Hz nominal, full activation at +/-200 mHz.
    fn default() -> Self {
        Self {
            f_nominal_hz: 50.0,
            delta_f_max_hz: 0.2,
        }
    }
}

/// Power band the battery must hold for dispatch tracking:
/// `[F_k + L_down_k, F_k + L_up_k]` per slot.
pub fn dispatch_power_budget(
    offset_kw: &[f64],
    scen: &LoadScenarios,
) -> Result<IntervalSequence, BudgetError> {
    scen.grid.check_len(offset_kw)?;
    check_finite(offset_kw)?;
    let lower = offset_kw
        .iter()
        .zip(&scen.lower)
        .map(|(f, l)| f + l)
        .collect();
    let upper = offset_kw
        .iter()
        .zip(&scen.upper)
        .map(|(f, l)| f + l)
        .collect();
    IntervalSequence::new(lower, upper, scen.grid)
}

/// Cumulative energy band for dispatch tracking: running sums of
/// `dt * (F_i + L_i)` under the low and high scenarios, in kWh. Sums start at
/// slot 1; the value at "slot 0" is implicitly zero (relative to the initial
/// stored energy).
pub fn dispatch_energy_budget(
    offset_kw: &[f64],
    scen: &LoadScenarios,
    grid: &TimeGrid,
) -> Result<IntervalSequence, BudgetError> {
    if *grid != scen.grid {
        return Err(BudgetError::GridMismatch(*grid, scen.grid));
    }
    grid.check_len(offset_kw)?;
    check_finite(offset_kw)?;
    let dt = grid.dt_hours();
    let mut lower = Vec::with_capacity(grid.slots());
    let mut upper = Vec::with_capacity(grid.slots());
    let (mut acc_lo, mut acc_up) = (0.0, 0.0);
    for k in 0..grid.slots() {
        acc_lo += dt * (offset_kw[k] + scen.lower[k]);
        acc_up += dt * (offset_kw[k] + scen.upper[k]);
        lower.push(acc_lo);
        upper.push(acc_up);
    }
    IntervalSequence::new(lower, upper, *grid)
}

/// Constant power band reserved for frequency regulation:
/// `+/- delta_f_max * alpha` in every slot.
pub fn fr_power_budget(
    alpha_kw_per_hz: f64,
    fr: &FrParams,
    grid: &TimeGrid,
) -> Result<IntervalSequence, BudgetError> {
    if !(alpha_kw_per_hz >= 0.0) {
        return Err(BudgetError::NegativeAlpha(alpha_kw_per_hz));
    }
    let peak = fr.delta_f_max_hz * alpha_kw_per_hz;
    IntervalSequence::new(
        vec![-peak; grid.slots()],
        vec![peak; grid.slots()],
        *grid,
    )
}

/// Energy band for frequency regulation: the fitted deviation-energy envelope
/// scaled by the droop coefficient, `[alpha * W_down_k, alpha * W_up_k]` in
/// kWh.
pub fn fr_energy_budget(
    alpha_kw_per_hz: f64,
    env: &FrequencyEnvelope,
) -> Result<IntervalSequence, BudgetError> {
    if !(alpha_kw_per_hz >= 0.0) {
        return Err(BudgetError::NegativeAlpha(alpha_kw_per_hz));
    }
    let lower = env.w_down().iter().map(|w| alpha_kw_per_hz * w).collect();
    let upper = env.w_up().iter().map(|w| alpha_kw_per_hz * w).collect();
    IntervalSequence::new(lower, upper, env.grid())
}
