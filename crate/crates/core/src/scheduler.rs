//! Day-ahead allocation of battery power and energy between dispatch
//! tracking and frequency regulation.
//!
//! The decision vector is `[alpha, F_1..F_N]`: the PFR droop coefficient in
//! kW/Hz and the offset profile in kW. Constraints keep the summed service
//! budgets inside the battery's energy margins `[E_min, E_max]` and power
//! rating for every slot and every scenario bound; the default objective
//! maximises `alpha`, which (because budget widths add and only the PFR width
//! depends on the decision) also maximises the total allocated energy-budget
//! width. Alternative objectives cover price-taking revenue and plain
//! feasibility.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budgets::{BudgetError, FrParams, LoadScenarios, TimeGrid};
use crate::freq_stats::FrequencyEnvelope;
use crate::lp::{self, LinearProgram, LpError, LpStatus};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid battery parameters: {0}")]
    InvalidBess(String),
    #[error("schedule inputs disagree on the time grid")]
    GridMismatch,
    #[error("initial energy {e_init} kWh outside the physical range [0, {e_nom}] kWh")]
    EInitOutOfRange { e_init: f64, e_nom: f64 },
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("day-ahead problem infeasible even with alpha = 0 and relaxed energy bounds")]
    Infeasible,
    #[error("internal scheduler error: {0}")]
    Internal(String),
    #[error("efficiency calibration needs at least one daily power profile")]
    EmptyScenarioSet,
    #[error("daily profile {index} has {got} slots, expected {expected}")]
    ProfileLength {
        index: usize,
        got: usize,
        expected: usize,
    },
}

/// Battery ratings and the scheduling energy margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BessParams {
    pub e_nom_kwh: f64,
    pub p_max_kw: f64,
    pub e_min_kwh: f64,
    pub e_max_kwh: f64,
    /// Round-trip split factor: charging stores `beta * P`, discharging
    /// drains `P / beta`.
    pub beta: f64,
}

impl BessParams {
    pub fn new(
        e_nom_kwh: f64,
        p_max_kw: f64,
        e_min_kwh: f64,
        e_max_kwh: f64,
        beta: f64,
    ) -> Result<Self, ScheduleError> {
        let all = [e_nom_kwh, p_max_kw, e_min_kwh, e_max_kwh, beta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ScheduleError::InvalidBess("non-finite parameter".into()));
        }
        if !(0.0 <= e_min_kwh && e_min_kwh < e_max_kwh && e_max_kwh <= e_nom_kwh) {
            return Err(ScheduleError::InvalidBess(format!(
                "need 0 <= E_min < E_max <= E_nom, got E_min={e_min_kwh}, E_max={e_max_kwh}, E_nom={e_nom_kwh}"
            )));
        }
        if !(p_max_kw > 0.0) {
            return Err(ScheduleError::InvalidBess(format!(
                "P_max must be positive, got {p_max_kw}"
            )));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(ScheduleError::InvalidBess(format!(
                "beta must be in (0, 1], got {beta}"
            )));
        }
        Ok(Self {
            e_nom_kwh,
            p_max_kw,
            e_min_kwh,
            e_max_kwh,
            beta,
        })
    }

    /// 560 kWh / 720 kVA lithium-ion unit with a 5% scheduling floor and
    /// beta = 0.96.
    pub fn default_unit() -> Self {
        Self {
            e_nom_kwh: 560.0,
            p_max_kw: 720.0,
            e_min_kwh: 28.0,
            e_max_kwh: 560.0,
            beta: 0.96,
        }
    }
}

/// Everything exogenous to the day-ahead decision: battery parameters,
/// initial stored energy, demand scenarios and the frequency-energy envelope.
#[derive(Debug, Clone)]
pub struct ScheduleInputs {
    pub bess: BessParams,
    pub e_init_kwh: f64,
    pub scen: LoadScenarios,
    pub env: FrequencyEnvelope,
    pub fr: FrParams,
    pub grid: TimeGrid,
}

impl ScheduleInputs {
    /// The initial energy may sit anywhere in the physical range (multi-day
    /// operation can end a lossy day slightly below `E_min`); the first slots
    /// of the schedule then restore it, or the fallback ladder engages.
    pub fn new(
        bess: BessParams,
        e_init_kwh: f64,
        scen: LoadScenarios,
        env: FrequencyEnvelope,
        fr: FrParams,
    ) -> Result<Self, ScheduleError> {
        let grid = scen.grid();
        if env.grid() != grid {
            return Err(ScheduleError::GridMismatch);
        }
        if !e_init_kwh.is_finite() || e_init_kwh < 0.0 || e_init_kwh > bess.e_nom_kwh {
            return Err(ScheduleError::EInitOutOfRange {
                e_init: e_init_kwh,
                e_nom: bess.e_nom_kwh,
            });
        }
        Ok(Self {
            bess,
            e_init_kwh,
            scen,
            env,
            fr,
            grid,
        })
    }
}

/// Pricing for the revenue objective. The price-taking default pays per
/// kW/Hz of reserved droop; dispatch-band revenue is independent of the
/// decision variables, so a nonzero `price_dispatch_per_kwh` only shifts
/// reported revenue, never the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueModel {
    pub price_fr_per_kw_hz: f64,
    pub price_dispatch_per_kwh: f64,
}

impl Default for RevenueModel {
    fn default() -> Self {
        Self {
            price_fr_per_kw_hz: 1.0,
            price_dispatch_per_kwh: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveMode {
    /// Maximise the PFR droop coefficient (the default).
    MaxAlpha,
    /// Maximise price-taking revenue.
    Revenue(RevenueModel),
    /// Any feasible allocation (constant objective).
    Feasibility,
}

/// Solved day-ahead decision: droop coefficient, offset profile and the
/// resulting dispatch plan `P_hat = forecast + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayAheadPlan {
    pub alpha_kw_per_hz: f64,
    pub offset_kw: Vec<f64>,
    pub dispatch_plan_kw: Vec<f64>,
    /// True when the energy bounds had to be relaxed to produce an
    /// executable plan (the day was infeasible even with alpha = 0).
    pub fallback_used: bool,
}

impl DayAheadPlan {
    pub fn new(alpha_kw_per_hz: f64, offset_kw: Vec<f64>, forecast_kw: &[f64]) -> Self {
        let dispatch_plan_kw = forecast_kw
            .iter()
            .zip(&offset_kw)
            .map(|(l, f)| l + f)
            .collect();
        Self {
            alpha_kw_per_hz,
            offset_kw,
            dispatch_plan_kw,
            fallback_used: false,
        }
    }
}

fn objective_vector(n: usize, mode: ObjectiveMode) -> Vec<f64> {
    let mut c = vec![0.0; n + 1];
    match mode {
        ObjectiveMode::MaxAlpha => c[0] = 1.0,
        ObjectiveMode::Revenue(model) => c[0] = model.price_fr_per_kw_hz,
        ObjectiveMode::Feasibility => {}
    }
    c
}

/// Assemble the day-ahead LP over `[alpha, F_1..F_N]`.
///
/// Four constraint families, `N` rows each, in this order:
/// 1. stored-energy ceiling:  `E_init + dt * sum(F_i + L_up_i) + alpha * W_up_k <= E_max`
/// 2. stored-energy floor:    `E_init + dt * sum(F_i + L_down_i) + alpha * W_down_k >= E_min`
/// 3. power ceiling:          `F_k + L_up_k + dfmax * alpha <= P_max`
/// 4. power floor:            `F_k + L_down_k - dfmax * alpha >= -P_max`
///
/// `alpha >= 0`, `F` free.
pub fn build_lp(inputs: &ScheduleInputs, mode: ObjectiveMode) -> Result<LinearProgram, ScheduleError> {
    build_lp_inner(inputs, mode, false)
}

fn build_lp_inner(
    inputs: &ScheduleInputs,
    mode: ObjectiveMode,
    chebyshev_slack: bool,
) -> Result<LinearProgram, ScheduleError> {
    let grid = inputs.grid;
    if inputs.scen.grid() != grid || inputs.env.grid() != grid {
        return Err(ScheduleError::GridMismatch);
    }
    let n = grid.slots();
    let dt = grid.dt_hours();
    let num_vars = 1 + n + usize::from(chebyshev_slack);
    let slack_col = 1 + n; // only used when chebyshev_slack

    let mut lp = LinearProgram::new(num_vars);
    let mut obj = objective_vector(n, mode);
    if chebyshev_slack {
        obj.push(-1.0); // minimise the worst energy-bound violation
    }
    lp.set_objective(obj);
    lp.set_bounds(0, 0.0, f64::INFINITY);
    if chebyshev_slack {
        lp.set_bounds(slack_col, 0.0, f64::INFINITY);
    }

    let e_up_room = inputs.bess.e_max_kwh - inputs.e_init_kwh;
    let e_down_room = inputs.e_init_kwh - inputs.bess.e_min_kwh;

    let mut row = vec![0.0; num_vars];
    // energy ceiling, cumulative in F
    let mut cum_up = 0.0;
    for k in 0..n {
        row.iter_mut().for_each(|v| *v = 0.0);
        row[0] = inputs.env.w_up()[k];
        for item in row.iter_mut().take(k + 2).skip(1) {
            *item = dt;
        }
        if chebyshev_slack {
            row[slack_col] = -1.0;
        }
        cum_up += dt * inputs.scen.upper()[k];
        lp.add_constraint(&row, e_up_room - cum_up);
    }
    // energy floor (negated into <= form)
    let mut cum_down = 0.0;
    for k in 0..n {
        row.iter_mut().for_each(|v| *v = 0.0);
        row[0] = -inputs.env.w_down()[k];
        for item in row.iter_mut().take(k + 2).skip(1) {
            *item = -dt;
        }
        if chebyshev_slack {
            row[slack_col] = -1.0;
        }
        cum_down += dt * inputs.scen.lower()[k];
        lp.add_constraint(&row, e_down_room + cum_down);
    }
    // power ceiling
    let dfmax = inputs.fr.delta_f_max_hz;
    for k in 0..n {
        row.iter_mut().for_each(|v| *v = 0.0);
        row[0] = dfmax;
        row[1 + k] = 1.0;
        lp.add_constraint(&row, inputs.bess.p_max_kw - inputs.scen.upper()[k]);
    }
    // power floor (negated into <= form)
    for k in 0..n {
        row.iter_mut().for_each(|v| *v = 0.0);
        row[0] = dfmax;
        row[1 + k] = -1.0;
        lp.add_constraint(&row, inputs.bess.p_max_kw + inputs.scen.lower()[k]);
    }
    Ok(lp)
}

/// Among all offset profiles optimal for `alpha_star`, pick the one with the
/// smallest total magnitude. The budget rows only pin cumulative sums of `F`,
/// so the plain optimum is a jagged bang-bang vertex; this second stage
/// resolves the tie deterministically and keeps plans physically tame.
fn min_effort_offset(
    inputs: &ScheduleInputs,
    alpha_star: f64,
) -> Result<Option<Vec<f64>>, ScheduleError> {
    let n = inputs.grid.slots();
    let base = build_lp(inputs, ObjectiveMode::Feasibility)?;
    let mut lp = LinearProgram::new(1 + 2 * n);
    let mut obj = vec![0.0; 1 + 2 * n];
    for t in 0..n {
        obj[1 + n + t] = -1.0; // minimise sum |F_k|
    }
    lp.set_objective(obj);
    // allow a hair of downward slack so the pinned alpha stays feasible
    let alpha_lo = (alpha_star * (1.0 - 1e-12) - 1e-15).max(0.0);
    lp.set_bounds(0, alpha_lo, alpha_star);
    for t in 0..n {
        lp.set_bounds(1 + n + t, 0.0, f64::INFINITY);
    }
    let mut row = vec![0.0; 1 + 2 * n];
    for i in 0..base.num_constraints() {
        row.iter_mut().for_each(|v| *v = 0.0);
        row[..=n].copy_from_slice(base.constraint_row(i));
        lp.add_constraint(&row, base.rhs()[i]);
    }
    for k in 0..n {
        row.iter_mut().for_each(|v| *v = 0.0);
        row[1 + k] = 1.0;
        row[1 + n + k] = -1.0;
        lp.add_constraint(&row, 0.0); // F_k <= t_k
        row[1 + k] = -1.0;
        lp.add_constraint(&row, 0.0); // -F_k <= t_k
    }
    let sol = lp::solve(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.x[1..=n].to_vec()),
        _ => None,
    })
}

/// Solve the day-ahead problem with the infeasibility ladder:
/// 1. the full LP (followed by a minimum-effort tie-break on the offset);
/// 2. if infeasible, `alpha := 0` and re-solve for the offset alone (days
///    where demand uncertainty uses up the whole battery);
/// 3. if still infeasible, relax the energy bounds by the smallest uniform
///    margin that admits a plan (Chebyshev relaxation) and flag
///    `fallback_used`.
pub fn solve_day_ahead(
    inputs: &ScheduleInputs,
    mode: ObjectiveMode,
) -> Result<DayAheadPlan, ScheduleError> {
    let n = inputs.grid.slots();
    let forecast = inputs.scen.forecast();

    let lp_full = build_lp(inputs, mode)?;
    let sol = lp::solve(&lp_full)?;
    match sol.status {
        LpStatus::Optimal => {
            let alpha = sol.x[0].max(0.0);
            let offset = match mode {
                // feasibility mode promises nothing beyond a feasible point
                ObjectiveMode::Feasibility => sol.x[1..=n].to_vec(),
                _ => min_effort_offset(inputs, alpha)?.unwrap_or_else(|| sol.x[1..=n].to_vec()),
            };
            return Ok(DayAheadPlan::new(alpha, offset, forecast));
        }
        LpStatus::Unbounded => {
            return Err(ScheduleError::Internal(
                "day-ahead LP unbounded despite finite power rating".into(),
            ));
        }
        LpStatus::Infeasible => {}
    }

    // alpha pinned to zero: no frequency regulation on this day
    if let Some(offset) = min_effort_offset(inputs, 0.0)? {
        return Ok(DayAheadPlan::new(0.0, offset, forecast));
    }

    // minimal uniform energy-bound relaxation
    let mut lp_relax = build_lp_inner(inputs, ObjectiveMode::Feasibility, true)?;
    lp_relax.set_bounds(0, 0.0, 0.0);
    let sol = lp::solve(&lp_relax)?;
    match sol.status {
        LpStatus::Optimal => {
            let mut plan = DayAheadPlan::new(0.0, sol.x[1..=n].to_vec(), forecast);
            plan.fallback_used = true;
            Ok(plan)
        }
        _ => Err(ScheduleError::Infeasible),
    }
}

/// Constraint slacks of a plan, re-evaluated from the raw inputs rather than
/// the LP matrix. Violations are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub max_energy_violation_kwh: f64,
    pub max_power_violation_kw: f64,
    /// Slots (0-based) where each family binds within `binding_tol`.
    pub binding_energy_upper: Vec<usize>,
    pub binding_energy_lower: Vec<usize>,
    pub binding_power_upper: Vec<usize>,
    pub binding_power_lower: Vec<usize>,
}

pub fn evaluate_plan(
    inputs: &ScheduleInputs,
    plan: &DayAheadPlan,
    binding_tol: f64,
) -> ConstraintReport {
    let n = inputs.grid.slots();
    let dt = inputs.grid.dt_hours();
    let alpha = plan.alpha_kw_per_hz;
    let dfmax = inputs.fr.delta_f_max_hz;
    let mut report = ConstraintReport {
        max_energy_violation_kwh: 0.0,
        max_power_violation_kw: 0.0,
        binding_energy_upper: Vec::new(),
        binding_energy_lower: Vec::new(),
        binding_power_upper: Vec::new(),
        binding_power_lower: Vec::new(),
    };
    let mut cum_up = inputs.e_init_kwh;
    let mut cum_down = inputs.e_init_kwh;
    for k in 0..n {
        cum_up += dt * (plan.offset_kw[k] + inputs.scen.upper()[k]);
        cum_down += dt * (plan.offset_kw[k] + inputs.scen.lower()[k]);
        let e_hi = cum_up + alpha * inputs.env.w_up()[k];
        let e_lo = cum_down + alpha * inputs.env.w_down()[k];
        let up_slack = inputs.bess.e_max_kwh - e_hi;
        let lo_slack = e_lo - inputs.bess.e_min_kwh;
        report.max_energy_violation_kwh = report
            .max_energy_violation_kwh
            .max(-up_slack)
            .max(-lo_slack);
        if up_slack.abs() <= binding_tol {
            report.binding_energy_upper.push(k);
        }
        if lo_slack.abs() <= binding_tol {
            report.binding_energy_lower.push(k);
        }
        let p_hi = plan.offset_kw[k] + inputs.scen.upper()[k] + dfmax * alpha;
        let p_lo = plan.offset_kw[k] + inputs.scen.lower()[k] - dfmax * alpha;
        let up_slack = inputs.bess.p_max_kw - p_hi;
        let lo_slack = p_lo + inputs.bess.p_max_kw;
        report.max_power_violation_kw = report
            .max_power_violation_kw
            .max(-up_slack)
            .max(-lo_slack);
        if up_slack.abs() <= binding_tol {
            report.binding_power_upper.push(k);
        }
        if lo_slack.abs() <= binding_tol {
            report.binding_power_lower.push(k);
        }
    }
    report
}

/// Largest end-of-day gap between an ideal and a lossy battery integrating
/// the same daily power profiles (stored-energy frame, kW at grid
/// resolution).
pub fn max_efficiency_drift(
    profiles: &[Vec<f64>],
    grid: &TimeGrid,
    bess: &BessParams,
) -> Result<f64, ScheduleError> {
    if profiles.is_empty() {
        return Err(ScheduleError::EmptyScenarioSet);
    }
    let n = grid.slots();
    let dt = grid.dt_hours();
    let mut worst: f64 = 0.0;
    for (index, profile) in profiles.iter().enumerate() {
        if profile.len() != n {
            return Err(ScheduleError::ProfileLength {
                index,
                got: profile.len(),
                expected: n,
            });
        }
        let mut ideal = 0.0;
        let mut lossy = 0.0;
        for &b in profile {
            let eta = if b >= 0.0 { bess.beta } else { 1.0 / bess.beta };
            ideal += dt * b;
            lossy += dt * eta * b;
        }
        worst = worst.max((ideal - lossy).abs());
    }
    Ok(worst)
}

/// Calibrated scheduling floor: the worst efficiency drift rounded up to the
/// next whole percent of `E_nom` (a drift that already sits on a whole
/// percent stays there).
pub fn calibrate_e_min(
    profiles: &[Vec<f64>],
    grid: &TimeGrid,
    bess: &BessParams,
) -> Result<f64, ScheduleError> {
    let drift = max_efficiency_drift(profiles, grid, bess)?;
    let pct = (drift / bess.e_nom_kwh * 100.0).ceil();
    Ok(pct / 100.0 * bess.e_nom_kwh)
}
