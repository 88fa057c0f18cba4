//! Closed-loop multi-day simulation: schedule each day, run the 1 Hz control
//! loop against load/frequency realizations and the lossy plant, carry the
//! final stored energy into the next day, and report per-day metrics.
//!
//! Frames: the load scenarios and their realizations describe the dispatch
//! power requirement seen by the battery (the quantity the day-ahead budgets
//! bound). The feeder measurement handed to the controller is assembled as
//! `P = (L_hat - realization) + B`, which closes the tracking loop so that
//! the battery's slot-average dispatch power lands on `F + realization` --
//! inside the scheduled band whenever the realization respects the scenario
//! bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budgets::{
    self, BudgetError, FrParams, IntervalSequence, LoadScenarios, TimeGrid,
};
use crate::freq_stats::{self, FreqStatsError, FrequencyEnvelope, FrequencyRecord};
use crate::plant::{PlantError, PlantState};
use crate::realtime::{ControlError, ControllerState, ShortTermForecast};
use crate::scheduler::{
    self, BessParams, DayAheadPlan, ObjectiveMode, ScheduleError, ScheduleInputs,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    FreqStats(#[from] FreqStatsError),
    #[error("realization covers {got} seconds, expected {expected}")]
    RealizationLength { got: usize, expected: usize },
    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),
    #[error("horizon needs at least one day")]
    EmptyHorizon,
}

/// 1 Hz realization of one day: the dispatch-requirement series bounded by
/// the load scenarios, and the grid frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRealization {
    pub load_kw: Vec<f64>,
    pub frequency_hz: Vec<f64>,
}

/// One second of the closed loop. Power columns hold commanded setpoints;
/// `feeder_kw` and `soe_kwh` are the physical outcomes (they differ from the
/// commands only when the plant clamps at its physical energy limits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub epoch_s: i64,
    pub slot: usize,
    pub f_hz: f64,
    pub feeder_kw: f64,
    pub b_fr_kw: f64,
    pub b_d_kw: f64,
    pub b_total_kw: f64,
    pub soe_kwh: f64,
    pub eps_kw: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationTrace {
    pub rows: Vec<TraceRow>,
}

impl SimulationTrace {
    /// Stored energy at the end of each slot.
    pub fn soe_at_slot_ends(&self, spt: usize) -> Vec<f64> {
        self.rows
            .iter()
            .skip(spt - 1)
            .step_by(spt)
            .map(|r| r.soe_kwh)
            .collect()
    }
}

/// Per-day outcome in the shape of the experiment tables: initial state of
/// energy, allocation, state-of-energy range and tracking errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayResult {
    pub soe_0_pct: f64,
    pub alpha_kw_per_hz: f64,
    pub f_avg_kw: f64,
    pub soe_min_pct: f64,
    pub soe_max_pct: f64,
    pub eps_mean_kw: f64,
    pub eps_rms_kw: f64,
    pub eps_max_kw: f64,
    pub fallback_used: bool,
    pub plant_clamp_events: u64,
    /// Scheduled total energy budget (dispatch + PFR) in absolute stored
    /// energy terms: `E_init` plus the summed budget bounds.
    pub budget_trace: IntervalSequence,
}

/// Aggregate row over a horizon (one line of the summary table).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub soe_0_pct: f64,
    pub alpha_kw_per_hz: f64,
    pub f_avg_kw: f64,
    pub soe_min_pct: f64,
    pub soe_max_pct: f64,
    pub eps_mean_kw: f64,
    pub eps_rms_kw: f64,
    pub eps_max_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRows {
    pub mean: MetricRow,
    pub max: MetricRow,
    pub min: MetricRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    pub days: Vec<DayResult>,
    pub aggregates: AggregateRows,
}

impl HorizonReport {
    pub fn from_days(days: Vec<DayResult>) -> Result<Self, SimError> {
        if days.is_empty() {
            return Err(SimError::EmptyHorizon);
        }
        let field = |f: fn(&DayResult) -> f64| -> (f64, f64, f64) {
            let vals: Vec<f64> = days.iter().map(f).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            (mean, max, min)
        };
        let (soe0_m, soe0_hi, soe0_lo) = field(|d| d.soe_0_pct);
        let (a_m, a_hi, a_lo) = field(|d| d.alpha_kw_per_hz);
        let (f_m, f_hi, f_lo) = field(|d| d.f_avg_kw);
        let (smin_m, smin_hi, smin_lo) = field(|d| d.soe_min_pct);
        let (smax_m, smax_hi, smax_lo) = field(|d| d.soe_max_pct);
        let (em_m, em_hi, em_lo) = field(|d| d.eps_mean_kw);
        let (er_m, er_hi, er_lo) = field(|d| d.eps_rms_kw);
        let (ex_m, ex_hi, ex_lo) = field(|d| d.eps_max_kw);
        let row = |soe_0_pct, alpha_kw_per_hz, f_avg_kw, soe_min_pct, soe_max_pct, eps_mean_kw, eps_rms_kw, eps_max_kw| MetricRow {
            soe_0_pct,
            alpha_kw_per_hz,
            f_avg_kw,
            soe_min_pct,
            soe_max_pct,
            eps_mean_kw,
            eps_rms_kw,
            eps_max_kw,
        };
        Ok(Self {
            aggregates: AggregateRows {
                mean: row(soe0_m, a_m, f_m, smin_m, smax_m, em_m, er_m, ex_m),
                max: row(soe0_hi, a_hi, f_hi, smin_hi, smax_hi, em_hi, er_hi, ex_hi),
                min: row(soe0_lo, a_lo, f_lo, smin_lo, smax_lo, em_lo, er_lo, ex_lo),
            },
            days,
        })
    }
}

/// Which short-term forecaster the dispatch loop uses in simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForecastKind {
    /// Trailing average of observed prosumption (deployment behaviour).
    Persistence,
    /// Replay the realization (makes the slot energy objective exact).
    Oracle,
}

/// Everything run_day produces: metrics, the 1 Hz trace, and the scheduled
/// budgets needed for budget/trace plots.
#[derive(Debug, Clone)]
pub struct DayOutcome {
    pub result: DayResult,
    pub trace: SimulationTrace,
    pub plan: DayAheadPlan,
    pub final_soe_kwh: f64,
    /// Dispatch-only energy budget in absolute stored-energy terms.
    pub dispatch_budget: IntervalSequence,
}

/// Schedule one day and run the 1 Hz loop against its realization.
pub fn run_day(
    inputs: &ScheduleInputs,
    mode: ObjectiveMode,
    realization: &DayRealization,
    forecast: ForecastKind,
) -> Result<DayOutcome, SimError> {
    let plan = scheduler::solve_day_ahead(inputs, mode)?;
    run_day_with_plan(inputs, plan, realization, forecast)
}

/// Run the 1 Hz loop for a day whose plan is already decided (e.g. read back
/// from a plan file).
pub fn run_day_with_plan(
    inputs: &ScheduleInputs,
    plan: DayAheadPlan,
    realization: &DayRealization,
    forecast: ForecastKind,
) -> Result<DayOutcome, SimError> {
    let grid = inputs.grid;
    let spt = grid
        .seconds_per_slot()
        .ok_or(ControlError::FractionalSlotSeconds)?;
    let n = grid.slots();
    let seconds = spt * n;
    for series in [&realization.load_kw, &realization.frequency_hz] {
        if series.len() != seconds {
            return Err(SimError::RealizationLength {
                got: series.len(),
                expected: seconds,
            });
        }
    }

    // feeder prosumption component: forecast complement of the realization
    let prosumption: Vec<f64> = (0..seconds)
        .map(|s| inputs.scen.forecast()[s / spt] - realization.load_kw[s])
        .collect();
    let st_forecast = match forecast {
        ForecastKind::Persistence => ShortTermForecast::Persistence,
        ForecastKind::Oracle => ShortTermForecast::Oracle(prosumption.clone()),
    };
    let mut controller =
        ControllerState::new(&plan, inputs.fr, inputs.bess.p_max_kw, &grid, st_forecast)?;
    let mut plant = PlantState::new(inputs.e_init_kwh, inputs.bess)?;

    let dt_h = 1.0 / 3600.0;
    let mut trace = SimulationTrace {
        rows: Vec::with_capacity(seconds),
    };
    let mut measured: Option<f64> = None;
    for s in 0..seconds {
        let sp = controller.step(realization.frequency_hz[s], measured)?;
        let applied = plant.apply_power(sp.b_total_kw, dt_h)?;
        let feeder = prosumption[s] + applied.applied_kw;
        trace.rows.push(TraceRow {
            epoch_s: s as i64,
            slot: s / spt,
            f_hz: realization.frequency_hz[s],
            feeder_kw: feeder,
            b_fr_kw: sp.b_fr_kw,
            b_d_kw: sp.b_dispatch_kw,
            b_total_kw: sp.b_total_kw,
            soe_kwh: plant.soe_kwh(),
            eps_kw: controller.last_epsilon_kw(),
        });
        measured = Some(feeder);
    }

    // slot tracking errors: realized average of (P - B_fr) minus the plan
    let mut eps_slots = Vec::with_capacity(n);
    for k in 0..n {
        let net: f64 = trace.rows[k * spt..(k + 1) * spt]
            .iter()
            .map(|r| r.feeder_kw - r.b_fr_kw)
            .sum();
        eps_slots.push(net / spt as f64 - plan.dispatch_plan_kw[k]);
    }
    let eps_mean = eps_slots.iter().sum::<f64>() / n as f64;
    let eps_rms = (eps_slots.iter().map(|e| e * e).sum::<f64>() / n as f64).sqrt();
    let eps_max = eps_slots.iter().fold(0.0_f64, |a, e| a.max(e.abs()));

    let e_nom = inputs.bess.e_nom_kwh;
    let pct = |kwh: f64| kwh / e_nom * 100.0;
    let (mut soe_min, mut soe_max) = (inputs.e_init_kwh, inputs.e_init_kwh);
    for r in &trace.rows {
        soe_min = soe_min.min(r.soe_kwh);
        soe_max = soe_max.max(r.soe_kwh);
    }

    let dispatch_energy =
        budgets::dispatch_energy_budget(&plan.offset_kw, &inputs.scen, &grid)?;
    let fr_energy = budgets::fr_energy_budget(plan.alpha_kw_per_hz, &inputs.env)?;
    let total = budgets::sum_budgets(&[dispatch_energy.clone(), fr_energy])?;
    let budget_trace = total.shifted(inputs.e_init_kwh);
    let dispatch_budget = dispatch_energy.shifted(inputs.e_init_kwh);

    let f_avg = plan.offset_kw.iter().sum::<f64>() / n as f64;
    let result = DayResult {
        soe_0_pct: pct(inputs.e_init_kwh),
        alpha_kw_per_hz: plan.alpha_kw_per_hz,
        f_avg_kw: f_avg,
        soe_min_pct: pct(soe_min),
        soe_max_pct: pct(soe_max),
        eps_mean_kw: eps_mean,
        eps_rms_kw: eps_rms,
        eps_max_kw: eps_max,
        fallback_used: plan.fallback_used,
        plant_clamp_events: plant.clamp_events(),
        budget_trace,
    };
    Ok(DayOutcome {
        result,
        trace,
        plan,
        final_soe_kwh: plant.soe_kwh(),
        dispatch_budget,
    })
}

/// Inputs for one day of a chained horizon (the initial energy comes from the
/// previous day).
#[derive(Debug, Clone)]
pub struct HorizonDay {
    pub scen: LoadScenarios,
    pub env: FrequencyEnvelope,
    pub realization: DayRealization,
}

#[derive(Debug, Clone)]
pub struct HorizonOutcome {
    pub report: HorizonReport,
    pub outcomes: Vec<DayOutcome>,
}

/// Run consecutive days, carrying the final stored energy of each day into
/// the next day's schedule exactly.
pub fn run_horizon(
    bess: BessParams,
    fr: FrParams,
    soe_start_kwh: f64,
    days: &[HorizonDay],
    mode: ObjectiveMode,
    forecast: ForecastKind,
) -> Result<HorizonOutcome, SimError> {
    if days.is_empty() {
        return Err(SimError::EmptyHorizon);
    }
    let mut soe = soe_start_kwh;
    let mut outcomes = Vec::with_capacity(days.len());
    for day in days {
        let inputs = ScheduleInputs::new(bess, soe, day.scen.clone(), day.env.clone(), fr)?;
        let outcome = run_day(&inputs, mode, &day.realization, forecast)?;
        soe = outcome.final_soe_kwh;
        outcomes.push(outcome);
    }
    let report = HorizonReport::from_days(outcomes.iter().map(|o| o.result.clone()).collect())?;
    Ok(HorizonOutcome { report, outcomes })
}

/// Tunables of the synthetic scenario generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub grid: TimeGrid,
    pub fr: FrParams,
    /// Mean of the forecast requirement profile.
    pub l_hat_base_kw: f64,
    /// Amplitude of its daily sinusoidal shape.
    pub l_hat_amplitude_kw: f64,
    /// Scenario band above/below the forecast.
    pub band_up_kw: f64,
    pub band_down_kw: f64,
    /// Day-to-day multiplicative jitter of the band widths, in [0, 1).
    pub band_jitter: f64,
    /// Within-slot noise of the 1 Hz realization (slot averages are exact).
    pub intraslot_sigma_kw: f64,
    /// Ornstein-Uhlenbeck frequency model.
    pub ou_mean_reversion_per_s: f64,
    pub ou_stationary_sigma_hz: f64,
    /// Contained mode keeps every realized slot average inside the band;
    /// stress mode pushes some outside by `stress_excursion_kw`.
    pub contained: bool,
    pub stress_excursion_kw: f64,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.band_up_kw < 0.0 || self.band_down_kw < 0.0 {
            return Err(SimError::InvalidParams("band widths must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.band_jitter) {
            return Err(SimError::InvalidParams("band jitter must be in [0, 1)".into()));
        }
        if self.intraslot_sigma_kw < 0.0 {
            return Err(SimError::InvalidParams("intraslot sigma must be >= 0".into()));
        }
        if !(self.ou_mean_reversion_per_s > 0.0 && self.ou_mean_reversion_per_s < 1.0) {
            return Err(SimError::InvalidParams(
                "OU mean reversion must be in (0, 1) per second".into(),
            ));
        }
        if self.ou_stationary_sigma_hz <= 0.0 || self.ou_stationary_sigma_hz > 0.5 {
            return Err(SimError::InvalidParams(
                "OU stationary sigma must be in (0, 0.5] Hz".into(),
            ));
        }
        if !self.contained && self.stress_excursion_kw < 0.0 {
            return Err(SimError::InvalidParams(
                "stress excursion must be >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Moderate-uncertainty defaults on the standard day grid. Band widths
    /// accumulate over the horizon (the day-end dispatch energy band is
    /// `24 h * (band_up + band_down)`), so a few kW per side already claims a
    /// sizeable share of a 560 kWh unit; the slow OU frequency model yields
    /// day-end deviation-energy spreads of a few tenths of an Hz*h.
    pub fn moderate(grid: TimeGrid, fr: FrParams) -> Self {
        Self {
            grid,
            fr,
            l_hat_base_kw: 0.0,
            l_hat_amplitude_kw: 5.0,
            band_up_kw: 6.0,
            band_down_kw: 6.0,
            band_jitter: 0.4,
            intraslot_sigma_kw: 2.0,
            ou_mean_reversion_per_s: 5e-4,
            ou_stationary_sigma_hz: 0.04,
            contained: true,
            stress_excursion_kw: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedScenario {
    pub scenarios: LoadScenarios,
    pub realization: DayRealization,
    pub frequency_record: FrequencyRecord,
}

fn ou_frequency(rng: &mut ChaCha8Rng, params: &ScenarioParams, seconds: usize) -> Vec<f64> {
    let theta = params.ou_mean_reversion_per_s;
    let sigma_st = params.ou_stationary_sigma_hz;
    let retain = 1.0 - theta;
    let step_sigma = sigma_st * (1.0 - retain * retain).sqrt();
    let noise = Normal::new(0.0, step_sigma).expect("positive sigma");
    let mut df = sigma_st * Normal::new(0.0, 1.0).unwrap().sample(rng); // stationary start
    let mut out = Vec::with_capacity(seconds);
    for _ in 0..seconds {
        out.push(params.fr.f_nominal_hz + df);
        df = retain * df + noise.sample(rng);
    }
    out
}

/// Deterministic synthetic day: scenario bands, a 1 Hz realization of the
/// banded quantity, and a 1 Hz frequency record.
pub fn scenario_generator(
    seed: u64,
    params: &ScenarioParams,
) -> Result<GeneratedScenario, SimError> {
    params.validate()?;
    let grid = params.grid;
    let n = grid.slots();
    let spt = grid
        .seconds_per_slot()
        .ok_or(ControlError::FractionalSlotSeconds)?;
    let seconds = n * spt;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // day-level band jitter
    let jitter = |rng: &mut ChaCha8Rng, base: f64, j: f64| {
        if j == 0.0 {
            base
        } else {
            base * (1.0 + j * rng.gen_range(-1.0..1.0))
        }
    };
    let band_up = jitter(&mut rng, params.band_up_kw, params.band_jitter);
    let band_down = jitter(&mut rng, params.band_down_kw, params.band_jitter);

    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let l_hat: Vec<f64> = (0..n)
        .map(|k| {
            params.l_hat_base_kw
                + params.l_hat_amplitude_kw
                    * (std::f64::consts::TAU * k as f64 / n as f64 + phase).sin()
        })
        .collect();
    let l_up: Vec<f64> = l_hat.iter().map(|v| v + band_up).collect();
    let l_down: Vec<f64> = l_hat.iter().map(|v| v - band_down).collect();
    let scenarios = LoadScenarios::new(l_hat.clone(), l_up.clone(), l_down.clone(), grid)?;

    // slot-average targets, then zero-slot-mean intraslot noise on top
    let mut load = Vec::with_capacity(seconds);
    for k in 0..n {
        let target = if params.contained {
            l_hat[k] + rng.gen_range(-0.9 * band_down..=0.9 * band_up)
        } else if rng.gen_bool(0.3) {
            if rng.gen_bool(0.5) {
                l_up[k] + params.stress_excursion_kw
            } else {
                l_down[k] - params.stress_excursion_kw
            }
        } else {
            l_hat[k] + rng.gen_range(-0.9 * band_down..=0.9 * band_up)
        };
        let noise: Vec<f64> = (0..spt)
            .map(|_| {
                if params.intraslot_sigma_kw == 0.0 {
                    0.0
                } else {
                    rng.gen_range(-params.intraslot_sigma_kw..=params.intraslot_sigma_kw)
                }
            })
            .collect();
        let mean = noise.iter().sum::<f64>() / spt as f64;
        for w in &noise {
            load.push(target + (w - mean));
        }
    }

    let frequency_hz = ou_frequency(&mut rng, params, seconds);
    let frequency_record = FrequencyRecord::new(
        0,
        (0..seconds as i64).collect(),
        frequency_hz.clone(),
    )?;
    Ok(GeneratedScenario {
        scenarios,
        realization: DayRealization {
            load_kw: load,
            frequency_hz,
        },
        frequency_record,
    })
}

/// Running deviation-energy trajectory of a dense 1 Hz frequency series,
/// sampled at slot ends.
pub fn wf_of_dense(frequency_hz: &[f64], fr: &FrParams, grid: &TimeGrid) -> Vec<f64> {
    let spt = grid.seconds_per_slot().expect("whole-second slots");
    let mut out = Vec::with_capacity(grid.slots());
    let mut acc = 0.0;
    for k in 0..grid.slots() {
        for s in 0..spt {
            acc += (frequency_hz[k * spt + s] - fr.f_nominal_hz) / 3600.0;
        }
        out.push(acc);
    }
    out
}

/// Shrink a day's frequency deviations toward the envelope midpoint just
/// enough that the whole `W_f` trajectory stays inside `[w_down, w_up]`.
/// Scaling is linear, so containment is exact by construction.
pub fn contain_frequency_in_envelope(
    frequency_hz: &mut [f64],
    env: &FrequencyEnvelope,
    fr: &FrParams,
    grid: &TimeGrid,
) {
    let spt = grid.seconds_per_slot().expect("whole-second slots");
    let n = grid.slots();
    let wf = wf_of_dense(frequency_hz, fr, grid);
    let mid: Vec<f64> = (0..n)
        .map(|k| (env.w_up()[k] + env.w_down()[k]) / 2.0)
        .collect();
    let mut scale = 1.0_f64;
    for k in 0..n {
        let dev = wf[k] - mid[k];
        let room = if dev > 0.0 {
            env.w_up()[k] - mid[k]
        } else {
            mid[k] - env.w_down()[k]
        };
        if dev.abs() > room {
            scale = scale.min(0.999 * room / dev.abs());
        }
    }
    if scale >= 1.0 {
        return;
    }
    // per-second deviation equivalent of the midpoint trajectory
    for k in 0..n {
        let prev = if k == 0 { 0.0 } else { mid[k - 1] };
        let mid_dev_hz = (mid[k] - prev) * 3600.0 / spt as f64;
        for s in 0..spt {
            let f = &mut frequency_hz[k * spt + s];
            let dev = *f - fr.f_nominal_hz;
            *f = fr.f_nominal_hz + mid_dev_hz + scale * (dev - mid_dev_hz);
        }
    }
}

/// Fit a frequency-energy envelope from `n_days` generator days (the
/// training population), deterministically derived from `seed`.
pub fn fitted_envelope(
    seed: u64,
    params: &ScenarioParams,
    n_days: usize,
    confidence_z: f64,
) -> Result<FrequencyEnvelope, SimError> {
    params.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut days = Vec::with_capacity(n_days);
    for _ in 0..n_days {
        let day_seed = master.gen::<u64>();
        let mut rng = ChaCha8Rng::seed_from_u64(day_seed);
        let seconds = params.grid.slots()
            * params
                .grid
                .seconds_per_slot()
                .ok_or(ControlError::FractionalSlotSeconds)?;
        let freq = ou_frequency(&mut rng, params, seconds);
        days.push(wf_of_dense(&freq, &params.fr, &params.grid));
    }
    Ok(freq_stats::fit_envelope(&days, confidence_z, &params.grid)?)
}

/// Assemble a seeded synthetic horizon: one shared fitted envelope plus
/// per-day scenarios and realizations. With `contain_freq` the frequency
/// realizations are shrunk into the envelope (the regime the day-ahead
/// guarantee covers).
pub fn build_synthetic_days(
    seed: u64,
    params: &ScenarioParams,
    n_days: usize,
    training_days: usize,
    confidence_z: f64,
    contain_freq: bool,
) -> Result<(FrequencyEnvelope, Vec<HorizonDay>), SimError> {
    let env = fitted_envelope(seed ^ 0x5eed_0001, params, training_days, confidence_z)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut days = Vec::with_capacity(n_days);
    for _ in 0..n_days {
        let day_seed = master.gen::<u64>();
        let mut generated = scenario_generator(day_seed, params)?;
        if contain_freq {
            contain_frequency_in_envelope(
                &mut generated.realization.frequency_hz,
                &env,
                &params.fr,
                &params.grid,
            );
        }
        days.push(HorizonDay {
            scen: generated.scenarios,
            env: env.clone(),
            realization: generated.realization,
        });
    }
    Ok((env, days))
}
