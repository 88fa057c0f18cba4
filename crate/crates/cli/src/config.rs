//! Declarative run configuration (TOML) with CLI-flag overrides.
//!
//! Every section is optional; defaults reproduce the reference setup: a
//! 560 kWh / 720 kVA unit with a 5% energy floor, beta = 0.96, a 24 h horizon
//! at 5-minute resolution and 200 mHz full PFR activation.

use serde::Deserialize;

use bess_core::budgets::{FrParams, TimeGrid};
use bess_core::scheduler::{BessParams, ObjectiveMode, RevenueModel};
use bess_core::simulator::{ForecastKind, ScenarioParams};

use crate::AppError;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub bess: BessSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub fr: FrSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub synthetic: SyntheticSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BessSection {
    pub e_nom_kwh: f64,
    pub p_max_kw: f64,
    pub e_min_kwh: f64,
    pub e_max_kwh: f64,
    pub beta: f64,
}

impl Default for BessSection {
    fn default() -> Self {
        Self {
            e_nom_kwh: 560.0,
            p_max_kw: 720.0,
            e_min_kwh: 28.0,
            e_max_kwh: 560.0,
            beta: 0.96,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub horizon_hours: f64,
    pub slots: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            horizon_hours: 24.0,
            slots: 288,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrSection {
    pub f_nominal_hz: f64,
    pub delta_f_max_hz: f64,
}

impl Default for FrSection {
    fn default() -> Self {
        Self {
            f_nominal_hz: 50.0,
            delta_f_max_hz: 0.2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub mode: String,
    pub e_init_kwh: f64,
    pub price_fr_per_kw_hz: f64,
    pub price_dispatch_per_kwh: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            mode: "max-alpha".to_string(),
            e_init_kwh: 280.0,
            price_fr_per_kw_hz: 1.0,
            price_dispatch_per_kwh: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub seed: u64,
    pub days: usize,
    /// "oracle" or "persistence"
    pub forecast: String,
    pub training_days: usize,
    pub confidence_z: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            seed: 1,
            days: 31,
            forecast: "oracle".to_string(),
            training_days: 30,
            confidence_z: 1.96,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub l_hat_base_kw: f64,
    pub l_hat_amplitude_kw: f64,
    pub band_up_kw: f64,
    pub band_down_kw: f64,
    pub band_jitter: f64,
    pub intraslot_sigma_kw: f64,
    pub ou_mean_reversion_per_s: f64,
    pub ou_stationary_sigma_hz: f64,
    pub contained: bool,
    pub stress_excursion_kw: f64,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        let grid = TimeGrid::standard_day();
        let p = ScenarioParams::moderate(grid, FrParams::default());
        Self {
            l_hat_base_kw: p.l_hat_base_kw,
            l_hat_amplitude_kw: p.l_hat_amplitude_kw,
            band_up_kw: p.band_up_kw,
            band_down_kw: p.band_down_kw,
            band_jitter: p.band_jitter,
            intraslot_sigma_kw: p.intraslot_sigma_kw,
            ou_mean_reversion_per_s: p.ou_mean_reversion_per_s,
            ou_stationary_sigma_hz: p.ou_stationary_sigma_hz,
            contained: p.contained,
            stress_excursion_kw: p.stress_excursion_kw,
        }
    }
}

impl Config {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self, AppError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    AppError::Validation(format!("cannot read config {}: {e}", p.display()))
                })?;
                toml::from_str(&text).map_err(|e| {
                    AppError::Validation(format!("config {}: {e}", p.display()))
                })
            }
        }
    }

    pub fn bess_params(&self) -> Result<BessParams, AppError> {
        BessParams::new(
            self.bess.e_nom_kwh,
            self.bess.p_max_kw,
            self.bess.e_min_kwh,
            self.bess.e_max_kwh,
            self.bess.beta,
        )
        .map_err(|e| AppError::Validation(e.to_string()))
    }

    pub fn time_grid(&self) -> Result<TimeGrid, AppError> {
        let grid = TimeGrid::new(self.grid.horizon_hours, self.grid.slots)
            .map_err(|e| AppError::Validation(e.to_string()))?;
        if grid.seconds_per_slot().is_none() {
            return Err(AppError::Validation(
                "grid slot duration must be a whole number of seconds".to_string(),
            ));
        }
        Ok(grid)
    }

    pub fn fr_params(&self) -> Result<FrParams, AppError> {
        FrParams::new(self.fr.f_nominal_hz, self.fr.delta_f_max_hz)
            .map_err(|e| AppError::Validation(e.to_string()))
    }

    pub fn objective_mode(&self, override_mode: Option<&str>) -> Result<ObjectiveMode, AppError> {
        let name = override_mode.unwrap_or(&self.schedule.mode);
        match name {
            "max-alpha" => Ok(ObjectiveMode::MaxAlpha),
            "revenue" => Ok(ObjectiveMode::Revenue(RevenueModel {
                price_fr_per_kw_hz: self.schedule.price_fr_per_kw_hz,
                price_dispatch_per_kwh: self.schedule.price_dispatch_per_kwh,
            })),
            "feasibility" => Ok(ObjectiveMode::Feasibility),
            other => Err(AppError::Validation(format!(
                "unknown objective mode '{other}' (expected max-alpha, revenue or feasibility)"
            ))),
        }
    }

    pub fn forecast_kind(&self) -> Result<ForecastKind, AppError> {
        match self.simulation.forecast.as_str() {
            "oracle" => Ok(ForecastKind::Oracle),
            "persistence" => Ok(ForecastKind::Persistence),
            other => Err(AppError::Validation(format!(
                "unknown forecast kind '{other}' (expected oracle or persistence)"
            ))),
        }
    }

    pub fn scenario_params(&self) -> Result<ScenarioParams, AppError> {
        let params = ScenarioParams {
            grid: self.time_grid()?,
            fr: self.fr_params()?,
            l_hat_base_kw: self.synthetic.l_hat_base_kw,
            l_hat_amplitude_kw: self.synthetic.l_hat_amplitude_kw,
            band_up_kw: self.synthetic.band_up_kw,
            band_down_kw: self.synthetic.band_down_kw,
            band_jitter: self.synthetic.band_jitter,
            intraslot_sigma_kw: self.synthetic.intraslot_sigma_kw,
            ou_mean_reversion_per_s: self.synthetic.ou_mean_reversion_per_s,
            ou_stationary_sigma_hz: self.synthetic.ou_stationary_sigma_hz,
            contained: self.synthetic.contained,
            stress_excursion_kw: self.synthetic.stress_excursion_kw,
        };
        params
            .validate()
            .map_err(|e| AppError::Validation(e.to_string()))?;
        Ok(params)
    }
}
