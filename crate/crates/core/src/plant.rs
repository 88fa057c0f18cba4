//! Battery plant model: stored-energy integration under an asymmetric
//! round-trip efficiency and hard physical limits.
//!
//! Power is expressed in the stored-energy frame used throughout the control
//! chain: `b > 0` charges the battery (stored energy rises by `beta * b * dt`),
//! `b < 0` discharges it (stored energy falls by `|b| / beta * dt`). Power
//! injected into the grid is therefore `-b`; that mapping happens here and
//! nowhere else. Both loss factors drain extra energy relative to an ideal
//! battery, so any closed charge/discharge cycle drifts the state of energy
//! downward.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheduler::BessParams;

#[derive(Debug, Error, PartialEq)]
pub enum PlantError {
    #[error("initial stored energy {soe} kWh outside the physical range [0, {e_nom}] kWh")]
    SoeOutOfRange { soe: f64, e_nom: f64 },
    #[error("commanded power {b_kw} kW exceeds the rated {p_max} kW")]
    PowerAboveRating { b_kw: f64, p_max: f64 },
    #[error("time step must be positive, got {0} h")]
    NonPositiveDt(f64),
    #[error("non-finite power command")]
    NonFinitePower,
}

/// Result of applying one power command: what was actually absorbed and how
/// the stored energy moved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedPower {
    pub requested_kw: f64,
    /// Power after any reduction needed to keep the stored energy physical.
    pub applied_kw: f64,
    pub delta_e_kwh: f64,
    pub clamped: bool,
}

/// Stored energy of the battery, clamped to the physical range `[0, E_nom]`.
/// The scheduling margins `[E_min, E_max]` are softer limits owned by the
/// scheduler; crossing them is an event for the simulator to report, not a
/// plant concern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    soe_kwh: f64,
    bess: BessParams,
    clamp_events: u64,
}

impl PlantState {
    pub fn new(soe_kwh: f64, bess: BessParams) -> Result<Self, PlantError> {
        if !soe_kwh.is_finite() || soe_kwh < 0.0 || soe_kwh > bess.e_nom_kwh {
            return Err(PlantError::SoeOutOfRange {
                soe: soe_kwh,
                e_nom: bess.e_nom_kwh,
            });
        }
        Ok(Self {
            soe_kwh,
            bess,
            clamp_events: 0,
        })
    }

    pub fn soe_kwh(&self) -> f64 {
        self.soe_kwh
    }

    pub fn clamp_events(&self) -> u64 {
        self.clamp_events
    }

    pub fn bess(&self) -> &BessParams {
        &self.bess
    }

    fn efficiency(&self, b_kw: f64) -> f64 {
        if b_kw >= 0.0 {
            self.bess.beta
        } else {
            1.0 / self.bess.beta
        }
    }

    /// Integrate one step of the commanded power over `dt_h` hours. If the
    /// full command would push the stored energy outside `[0, E_nom]`, the
    /// applied power is reduced to land exactly on the limit and the clamp is
    /// counted.
    pub fn apply_power(&mut self, b_kw: f64, dt_h: f64) -> Result<AppliedPower, PlantError> {
        if !b_kw.is_finite() {
            return Err(PlantError::NonFinitePower);
        }
        if !(dt_h > 0.0) {
            return Err(PlantError::NonPositiveDt(dt_h));
        }
        if b_kw.abs() > self.bess.p_max_kw * (1.0 + 1e-9) {
            return Err(PlantError::PowerAboveRating {
                b_kw,
                p_max: self.bess.p_max_kw,
            });
        }
        let delta = dt_h * self.efficiency(b_kw) * b_kw;
        let target = self.soe_kwh + delta;
        let (applied_kw, delta_e, clamped) = if target > self.bess.e_nom_kwh {
            let d = self.bess.e_nom_kwh - self.soe_kwh;
            (d / (dt_h * self.bess.beta), d, true)
        } else if target < 0.0 {
            let d = -self.soe_kwh;
            (d * self.bess.beta / dt_h, d, true)
        } else {
            (b_kw, delta, false)
        };
        if clamped {
            self.clamp_events += 1;
        }
        self.soe_kwh += delta_e;
        Ok(AppliedPower {
            requested_kw: b_kw,
            applied_kw,
            delta_e_kwh: delta_e,
            clamped,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bess(beta: f64) -> BessParams {
        BessParams::new(560.0, 720.0, 28.0, 560.0, beta).unwrap()
    }

    #[test]
    fn zero_power_leaves_state_unchanged() {
        let mut p = PlantState::new(280.0, bess(0.96)).unwrap();
        let r = p.apply_power(0.0, 1.0).unwrap();
        assert_eq!(p.soe_kwh(), 280.0);
        assert_eq!(r.delta_e_kwh, 0.0);
        assert!(!r.clamped);
    }

    #[test]
    fn ideal_battery_integrates_exactly() {
        let mut p = PlantState::new(200.0, bess(1.0)).unwrap();
        p.apply_power(100.0, 1.0).unwrap();
        assert_eq!(p.soe_kwh(), 300.0);
        p.apply_power(-100.0, 1.0).unwrap();
        assert_eq!(p.soe_kwh(), 200.0);
    }

    #[test]
    fn symmetric_cycle_drifts_toward_depletion() {
        // +/-100 kW for 1 h each at beta = 0.96: net drift ~= -8.17 kWh
        let mut p = PlantState::new(280.0, bess(0.96)).unwrap();
        p.apply_power(100.0, 1.0).unwrap();
        p.apply_power(-100.0, 1.0).unwrap();
        let drift = p.soe_kwh() - 280.0;
        assert!((drift + 8.1667).abs() < 1e-2, "drift {drift}");
        assert!(drift < 0.0);
    }

    #[test]
    fn energy_bookkeeping_is_exact() {
        // replaying the reported deltas onto the initial energy, in order,
        // reproduces the stored energy bit for bit
        let mut p = PlantState::new(100.0, bess(0.96)).unwrap();
        let mut replay = 100.0;
        for i in 0..1000 {
            let b = if i % 3 == 0 { 50.0 } else { -20.0 };
            replay += p.apply_power(b, 1.0 / 60.0).unwrap().delta_e_kwh;
            assert_eq!(p.soe_kwh(), replay);
        }
    }

    #[test]
    fn closed_cycles_strictly_lossy() {
        // any zero-sum power sequence with both signs loses energy at beta < 1
        let mut p = PlantState::new(300.0, bess(0.9)).unwrap();
        for b in [120.0, -80.0, 60.0, -100.0] {
            p.apply_power(b, 0.5).unwrap();
        }
        assert!(p.soe_kwh() < 300.0);
    }

    #[test]
    fn clamps_at_full_and_empty() {
        let mut p = PlantState::new(559.0, bess(1.0)).unwrap();
        let r = p.apply_power(100.0, 1.0).unwrap();
        assert!(r.clamped);
        assert_eq!(p.soe_kwh(), 560.0);
        assert!((r.applied_kw - 1.0).abs() < 1e-12);

        let mut p = PlantState::new(0.5, bess(1.0)).unwrap();
        let r = p.apply_power(-100.0, 1.0).unwrap();
        assert!(r.clamped);
        assert_eq!(p.soe_kwh(), 0.0);
        assert_eq!(p.clamp_events(), 1);
    }

    #[test]
    fn rejects_power_above_rating() {
        let mut p = PlantState::new(280.0, bess(0.96)).unwrap();
        assert!(matches!(
            p.apply_power(721.0, 1.0),
            Err(PlantError::PowerAboveRating { .. })
        ));
    }

    #[test]
    fn rejects_bad_initial_soe() {
        assert!(PlantState::new(-1.0, bess(0.96)).is_err());
        assert!(PlantState::new(561.0, bess(0.96)).is_err());
    }
}
