//! Shared fixtures for the benchmark targets.

use bess_core::budgets::{FrParams, TimeGrid};
use bess_core::scheduler::{BessParams, ScheduleInputs};
use bess_core::simulator::{self, DayRealization, ScenarioParams};

/// One full-scale day: 288 slots, fitted envelope, contained realization.
pub fn standard_day(seed: u64) -> (ScheduleInputs, DayRealization) {
    let grid = TimeGrid::standard_day();
    let fr = FrParams::default();
    let params = ScenarioParams::moderate(grid, fr);
    let env = simulator::fitted_envelope(seed ^ 0xbe5c, &params, 20, 1.96).unwrap();
    let generated = simulator::scenario_generator(seed, &params).unwrap();
    let inputs = ScheduleInputs::new(
        BessParams::default_unit(),
        280.0,
        generated.scenarios,
        env,
        fr,
    )
    .unwrap();
    (inputs, generated.realization)
}
