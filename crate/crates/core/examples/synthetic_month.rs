//! Run a synthetic month of stacked dispatch + PFR operation and print the
//! summary table.

use bess_core::budgets::{FrParams, TimeGrid};
use bess_core::scheduler::{BessParams, ObjectiveMode};
use bess_core::simulator::{self, ForecastKind, ScenarioParams};

fn main() {
    let grid = TimeGrid::standard_day();
    let fr = FrParams::default();
    let bess = BessParams::default_unit();
    let params = ScenarioParams::moderate(grid, fr);

    let (_envelope, days) =
        simulator::build_synthetic_days(42, &params, 31, 30, 1.96, true).unwrap();
    let out = simulator::run_horizon(
        bess,
        fr,
        0.35 * bess.e_nom_kwh,
        &days,
        ObjectiveMode::MaxAlpha,
        ForecastKind::Oracle,
    )
    .unwrap();

    println!("day  soe_0%  alpha[kW/Hz]  F_avg[kW]  soe_min%  soe_max%");
    for (i, d) in out.report.days.iter().enumerate() {
        println!(
            "{i:>3}  {:>6.1}  {:>12.1}  {:>9.2}  {:>8.1}  {:>8.1}{}",
            d.soe_0_pct,
            d.alpha_kw_per_hz,
            d.f_avg_kw,
            d.soe_min_pct,
            d.soe_max_pct,
            if d.alpha_kw_per_hz == 0.0 { "  (no PFR)" } else { "" }
        );
    }
    let agg = &out.report.aggregates;
    println!("----");
    println!(
        "mean: soe_0 {:.1}%  alpha {:.1} kW/Hz  F_avg {:.2} kW  eps_rms {:.2e} kW",
        agg.mean.soe_0_pct, agg.mean.alpha_kw_per_hz, agg.mean.f_avg_kw, agg.mean.eps_rms_kw
    );
}
