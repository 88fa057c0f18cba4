use bess_core::data_io;
use bess_core::simulator::{HorizonReport, MetricRow};

use crate::{AppError, ReportArgs};

pub fn run(args: &ReportArgs) -> Result<(), AppError> {
    let mut all_days = Vec::new();
    for path in &args.reports {
        let report = data_io::read_report(path)?;
        all_days.extend(report.days);
    }
    if all_days.is_empty() {
        return Err(AppError::Validation("reports contain no days".to_string()));
    }
    let n_days = all_days.len();
    let pooled = HorizonReport::from_days(all_days).map_err(|e| AppError::Internal(e.to_string()))?;

    println!("{n_days} day(s) aggregated");
    println!(
        "{:<6} {:>10} {:>12} {:>10} {:>12} {:>12}",
        "", "SOE_0 [%]", "alpha[kW/Hz]", "F_avg[kW]", "SOE_min [%]", "SOE_max [%]"
    );
    let line = |name: &str, r: &MetricRow| {
        println!(
            "{:<6} {:>10.1} {:>12.1} {:>10.2} {:>12.1} {:>12.1}",
            name, r.soe_0_pct, r.alpha_kw_per_hz, r.f_avg_kw, r.soe_min_pct, r.soe_max_pct
        );
    };
    line("Mean", &pooled.aggregates.mean);
    line("Max", &pooled.aggregates.max);
    line("Min", &pooled.aggregates.min);

    println!(
        "tracking error: eps_mean {:.3} kW, eps_rms {:.3} kW, eps_max {:.3} kW (means over days)",
        pooled.aggregates.mean.eps_mean_kw,
        pooled.aggregates.mean.eps_rms_kw,
        pooled.aggregates.mean.eps_max_kw
    );
    Ok(())
}
