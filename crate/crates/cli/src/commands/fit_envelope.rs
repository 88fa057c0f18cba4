use std::fs;

use bess_core::{data_io, freq_stats};

use crate::config::Config;
use crate::{AppError, FitEnvelopeArgs};

pub fn run(config: &Config, args: &FitEnvelopeArgs) -> Result<(), AppError> {
    let grid = config.time_grid()?;
    let fr = config.fr_params()?;
    let z = args.confidence_z.unwrap_or(config.simulation.confidence_z);
    if !(z > 0.0) || !z.is_finite() {
        return Err(AppError::Validation(format!(
            "confidence z must be positive, got {z}"
        )));
    }

    let mut daily_wf = Vec::new();
    for path in &args.freq {
        for record in data_io::load_frequency(path)? {
            let wf = freq_stats::compute_wf(&record, &fr, &grid)?;
            daily_wf.push(wf);
        }
    }
    println!("computed W_f for {} day(s)", daily_wf.len());

    let env = freq_stats::fit_envelope(&daily_wf, z, &grid)?;

    // day-end normality check, reported when the sample is large enough
    let day_end: Vec<f64> = daily_wf.iter().map(|d| d[grid.slots() - 1]).collect();
    if day_end.len() >= 30 {
        let bins = freq_stats::default_bin_count(day_end.len());
        let diag = freq_stats::normality_diagnostic(&day_end, bins)?;
        println!(
            "chi-square normality of W_f at day end: statistic {:.2} vs critical {:.2} ({} dof) -> {}",
            diag.statistic,
            diag.critical_value,
            diag.degrees_of_freedom,
            if diag.reject { "REJECTED at 5%" } else { "not rejected at 5%" }
        );
    }

    fs::create_dir_all(&args.out)?;
    let out_path = args.out.join("envelope.csv");
    data_io::write_envelope(&out_path, &env)?;
    let n = grid.slots() - 1;
    println!(
        "envelope written to {} (day-end band [{:.4}, {:.4}] Hz*h at z = {z})",
        out_path.display(),
        env.w_down()[n],
        env.w_up()[n]
    );
    Ok(())
}
