use std::fs;
use std::path::Path;

use bess_core::data_io;
use bess_core::scheduler::{DayAheadPlan, ScheduleInputs};
use bess_core::simulator::{
    self, DayOutcome, DayRealization, HorizonReport, ScenarioParams,
};

use crate::config::Config;
use crate::{AppError, SimulateArgs};

pub fn run(config: &Config, args: &SimulateArgs) -> Result<(), AppError> {
    fs::create_dir_all(&args.out)?;
    if args.synthetic {
        run_synthetic(config, args)
    } else {
        run_from_files(config, args)
    }
}

fn write_day_outputs(out_dir: &Path, day_idx: usize, outcome: &DayOutcome) -> Result<(), AppError> {
    let spt = outcome
        .result
        .budget_trace
        .grid()
        .seconds_per_slot()
        .expect("validated grid");
    data_io::write_trace(&out_dir.join(format!("trace_day{day_idx:03}.csv")), &outcome.trace)?;
    data_io::write_budget_csv(
        &out_dir.join(format!("budget_day{day_idx:03}.csv")),
        &outcome.result.budget_trace,
        &outcome.dispatch_budget,
        &outcome.trace.soe_at_slot_ends(spt),
    )?;
    Ok(())
}

fn summarize(report: &HorizonReport) {
    let agg = &report.aggregates;
    println!(
        "{} day(s): alpha mean/max/min = {:.1}/{:.1}/{:.1} kW/Hz, eps_rms mean = {:.3} kW",
        report.days.len(),
        agg.mean.alpha_kw_per_hz,
        agg.max.alpha_kw_per_hz,
        agg.min.alpha_kw_per_hz,
        agg.mean.eps_rms_kw,
    );
    let no_pfr: Vec<String> = report
        .days
        .iter()
        .enumerate()
        .filter(|(_, d)| d.alpha_kw_per_hz == 0.0)
        .map(|(i, d)| {
            if d.fallback_used {
                format!("{i} (relaxed)")
            } else {
                i.to_string()
            }
        })
        .collect();
    if no_pfr.is_empty() {
        println!("no zero-PFR days");
    } else {
        println!("days with alpha = 0: [{}]", no_pfr.join(", "));
    }
}

fn run_synthetic(config: &Config, args: &SimulateArgs) -> Result<(), AppError> {
    let bess = config.bess_params()?;
    let fr = config.fr_params()?;
    let mode = config.objective_mode(args.mode.as_deref())?;
    let forecast = config.forecast_kind()?;
    let params: ScenarioParams = config.scenario_params()?;
    let seed = args.seed.unwrap_or(config.simulation.seed);
    let days = args.days.unwrap_or(config.simulation.days);
    if days == 0 {
        return Err(AppError::Validation("need at least one day".to_string()));
    }
    let e_init = args.e_init.unwrap_or(config.schedule.e_init_kwh);

    let (env, horizon_days) = simulator::build_synthetic_days(
        seed,
        &params,
        days,
        config.simulation.training_days,
        config.simulation.confidence_z,
        params.contained,
    )?;
    data_io::write_envelope(&args.out.join("envelope.csv"), &env)?;

    let outcome = simulator::run_horizon(bess, fr, e_init, &horizon_days, mode, forecast)?;
    for (i, day) in outcome.outcomes.iter().enumerate() {
        write_day_outputs(&args.out, i, day)?;
    }
    data_io::write_report(&args.out.join("report.json"), &outcome.report)?;
    summarize(&outcome.report);
    println!("outputs in {}", args.out.display());
    Ok(())
}

fn run_from_files(config: &Config, args: &SimulateArgs) -> Result<(), AppError> {
    let bess = config.bess_params()?;
    let fr = config.fr_params()?;
    let grid = config.time_grid()?;
    let forecast = config.forecast_kind()?;
    let spt = grid.seconds_per_slot().expect("validated grid");
    let seconds = spt * grid.slots();

    let missing = |what: &str| {
        AppError::Validation(format!(
            "file-based simulation needs --{what} (or use --synthetic)"
        ))
    };
    let forecast_path = args.forecast.as_ref().ok_or_else(|| missing("forecast"))?;
    let envelope_path = args.envelope.as_ref().ok_or_else(|| missing("envelope"))?;
    let load_path = args.load.as_ref().ok_or_else(|| missing("load"))?;
    let freq_path = args.freq.as_ref().ok_or_else(|| missing("freq"))?;

    let scen = data_io::load_forecast(forecast_path, &grid)?;
    let env = data_io::read_envelope(envelope_path)?;
    let (_, load_kw) = data_io::load_realization(load_path)?;
    if load_kw.len() != seconds {
        return Err(AppError::Validation(format!(
            "load realization has {} samples, expected {seconds}",
            load_kw.len()
        )));
    }
    let records = data_io::load_frequency(freq_path)?;
    if records.len() != 1 {
        return Err(AppError::Validation(format!(
            "frequency file must cover exactly one day, found {}",
            records.len()
        )));
    }
    // dense 1 Hz series; gaps are not interpolated for realizations
    let rec = &records[0];
    if rec.timestamps().len() != seconds {
        return Err(AppError::Validation(format!(
            "frequency realization has {} samples, expected {seconds} (gap-free 1 Hz)",
            rec.timestamps().len()
        )));
    }
    let realization = DayRealization {
        load_kw,
        frequency_hz: rec.frequency_hz().to_vec(),
    };

    let (plan, e_init) = match &args.plan {
        Some(plan_path) => {
            let doc = data_io::read_plan(plan_path)?;
            if doc.offset_kw.len() != grid.slots() {
                return Err(AppError::Validation(format!(
                    "plan has {} slots, grid expects {}",
                    doc.offset_kw.len(),
                    grid.slots()
                )));
            }
            let plan = DayAheadPlan {
                alpha_kw_per_hz: doc.alpha_kw_per_hz,
                offset_kw: doc.offset_kw.clone(),
                dispatch_plan_kw: doc.dispatch_plan_kw.clone(),
                fallback_used: false,
            };
            (Some(plan), args.e_init.unwrap_or(doc.e_init_kwh))
        }
        None => (None, args.e_init.unwrap_or(config.schedule.e_init_kwh)),
    };

    let inputs = ScheduleInputs::new(bess, e_init, scen, env, fr)?;
    let outcome = match plan {
        Some(p) => simulator::run_day_with_plan(&inputs, p, &realization, forecast)?,
        None => {
            let mode = config.objective_mode(args.mode.as_deref())?;
            simulator::run_day(&inputs, mode, &realization, forecast)?
        }
    };

    write_day_outputs(&args.out, 0, &outcome)?;
    let report = HorizonReport::from_days(vec![outcome.result.clone()])
        .map_err(|e| AppError::Internal(e.to_string()))?;
    data_io::write_report(&args.out.join("report.json"), &report)?;
    summarize(&report);
    println!("outputs in {}", args.out.display());
    Ok(())
}
