use std::fs;

use bess_core::data_io::{self, PlanDocument};
use bess_core::scheduler::{self, ScheduleInputs};

use crate::config::Config;
use crate::{AppError, ScheduleArgs};

pub fn run(config: &Config, args: &ScheduleArgs) -> Result<(), AppError> {
    let grid = config.time_grid()?;
    let bess = config.bess_params()?;
    let fr = config.fr_params()?;
    let mode = config.objective_mode(args.mode.as_deref())?;
    let e_init = args.e_init.unwrap_or(config.schedule.e_init_kwh);

    let scen = data_io::load_forecast(&args.forecast, &grid)?;
    let env = data_io::read_envelope(&args.envelope)?;
    let inputs = ScheduleInputs::new(bess, e_init, scen, env, fr)?;

    let plan = scheduler::solve_day_ahead(&inputs, mode)?;
    let f_mean = plan.offset_kw.iter().sum::<f64>() / plan.offset_kw.len() as f64;
    println!("alpha     = {:.3} kW/Hz", plan.alpha_kw_per_hz);
    println!("mean F    = {f_mean:.3} kW");
    println!(
        "PFR band  = +/-{:.1} kW of the {:.0} kW rating",
        fr.delta_f_max_hz * plan.alpha_kw_per_hz,
        bess.p_max_kw
    );
    if plan.alpha_kw_per_hz == 0.0 {
        println!("no PFR scheduled for this day (demand uncertainty uses the whole battery)");
    }
    if plan.fallback_used {
        println!("fallback engaged: energy bounds relaxed by the smallest uniform margin");
    }

    let report = scheduler::evaluate_plan(&inputs, &plan, 1e-6);
    let describe = |name: &str, slots: &[usize]| {
        if slots.is_empty() {
            return;
        }
        let head: Vec<String> = slots.iter().take(6).map(|s| s.to_string()).collect();
        let ellipsis = if slots.len() > 6 { ", ..." } else { "" };
        println!(
            "binding {name}: {} slot(s) [{}{}]",
            slots.len(),
            head.join(", "),
            ellipsis
        );
    };
    describe("energy ceiling", &report.binding_energy_upper);
    describe("energy floor", &report.binding_energy_lower);
    describe("power ceiling", &report.binding_power_upper);
    describe("power floor", &report.binding_power_lower);

    fs::create_dir_all(&args.out)?;
    let out_path = args.out.join("plan.csv");
    data_io::write_plan(
        &out_path,
        &PlanDocument {
            alpha_kw_per_hz: plan.alpha_kw_per_hz,
            e_init_kwh: e_init,
            date: args.date.clone(),
            offset_kw: plan.offset_kw.clone(),
            dispatch_plan_kw: plan.dispatch_plan_kw.clone(),
        },
    )?;
    println!("plan written to {}", out_path.display());
    Ok(())
}
