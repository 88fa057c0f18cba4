//! End-to-end CLI tests: the fit/schedule/simulate/report pipeline on small
//! fixtures, the exit-status contract, and run-to-run determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn bess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bess"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

/// 1 h horizon, 12 slots of 300 s: every pipeline stage stays fast.
fn write_small_config(path: &Path) {
    fs::write(
        path,
        r#"
[grid]
horizon_hours = 1.0
slots = 12

[simulation]
seed = 5
days = 2
training_days = 6

[synthetic]
l_hat_base_kw = 0.0
l_hat_amplitude_kw = 2.0
band_up_kw = 3.0
band_down_kw = 3.0
band_jitter = 0.2
intraslot_sigma_kw = 1.0
ou_mean_reversion_per_s = 0.002
ou_stationary_sigma_hz = 0.03
contained = true
stress_excursion_kw = 0.0
"#,
    )
    .unwrap();
}

fn write_zero_uncertainty_fixtures(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let forecast = dir.join("forecast.csv");
    let mut fc = String::from("slot,l_hat_kw,l_up_kw,l_down_kw\n");
    for k in 0..12 {
        fc.push_str(&format!("{k},0,0,0\n"));
    }
    fs::write(&forecast, fc).unwrap();

    let envelope = dir.join("zero_envelope.csv");
    let mut env = String::from("# horizon_hours=1\n# confidence_z=1.96\n");
    env.push_str("slot,mean_hzh,std_hzh,w_down_hzh,w_up_hzh\n");
    for k in 0..12 {
        env.push_str(&format!("{k},0,0,0,0\n"));
    }
    fs::write(&envelope, env).unwrap();
    (forecast, envelope)
}

#[test]
fn schedule_zero_uncertainty_reaches_power_cap() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.toml");
    write_small_config(&config);
    let (forecast, envelope) = write_zero_uncertainty_fixtures(dir.path());
    let out_dir = dir.path().join("out");
    let out = bess(&[
        "--config",
        config.to_str().unwrap(),
        "schedule",
        "--forecast",
        forecast.to_str().unwrap(),
        "--envelope",
        envelope.to_str().unwrap(),
        "--e-init",
        "294",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // alpha = P_max / delta_f_max = 720 / 0.2
    assert!(
        stdout(&out).contains("3600"),
        "summary should show the power-cap alpha: {}",
        stdout(&out)
    );
    assert!(out_dir.join("plan.csv").exists());
}

#[test]
fn full_pipeline_fit_schedule_simulate_report() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.toml");
    write_small_config(&config);

    // two UTC days of 1 Hz frequency covering the 1 h horizon each
    let freq_path = dir.path().join("freq.csv");
    let mut freq = String::from("epoch_seconds,frequency_hz\n");
    for day in 0..2i64 {
        for s in 0..3600i64 {
            let t = day * 86_400 + s;
            let dev = 0.02 * ((s as f64 / 700.0).sin() + if day == 0 { 0.3 } else { -0.2 });
            freq.push_str(&format!("{t},{}\n", 50.0 + dev));
        }
    }
    fs::write(&freq_path, freq).unwrap();

    let out_dir = dir.path().join("out");
    let out = bess(&[
        "--config",
        config.to_str().unwrap(),
        "fit-envelope",
        "--freq",
        freq_path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let envelope = out_dir.join("envelope.csv");
    assert!(envelope.exists());
    assert!(stdout(&out).contains("2 day(s)"));

    // forecast with a band, scheduled inline by simulate
    let forecast = dir.path().join("forecast.csv");
    let mut fc = String::from("slot,l_hat_kw,l_up_kw,l_down_kw\n");
    for k in 0..12 {
        fc.push_str(&format!("{k},5,8,2\n"));
    }
    fs::write(&forecast, fc).unwrap();

    let plan_dir = dir.path().join("plan_out");
    let out = bess(&[
        "--config",
        config.to_str().unwrap(),
        "schedule",
        "--forecast",
        forecast.to_str().unwrap(),
        "--envelope",
        envelope.to_str().unwrap(),
        "--out",
        plan_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let plan = plan_dir.join("plan.csv");

    // 1 Hz realizations: load inside the band, frequency near nominal
    let load_path = dir.path().join("load.csv");
    let mut load = String::from("epoch_seconds,load_kw\n");
    for s in 0..3600 {
        load.push_str(&format!("{s},{}\n", 5.0 + 1.5 * ((s as f64 / 300.0).sin())));
    }
    fs::write(&load_path, load).unwrap();
    let freq_day = dir.path().join("freq_day.csv");
    let mut fr = String::from("epoch_seconds,frequency_hz\n");
    for s in 0..3600 {
        fr.push_str(&format!("{s},{}\n", 50.0 + 0.01 * ((s as f64 / 150.0).cos())));
    }
    fs::write(&freq_day, fr).unwrap();

    let sim_dir = dir.path().join("sim_out");
    let out = bess(&[
        "--config",
        config.to_str().unwrap(),
        "simulate",
        "--plan",
        plan.to_str().unwrap(),
        "--forecast",
        forecast.to_str().unwrap(),
        "--envelope",
        envelope.to_str().unwrap(),
        "--load",
        load_path.to_str().unwrap(),
        "--freq",
        freq_day.to_str().unwrap(),
        "--out",
        sim_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "trace_day000.csv", "budget_day000.csv"] {
        assert!(sim_dir.join(f).exists(), "{f} missing");
    }
    let trace = fs::read_to_string(sim_dir.join("trace_day000.csv")).unwrap();
    assert!(trace.starts_with(
        "epoch_s,slot,f_hz,feeder_kw,b_fr_kw,b_d_kw,b_total_kw,soe_kwh,eps_kw"
    ));
    assert_eq!(trace.lines().count(), 3601); // header + one row per second

    let out = bess(&["report", sim_dir.join("report.json").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    for row in ["Mean", "Max", "Min"] {
        assert!(text.contains(row), "missing {row} row in:\n{text}");
    }
}

#[test]
fn synthetic_runs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.toml");
    write_small_config(&config);
    let run = |out_dir: &Path| {
        let out = bess(&[
            "--config",
            config.to_str().unwrap(),
            "simulate",
            "--synthetic",
            "--seed",
            "99",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        fs::read(out_dir.join("report.json")).unwrap()
    };
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    assert_eq!(a, b, "same config and seed must produce identical reports");
}

#[test]
fn report_table_has_five_metric_columns() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.toml");
    write_small_config(&config);
    let out_dir = dir.path().join("out");
    let out = bess(&[
        "--config",
        config.to_str().unwrap(),
        "simulate",
        "--synthetic",
        "--days",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = bess(&["report", out_dir.join("report.json").to_str().unwrap()]);
    let text = stdout(&out);
    let header = text
        .lines()
        .find(|l| l.contains("SOE_0"))
        .expect("header line");
    for col in ["SOE_0 [%]", "alpha[kW/Hz]", "F_avg[kW]", "SOE_min [%]", "SOE_max [%]"] {
        assert!(header.contains(col), "missing column {col} in '{header}'");
    }
    let mean_line = text.lines().find(|l| l.starts_with("Mean")).unwrap();
    assert_eq!(mean_line.split_whitespace().count(), 6); // label + 5 metrics
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.toml");
    write_small_config(&config);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "slot,l_hat_kw,l_up_kw,l_down_kw\n0,10,5,20\n").unwrap();
    let (_, envelope) = write_zero_uncertainty_fixtures(dir.path());
    let out = bess(&[
        "--config",
        config.to_str().unwrap(),
        "schedule",
        "--forecast",
        bad.to_str().unwrap(),
        "--envelope",
        envelope.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    // unknown flags are validation errors too
    let out = bess(&["schedule", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infeasible_beyond_fallback_exits_2() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.toml");
    write_small_config(&config);
    // demand band wider than twice the power rating: not even the energy
    // relaxation can produce an executable offset
    let (_, envelope) = write_zero_uncertainty_fixtures(dir.path());
    let forecast = dir.path().join("wide_forecast.csv");
    let mut fc = String::from("slot,l_hat_kw,l_up_kw,l_down_kw\n");
    for k in 0..12 {
        fc.push_str(&format!("{k},0,800,-800\n"));
    }
    fs::write(&forecast, fc).unwrap();
    let out = bess(&[
        "--config",
        config.to_str().unwrap(),
        "schedule",
        "--forecast",
        forecast.to_str().unwrap(),
        "--envelope",
        envelope.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn help_exits_0() {
    let out = bess(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("fit-envelope"));
}
