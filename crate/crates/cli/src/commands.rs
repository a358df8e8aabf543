use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use tipemit::autocorr::{default_delays, iac_trace_surrogate, iac_trace_tdse};
use tipemit::config::{Config, IacMode, Task};
use tipemit::fn_analytic::{fit_f_laser, peak_to_baseline, read_ratio_csv};
use tipemit::simulation::Simulation;
use tipemit::sweep::{emit_tables, needs_simulation, prepare_simulation, run_sweep, tip_pulse, write_json, VERSION};
use tipemit::{units, Error};

use crate::{Cli, Command, Failure};

pub fn dispatch(cli: &Cli, mut cfg: Config) -> Result<(), Failure> {
    let dry = cli.global.dry_run;
    match &cli.command {
        Command::GroundState => ground_state(&cfg, dry),
        Command::Propagate => propagate(&cfg, dry),
        Command::Iac { mode, max_delay_fs } => {
            if let Some(m) = mode {
                cfg.iac.mode = (*m).into();
            }
            if let Some(d) = max_delay_fs {
                cfg.iac.max_delay_fs = *d;
            }
            cfg.validate()?;
            iac(&cfg, dry)
        }
        Command::Sweep => sweep(&cfg, dry),
        Command::FnFit { data, fit_b } => fn_fit(&cfg, data, *fit_b, dry),
    }
}

fn out_dir(cfg: &Config) -> Result<PathBuf, Failure> {
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn print_plan(command: &str, cfg: &Config, files: &[&str], extra: Value) {
    let plan = json!({
        "command": command,
        "dry_run": true,
        "config_sha256": cfg.content_hash(),
        "output_dir": cfg.output.dir,
        "files": files,
        "workers": cfg.output.workers,
        "plan": extra,
        "config": cfg,
    });
    println!("{}", serde_json::to_string_pretty(&plan).expect("plan serializes"));
}

/// Run manifest shared by the single-run commands.
fn manifest(command: &str, cfg: &Config, start: Instant, files: &[&str], summary: Value) -> Value {
    json!({
        "command": command,
        "version": VERSION,
        "config_sha256": cfg.content_hash(),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "files": files,
        "summary": summary,
        "config": cfg,
    })
}

fn prepare(cfg: &Config) -> Result<Simulation, Failure> {
    let t = Instant::now();
    let sim = prepare_simulation(cfg)?;
    log::info!(
        "calibrated L = {:.6} nm on {} points in {:.2} s",
        units::to_nm(sim.metal.well_width),
        sim.grid.n_points,
        t.elapsed().as_secs_f64()
    );
    Ok(sim)
}

fn ground_state(cfg: &Config, dry: bool) -> Result<(), Failure> {
    let files = ["ground_state.csv", "ground_state.json"];
    if dry {
        print_plan(
            "ground-state",
            cfg,
            &files,
            json!({ "target_energy_eV": units::to_ev(cfg.target_energy()), "min_grid_points": cfg.grid.n_points }),
        );
        return Ok(());
    }
    let start = Instant::now();
    let sim = prepare(cfg)?;
    let dir = out_dir(cfg)?;
    let mut csv = String::from("z_nm,psi,density\n");
    for (i, c) in sim.ground.psi.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", units::to_nm(sim.grid.z(i)), c.re, c.norm_sqr()));
    }
    write_text(&dir.join(files[0]), &csv)?;
    let cal = &sim.calibration;
    let summary = json!({
        "well_width_nm": units::to_nm(cal.well_width),
        "well_width_bohr": cal.well_width,
        "energy_eV": units::to_ev(sim.ground_energy),
        "target_eV": units::to_ev(cal.target),
        "infinite_well_estimate_nm": units::to_nm(cal.infinite_well_estimate),
        "evaluations": cal.evaluations,
        "grid_points": sim.grid.n_points,
        "dz_nm": units::to_nm(sim.grid.dz()),
    });
    println!("L = {:.6} nm, E1 = {:.9} eV", units::to_nm(cal.well_width), units::to_ev(sim.ground_energy));
    write_json(&dir.join(files[1]), &manifest("ground-state", cfg, start, &files, summary))?;
    Ok(())
}

fn propagate(cfg: &Config, dry: bool) -> Result<(), Failure> {
    let files = ["flux.csv", "propagate.json"];
    let op = cfg.operating_point()?;
    if dry {
        let span = cfg.solver_settings().time_span(&op.field_configuration()?);
        print_plan(
            "propagate",
            cfg,
            &files,
            json!({
                "operating_point": op,
                "propagations": 1,
                "time_steps": ((span.1 - span.0) / cfg.solver.dt_au).ceil(),
            }),
        );
        return Ok(());
    }
    let start = Instant::now();
    let sim = prepare(cfg)?;
    let run = sim.run_point(&op)?;
    let dir = out_dir(cfg)?;
    write_text(&dir.join(files[0]), &run.trace.to_csv())?;
    let emission = run.emission.as_ref().map(|e| {
        json!({
            "pulse_fwhm_fs": units::to_fs(e.pulse_fwhm),
            "peak_time_fs": units::to_fs(e.peak_time),
            "sub_pulse_fractions": e.sub_pulse_fractions,
            "dominant": e.dominant,
        })
    });
    println!("yield = {:e}", run.yield_);
    let summary = json!({
        "operating_point": op,
        "well_width_bohr": sim.metal.well_width,
        "yield": run.yield_,
        "emission": emission,
        "report": run.report,
    });
    write_json(&dir.join(files[1]), &manifest("propagate", cfg, start, &files, summary))?;
    Ok(())
}

fn iac(cfg: &Config, dry: bool) -> Result<(), Failure> {
    let files = ["iac.csv", "iac.json"];
    let op = cfg.operating_point()?;
    let pulse = tip_pulse(&op)?;
    let delays = default_delays(&pulse, units::fs(cfg.iac.max_delay_fs));
    let f_dc = units::gvm(op.f_dc_gvm);
    if dry {
        let runs = if cfg.iac.mode == IacMode::Tdse { delays.len() } else { 0 };
        print_plan(
            "iac",
            cfg,
            &files,
            json!({ "mode": cfg.iac.mode, "operating_point": op, "delays": delays.len(), "propagations": runs }),
        );
        return Ok(());
    }
    let start = Instant::now();
    let trace = match cfg.iac.mode {
        IacMode::Surrogate => iac_trace_surrogate(&pulse, f_dc, &cfg.detector()?, &delays)?,
        IacMode::Tdse => iac_trace_tdse(&prepare(cfg)?, &pulse, f_dc, &delays)?,
    };
    let dir = out_dir(cfg)?;
    write_text(&dir.join(files[0]), &trace.to_csv())?;
    println!("peak/baseline = {}", trace.peak_to_baseline);
    let summary = json!({
        "mode": cfg.iac.mode,
        "operating_point": op,
        "peak_to_baseline": trace.peak_to_baseline,
        "fringe_averaged_peak_to_baseline": trace.fringe_averaged_peak_to_baseline,
        "baseline": trace.baseline,
        "baseline_spread": trace.baseline_spread,
        "delays": trace.delays.len(),
    });
    write_json(&dir.join(files[1]), &manifest("iac", cfg, start, &files, summary))?;
    Ok(())
}

fn sweep(cfg: &Config, dry: bool) -> Result<(), Failure> {
    if dry {
        let points = cfg.sweep_points();
        let per_point = match cfg.sweep.task {
            Task::Yield => 1,
            Task::ModulationScan => cfg.sweep.n_phases,
            Task::PeakToBaseline => 4,
            Task::FnFit => 0,
            Task::Iac if cfg.iac.mode == IacMode::Surrogate => 0,
            Task::Iac => {
                let pulse = tip_pulse(&cfg.operating_point()?)?;
                default_delays(&pulse, units::fs(cfg.iac.max_delay_fs)).len()
            }
        };
        let axes: Vec<Value> = cfg.sweep.axes.iter().map(|a| json!({ "name": a.name, "values": a.values() })).collect();
        print_plan(
            "sweep",
            cfg,
            &["<task>.csv", "manifest.json"],
            json!({
                "task": cfg.sweep.task,
                "axes": axes,
                "points": points.len(),
                "propagations": points.len() * per_point,
                "calibration": needs_simulation(cfg),
            }),
        );
        return Ok(());
    }
    let mut result = run_sweep(cfg)?;
    let dir = out_dir(cfg)?;
    let files = emit_tables(&mut result, &dir)?;
    for f in &files {
        log::info!("wrote {}", f.display());
    }
    let failed = result.failed();
    println!("{} points, {} failed, {:.2} s", result.records.len(), failed, result.manifest.wall_time_s);
    if failed > 0 {
        for s in result.manifest.status.iter().filter(|s| !s.completed) {
            log::warn!("point {}: {}", s.point, s.error.as_deref().unwrap_or(""));
        }
        return Err(Failure::Compute(format!("{failed} of {} sweep points failed", result.records.len())));
    }
    Ok(())
}

fn fn_fit(cfg: &Config, data: &Path, fit_b: bool, dry: bool) -> Result<(), Failure> {
    let files = ["fn_fit.json"];
    let file = fs::File::open(data).map_err(|e| Error::io(data, e))?;
    let points = read_ratio_csv(file).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", data.display())),
        other => other,
    })?;
    let start_params = cfg.fn_params()?;
    if dry {
        print_plan(
            "fn-fit",
            cfg,
            &files,
            json!({ "data": data, "points": points.len(), "fit_b": fit_b, "start_b_GVm": start_params.b_gvm() }),
        );
        return Ok(());
    }
    let start = Instant::now();
    let report = fit_f_laser(&points, &start_params, fit_b)?;
    let fitted = start_params.with_b(report.b);
    let rows: Vec<Value> = points
        .iter()
        .map(|&(d, r)| {
            json!({
                "f_dc_GVm": units::to_gvm(d),
                "ratio": r,
                "ratio_model": peak_to_baseline(&fitted, report.f_laser, d).ok(),
            })
        })
        .collect();
    println!("F_laser = {} ± {} GV/m, B = {} GV/m", report.f_laser_gvm(), report.sigma_f_laser_gvm(), report.b_gvm());
    let summary = json!({
        "f_laser_GVm": report.f_laser_gvm(),
        "sigma_f_laser_GVm": report.sigma_f_laser_gvm(),
        "b_GVm": report.b_gvm(),
        "sigma_b_GVm": units::to_gvm(report.sigma_b),
        "fit_b": report.fit_b,
        "residual_norm": report.residual_norm,
        "iterations": report.iterations,
        "suppressed_points": report.suppressed_points,
        "points": rows,
        "data": data,
    });
    let dir = out_dir(cfg)?;
    write_json(&dir.join(files[0]), &manifest("fn-fit", cfg, start, &files, summary))?;
    Ok(())
}
