use proptest::prelude::*;
use tipemit::config::*;
use tipemit::simulation::{OperatingPoint, Simulation};
use tipemit::sweep::*;
use tipemit::{units, Error};

fn fn_sweep(axes: Vec<Axis>) -> Config {
    let mut cfg = Config::default();
    cfg.laser.f_laser_gvm = 1.8;
    cfg.fn_model.b_gvm = Some(14.8);
    cfg.fn_model.schottky_correction = false;
    cfg.sweep.task = Task::FnFit;
    cfg.sweep.axes = axes;
    cfg
}

fn axis(name: &str, min: f64, max: f64, count: usize) -> Axis {
    Axis { name: name.into(), min, max, count, spacing: Spacing::Linear }
}

#[test]
fn empty_file_gives_defaults() {
    let cfg = Config::from_toml("").unwrap();
    assert_eq!(cfg, Config::default());
}

#[test]
fn toml_round_trip() {
    let mut cfg = fn_sweep(vec![
        axis("f_dc_GVm", 0.2, 1.5, 6),
        Axis { spacing: Spacing::Log, ..axis("fluence_Jm2", 7.5, 67.0, 4) },
    ]);
    cfg.metal.target_energy_ev = Some(-4.4);
    cfg.iac.mode = IacMode::Tdse;
    let text = cfg.to_toml();
    assert_eq!(Config::from_toml(&text).unwrap(), cfg);
}

#[test]
fn unit_suffixed_keys_parse() {
    let text = r#"
        [metal]
        v0_eV = -13.5
        work_function_eV = 4.5

        [laser]
        fluence_Jm2 = 20.0
        f_laser_GVm = 0.0
        f_dc_GVm = 0.4
        tau_fs = 5.3
        wavelength_nm = 800.0
        phi_rad = 0.0
        enhancement = 1.0

        [sweep]
        task = "modulation_scan"
        n_phases = 16
        [[sweep.axes]]
        name = "f_dc_GVm"
        min = 0.2
        max = 1.5
        count = 3
    "#;
    let cfg = Config::from_toml(text).unwrap();
    assert_eq!(cfg.sweep.task, Task::ModulationScan);
    let op = cfg.operating_point().unwrap();
    let expect = units::fluence_to_peak_field_gvm(20.0, 5.3).unwrap();
    assert!((op.f_laser_gvm - expect).abs() < 1e-12);
    assert_eq!(cfg.sweep_points().len(), 3);
}

#[test]
fn bad_configs_are_config_errors() {
    let cases = [
        "[laser]\nbogus = 1\n",
        "[laser]\ntau_fs = \"eight\"\n",
        "[sweep]\ntask = \"nope\"\n",
        "[metal]\nv0_eV = -3.0\nwork_function_eV = 4.5\n",
        "[solver]\ndt_au = 0.0\nsettle_fs = 20.0\ndc_ramp_fs = 10.0\nabsorber_strength_Ha = 0.5\nrecord_every = 1\n",
        "[[sweep.axes]]\nname = \"temperature_K\"\nmin = 1.0\nmax = 2.0\ncount = 2\n",
        "[[sweep.axes]]\nname = \"tau_fs\"\nmin = 0.0\nmax = 2.0\ncount = 2\nspacing = \"log\"\n",
        "[output]\ndir = \"x\"\nworkers = 0\n",
    ];
    for text in cases {
        assert!(matches!(Config::from_toml(text), Err(Error::Config(_))), "accepted: {text}");
    }
    let both = fn_sweep(vec![axis("f_laser_GVm", 1.0, 2.0, 2), axis("fluence_Jm2", 1.0, 2.0, 2)]);
    assert!(both.validate().is_err());
}

#[test]
fn missing_file_is_io_error() {
    let err = Config::load(std::path::Path::new("/nonexistent/run.toml")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn hash_tracks_content() {
    let a = Config::default();
    let mut b = a.clone();
    assert_eq!(a.content_hash(), b.content_hash());
    b.laser.f_dc_gvm += 1e-9;
    assert_ne!(a.content_hash(), b.content_hash());
    assert_eq!(a.content_hash().len(), 64);
}

#[test]
fn axis_spacing() {
    let lin = axis("f_dc_GVm", 0.2, 1.5, 6).values();
    assert_eq!(lin.len(), 6);
    assert_eq!(lin[0], 0.2);
    assert!((lin[5] - 1.5).abs() < 1e-15);
    let log = Axis { spacing: Spacing::Log, ..axis("fluence_Jm2", 1.0, 100.0, 3) }.values();
    assert!((log[1] - 10.0).abs() < 1e-12);
    assert_eq!(axis("tau_fs", 8.0, 12.0, 1).values(), vec![8.0]);
}

#[test]
fn points_are_lexicographic() {
    let cfg = fn_sweep(vec![axis("f_dc_GVm", 0.2, 0.4, 3), axis("tau_fs", 5.0, 8.0, 2)]);
    let idx: Vec<Vec<usize>> = cfg.sweep_points().into_iter().map(|p| p.0).collect();
    assert_eq!(idx, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1], vec![2, 0], vec![2, 1]]);
}

#[test]
fn empty_record_set_writes_header_only() {
    let cfg = fn_sweep(vec![axis("f_dc_GVm", 0.2, 0.4, 3)]);
    let mut result = run_sweep(&cfg).unwrap();
    result.records.clear();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_tables(&mut result, dir.path()).unwrap();
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(), vec!["point,f_dc_GVm,quantity,value"]);
    assert!(text.starts_with("# tipemit "));
    assert!(text.contains("f_dc_GVm [GV/m]"));
    assert!(read_table(&text).unwrap().is_empty());
    result.manifest.status.clear();
    result.manifest.points = 0;
    write_json(&files[1], &result.manifest).unwrap();
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(&files[1]).unwrap()).unwrap();
    assert!(m.status.is_empty());
}

#[test]
fn table_round_trips_at_full_precision() {
    let cfg = fn_sweep(vec![axis("f_dc_GVm", 0.2, 1.5, 7), axis("f_laser_GVm", 1.2, 2.7, 3)]);
    let mut result = run_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_tables(&mut result, dir.path()).unwrap();
    let table = read_table(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(table.len(), 21);
    for r in &result.records {
        let op = r.resolved.unwrap();
        assert_eq!(op.f_dc_gvm, r.params["f_dc_GVm"]);
        assert_eq!(op.f_laser_gvm, r.params["f_laser_GVm"]);
    }
    for r in &result.records {
        let point = point_label(&r.index);
        let v = table[&(point, "ratio_predicted".to_string())];
        assert_eq!(v.to_bits(), r.outputs["ratio_predicted"].to_bits());
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[1]).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"], cfg.content_hash());
    assert_eq!(manifest["points"], 21);
    assert_eq!(manifest["failed"], 0);
}

#[test]
fn ratio_table_is_monotone_in_static_field() {
    let cfg = fn_sweep(vec![axis("f_dc_GVm", 0.2, 1.5, 27)]);
    let result = run_sweep(&cfg).unwrap();
    let ratios: Vec<f64> = result.records.iter().map(|r| r.outputs["ratio_predicted"]).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn failing_points_are_recorded_not_fatal() {
    let mut cfg = fn_sweep(vec![axis("f_dc_GVm", 0.0, 1.0, 3)]);
    cfg.laser.f_laser_gvm = 0.0;
    let mut result = run_sweep(&cfg).unwrap();
    assert_eq!(result.failed(), 1);
    assert!(result.records[0].failed());
    assert_eq!(result.manifest.failed, 1);
    assert!(!result.manifest.status[0].completed && result.manifest.status[1].completed);
    let dir = tempfile::tempdir().unwrap();
    let files = emit_tables(&mut result, dir.path()).unwrap();
    assert_eq!(read_table(&std::fs::read_to_string(&files[0]).unwrap()).unwrap().len(), 2);
}

#[test]
fn tables_are_reproducible() {
    let cfg = fn_sweep(vec![axis("f_dc_GVm", 0.2, 1.5, 9)]);
    let a = table_csv(&run_sweep(&cfg).unwrap());
    let b = table_csv(&run_sweep(&cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn manifest_is_reproducible_modulo_timing() {
    let cfg = fn_sweep(vec![axis("f_dc_GVm", 0.2, 1.5, 5), axis("tau_fs", 5.3, 8.0, 2)]);
    let untimed = |mut m: Manifest| {
        m.wall_time_s = 0.0;
        m.status.iter_mut().for_each(|s| s.wall_time_s = 0.0);
        m
    };
    let a = untimed(run_sweep(&cfg).unwrap().manifest);
    let b = untimed(run_sweep(&cfg).unwrap().manifest);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn single_point_sweep_matches_direct_run() {
    let mut cfg = Config::default();
    cfg.grid = GridSection { z_max_nm: 15.0, n_points: 4096, detector_nm: 6.0, absorber_nm: 5.0 };
    cfg.solver.dt_au = 0.4;
    cfg.laser.tau_fs = 5.3;
    cfg.sweep.task = Task::Yield;
    cfg.sweep.axes = vec![axis("f_dc_GVm", 0.5, 0.5, 1)];
    let result = run_sweep(&cfg).unwrap();
    assert_eq!(result.records.len(), 1);

    let sim = Simulation::prepare(&cfg.metal_model().unwrap(), &cfg.grid_template(), cfg.solver_settings()).unwrap();
    let op = OperatingPoint { f_dc_gvm: 0.5, tau_fs: 5.3, ..OperatingPoint::default() };
    let direct = sim.run_point(&op).unwrap();
    assert_eq!(result.records[0].outputs["yield"].to_bits(), direct.yield_.to_bits());
    assert_eq!(result.manifest.well_width_bohr, Some(sim.metal.well_width));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn laser_section_round_trips(f in 0.0f64..10.0, d in 0.0f64..3.0, tau in 1.0f64..20.0, phi in -7.0f64..7.0, xi in 0.5f64..10.0) {
        let mut cfg = Config::default();
        cfg.laser = LaserSection { f_laser_gvm: f, f_dc_gvm: d, tau_fs: tau, phi_rad: phi, enhancement: xi, ..LaserSection::default() };
        cfg.iac.max_delay_fs = 6.0 * tau;
        let back = Config::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back.content_hash(), cfg.content_hash());
        prop_assert_eq!(back, cfg);
    }
}
