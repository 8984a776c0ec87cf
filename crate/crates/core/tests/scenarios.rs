use tmsq_core::model::{derive, validate_regime, RegimeThresholds};
use tmsq_core::scenarios::{
    apply_axis, builtin, builtin_scenarios, parse_values, run_scenario, run_sweep, write_outputs, write_sweep, Engine,
    RunOptions, RunSummary, ScenarioConfig, CSV_COLUMNS, REGIME_RATIO,
};
use tmsq_core::Error;

fn tiny(engines: Vec<Engine>) -> ScenarioConfig {
    let mut cfg = builtin("fig2a").unwrap();
    cfg.name = "tiny".into();
    cfg.engines = engines;
    cfg.truncation.n_a = 8;
    cfg.truncation.n_b = 8;
    cfg.grid.r_max = 0.5;
    cfg.grid.samples = 6;
    cfg
}

#[test]
fn regime_report_flags_only_the_weakest_coupling() {
    for cfg in builtin_scenarios() {
        let p = cfg.model.params(cfg.truncation.qubit_levels);
        let rep = validate_regime(&p, &derive(&p).unwrap(), RegimeThresholds { ratio: REGIME_RATIO });
        if cfg.name == "fig2c" {
            assert!(!rep.all_pass(), "fig2c must warn");
        } else {
            assert!(rep.all_pass(), "{}: {:?}", cfg.name, rep.warnings());
        }
    }
}

#[test]
fn fig2c_run_carries_a_regime_warning() {
    let mut cfg = builtin("fig2c").unwrap();
    cfg.engines = vec![Engine::SchrodingerHminus];
    cfg.truncation.n_a = 6;
    cfg.truncation.n_b = 6;
    cfg.grid.r_max = 0.1;
    cfg.grid.samples = 2;
    let rec = run_scenario(&cfg, &RunOptions::default()).unwrap();
    assert!(rec.warnings.iter().any(|w| w.contains("regime")), "{:?}", rec.warnings);
}

#[test]
fn files_follow_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(vec![Engine::SchrodingerHminus, Engine::SchrodingerVi]);
    let rec = run_scenario(&cfg, &RunOptions::default()).unwrap();
    let paths = write_outputs(&rec, dir.path()).unwrap();
    let csv = std::fs::read_to_string(&paths.csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 14);
    assert_eq!(first[0], "schrodinger_hminus");
    assert_eq!(first[4], "", "deterministic rows carry no stderr");
    assert_eq!(csv.lines().count(), 1 + 2 * 6);
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        for cell in cells[1..13].iter().filter(|c| !c.is_empty()) {
            assert!(cell.len() <= 24 && cell.parse::<f64>().is_ok(), "{cell}");
            assert_ne!(*cell, "-0.0");
        }
    }

    let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(&paths.summary).unwrap()).unwrap();
    assert_eq!(summary.config, cfg);
    assert_eq!(summary.derived, cfg.derived().unwrap());
    assert_eq!(summary.min_v_ar, rec.min_v_ar());
    assert!(summary.regime.all_pass());
}

#[test]
fn ensemble_rows_carry_standard_errors() {
    let mut cfg = tiny(vec![Engine::McwfVi]);
    cfg.truncation.n_a = 5;
    cfg.truncation.n_b = 5;
    cfg.rates.gamma = 20.0;
    cfg.mcwf.n_traj = 30;
    let rec = run_scenario(&cfg, &RunOptions::default()).unwrap();
    let run = rec.engine(Engine::McwfVi).unwrap();
    assert!(run.n_jumped.unwrap() > 0);
    assert!(run.rows.iter().all(|r| r.record.v_ar_stderr.is_some()));
    assert!(run.rows.last().unwrap().record.v_ar_stderr.unwrap() > 0.0);
}

#[test]
fn oversized_density_matrix_is_a_config_error() {
    let mut cfg = tiny(vec![Engine::LindbladVi]);
    cfg.truncation.n_a = 30;
    cfg.truncation.n_b = 30;
    assert!(matches!(run_scenario(&cfg, &RunOptions::default()), Err(Error::DensityTooLarge { dim: 1800, cap: 512 })));
}

#[test]
fn strict_mode_rejects_truncation_leaks() {
    let mut cfg = tiny(vec![Engine::SchrodingerHminus]);
    cfg.truncation.n_a = 4;
    cfg.truncation.n_b = 4;
    let lax = run_scenario(&cfg, &RunOptions::default()).unwrap();
    assert!(lax.warnings.iter().any(|w| w.contains("truncation")));
    let strict = run_scenario(&cfg, &RunOptions { strict: true });
    assert!(matches!(strict, Err(Error::NeedsLargerSpace { .. })));
}

#[test]
fn empty_sweep_runs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(vec![Engine::SchrodingerHminus]);
    let sweep = run_sweep(&cfg, "rates.gamma", &parse_values(""), &RunOptions::default()).unwrap();
    assert!(sweep.points.is_empty());
    let path = write_sweep(&sweep, &cfg.name, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 1);
}

#[test]
fn sweep_rejects_bad_values_before_running() {
    let cfg = tiny(vec![Engine::SchrodingerHminus]);
    let values = parse_values("0.1,abc");
    assert!(matches!(run_sweep(&cfg, "rates.gamma", &values, &RunOptions::default()), Err(Error::ConfigInvalid(_))));
    assert!(apply_axis(&cfg, "rates.gamma", "-1").is_err());
}

#[test]
fn cavity_loss_sweep_orders_the_minimum_variance() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(vec![Engine::LindbladVi]);
    cfg.truncation.n_a = 7;
    cfg.truncation.n_b = 7;
    cfg.grid.r_max = 0.4;
    cfg.grid.samples = 5;
    let values = parse_values("1e-3,1e-2,1e-1");
    let sweep = run_sweep(&cfg, "rates.kappa_a+rates.kappa_b", &values, &RunOptions::default()).unwrap();
    let mins: Vec<f64> = sweep.points.iter().map(|p| p.record.min_v_ar().unwrap()).collect();
    assert!(mins[0] < mins[1] && mins[1] < mins[2], "{mins:?}");
    let path = write_sweep(&sweep, &cfg.name, dir.path()).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("axis,value,engine,r,"));
    assert_eq!(text.lines().count(), 1 + 3 * 5);
    assert!(dir.path().join("tiny_2.csv").exists());
}
