//! Scenario configuration, builtin reproductions, execution, sweeps and
//! result files.

mod config;
mod output;
mod run;
mod sweep;

pub use config::{
    ComplexValue, Engine, GridSection, InitialState, McwfSection, ModeInit, ModelSection, ObservablesSection,
    OutputSection, QubitInit, RateUnits, RatesSection, ScenarioConfig, ThetaMode, TruncationSection,
};
pub use output::{
    csv_fields, output_dir, run_csv_string, write_csv, write_outputs, EngineSummary, OutputPaths, RunSummary,
    CSV_COLUMNS,
};
pub use run::{run_scenario, EngineRun, RunOptions, RunRecord, SeriesRow, REGIME_RATIO};
pub use sweep::{apply_axis, parse_values, run_sweep, write_sweep, SweepPoint, SweepRecord};

use crate::error::{Error, Result};

/// Fock levels per mode for the dissipative headline scenarios.
pub const HEADLINE_FOCK: usize = 50;
/// Trajectories for the dissipative headline scenarios.
pub const HEADLINE_TRAJECTORIES: usize = 6000;

fn model(delta: f64, omega_drive: f64) -> ModelSection {
    ModelSection {
        g_a: 1.0.into(),
        g_b: 1.0.into(),
        delta,
        omega_drive: omega_drive.into(),
        omega_0: 500.0,
        omega_ef: 2500.0,
        g_in_hz: 20e6,
        theta: std::f64::consts::FRAC_PI_4,
    }
}

fn unitary(name: &str, description: &str, delta: f64, omega_drive: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        engines: vec![Engine::SchrodingerFull, Engine::SchrodingerVi, Engine::SchrodingerHminus],
        model: model(delta, omega_drive),
        truncation: TruncationSection::default(),
        rates: RatesSection::default(),
        grid: GridSection::default(),
        mcwf: McwfSection::default(),
        observables: ObservablesSection::default(),
        initial: InitialState::default(),
        output: OutputSection::default(),
    }
}

fn dissipative(name: &str, description: &str, gamma: f64, gamma_ph: f64, kappa: f64) -> ScenarioConfig {
    ScenarioConfig {
        engines: vec![Engine::McwfVi],
        rates: RatesSection { units: RateUnits::Lambda, gamma, gamma_ph, kappa_a: kappa, kappa_b: kappa },
        ..unitary(name, description, 90.0, 50.0)
    }
}

fn headline(name: &str, description: &str, gamma: f64, gamma_ph: f64, kappa: f64) -> ScenarioConfig {
    let mut cfg = dissipative(name, description, gamma, gamma_ph, kappa);
    cfg.truncation.n_a = HEADLINE_FOCK;
    cfg.truncation.n_b = HEADLINE_FOCK;
    cfg.mcwf.n_traj = HEADLINE_TRAJECTORIES;
    cfg
}

/// Named configurations, in display order.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    vec![
        unitary("fig2a", "Unitary ladder at Delta = 35, Omega = 20 (lambda = g/20)", 35.0, 20.0),
        unitary("fig2b", "Unitary ladder at Delta = 90, Omega = 50 (lambda = g/40)", 90.0, 50.0),
        unitary("fig2c", "Unitary ladder at Delta = 180, Omega = 100 (lambda = g/80)", 180.0, 100.0),
        dissipative(
            "fig3a",
            "Cavity decay only, kappa = 1e-2 lambda (implementer choice; family 1e-3, 1e-2, 1e-1)",
            0.0,
            0.0,
            1e-2,
        ),
        dissipative(
            "fig3b",
            "Qubit relaxation only, gamma = 1e-2 lambda (implementer choice; family 1e-3, 1e-2, 1e-1)",
            1e-2,
            0.0,
            0.0,
        ),
        dissipative(
            "fig3c",
            "Qubit dephasing only, gamma_ph = 1e-2 lambda (implementer choice; family 1e-3, 1e-2, 1e-1)",
            0.0,
            1e-2,
            0.0,
        ),
        headline("fig3d", "Realistic rates: gamma = 5.2e-3, gamma_ph = 1.0e-3, kappa = 1.0e-4 (units of lambda)", 5.2e-3, 1.0e-3, 1.0e-4),
        headline(
            "fig3d_improved",
            "Qubit rates improved tenfold: gamma = 5.2e-4, gamma_ph = 1.0e-4, kappa = 1.0e-4 (units of lambda)",
            5.2e-4,
            1.0e-4,
            1.0e-4,
        ),
    ]
}

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|c| c.name == name).ok_or_else(|| {
        let names: Vec<String> = builtin_scenarios().into_iter().map(|c| c.name).collect();
        Error::ConfigInvalid(format!("unknown scenario `{name}`; available: {}", names.join(", ")))
    })
}
