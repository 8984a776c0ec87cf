use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{Engine, ScenarioConfig};
use crate::error::{Error, Result};
use crate::fockspace::HilbertSpec;
use crate::model::{
    build_h_full, build_h_minus, build_v_i, validate_regime, DerivedParams, RegimeReport, RegimeThresholds,
    TimeDependentOperator,
};
use crate::observables::{
    diagnostics_rho, minimize_theta, moments_of_amplitudes, ModeMoments, MomentSource, SqueezingRecord,
};
use crate::solvers::{
    propagate_lindblad, propagate_schrodinger, LindbladOptions, McwfOptions, McwfSolver, SchrodingerOptions, TimeGrid,
    TruncationReport, DEFAULT_TRUNCATION_THRESHOLD,
};

/// Regime ratio used for the report attached to every run.
pub const REGIME_RATIO: f64 = 3.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Treat truncation warnings as errors.
    pub strict: bool,
}

/// One CSV row: squeezing figures of merit plus mode diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub engine: Engine,
    pub record: SqueezingRecord,
    pub n_a: f64,
    pub n_b: f64,
    pub leak_a: f64,
    pub leak_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineRun {
    pub engine: Engine,
    pub dim: usize,
    pub steps: usize,
    pub rows: Vec<SeriesRow>,
    pub truncation: TruncationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_jumped: Option<usize>,
    pub wall_clock_s: f64,
}

impl EngineRun {
    pub fn min_v_ar(&self) -> Option<&SeriesRow> {
        self.rows.iter().min_by(|x, y| x.record.v_ar.total_cmp(&y.record.v_ar))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ScenarioConfig,
    pub code_version: String,
    /// Seconds since the Unix epoch at the start of the run.
    pub timestamp: u64,
    pub derived: DerivedParams,
    pub regime: RegimeReport,
    pub engines: Vec<EngineRun>,
    pub warnings: Vec<String>,
    pub wall_clock_s: f64,
}

impl RunRecord {
    pub fn engine(&self, engine: Engine) -> Option<&EngineRun> {
        self.engines.iter().find(|e| e.engine == engine)
    }

    pub fn rows(&self) -> impl Iterator<Item = &SeriesRow> {
        self.engines.iter().flat_map(|e| e.rows.iter())
    }

    pub fn min_v_ar(&self) -> Option<f64> {
        self.rows().map(|r| r.record.v_ar).min_by(f64::total_cmp)
    }

    pub fn max_db(&self) -> Option<f64> {
        self.rows().map(|r| r.record.db).max_by(f64::total_cmp)
    }
}

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    derived: DerivedParams,
    lambda: f64,
}

impl Context<'_> {
    fn grid(&self, r_max: f64, samples: usize) -> Result<TimeGrid> {
        TimeGrid::for_squeezing(self.lambda, r_max, samples, self.cfg.grid.step_control())
    }

    /// Reduced-engine grid.
    fn main_grid(&self) -> Result<TimeGrid> {
        self.grid(self.cfg.grid.r_max, self.cfg.grid.samples)
    }

    /// Full-model grid on the same `r` spacing, truncated at `full_r_max`.
    fn full_grid(&self) -> Result<TimeGrid> {
        let g = &self.cfg.grid;
        let dr = g.r_max / (g.samples - 1) as f64;
        let intervals = (g.full_r_max / dr + 1e-9).floor() as usize;
        if intervals == 0 {
            return self.grid(g.full_r_max, 2);
        }
        self.grid(dr * intervals as f64, intervals + 1)
    }

    fn reduced_spec(&self) -> Result<HilbertSpec> {
        HilbertSpec::qubit_two_modes(2, self.cfg.truncation.n_a, self.cfg.truncation.n_b)
    }

    fn row(&self, engine: Engine, t: f64, m: &ModeMoments, leaks: (f64, f64)) -> Result<SeriesRow> {
        let obs = &self.cfg.observables;
        let (theta_opt, v_min) = minimize_theta(|th| m.epr_variance(th), obs.theta_points);
        let (theta, v) = if obs.optimizes(engine) {
            (theta_opt, v_min)
        } else {
            let th = self.cfg.fixed_theta();
            (th, m.epr_variance(th))
        };
        let record = SqueezingRecord::new(t, self.lambda * t, v, theta)?.with_optimum(theta_opt, v_min);
        Ok(SeriesRow { engine, record, n_a: m.n_a, n_b: m.n_b, leak_a: leaks.0, leak_b: leaks.1 })
    }

    fn run(&self, engine: Engine) -> Result<EngineRun> {
        let start = Instant::now();
        let mut run = match engine {
            Engine::SchrodingerHminus => {
                let spec = HilbertSpec::two_modes(self.cfg.truncation.n_a, self.cfg.truncation.n_b)?;
                let h = TimeDependentOperator::constant(build_h_minus(&self.derived, &spec)?);
                self.schrodinger(engine, &h, &spec, &self.main_grid()?, None)?
            }
            Engine::SchrodingerVi => {
                let spec = self.reduced_spec()?;
                let h = build_v_i(&self.cfg.params(), &self.derived, &spec)?;
                self.schrodinger(engine, &h, &spec, &self.main_grid()?, None)?
            }
            Engine::SchrodingerFull => {
                let tr = &self.cfg.truncation;
                let spec = HilbertSpec::qubit_two_modes(tr.qubit_levels, tr.full_n, tr.full_n)?;
                let h = build_h_full(&self.cfg.model.params(tr.qubit_levels), &spec)?;
                let frame = (self.derived.omega_a, self.derived.omega_b);
                self.schrodinger(engine, &h, &spec, &self.full_grid()?, Some(frame))?
            }
            Engine::LindbladVi => self.lindblad()?,
            Engine::McwfVi => self.mcwf()?,
        };
        run.wall_clock_s = start.elapsed().as_secs_f64();
        Ok(run)
    }

    /// `frame` rotates lab-frame moments into the interaction frame of the
    /// bare mode frequencies.
    fn schrodinger(
        &self,
        engine: Engine,
        h: &TimeDependentOperator,
        spec: &HilbertSpec,
        grid: &TimeGrid,
        frame: Option<(f64, f64)>,
    ) -> Result<EngineRun> {
        let psi0 = self.cfg.initial.ket(spec)?;
        let out = propagate_schrodinger(h, &psi0, grid, &SchrodingerOptions::default())?;
        let rows = out
            .times
            .iter()
            .zip(&out.states)
            .map(|(&t, psi)| {
                let mut m = psi.moments()?;
                if let Some((wa, wb)) = frame {
                    m = rotate(&m, wa * t, wb * t);
                }
                self.row(engine, t, &m, crate::solvers::leaks(spec, psi.amplitudes()))
            })
            .collect::<Result<_>>()?;
        Ok(EngineRun {
            engine,
            dim: spec.total_dim(),
            steps: out.steps,
            rows,
            truncation: out.truncation,
            norm_drift: Some(out.norm_drift),
            trace_deviation: None,
            min_eigenvalue: None,
            n_traj: None,
            n_jumped: None,
            wall_clock_s: 0.0,
        })
    }

    fn lindblad(&self) -> Result<EngineRun> {
        let spec = self.reduced_spec()?;
        let h = build_v_i(&self.cfg.params(), &self.derived, &spec)?;
        let rho0 = self.cfg.initial.ket(&spec)?.to_density();
        let rates = self.cfg.rates_in_g()?;
        let out = propagate_lindblad(&h, &rates, &rho0, &self.main_grid()?, &LindbladOptions::default())?;
        let mut truncation = TruncationReport::new(DEFAULT_TRUNCATION_THRESHOLD);
        let rows = out
            .times
            .iter()
            .zip(&out.states)
            .map(|(&t, rho)| {
                let d = diagnostics_rho(rho)?;
                truncation.observe(t, d.leak_a, d.leak_b);
                self.row(Engine::LindbladVi, t, &rho.moments()?, (d.leak_a, d.leak_b))
            })
            .collect::<Result<_>>()?;
        Ok(EngineRun {
            engine: Engine::LindbladVi,
            dim: spec.total_dim(),
            steps: out.steps,
            rows,
            truncation,
            norm_drift: None,
            trace_deviation: Some(out.trace_deviation),
            min_eigenvalue: out.min_eigenvalue,
            n_traj: None,
            n_jumped: None,
            wall_clock_s: 0.0,
        })
    }

    fn mcwf(&self) -> Result<EngineRun> {
        let spec = self.reduced_spec()?;
        let h = build_v_i(&self.cfg.params(), &self.derived, &spec)?;
        let psi0 = self.cfg.initial.ket(&spec)?;
        let rates = self.cfg.rates_in_g()?;
        let solver = McwfSolver::new(&h, &rates, &psi0, &self.main_grid()?, McwfOptions::default())?;
        let obs_spec = spec.clone();
        let obs = move |psi: &[Complex64]| -> Vec<f64> {
            moments_of_amplitudes(&obs_spec, psi).map(|m| m.to_reals().to_vec()).unwrap_or_default()
        };
        let mc = &self.cfg.mcwf;
        let ens = solver.ensemble(mc.n_traj, mc.master_seed, &obs)?;
        let optimize = self.cfg.observables.optimizes(Engine::McwfVi);
        let points = self.cfg.observables.theta_points;
        let fixed = self.cfg.fixed_theta();
        let rows = (0..ens.times.len())
            .map(|k| {
                let mean = ModeMoments::from_reals(&ens.mean[k]);
                let row = self.row(Engine::McwfVi, ens.times[k], &mean, ens.mean_leaks[k])?;
                let (_, err) = ens.jackknife(k, |x| {
                    let m = ModeMoments::from_reals(x);
                    if optimize {
                        minimize_theta(|th| m.epr_variance(th), points).1
                    } else {
                        m.epr_variance(fixed)
                    }
                });
                Ok(SeriesRow { record: row.record.with_stderr(err), ..row })
            })
            .collect::<Result<_>>()?;
        Ok(EngineRun {
            engine: Engine::McwfVi,
            dim: spec.total_dim(),
            steps: solver.steps_per_trajectory(),
            rows,
            truncation: ens.truncation.clone(),
            norm_drift: None,
            trace_deviation: None,
            min_eigenvalue: None,
            n_traj: Some(ens.n_traj),
            n_jumped: Some(ens.n_jumped),
            wall_clock_s: 0.0,
        })
    }
}

/// Moments in the frame rotating at `phi_a = omega_a t`, `phi_b = omega_b t`.
fn rotate(m: &ModeMoments, phi_a: f64, phi_b: f64) -> ModeMoments {
    let ea = Complex64::from_polar(1.0, phi_a);
    let eb = Complex64::from_polar(1.0, phi_b);
    ModeMoments { a: m.a * ea, b: m.b * eb, ab: m.ab * ea * eb, ..*m }
}

/// Runs every engine of `cfg` in order.
pub fn run_scenario(cfg: &ScenarioConfig, options: &RunOptions) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let derived = cfg.derived()?;
    let regime_params = cfg.model.params(cfg.truncation.qubit_levels);
    let regime = validate_regime(&regime_params, &derived, RegimeThresholds { ratio: REGIME_RATIO });
    let mut warnings = regime.warnings();
    let ctx = Context { cfg, lambda: derived.lambda.norm(), derived: derived.clone() };

    let rates = cfg.rates.raw();
    let mut engines = Vec::with_capacity(cfg.engines.len());
    for &engine in &cfg.engines {
        if !engine.is_dissipative() && !rates.is_zero() {
            warnings.push(format!("{}: decoherence rates are ignored by this engine", engine.name()));
        }
        let run = ctx.run(engine)?;
        if options.strict && !run.truncation.is_clean() {
            let t = &run.truncation;
            return Err(Error::NeedsLargerSpace { leak: t.max_leak_a.max(t.max_leak_b), limit: t.threshold });
        }
        warnings.extend(run.truncation.warnings.iter().map(|w| format!("{}: {w}", engine.name())));
        engines.push(run);
    }
    Ok(RunRecord {
        config: cfg.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
        derived,
        regime,
        engines,
        warnings,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}
