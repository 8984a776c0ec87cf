use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{HilbertSpec, KetState, MODE_A, MODE_B, QUBIT};
use crate::model::{derive, DerivedParams, ModelParams};
use crate::solvers::{DecoherenceRates, StepControl};

/// Dynamics engine of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    SchrodingerFull,
    SchrodingerVi,
    SchrodingerHminus,
    LindbladVi,
    McwfVi,
}

impl Engine {
    pub const ALL: [Engine; 5] =
        [Engine::SchrodingerFull, Engine::SchrodingerVi, Engine::SchrodingerHminus, Engine::LindbladVi, Engine::McwfVi];

    pub fn name(&self) -> &'static str {
        match self {
            Engine::SchrodingerFull => "schrodinger_full",
            Engine::SchrodingerVi => "schrodinger_vi",
            Engine::SchrodingerHminus => "schrodinger_hminus",
            Engine::LindbladVi => "lindblad_vi",
            Engine::McwfVi => "mcwf_vi",
        }
    }

    pub fn is_dissipative(&self) -> bool {
        matches!(self, Engine::LindbladVi | Engine::McwfVi)
    }
}

/// A complex number written either as a real scalar or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(&self) -> Complex64 {
        match *self {
            ComplexValue::Real(x) => Complex64::new(x, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<f64> for ComplexValue {
    fn from(x: f64) -> Self {
        ComplexValue::Real(x)
    }
}

/// Model parameters in units of `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub g_a: ComplexValue,
    pub g_b: ComplexValue,
    /// Qubit-mode detuning `Delta`.
    pub delta: f64,
    /// Drive amplitude `Omega`.
    pub omega_drive: ComplexValue,
    pub omega_0: f64,
    pub omega_ef: f64,
    /// `g / 2 pi` in Hz, used for SI rate conversion.
    #[serde(default = "default_g_in_hz")]
    pub g_in_hz: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_g_in_hz() -> f64 {
    20e6
}

fn default_theta() -> f64 {
    FRAC_PI_4
}

impl ModelSection {
    pub fn params(&self, qubit_levels: usize) -> ModelParams {
        ModelParams {
            g_a: self.g_a.value(),
            g_b: self.g_b.value(),
            omega_0: self.omega_0,
            omega_ef: self.omega_ef,
            omega_drive: self.omega_drive.value(),
            omega_d: self.omega_0,
            delta_big: self.delta,
            qubit_levels,
            theta: self.theta,
        }
    }

    /// Angular frequency of `g` in rad/s.
    pub fn g_angular(&self) -> f64 {
        2.0 * PI * self.g_in_hz
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub n_a: usize,
    pub n_b: usize,
    /// Levels of the atom in the full model; reduced engines always keep two.
    pub qubit_levels: usize,
    /// Fock levels per mode for `schrodinger_full`.
    pub full_n: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        TruncationSection { n_a: 30, n_b: 30, qubit_levels: 3, full_n: 14 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RateUnits {
    /// Multiples of `|lambda|`.
    #[default]
    Lambda,
    /// Multiples of `g`.
    G,
    /// Inverse seconds.
    Si,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RatesSection {
    pub units: RateUnits,
    pub gamma: f64,
    pub gamma_ph: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
}

impl RatesSection {
    pub fn raw(&self) -> DecoherenceRates {
        DecoherenceRates { gamma: self.gamma, gamma_ph: self.gamma_ph, kappa_a: self.kappa_a, kappa_b: self.kappa_b }
    }

    /// Rates in units of `g`.
    pub fn in_g_units(&self, model: &ModelSection, derived: &DerivedParams) -> DecoherenceRates {
        let scale = match self.units {
            RateUnits::Lambda => derived.lambda.norm(),
            RateUnits::G => 1.0,
            RateUnits::Si => 1.0 / model.g_angular(),
        };
        self.raw().scaled(scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub r_max: f64,
    pub samples: usize,
    pub steps_per_period: f64,
    /// Fixed step bound; overrides `steps_per_period` when set.
    pub dt: Option<f64>,
    /// Largest `r` for `schrodinger_full`.
    pub full_r_max: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { r_max: 1.5, samples: 31, steps_per_period: 160.0, dt: None, full_r_max: 0.5 }
    }
}

impl GridSection {
    pub fn step_control(&self) -> StepControl {
        match self.dt {
            Some(dt) => StepControl::Fixed(dt),
            None => StepControl::PeriodFraction(self.steps_per_period),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McwfSection {
    pub n_traj: usize,
    pub master_seed: u64,
}

impl Default for McwfSection {
    fn default() -> Self {
        McwfSection { n_traj: 600, master_seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMode {
    /// Optimized for the V_I and full-model engines, fixed for `H_-`.
    #[default]
    Auto,
    Fixed,
    Optimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesSection {
    pub theta_mode: ThetaMode,
    /// Fixed angle; defaults to `model.theta`.
    pub theta: Option<f64>,
    pub theta_points: usize,
}

impl Default for ObservablesSection {
    fn default() -> Self {
        ObservablesSection { theta_mode: ThetaMode::Auto, theta: None, theta_points: 64 }
    }
}

impl ObservablesSection {
    pub fn optimizes(&self, engine: Engine) -> bool {
        match self.theta_mode {
            ThetaMode::Auto => engine != Engine::SchrodingerHminus,
            ThetaMode::Fixed => false,
            ThetaMode::Optimize => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QubitInit {
    /// `(|g> - |e>) / sqrt 2`
    #[default]
    Minus,
    Plus,
    G,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeInit {
    #[default]
    Vacuum,
    Fock {
        n: usize,
    },
    Coherent {
        alpha: ComplexValue,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct InitialState {
    pub qubit: QubitInit,
    pub a: ModeInit,
    pub b: ModeInit,
}

impl InitialState {
    fn qubit_ket(&self, levels: usize) -> Result<KetState> {
        let spec = HilbertSpec::single(QUBIT, levels)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); levels];
        match self.qubit {
            QubitInit::Minus => {
                amps[0] = Complex64::new(s, 0.0);
                amps[1] = Complex64::new(-s, 0.0);
            }
            QubitInit::Plus => {
                amps[0] = Complex64::new(s, 0.0);
                amps[1] = Complex64::new(s, 0.0);
            }
            QubitInit::G => amps[0] = Complex64::new(1.0, 0.0),
            QubitInit::E => amps[1] = Complex64::new(1.0, 0.0),
        }
        KetState::new(spec, amps)
    }

    fn mode_ket(init: &ModeInit, label: &str, dim: usize) -> Result<KetState> {
        let spec = HilbertSpec::single(label, dim)?;
        match *init {
            ModeInit::Vacuum => KetState::basis(&spec, &[0]),
            ModeInit::Fock { n } => KetState::basis(&spec, &[n]).map_err(|_| {
                Error::ConfigInvalid(format!("initial Fock state |{n}> does not fit mode {label} with {dim} levels"))
            }),
            ModeInit::Coherent { alpha } => {
                let alpha = alpha.value();
                let mut amps = Vec::with_capacity(dim);
                let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
                for n in 0..dim {
                    amps.push(c);
                    c = c * alpha / ((n + 1) as f64).sqrt();
                }
                Ok(KetState::new(spec, amps)?.normalized())
            }
        }
    }

    /// Product state on `spec`; a missing qubit subsystem is skipped.
    pub fn ket(&self, spec: &HilbertSpec) -> Result<KetState> {
        let mut factors = Vec::new();
        if spec.has(QUBIT) {
            factors.push(self.qubit_ket(spec.dim_of(QUBIT)?)?);
        }
        factors.push(Self::mode_ket(&self.a, MODE_A, spec.dim_of(MODE_A)?)?);
        factors.push(Self::mode_ket(&self.b, MODE_B, spec.dim_of(MODE_B)?)?);
        KetState::product(&factors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Directory for the CSV and JSON files; the CLI `--out` flag overrides it.
    pub dir: Option<String>,
    pub csv: Option<String>,
    pub summary: Option<String>,
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub engines: Vec<Engine>,
    pub model: ModelSection,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub rates: RatesSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub mcwf: McwfSection,
    #[serde(default)]
    pub observables: ObservablesSection,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub output: OutputSection,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// Two-level model parameters shared by the reduced engines.
    pub fn params(&self) -> ModelParams {
        self.model.params(2)
    }

    pub fn derived(&self) -> Result<DerivedParams> {
        derive(&self.params())
    }

    pub fn rates_in_g(&self) -> Result<DecoherenceRates> {
        Ok(self.rates.in_g_units(&self.model, &self.derived()?))
    }

    /// Checks every field before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("scenario name `{}` must be non-empty and contain no path separators", self.name));
        }
        if self.engines.is_empty() {
            return bad("at least one engine is required".into());
        }
        for (i, e) in self.engines.iter().enumerate() {
            if self.engines[..i].contains(e) {
                return bad(format!("engine {} listed twice", e.name()));
            }
        }
        self.model.params(self.truncation.qubit_levels).validate()?;
        if !(self.model.g_in_hz > 0.0) {
            return bad("model.g_in_hz must be positive".into());
        }
        let derived = self.derived()?;
        if derived.lambda.norm() == 0.0 {
            return bad("the effective coupling lambda vanishes".into());
        }
        if self.engines.contains(&Engine::SchrodingerFull) && self.truncation.qubit_levels != 3 {
            return bad(format!(
                "schrodinger_full needs truncation.qubit_levels = 3, got {}",
                self.truncation.qubit_levels
            ));
        }
        for (label, n) in [("n_a", self.truncation.n_a), ("n_b", self.truncation.n_b), ("full_n", self.truncation.full_n)] {
            if n < 2 {
                return bad(format!("truncation.{label} must be at least 2, got {n}"));
            }
        }
        self.rates.raw().validate()?;
        let g = &self.grid;
        if !(g.r_max > 0.0 && g.r_max.is_finite()) {
            return bad(format!("grid.r_max must be positive, got {}", g.r_max));
        }
        if g.samples < 2 {
            return bad(format!("grid.samples must be at least 2, got {}", g.samples));
        }
        if !(g.steps_per_period > 0.0) {
            return bad("grid.steps_per_period must be positive".into());
        }
        if let Some(dt) = g.dt {
            if !(dt > 0.0) {
                return bad("grid.dt must be positive".into());
            }
        }
        if self.engines.contains(&Engine::SchrodingerFull) && !(g.full_r_max > 0.0) {
            return bad("grid.full_r_max must be positive".into());
        }
        if self.mcwf.master_seed > i64::MAX as u64 {
            return bad(format!("mcwf.master_seed must not exceed {}, got {}", i64::MAX, self.mcwf.master_seed));
        }
        if self.engines.contains(&Engine::McwfVi) && self.mcwf.n_traj < 2 {
            return bad(format!("mcwf.n_traj must be at least 2, got {}", self.mcwf.n_traj));
        }
        if self.observables.theta_points < crate::observables::MIN_THETA_GRID {
            return bad(format!("observables.theta_points must be at least {}", crate::observables::MIN_THETA_GRID));
        }
        if let Some(t) = self.observables.theta {
            if !t.is_finite() {
                return bad("observables.theta must be finite".into());
            }
        }
        let spec = HilbertSpec::two_modes(self.truncation.n_a, self.truncation.n_b)?;
        self.initial.ket(&spec)?;
        Ok(())
    }

    pub fn fixed_theta(&self) -> f64 {
        self.observables.theta.unwrap_or(self.model.theta)
    }
}
