//! Time evolution: Schrödinger propagation, Lindblad integration and the Monte
//! Carlo wave-function (quantum trajectory) method.

mod compiled;
mod lindblad;
mod mcwf;
mod schrodinger;

pub use compiled::{CompiledOperator, Rk4, Workspace};
pub use lindblad::{propagate_lindblad, LindbladOptions, LindbladRun, DEFAULT_DENSE_CAP};
pub use mcwf::{
    mcwf_ensemble, mcwf_trajectory, trajectory_rng, JumpEvent, McwfOptions, McwfSolver, ObservableFn, TrajectoryEnsemble,
    TrajectoryRecord, WeightedRecord,
};
pub use schrodinger::{propagate_schrodinger, SchrodingerOptions, SchrodingerRun};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{mode_op, qubit_op, AtomOp, HilbertSpec, OperatorMatrix, MODE_A, MODE_B, QUBIT};

/// Decay and dephasing rates of the master equation, as angular rates in the
/// same units as the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecoherenceRates {
    pub gamma: f64,
    pub gamma_ph: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
}

impl DecoherenceRates {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("gamma_ph", self.gamma_ph), ("kappa_a", self.kappa_a), ("kappa_b", self.kappa_b)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::ConfigInvalid(format!("rate {name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.gamma == 0.0 && self.gamma_ph == 0.0 && self.kappa_a == 0.0 && self.kappa_b == 0.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        DecoherenceRates {
            gamma: self.gamma * s,
            gamma_ph: self.gamma_ph * s,
            kappa_a: self.kappa_a * s,
            kappa_b: self.kappa_b * s,
        }
    }
}

/// A jump operator `c = sqrt(rate) O` with the channel name.
#[derive(Debug, Clone)]
pub struct CollapseOperator {
    pub name: &'static str,
    pub op: OperatorMatrix,
}

/// Jump operators `sqrt(gamma) sigma_-`, `sqrt(gamma_ph) sigma_ee`,
/// `sqrt(kappa_a) a`, `sqrt(kappa_b) b`. With the dissipator
/// `(rate/2) D[O]`, `D[O] rho = 2 O rho O† - O†O rho - rho O†O`, these give
/// `c rho c† - (c†c rho + rho c†c)/2`. Channels with zero rate or whose
/// subsystem is absent from `spec` are skipped.
pub fn collapse_operators(spec: &HilbertSpec, rates: &DecoherenceRates) -> Result<Vec<CollapseOperator>> {
    rates.validate()?;
    let mut out = Vec::new();
    if spec.has(QUBIT) {
        if rates.gamma > 0.0 {
            out.push(CollapseOperator { name: "qubit_decay", op: qubit_op(spec, AtomOp::SigmaMinus)?.scale_real(rates.gamma.sqrt()) });
        }
        if rates.gamma_ph > 0.0 {
            out.push(CollapseOperator { name: "qubit_dephasing", op: qubit_op(spec, AtomOp::SigmaEe)?.scale_real(rates.gamma_ph.sqrt()) });
        }
    }
    if spec.has(MODE_A) && rates.kappa_a > 0.0 {
        out.push(CollapseOperator { name: "decay_a", op: mode_op(spec, MODE_A)?.scale_real(rates.kappa_a.sqrt()) });
    }
    if spec.has(MODE_B) && rates.kappa_b > 0.0 {
        out.push(CollapseOperator { name: "decay_b", op: mode_op(spec, MODE_B)?.scale_real(rates.kappa_b.sqrt()) });
    }
    Ok(out)
}

/// `-(i/2) sum_k c_k† c_k`
pub fn damping_term(spec: &HilbertSpec, collapse: &[CollapseOperator]) -> Result<OperatorMatrix> {
    let mut acc = OperatorMatrix::zeros(spec);
    for c in collapse {
        acc = acc.add(&c.op.adjoint().multiply(&c.op)?)?;
    }
    Ok(acc.scale(num_complex::Complex64::new(0.0, -0.5)))
}

/// How the fixed RK4 step is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepControl {
    /// Upper bound on the step size.
    Fixed(f64),
    /// Steps per period of the fastest frequency in the operator.
    PeriodFraction(f64),
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::PeriodFraction(40.0)
    }
}

/// Output times and step control. Steps are aligned so every output time is
/// hit exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    outputs: Vec<f64>,
    pub step: StepControl,
}

impl TimeGrid {
    pub fn new(outputs: Vec<f64>, step: StepControl) -> Result<Self> {
        if outputs.is_empty() {
            return Err(Error::ConfigInvalid("time grid needs at least one output time".into()));
        }
        if outputs.windows(2).any(|w| !(w[1] > w[0])) || outputs.iter().any(|t| !t.is_finite()) {
            return Err(Error::ConfigInvalid("output times must be finite and strictly increasing".into()));
        }
        match step {
            StepControl::Fixed(dt) if !(dt > 0.0) => return Err(Error::ConfigInvalid("step must be positive".into())),
            StepControl::PeriodFraction(n) if !(n > 0.0) => {
                return Err(Error::ConfigInvalid("steps per period must be positive".into()))
            }
            _ => {}
        }
        Ok(TimeGrid { outputs, step })
    }

    /// `samples` equally spaced outputs on `[t_start, t_end]`.
    pub fn uniform(t_start: f64, t_end: f64, samples: usize, step: StepControl) -> Result<Self> {
        if samples < 2 || !(t_end > t_start) {
            return Err(Error::ConfigInvalid("uniform grid needs t_end > t_start and >= 2 samples".into()));
        }
        let h = (t_end - t_start) / (samples - 1) as f64;
        let mut outputs: Vec<f64> = (0..samples).map(|k| t_start + h * k as f64).collect();
        outputs[samples - 1] = t_end;
        Self::new(outputs, step)
    }

    /// Grid ending at `tau = r_max / |lambda|`.
    pub fn for_squeezing(lambda_abs: f64, r_max: f64, samples: usize, step: StepControl) -> Result<Self> {
        if !(lambda_abs > 0.0) || !(r_max > 0.0) {
            return Err(Error::ConfigInvalid("squeezing grid needs |lambda| > 0 and r_max > 0".into()));
        }
        Self::uniform(0.0, r_max / lambda_abs, samples, step)
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn t_start(&self) -> f64 {
        self.outputs[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.outputs.last().unwrap()
    }

    fn max_step(&self, max_frequency: f64) -> f64 {
        match self.step {
            StepControl::Fixed(dt) => dt,
            StepControl::PeriodFraction(n) => {
                if max_frequency > 0.0 {
                    2.0 * std::f64::consts::PI / (n * max_frequency)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Integer step counts per output interval for the given frequency bound.
    pub(crate) fn plan(&self, max_frequency: f64) -> StepPlan {
        let dt_max = self.max_step(max_frequency);
        let intervals = self
            .outputs
            .windows(2)
            .map(|w| {
                let len = w[1] - w[0];
                let steps = if dt_max.is_finite() { (len / dt_max).ceil().max(1.0) as usize } else { 1 };
                Interval { t0: w[0], dt: len / steps as f64, steps }
            })
            .collect();
        StepPlan { intervals }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Interval {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl Interval {
    pub fn time(&self, j: usize) -> f64 {
        self.t0 + self.dt * j as f64
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StepPlan {
    pub intervals: Vec<Interval>,
}

impl StepPlan {
    pub fn total_steps(&self) -> usize {
        self.intervals.iter().map(|i| i.steps).sum()
    }
}

/// Top-level population monitor for truncated modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub threshold: f64,
    pub max_leak_a: f64,
    pub max_leak_b: f64,
    pub warnings: Vec<String>,
}

impl TruncationReport {
    pub fn new(threshold: f64) -> Self {
        TruncationReport { threshold, max_leak_a: 0.0, max_leak_b: 0.0, warnings: Vec::new() }
    }

    pub(crate) fn observe(&mut self, t: f64, leak_a: f64, leak_b: f64) {
        for (label, leak, max) in [("a", leak_a, &mut self.max_leak_a), ("b", leak_b, &mut self.max_leak_b)] {
            let was_ok = *max <= self.threshold;
            *max = max.max(leak);
            if was_ok && *max > self.threshold {
                self.warnings.push(format!(
                    "truncation: mode {label} top-two-level population {leak:.3e} exceeds {:.1e} at t = {t:.4}",
                    self.threshold
                ));
            }
        }
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

pub const DEFAULT_TRUNCATION_THRESHOLD: f64 = 1e-4;

pub(crate) fn leaks(spec: &HilbertSpec, psi: &[num_complex::Complex64]) -> (f64, f64) {
    let get = |m| {
        if spec.has(m) {
            crate::fockspace::top_level_population(psi, spec, m).unwrap_or(0.0) / norm_sqr(psi)
        } else {
            0.0
        }
    };
    (get(MODE_A), get(MODE_B))
}

pub(crate) fn norm_sqr(psi: &[num_complex::Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}
