use num_complex::Complex64;

use super::compiled::{CompiledOperator, Rk4};
use super::{leaks, norm_sqr, TimeGrid, TruncationReport, DEFAULT_TRUNCATION_THRESHOLD};
use crate::error::{Error, Result};
use crate::fockspace::KetState;
use crate::model::TimeDependentOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchrodingerOptions {
    /// Largest tolerated `| ||psi||^2 - 1 |` at any output time.
    pub norm_tolerance: f64,
    /// Renormalize at every output time. Drift is still reported.
    pub renormalize: bool,
    pub truncation_threshold: f64,
}

impl Default for SchrodingerOptions {
    fn default() -> Self {
        SchrodingerOptions { norm_tolerance: 1e-6, renormalize: false, truncation_threshold: DEFAULT_TRUNCATION_THRESHOLD }
    }
}

#[derive(Debug, Clone)]
pub struct SchrodingerRun {
    pub times: Vec<f64>,
    pub states: Vec<KetState>,
    /// Largest norm deviation seen at an output time.
    pub norm_drift: f64,
    pub steps: usize,
    pub truncation: TruncationReport,
}

/// Fixed-step RK4 propagation of `psi0` under `h`, returning the state at
/// every output time of `grid` (the first output is `psi0` itself).
pub fn propagate_schrodinger(
    h: &TimeDependentOperator,
    psi0: &KetState,
    grid: &TimeGrid,
    options: &SchrodingerOptions,
) -> Result<SchrodingerRun> {
    if h.spec() != psi0.spec() {
        return Err(Error::IncompatibleSpaces(format!("{:?} vs {:?}", h.spec(), psi0.spec())));
    }
    let op = CompiledOperator::auto(h, None);
    let plan = grid.plan(op.max_frequency());
    let spec = psi0.spec().clone();

    let mut truncation = TruncationReport::new(options.truncation_threshold);
    let mut norm_drift = (psi0.norm_sqr() - 1.0).abs();
    let (la, lb) = leaks(&spec, psi0.amplitudes());
    truncation.observe(grid.t_start(), la, lb);

    let mut rk = Rk4::new(&op);
    let mut phi = op.from_lab(grid.t_start(), psi0.amplitudes());
    let mut states = vec![psi0.clone()];
    for iv in &plan.intervals {
        for j in 0..iv.steps {
            rk.step_in_place(&op, iv.time(j), iv.dt, &mut phi);
        }
        let t = iv.time(iv.steps);
        let n2 = norm_sqr(&phi);
        if !n2.is_finite() {
            return Err(Error::IntegratorFailure(format!("non-finite amplitudes at t = {t}")));
        }
        norm_drift = norm_drift.max((n2 - 1.0).abs());
        if options.renormalize {
            let s = 1.0 / n2.sqrt();
            phi.iter_mut().for_each(|x| *x *= s);
        }
        let psi: Vec<Complex64> = op.to_lab(t, &phi);
        let (la, lb) = leaks(&spec, &psi);
        truncation.observe(t, la, lb);
        states.push(KetState::new(spec.clone(), psi)?);
    }
    if norm_drift > options.norm_tolerance {
        return Err(Error::StepSizeTooLarge { drift: norm_drift, tol: options.norm_tolerance });
    }
    Ok(SchrodingerRun { times: grid.outputs().to_vec(), states, norm_drift, steps: plan.total_steps(), truncation })
}
