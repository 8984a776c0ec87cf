use nalgebra::DMatrix;
use num_complex::Complex64;

use super::compiled::{CompiledOperator, Workspace};
use super::{collapse_operators, damping_term, DecoherenceRates, TimeGrid};
use crate::error::{Error, Result};
use crate::fockspace::{CsrMatrix, DensityOperator};
use crate::model::TimeDependentOperator;

/// Default largest Hilbert-space dimension for dense density matrices.
pub const DEFAULT_DENSE_CAP: usize = 512;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    pub dense_cap: usize,
    pub trace_tolerance: f64,
    /// Eigenvalues are checked at every output when `dim` is at most this.
    pub eigen_check_max_dim: usize,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions { dense_cap: DEFAULT_DENSE_CAP, trace_tolerance: 1e-8, eigen_check_max_dim: 256 }
    }
}

#[derive(Debug, Clone)]
pub struct LindbladRun {
    pub times: Vec<f64>,
    pub states: Vec<DensityOperator>,
    /// Largest `|Tr rho - Tr rho0|` at an output time.
    pub trace_deviation: f64,
    /// Smallest eigenvalue seen, or `None` when the check was skipped.
    pub min_eigenvalue: Option<f64>,
    pub steps: usize,
}

/// Right-hand side of the master equation on column-major flat storage.
struct Liouvillian {
    h_nh: CompiledOperator,
    jumps: Vec<CsrMatrix>,
    dim: usize,
    ws: Workspace,
    k: Vec<Complex64>,
    m: Vec<Complex64>,
}

impl Liouvillian {
    /// `drho = -i (K - K†) + sum_k c_k rho c_k†` with `K = H_nh rho`.
    fn eval(&mut self, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for j in 0..n {
            self.h_nh.apply(t, &rho[j * n..(j + 1) * n], &mut self.k[j * n..(j + 1) * n], &mut self.ws);
        }
        let mi = Complex64::new(0.0, -1.0);
        for j in 0..n {
            for i in 0..n {
                out[j * n + i] = mi * (self.k[j * n + i] - self.k[i * n + j].conj());
            }
        }
        for c in &self.jumps {
            for j in 0..n {
                c.matvec(&rho[j * n..(j + 1) * n], &mut self.m[j * n..(j + 1) * n]);
            }
            // column j of M c† is sum_k conj(c_jk) M[:, k]
            for j in 0..n {
                for (k, v) in c.row(j) {
                    let w = v.conj();
                    for i in 0..n {
                        out[j * n + i] += w * self.m[k * n + i];
                    }
                }
            }
        }
    }
}

/// Integrates the master equation
/// `drho/dt = -i[H, rho] + sum_k (rate_k / 2) D[O_k] rho` with fixed-step RK4.
pub fn propagate_lindblad(
    h: &TimeDependentOperator,
    rates: &DecoherenceRates,
    rho0: &DensityOperator,
    grid: &TimeGrid,
    options: &LindbladOptions,
) -> Result<LindbladRun> {
    let spec = rho0.spec().clone();
    if h.spec() != &spec {
        return Err(Error::IncompatibleSpaces(format!("{:?} vs {:?}", h.spec(), spec)));
    }
    let n = spec.total_dim();
    if n > options.dense_cap {
        return Err(Error::DensityTooLarge { dim: n, cap: options.dense_cap });
    }
    rho0.validate()?;
    let collapse = collapse_operators(&spec, rates)?;
    let damping = damping_term(&spec, &collapse)?;
    let h_nh = CompiledOperator::new(h, Some(&damping), false);
    let plan = grid.plan(h_nh.max_frequency());
    let ws = h_nh.workspace();
    let mut rhs = Liouvillian {
        h_nh,
        jumps: collapse.iter().map(|c| c.op.data().clone()).collect(),
        dim: n,
        ws,
        k: vec![ZERO; n * n],
        m: vec![ZERO; n * n],
    };

    let tr0 = rho0.trace().re;
    let check_eigen = n <= options.eigen_check_max_dim;
    let mut min_eig = if check_eigen { Some(rho0.min_eigenvalue()) } else { None };
    let mut trace_dev = 0.0f64;

    let mut rho: Vec<Complex64> = rho0.matrix().as_slice().to_vec();
    let len = rho.len();
    let (mut k1, mut k2, mut k3, mut k4, mut stage) =
        (vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]);
    let mut states = vec![rho0.clone()];
    for iv in &plan.intervals {
        let h = iv.dt;
        for j in 0..iv.steps {
            let t = iv.time(j);
            rhs.eval(t, &rho, &mut k1);
            for ((s, r), k) in stage.iter_mut().zip(&rho).zip(&k1) {
                *s = r + 0.5 * h * k;
            }
            rhs.eval(t + 0.5 * h, &stage, &mut k2);
            for ((s, r), k) in stage.iter_mut().zip(&rho).zip(&k2) {
                *s = r + 0.5 * h * k;
            }
            rhs.eval(t + 0.5 * h, &stage, &mut k3);
            for ((s, r), k) in stage.iter_mut().zip(&rho).zip(&k3) {
                *s = r + h * k;
            }
            rhs.eval(t + h, &stage, &mut k4);
            let w = h / 6.0;
            for i in 0..len {
                rho[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        let t = iv.time(iv.steps);
        if rho.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::IntegratorFailure(format!("non-finite density matrix at t = {t}")));
        }
        let mut out = DensityOperator::new(spec.clone(), DMatrix::from_column_slice(n, n, &rho))?;
        out.symmetrize();
        rho.copy_from_slice(out.matrix().as_slice());
        trace_dev = trace_dev.max((out.trace().re - tr0).abs());
        if let Some(m) = min_eig.as_mut() {
            *m = m.min(out.min_eigenvalue());
        }
        states.push(out);
    }
    if trace_dev > options.trace_tolerance {
        return Err(Error::IntegratorFailure(format!(
            "trace deviation {trace_dev:.3e} exceeds {:.1e}",
            options.trace_tolerance
        )));
    }
    Ok(LindbladRun {
        times: grid.outputs().to_vec(),
        states,
        trace_deviation: trace_dev,
        min_eigenvalue: min_eig,
        steps: plan.total_steps(),
    })
}
