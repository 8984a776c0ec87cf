//! Quadratures, the EPR-like total variance, squeezing in dB and state
//! diagnostics.
//!
//! With `X = (a e^{-i theta} + h.c.)/sqrt 2`, `P = -i(a e^{-i theta} - h.c.)/sqrt 2`
//! and `u = X_a + X_b`, `v = P_a - P_b`, the total variance
//! `V_ar = Var(u) + Var(v)` depends on the state only through a handful of
//! moments (see [`ModeMoments`]) and on `theta` as
//! `c0 + 2 Re(c2 e^{-2 i theta})`.

mod moments;

pub use moments::{
    diagnostics, diagnostics_rho, moments_of_amplitudes, Diagnostics, ModeMoments, MomentSource, MOMENT_REALS,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{mode_op, HilbertSpec, OperatorMatrix};

/// Variance of the two-mode vacuum and the separability bound.
pub const VACUUM_VARIANCE: f64 = 2.0;

/// Phase reference of the quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureBasis {
    pub theta: f64,
}

impl QuadratureBasis {
    /// `theta` reduced to `[0, 2 pi)`.
    pub fn normalized(&self) -> f64 {
        self.theta.rem_euclid(2.0 * std::f64::consts::PI)
    }
}

/// `(X, P)` of `mode` at phase `theta`.
pub fn quadrature_ops(spec: &HilbertSpec, mode: &str, theta: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let rotated = mode_op(spec, mode)?.scale(Complex64::from_polar(1.0, -theta));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = rotated.plus_adjoint().scale_real(s);
    let p = rotated.sub(&rotated.adjoint())?.scale(Complex64::new(0.0, -s)).hermitian();
    Ok((x, p))
}

/// `<(Delta u)^2> + <(Delta v)^2>` of the reduced two-mode state.
pub fn epr_variance<S: MomentSource>(state: &S, theta: f64) -> Result<f64> {
    Ok(state.moments()?.epr_variance(theta))
}

/// `-10 log10(V_ar / 2)`
pub fn squeezing_db(v_ar: f64) -> Result<f64> {
    if !(v_ar > 0.0) || !v_ar.is_finite() {
        return Err(Error::InvalidVariance(v_ar));
    }
    Ok(-10.0 * (v_ar / VACUUM_VARIANCE).log10())
}

/// Inverse of [`squeezing_db`].
pub fn variance_from_db(db: f64) -> f64 {
    VACUUM_VARIANCE * 10f64.powf(-db / 10.0)
}

/// `V_ar` of the ideal two-mode squeezed vacuum on its squeezing axis.
pub fn ideal_tmss_variance(r: f64) -> f64 {
    VACUUM_VARIANCE * (-2.0 * r).exp()
}

/// Mean photon number per mode of the ideal two-mode squeezed vacuum.
pub fn ideal_tmss_photons(r: f64) -> f64 {
    r.sinh().powi(2)
}

/// Minimum grid size accepted by [`optimize_theta`].
pub const MIN_THETA_GRID: usize = 16;
const THETA_TOLERANCE: f64 = 1e-5;

/// Minimizes a `pi`-periodic function over `[0, pi)`: coarse grid of
/// `points` samples, then golden-section search around the best sample.
pub fn minimize_theta<F: Fn(f64) -> f64>(f: F, points: usize) -> (f64, f64) {
    let points = points.max(MIN_THETA_GRID);
    let pi = std::f64::consts::PI;
    let h = pi / points as f64;
    let (k, _) = (0..points)
        .map(|k| (k, f(k as f64 * h)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let (mut lo, mut hi) = ((k as f64 - 1.0) * h, (k as f64 + 1.0) * h);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > THETA_TOLERANCE {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let theta = 0.5 * (lo + hi);
    (theta.rem_euclid(pi), f(theta))
}

/// `(theta_opt, V_ar_min)` over `theta` in `[0, pi)`.
pub fn optimize_theta<S: MomentSource>(state: &S, points: usize) -> Result<(f64, f64)> {
    let m = state.moments()?;
    Ok(minimize_theta(|th| m.epr_variance(th), points))
}

/// Squeezing figures of merit at one output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingRecord {
    pub t: f64,
    /// `|lambda| t`
    pub r: f64,
    pub v_ar: f64,
    pub v_ar_stderr: Option<f64>,
    pub db: f64,
    pub theta: f64,
    pub theta_opt: Option<f64>,
    pub v_ar_min: Option<f64>,
    pub entangled: bool,
}

impl SqueezingRecord {
    pub fn new(t: f64, r: f64, v_ar: f64, theta: f64) -> Result<Self> {
        Ok(SqueezingRecord {
            t,
            r,
            v_ar,
            v_ar_stderr: None,
            db: squeezing_db(v_ar)?,
            theta,
            theta_opt: None,
            v_ar_min: None,
            entangled: v_ar < VACUUM_VARIANCE,
        })
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.v_ar_stderr = Some(stderr);
        self
    }

    pub fn with_optimum(mut self, theta_opt: f64, v_ar_min: f64) -> Self {
        self.theta_opt = Some(theta_opt);
        self.v_ar_min = Some(v_ar_min);
        self
    }
}
