//! Frame unitaries and the two-mode squeezing operator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::params::{DerivedParams, ModelParams};
use crate::error::{Error, Result};
use crate::fockspace::{embed, mode_op, CsrMatrix, HilbertSpec, KetState, OperatorMatrix, MODE_A, MODE_B, QUBIT};

/// Largest allowed top-two-level population of `S(zeta)|00>`.
pub const SQUEEZE_LEAK_LIMIT: f64 = 1e-6;

/// `exp[-i (Omega sigma_eg + Omega* sigma_ge) t]` on the qubit, identity on `|f>`.
pub fn frame_u_drive(params: &ModelParams, spec: &HilbertSpec, t: f64) -> Result<OperatorMatrix> {
    let levels = spec.dim_of(QUBIT)?;
    let w = params.omega_drive;
    let mag = w.norm();
    let (cos, sin) = ((mag * t).cos(), (mag * t).sin());
    let i = Complex64::i();
    // the generator squares to |Omega|^2 on span{g, e}
    let (eg, ge) = if mag == 0.0 { (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)) } else { (w / mag, w.conj() / mag) };
    let mut trips = vec![
        (0, 0, Complex64::new(cos, 0.0)),
        (1, 1, Complex64::new(cos, 0.0)),
        (1, 0, -i * sin * eg),
        (0, 1, -i * sin * ge),
    ];
    if levels == 3 {
        trips.push((2, 2, Complex64::new(1.0, 0.0)));
    }
    let local = OperatorMatrix::new(HilbertSpec::single(QUBIT, levels)?, CsrMatrix::from_triplets(levels, trips))?;
    embed(&local, spec, QUBIT)
}

/// `U_- = exp(i chi_a a†a t + i chi_b b†b t)`, diagonal in the Fock basis.
pub fn frame_u_minus(derived: &DerivedParams, spec: &HilbertSpec, t: f64) -> Result<OperatorMatrix> {
    let pa = spec.position(MODE_A)?;
    let pb = spec.position(MODE_B)?;
    let diag: Vec<Complex64> = (0..spec.total_dim())
        .map(|i| {
            let d = spec.digits(i);
            Complex64::from_polar(1.0, (derived.chi_a * d[pa] as f64 + derived.chi_b * d[pb] as f64) * t)
        })
        .collect();
    OperatorMatrix::new(spec.clone(), CsrMatrix::from_diagonal(&diag))
}

/// Squeezing parameter `zeta` with `S(zeta) = exp(-i tau (lambda ab + lambda* a†b†))`.
///
/// With `S(zeta) = exp(zeta* ab - zeta a†b†)` this is `zeta = i lambda* tau`.
pub fn evolution_squeeze_parameter(lambda: Complex64, tau: f64) -> Complex64 {
    Complex64::i() * lambda.conj() * tau
}

/// Dense two-mode squeezing operator `S(zeta) = exp(zeta* ab - zeta a†b†)`.
///
/// Fails with [`Error::NeedsLargerSpace`] when `S(zeta)|00>` puts more than
/// [`SQUEEZE_LEAK_LIMIT`] population in the top two Fock levels of either mode.
pub fn squeeze_operator(zeta: Complex64, spec: &HilbertSpec) -> Result<OperatorMatrix> {
    let op = squeeze_operator_unchecked(zeta, spec)?;

    let vac_digits = vec![0; spec.subsystems().len()];
    let vac = KetState::basis(spec, &vac_digits)?;
    let out = crate::fockspace::apply(&op, &vac)?;
    for mode in [MODE_A, MODE_B] {
        let leak = crate::fockspace::top_level_population(out.amplitudes(), spec, mode)?;
        if leak > SQUEEZE_LEAK_LIMIT {
            return Err(Error::NeedsLargerSpace { leak, limit: SQUEEZE_LEAK_LIMIT });
        }
    }
    Ok(op)
}

/// [`squeeze_operator`] without the truncation check.
pub fn squeeze_operator_unchecked(zeta: Complex64, spec: &HilbertSpec) -> Result<OperatorMatrix> {
    let a = mode_op(spec, MODE_A)?;
    let b = mode_op(spec, MODE_B)?;
    let ab = a.multiply(&b)?;
    let gen = ab.scale(zeta.conj()).sub(&ab.adjoint().scale(zeta))?;
    let dense: DMatrix<Complex64> = gen.data().to_dense().exp();
    OperatorMatrix::new(spec.clone(), CsrMatrix::from_dense(&dense, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive;

    #[test]
    fn frames_are_identity_at_zero() {
        let p = ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 2500.0);
        let d = derive(&p).unwrap();
        let spec = HilbertSpec::qubit_two_modes(2, 3, 4).unwrap();
        let id = CsrMatrix::identity(spec.total_dim());
        assert_eq!(frame_u_drive(&p, &spec, 0.0).unwrap().data(), &id);
        assert_eq!(frame_u_minus(&d, &spec, 0.0).unwrap().data(), &id);
    }

    #[test]
    fn frame_u_minus_phases() {
        let p = ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 2500.0);
        let d = derive(&p).unwrap();
        let spec = HilbertSpec::two_modes(4, 5).unwrap();
        let t = 3.7;
        let u = frame_u_minus(&d, &spec, t).unwrap();
        let expected = Complex64::from_polar(1.0, (2.0 * d.chi_a + 3.0 * d.chi_b) * t);
        assert!((u.element(&[2, 3], &[2, 3]) - expected).norm() < 1e-15);
    }

    #[test]
    fn drive_frame_is_a_rabi_rotation() {
        let p = ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 2500.0);
        let spec = HilbertSpec::single(QUBIT, 2).unwrap();
        let half = std::f64::consts::PI / (2.0 * 50.0);
        let u = frame_u_drive(&p, &spec, half).unwrap();
        // half of the Rabi period pi/Omega maps |g> to -i|e>
        assert!((u.get(1, 0) - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        let full = frame_u_drive(&p, &spec, std::f64::consts::PI / 50.0).unwrap();
        assert!((full.get(0, 0) + Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(full.get(1, 0).norm() < 1e-14);
    }

    #[test]
    fn squeeze_zero_is_identity() {
        let spec = HilbertSpec::two_modes(5, 5).unwrap();
        let s = squeeze_operator(Complex64::new(0.0, 0.0), &spec).unwrap();
        assert!((s.data().to_dense() - DMatrix::identity(25, 25)).norm() < 1e-15);
    }

    #[test]
    fn squeeze_rejects_small_space() {
        let spec = HilbertSpec::two_modes(6, 6).unwrap();
        assert!(matches!(
            squeeze_operator(Complex64::new(1.0, 0.0), &spec),
            Err(Error::NeedsLargerSpace { .. })
        ));
    }
}
