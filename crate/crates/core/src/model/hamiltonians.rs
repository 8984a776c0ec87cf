//! Hamiltonians at each level of approximation, from the lab-frame three-level
//! model down to the ideal two-mode squeezing generator.

use super::params::{derive, DerivedParams, ModelParams};
use super::timedep::{Coefficient, TimeDependentOperator};
use crate::error::{Error, Result};
use crate::fockspace::{mode_op, qubit_op, AtomOp, HilbertSpec, OperatorMatrix, MODE_A, MODE_B, QUBIT};

fn require_levels(spec: &HilbertSpec, levels: usize) -> Result<()> {
    let got = spec.dim_of(QUBIT)?;
    if got != levels {
        return Err(Error::LevelMismatch(format!("expected a {levels}-level atom, spec carries {got}")));
    }
    Ok(())
}

struct Ops {
    a: OperatorMatrix,
    b: OperatorMatrix,
    na: OperatorMatrix,
    nb: OperatorMatrix,
}

impl Ops {
    fn new(spec: &HilbertSpec) -> Result<Self> {
        let a = mode_op(spec, MODE_A)?;
        let b = mode_op(spec, MODE_B)?;
        let na = a.adjoint().multiply(&a)?.hermitian();
        let nb = b.adjoint().multiply(&b)?.hermitian();
        Ok(Ops { a, b, na, nb })
    }
}

/// Bare energies `omega_a a†a + omega_b b†b + (omega_0/2) sigma_z`.
fn bare(spec: &HilbertSpec, params: &ModelParams, derived: &DerivedParams, ops: &Ops) -> Result<OperatorMatrix> {
    ops.na
        .scale_real(derived.omega_a)
        .add(&ops.nb.scale_real(derived.omega_b))?
        .add(&qubit_op(spec, AtomOp::SigmaZ)?.scale_real(params.omega_0 / 2.0))
}

/// Lab-frame Hamiltonian of the three-level atom, both resonators and the
/// classical drive, with identical couplings on the g-e and e-f transitions.
/// The drive `2 Omega cos(omega_d t)` is written as
/// `Omega e^{-i omega_d t} + Omega* e^{i omega_d t}` so complex `Omega` stays Hermitian.
pub fn build_h_full(params: &ModelParams, spec: &HilbertSpec) -> Result<TimeDependentOperator> {
    require_levels(spec, 3)?;
    let derived = derive(params)?;
    let ops = Ops::new(spec)?;
    let x_atom = qubit_op(spec, AtomOp::SigmaGe)?
        .add(&qubit_op(spec, AtomOp::SigmaEg)?)?
        .add(&qubit_op(spec, AtomOp::SigmaEf)?)?
        .add(&qubit_op(spec, AtomOp::SigmaFe)?)?
        .hermitian();
    let h0 = bare(spec, params, &derived, &ops)?
        .add(&qubit_op(spec, AtomOp::SigmaFf)?.scale_real(params.omega_0 / 2.0 + params.omega_ef))?;
    let field = ops.a.scale(params.g_a).plus_adjoint().add(&ops.b.scale(params.g_b).plus_adjoint())?;
    let coupling = field.multiply(&x_atom)?;

    let mut h = TimeDependentOperator::constant(h0.add(&coupling)?.hermitian());
    h.push(Coefficient::Rotating { amp: params.omega_drive, freq: params.omega_d }, x_atom.clone())?;
    h.push(Coefficient::Rotating { amp: params.omega_drive.conj(), freq: -params.omega_d }, x_atom)?;
    Ok(h)
}

/// Two-level, rotating-wave Hamiltonian `H_0 + H_I(t)`.
pub fn build_h_rwa(params: &ModelParams, spec: &HilbertSpec) -> Result<TimeDependentOperator> {
    require_levels(spec, 2)?;
    let derived = derive(params)?;
    let ops = Ops::new(spec)?;
    let seg = qubit_op(spec, AtomOp::SigmaEg)?;
    let jc = ops.a.scale(params.g_a).add(&ops.b.scale(params.g_b))?.multiply(&seg)?.plus_adjoint();
    let mut h = TimeDependentOperator::constant(bare(spec, params, &derived, &ops)?.add(&jc)?.hermitian());
    h.push_with_adjoint(Coefficient::Rotating { amp: params.omega_drive, freq: params.omega_d }, seg)?;
    Ok(h)
}

/// Interaction-picture Hamiltonian
/// `V_I(t) = (g_a e^{-i delta_a t} a + g_b e^{-i delta_b t} b + Omega) sigma_eg + H.c.`
pub fn build_v_i(params: &ModelParams, derived: &DerivedParams, spec: &HilbertSpec) -> Result<TimeDependentOperator> {
    require_levels(spec, 2)?;
    let ops = Ops::new(spec)?;
    let seg = qubit_op(spec, AtomOp::SigmaEg)?;
    let mut h = TimeDependentOperator::constant(seg.scale(params.omega_drive).plus_adjoint());
    h.push_with_adjoint(Coefficient::Rotating { amp: params.g_a, freq: derived.delta_a }, ops.a.multiply(&seg)?)?;
    h.push_with_adjoint(Coefficient::Rotating { amp: params.g_b, freq: derived.delta_b }, ops.b.multiply(&seg)?)?;
    Ok(h)
}

/// Dispersive effective Hamiltonian in the dressed qubit basis `|+->`.
pub fn build_h_eff(derived: &DerivedParams, spec: &HilbertSpec) -> Result<TimeDependentOperator> {
    require_levels(spec, 2)?;
    let ops = Ops::new(spec)?;
    let pp = qubit_op(spec, AtomOp::ProjPlus)?;
    let pm = qubit_op(spec, AtomOp::ProjMinus)?;
    // a a† = a†a + 1 only away from the top Fock level, so build it directly
    let aad = ops.a.multiply(&ops.a.adjoint())?;
    let bbd = ops.b.multiply(&ops.b.adjoint())?;
    let plus = aad.scale_real(derived.chi_a).add(&ops.nb.scale_real(derived.chi_b))?.multiply(&pp)?;
    let minus = ops.na.scale_real(derived.chi_a).add(&bbd.scale_real(derived.chi_b))?.multiply(&pm)?;
    let stark = plus.sub(&minus)?.hermitian();
    let pair = ops.a.multiply(&ops.b)?.multiply(&pm.sub(&pp)?)?;
    let mut h = TimeDependentOperator::constant(stark);
    // e^{i delta t} = e^{-i (-delta) t}
    h.push_with_adjoint(Coefficient::Rotating { amp: derived.lambda, freq: -derived.delta }, pair)?;
    Ok(h)
}

/// Ideal squeezing generator `lambda ab + lambda* a†b†` on the modes of `spec`.
pub fn build_h_minus(derived: &DerivedParams, spec: &HilbertSpec) -> Result<OperatorMatrix> {
    let a = mode_op(spec, MODE_A)?;
    let b = mode_op(spec, MODE_B)?;
    Ok(a.multiply(&b)?.scale(derived.lambda).plus_adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }
    use crate::model::ModelParams;

    fn fig2b() -> (ModelParams, DerivedParams) {
        let p = ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 2500.0);
        let d = derive(&p).unwrap();
        (p, d)
    }

    #[test]
    fn full_hamiltonian_elements() {
        let (mut p, _) = fig2b();
        p.qubit_levels = 3;
        let spec = HilbertSpec::qubit_two_modes(3, 3, 3).unwrap();
        let h = build_h_full(&p, &spec).unwrap();
        let h0 = h.at(0.0);
        assert!((h0.element(&[1, 0, 0], &[0, 0, 0]) - c(2.0 * 50.0)).norm() < 1e-12);
        assert!((h0.element(&[1, 0, 0], &[0, 1, 0]) - c(1.0)).norm() < 1e-12);
        for t in [0.0, 0.013, 1.7, 12.345] {
            assert!(h.at(t).max_antihermitian() <= 1e-12);
        }
        let rwa_spec = HilbertSpec::qubit_two_modes(2, 3, 3).unwrap();
        assert!(matches!(build_h_full(&p, &rwa_spec), Err(Error::LevelMismatch(_))));
    }

    #[test]
    fn full_hamiltonian_without_couplings_is_diagonal() {
        let mut p = ModelParams::symmetric(0.0, 90.0, 0.0, 500.0, 2500.0);
        p.qubit_levels = 3;
        let spec = HilbertSpec::qubit_two_modes(3, 3, 3).unwrap();
        let h = build_h_full(&p, &spec).unwrap().at(0.0);
        assert!(h.data().iter().all(|(r, col, _)| r == col));
        let d = derive(&p).unwrap();
        let ef = h.element(&[2, 1, 2], &[2, 1, 2]).re;
        assert!((ef - (500.0 / 2.0 + 2500.0 + d.omega_a + 2.0 * d.omega_b)).abs() < 1e-9);
        let g = h.element(&[0, 0, 0], &[0, 0, 0]).re;
        assert!((g + 250.0).abs() < 1e-12);
    }

    #[test]
    fn rwa_hamiltonian_elements() {
        let (p, _) = fig2b();
        let spec = HilbertSpec::qubit_two_modes(2, 3, 3).unwrap();
        let h = build_h_rwa(&p, &spec).unwrap();
        assert!((h.at(0.0).element(&[1, 0, 0], &[0, 0, 0]) - c(50.0)).norm() < 1e-12);
        for t in [0.0, 0.4, 3.3] {
            let ht = h.at(t);
            assert!((ht.element(&[1, 0, 0], &[0, 1, 0]) - c(1.0)).norm() < 1e-12);
            assert!(ht.max_antihermitian() <= 1e-12);
        }
        let full = HilbertSpec::qubit_two_modes(3, 3, 3).unwrap();
        assert!(matches!(build_h_rwa(&p, &full), Err(Error::LevelMismatch(_))));
    }

    #[test]
    fn rwa_without_drive_conserves_excitations() {
        let (mut p, _) = fig2b();
        p.omega_drive = c(0.0);
        let spec = HilbertSpec::qubit_two_modes(2, 4, 4).unwrap();
        let h = build_h_rwa(&p, &spec).unwrap().at(0.7);
        let ops = Ops::new(&spec).unwrap();
        let excitations = ops
            .na
            .add(&ops.nb)
            .unwrap()
            .add(&qubit_op(&spec, AtomOp::SigmaEe).unwrap())
            .unwrap();
        assert!(h.commutator(&excitations).unwrap().data().max_abs() < 1e-12);
    }

    #[test]
    fn interaction_picture_elements() {
        let (p, d) = fig2b();
        let spec = HilbertSpec::qubit_two_modes(2, 3, 3).unwrap();
        let v = build_v_i(&p, &d, &spec).unwrap();
        let v0 = v.at(0.0);
        assert!((v0.element(&[1, 0, 0], &[0, 0, 0]) - c(50.0)).norm() < 1e-12);
        assert!((v0.element(&[1, 0, 0], &[0, 1, 0]) - c(1.0)).norm() < 1e-12);
        for t in [0.0, 0.21, 4.0, 17.5] {
            let vt = v.at(t);
            let expected = Complex64::from_polar(1.0, -d.delta_a * t);
            assert!((vt.element(&[1, 0, 0], &[0, 1, 0]) - expected).norm() < 1e-12);
            assert!(vt.max_antihermitian() <= 1e-12);
        }
    }

    #[test]
    fn effective_hamiltonian_elements() {
        let (_, d) = fig2b();
        let spec = HilbertSpec::qubit_two_modes(2, 3, 3).unwrap();
        let h = build_h_eff(&d, &spec).unwrap();
        // dressed basis vectors |-,n_a,n_b>
        let minus = |na: usize, nb: usize| {
            let mut v = vec![c(0.0); spec.total_dim()];
            v[spec.flat_index(&[0, na, nb])] = c(1.0 / 2f64.sqrt());
            v[spec.flat_index(&[1, na, nb])] = c(-1.0 / 2f64.sqrt());
            v
        };
        let h0 = h.at(0.0);
        let mut hv = vec![c(0.0); spec.total_dim()];
        h0.data().matvec(&minus(0, 0), &mut hv);
        let elem: Complex64 = minus(1, 1).iter().zip(&hv).map(|(x, y)| x.conj() * y).sum();
        assert!((elem - d.lambda).norm() < 1e-14);
        for t in [0.0, 3.0, 40.0] {
            assert!(h.at(t).max_antihermitian() <= 1e-12);
        }
    }

    #[test]
    fn effective_hamiltonian_without_pair_term_is_stark_only() {
        let mut p = ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 2500.0);
        p.g_b = c(0.0);
        let d = derive(&p).unwrap();
        let spec = HilbertSpec::qubit_two_modes(2, 4, 4).unwrap();
        let h = build_h_eff(&d, &spec).unwrap().at(1.3);
        let na = Ops::new(&spec).unwrap().na;
        assert!(h.commutator(&na).unwrap().data().max_abs() < 1e-15);
    }

    #[test]
    fn squeezing_generator_elements() {
        let (_, d) = fig2b();
        let spec = HilbertSpec::two_modes(4, 4).unwrap();
        let h = build_h_minus(&d, &spec).unwrap();
        assert!((h.element(&[0, 0], &[1, 1]) - d.lambda).norm() < 1e-15);
        let col: Vec<_> = h.data().iter().filter(|(_, col, _)| *col == 0).collect();
        assert_eq!(col.len(), 1);
        assert_eq!(col[0].0, spec.flat_index(&[1, 1]));
        assert!(h.data().iter().all(|(r, col, v)| v.im == 0.0 && h.get(col, r) == v));
    }
}
