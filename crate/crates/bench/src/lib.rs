//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use tmsq_core::fockspace::{HilbertSpec, KetState};
use tmsq_core::model::{build_h_minus, build_v_i, derive, ModelParams, TimeDependentOperator};

/// Drive and couplings with `lambda = g/40`.
pub fn params() -> ModelParams {
    ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 2500.0)
}

/// `V_I` on a two-level qubit and `n` Fock levels per mode.
pub fn v_i(n: usize) -> TimeDependentOperator {
    let p = params();
    let spec = HilbertSpec::qubit_two_modes(2, n, n).expect("valid truncation");
    build_v_i(&p, &derive(&p).expect("nondegenerate"), &spec).expect("two-level spec")
}

/// `H_-` on `n` Fock levels per mode.
pub fn h_minus(n: usize) -> TimeDependentOperator {
    let spec = HilbertSpec::two_modes(n, n).expect("valid truncation");
    let d = derive(&params()).expect("nondegenerate");
    TimeDependentOperator::constant(build_h_minus(&d, &spec).expect("two modes"))
}

/// Normalized state with every amplitude nonzero.
pub fn spread_state(spec: &HilbertSpec) -> KetState {
    let amps = (0..spec.total_dim()).map(|i| Complex64::new(1.0, (i % 7) as f64 * 0.1)).collect();
    KetState::new(spec.clone(), amps).expect("matching length").normalized()
}
