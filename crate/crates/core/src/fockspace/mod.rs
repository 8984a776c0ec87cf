//! Truncated Fock-space and few-level-atom operator algebra.
//!
//! Basis ordering is fixed as `(qubit, a, b)` with the qubit as the slowest
//! index. Mode truncation `N` means Fock levels `0..N`, so the ladder operator
//! obeys `[a, a†] = 1` everywhere except on the top level `N - 1`.

mod operator;
mod space;
mod sparse;
mod state;

pub use operator::{annihilation_op, atom_op, embed, mode_op, number_op, qubit_op, AtomOp, OperatorMatrix};
pub use space::{HilbertSpec, Subsystem, MODE_A, MODE_B, QUBIT};
pub use sparse::CsrMatrix;
pub use state::{
    apply, expectation, expectation_real, expectation_rho, partial_trace, partial_trace_ket, DensityOperator,
    KetState,
};

use num_complex::Complex64;

use crate::error::Result;

/// Population of the top two Fock levels of `mode` in a pure state.
pub fn top_level_population(psi: &[Complex64], spec: &HilbertSpec, mode: &str) -> Result<f64> {
    let pos = spec.position(mode)?;
    let dim = spec.subsystems()[pos].dim;
    let stride = spec.strides()[pos];
    Ok(psi
        .iter()
        .enumerate()
        .filter(|(i, _)| (i / stride) % dim + 2 >= dim)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}
