use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::operator::OperatorMatrix;
use super::space::HilbertSpec;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pure state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct KetState {
    spec: HilbertSpec,
    amplitudes: Vec<Complex64>,
}

impl KetState {
    pub fn new(spec: HilbertSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != spec.total_dim() {
            return Err(Error::DimensionMismatch { expected: spec.total_dim(), got: amplitudes.len() });
        }
        Ok(KetState { spec, amplitudes })
    }

    /// Product basis state; `digits` follows the subsystem order of `spec`.
    pub fn basis(spec: &HilbertSpec, digits: &[usize]) -> Result<Self> {
        if digits.len() != spec.subsystems().len() {
            return Err(Error::DimensionMismatch { expected: spec.subsystems().len(), got: digits.len() });
        }
        for (d, s) in digits.iter().zip(spec.subsystems()) {
            if *d >= s.dim {
                return Err(Error::DimensionMismatch { expected: s.dim, got: *d + 1 });
            }
        }
        let mut amps = vec![ZERO; spec.total_dim()];
        amps[spec.flat_index(digits)] = ONE;
        Ok(KetState { spec: spec.clone(), amplitudes: amps })
    }

    /// Tensor product of single-subsystem factors in the order given.
    pub fn product(factors: &[KetState]) -> Result<Self> {
        let mut it = factors.iter();
        let first = it.next().ok_or(Error::InvalidDimension(0))?.clone();
        it.try_fold(first, |acc, f| {
            let spec = acc.spec.concat(&f.spec)?;
            let amps = acc
                .amplitudes
                .iter()
                .flat_map(|x| f.amplitudes.iter().map(move |y| x * y))
                .collect();
            KetState::new(spec, amps)
        })
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-6
    }

    /// `<self|other>`
    pub fn inner(&self, other: &KetState) -> Result<Complex64> {
        check_spec(&self.spec, &other.spec)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2` for normalized states.
    pub fn fidelity(&self, other: &KetState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    pub fn to_density(&self) -> DensityOperator {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        let m = &v * v.adjoint() / Complex64::new(self.norm_sqr(), 0.0);
        DensityOperator { spec: self.spec.clone(), matrix: m }
    }
}

/// Dense density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    spec: HilbertSpec,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn new(spec: HilbertSpec, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = spec.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows() });
        }
        Ok(DensityOperator { spec, matrix })
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn max_antihermitian(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Replaces the matrix with its Hermitian part.
    pub fn symmetrize(&mut self) {
        let adj = self.matrix.adjoint();
        self.matrix = (&self.matrix + adj) * Complex64::new(0.5, 0.0);
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut h = self.clone();
        h.symmetrize();
        SymmetricEigen::new(h.matrix).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Checks Hermiticity (1e-10), unit trace (1e-8) and positivity (-1e-8).
    pub fn validate(&self) -> Result<()> {
        let herm = self.max_antihermitian();
        if herm > 1e-10 {
            return Err(Error::IntegratorFailure(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > 1e-8 {
            return Err(Error::IntegratorFailure(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::IntegratorFailure(format!("density matrix eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn fidelity_with_pure(&self, psi: &KetState) -> Result<f64> {
        check_spec(&self.spec, psi.spec())?;
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re / psi.norm_sqr())
    }
}

fn check_spec(a: &HilbertSpec, b: &HilbertSpec) -> Result<()> {
    if a != b {
        return Err(Error::IncompatibleSpaces(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

pub fn apply(op: &OperatorMatrix, state: &KetState) -> Result<KetState> {
    check_spec(op.spec(), state.spec())?;
    let mut out = vec![ZERO; state.amplitudes.len()];
    op.data().matvec(&state.amplitudes, &mut out);
    KetState::new(state.spec.clone(), out)
}

/// `<psi|A|psi> / <psi|psi>`
pub fn expectation(op: &OperatorMatrix, state: &KetState) -> Result<Complex64> {
    check_spec(op.spec(), state.spec())?;
    Ok(expect_raw(op, state.amplitudes()) / state.norm_sqr())
}

/// Unnormalized `<psi|A|psi>` on raw amplitudes.
pub(crate) fn expect_raw(op: &OperatorMatrix, psi: &[Complex64]) -> Complex64 {
    let m = op.data();
    let mut acc = ZERO;
    for (r, pr) in psi.iter().enumerate() {
        let mut row = ZERO;
        for (c, v) in m.row(r) {
            row += v * psi[c];
        }
        acc += pr.conj() * row;
    }
    acc
}

/// `Tr(A rho)`
pub fn expectation_rho(op: &OperatorMatrix, rho: &DensityOperator) -> Result<Complex64> {
    check_spec(op.spec(), rho.spec())?;
    Ok(op.data().iter().map(|(r, c, v)| v * rho.matrix[(c, r)]).sum())
}

/// Real expectation value of a Hermitian operator.
pub fn expectation_real(op: &OperatorMatrix, state: &KetState) -> Result<f64> {
    let v = expectation(op, state)?;
    debug_assert!(!op.is_hermitian_hint() || v.im.abs() <= 1e-10 * v.re.abs().max(1.0));
    Ok(v.re)
}

struct TraceLayout {
    kept_spec: HilbertSpec,
    kept_of: Vec<usize>,
    traced_of: Vec<usize>,
    n_traced: usize,
}

fn layout(spec: &HilbertSpec, keep: &[&str]) -> Result<TraceLayout> {
    let kept_spec = spec.restrict(keep)?;
    let kept_mask: Vec<bool> = spec.subsystems().iter().map(|s| keep.contains(&s.label.as_str())).collect();
    let traced_dims: Vec<usize> = spec
        .subsystems()
        .iter()
        .zip(&kept_mask)
        .filter(|(_, k)| !**k)
        .map(|(s, _)| s.dim)
        .collect();
    let n_traced: usize = traced_dims.iter().product();
    let mut kept_of = Vec::with_capacity(spec.total_dim());
    let mut traced_of = Vec::with_capacity(spec.total_dim());
    for i in 0..spec.total_dim() {
        let digits = spec.digits(i);
        let (mut k, mut t) = (0usize, 0usize);
        for ((d, s), keep) in digits.iter().zip(spec.subsystems()).zip(&kept_mask) {
            if *keep {
                k = k * s.dim + d;
            } else {
                t = t * s.dim + d;
            }
        }
        kept_of.push(k);
        traced_of.push(t);
    }
    Ok(TraceLayout { kept_spec, kept_of, traced_of, n_traced })
}

/// Reduced density matrix of a pure state on the subsystems in `keep`.
pub fn partial_trace_ket(psi: &KetState, keep: &[&str]) -> Result<DensityOperator> {
    let lay = layout(psi.spec(), keep)?;
    let dk = lay.kept_spec.total_dim();
    let mut m = DMatrix::<Complex64>::zeros(dk, lay.n_traced);
    for (i, a) in psi.amplitudes().iter().enumerate() {
        m[(lay.kept_of[i], lay.traced_of[i])] = *a;
    }
    let rho = &m * m.adjoint() / Complex64::new(psi.norm_sqr(), 0.0);
    DensityOperator::new(lay.kept_spec, rho)
}

pub fn partial_trace(rho: &DensityOperator, keep: &[&str]) -> Result<DensityOperator> {
    let lay = layout(rho.spec(), keep)?;
    let dk = lay.kept_spec.total_dim();
    let d = rho.spec().total_dim();
    let mut out = DMatrix::<Complex64>::zeros(dk, dk);
    for i in 0..d {
        for j in 0..d {
            if lay.traced_of[i] == lay.traced_of[j] {
                out[(lay.kept_of[i], lay.kept_of[j])] += rho.matrix[(i, j)];
            }
        }
    }
    DensityOperator::new(lay.kept_spec, out)
}
