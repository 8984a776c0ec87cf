use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use super::space::{HilbertSpec, QUBIT};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Sparse operator bound to a [`HilbertSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    spec: HilbertSpec,
    data: CsrMatrix,
    hermitian_hint: bool,
}

/// Single-atom operators in the basis `(|g>, |e>, [|f>])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomOp {
    SigmaZ,
    SigmaEg,
    SigmaGe,
    SigmaEe,
    SigmaFf,
    SigmaEf,
    SigmaFe,
    /// `|g><e|`, the lowering operator.
    SigmaMinus,
    ProjPlus,
    ProjMinus,
}

impl OperatorMatrix {
    pub fn new(spec: HilbertSpec, data: CsrMatrix) -> Result<Self> {
        if data.dim() != spec.total_dim() {
            return Err(Error::DimensionMismatch { expected: spec.total_dim(), got: data.dim() });
        }
        Ok(OperatorMatrix { spec, data, hermitian_hint: false })
    }

    /// Marks the operator Hermitian after checking `max |M - M†| <= 1e-12`.
    pub fn hermitian(mut self) -> Self {
        let dev = self.data.max_antihermitian();
        assert!(dev <= HERMITIAN_TOL, "operator flagged Hermitian deviates by {dev:e}");
        self.hermitian_hint = true;
        self
    }

    pub fn identity(spec: &HilbertSpec) -> Self {
        OperatorMatrix { spec: spec.clone(), data: CsrMatrix::identity(spec.total_dim()), hermitian_hint: true }
    }

    pub fn zeros(spec: &HilbertSpec) -> Self {
        OperatorMatrix { spec: spec.clone(), data: CsrMatrix::zeros(spec.total_dim()), hermitian_hint: true }
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn data(&self) -> &CsrMatrix {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn is_hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data.get(r, c)
    }

    /// Matrix element between flattened basis states given as per-subsystem digits.
    pub fn element(&self, row: &[usize], col: &[usize]) -> Complex64 {
        self.data.get(self.spec.flat_index(row), self.spec.flat_index(col))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::IncompatibleSpaces(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(OperatorMatrix {
            spec: self.spec.clone(),
            data: self.data.add(&other.data),
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        OperatorMatrix {
            spec: self.spec.clone(),
            data: self.data.scale(s),
            hermitian_hint: self.hermitian_hint && s.im == 0.0,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { spec: self.spec.clone(), data: self.data.adjoint(), hermitian_hint: self.hermitian_hint }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(OperatorMatrix { spec: self.spec.clone(), data: self.data.mul(&other.data), hermitian_hint: false })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// `A + A†`
    pub fn plus_adjoint(&self) -> Self {
        let data = self.data.add(&self.data.adjoint());
        OperatorMatrix { spec: self.spec.clone(), data, hermitian_hint: true }
    }

    /// Tensor product; labels of the two specs must be distinct.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(OperatorMatrix {
            spec: self.spec.concat(&other.spec)?,
            data: self.data.kron(&other.data),
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    pub fn max_antihermitian(&self) -> f64 {
        self.data.max_antihermitian()
    }
}

/// Bosonic annihilation operator on a mode truncated to `dim` Fock levels.
pub fn annihilation_op(dim: usize) -> Result<OperatorMatrix> {
    let spec = HilbertSpec::single("mode", dim)?;
    let data = CsrMatrix::from_triplets(
        dim,
        (1..dim).map(|n| (n - 1, n, Complex64::new((n as f64).sqrt(), 0.0))),
    );
    OperatorMatrix::new(spec, data)
}

pub fn number_op(dim: usize) -> Result<OperatorMatrix> {
    let spec = HilbertSpec::single("mode", dim)?;
    let data = CsrMatrix::from_triplets(dim, (0..dim).map(|n| (n, n, Complex64::new(n as f64, 0.0))));
    Ok(OperatorMatrix::new(spec, data)?.hermitian())
}

pub fn atom_op(levels: usize, kind: AtomOp) -> Result<OperatorMatrix> {
    if !(2..=3).contains(&levels) {
        return Err(Error::LevelMismatch(format!("atom must have 2 or 3 levels, got {levels}")));
    }
    let (g, e, f) = (0usize, 1usize, 2usize);
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let needs_f = matches!(kind, AtomOp::SigmaFf | AtomOp::SigmaEf | AtomOp::SigmaFe);
    if needs_f && levels < 3 {
        return Err(Error::LevelMismatch(format!("{kind:?} needs the |f> level")));
    }
    let trips: Vec<(usize, usize, Complex64)> = match kind {
        AtomOp::SigmaZ => vec![(e, e, one), (g, g, -one)],
        AtomOp::SigmaEg => vec![(e, g, one)],
        AtomOp::SigmaGe | AtomOp::SigmaMinus => vec![(g, e, one)],
        AtomOp::SigmaEe => vec![(e, e, one)],
        AtomOp::SigmaFf => vec![(f, f, one)],
        AtomOp::SigmaEf => vec![(e, f, one)],
        AtomOp::SigmaFe => vec![(f, e, one)],
        AtomOp::ProjPlus => vec![(g, g, half), (g, e, half), (e, g, half), (e, e, half)],
        AtomOp::ProjMinus => vec![(g, g, half), (g, e, -half), (e, g, -half), (e, e, half)],
    };
    let op = OperatorMatrix::new(HilbertSpec::single(QUBIT, levels)?, CsrMatrix::from_triplets(levels, trips))?;
    Ok(match kind {
        AtomOp::SigmaZ | AtomOp::SigmaEe | AtomOp::SigmaFf | AtomOp::ProjPlus | AtomOp::ProjMinus => op.hermitian(),
        _ => op,
    })
}

/// Places a single-subsystem operator on `target`, identity elsewhere.
pub fn embed(op: &OperatorMatrix, spec: &HilbertSpec, target: &str) -> Result<OperatorMatrix> {
    if op.spec().subsystems().len() != 1 {
        return Err(Error::IncompatibleSpaces("embed expects a single-subsystem operator".into()));
    }
    let pos = spec.position(target)?;
    let d = spec.subsystems()[pos].dim;
    if op.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: op.dim() });
    }
    let left: usize = spec.subsystems()[..pos].iter().map(|s| s.dim).product();
    let right: usize = spec.subsystems()[pos + 1..].iter().map(|s| s.dim).product();
    let mut trips = Vec::with_capacity(op.data().nnz() * left * right);
    for l in 0..left {
        for (r, c, v) in op.data().iter() {
            let row0 = (l * d + r) * right;
            let col0 = (l * d + c) * right;
            for q in 0..right {
                trips.push((row0 + q, col0 + q, v));
            }
        }
    }
    Ok(OperatorMatrix {
        spec: spec.clone(),
        data: CsrMatrix::from_triplets(spec.total_dim(), trips),
        hermitian_hint: op.hermitian_hint,
    })
}

/// Annihilation operator of mode `label` embedded in `spec`.
pub fn mode_op(spec: &HilbertSpec, label: &str) -> Result<OperatorMatrix> {
    embed(&annihilation_op(spec.dim_of(label)?)?, spec, label)
}

/// Atom operator embedded on the `qubit` subsystem of `spec`.
pub fn qubit_op(spec: &HilbertSpec, kind: AtomOp) -> Result<OperatorMatrix> {
    embed(&atom_op(spec.dim_of(QUBIT)?, kind)?, spec, QUBIT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{MODE_A, MODE_B};

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn annihilation_entries() {
        let a = annihilation_op(3).unwrap();
        let nz: Vec<_> = a.data().iter().collect();
        assert_eq!(nz, vec![(0, 1, re(1.0)), (1, 2, re(2f64.sqrt()))]);
        let a2 = annihilation_op(2).unwrap();
        assert_eq!(a2.data().iter().collect::<Vec<_>>(), vec![(0, 1, re(1.0))]);
        assert_eq!(annihilation_op(1), Err(Error::InvalidDimension(1)));
    }

    #[test]
    fn atom_operator_definitions() {
        let sz = atom_op(2, AtomOp::SigmaZ).unwrap().data().to_dense();
        assert_eq!(sz[(0, 0)], re(-1.0));
        assert_eq!(sz[(1, 1)], re(1.0));
        let sef = atom_op(3, AtomOp::SigmaEf).unwrap();
        assert_eq!(sef.data().iter().collect::<Vec<_>>(), vec![(1, 2, re(1.0))]);
        let pm = atom_op(2, AtomOp::ProjMinus).unwrap().data().to_dense();
        assert_eq!(pm[(0, 0)], re(0.5));
        assert_eq!(pm[(0, 1)], re(-0.5));
        assert_eq!(pm[(1, 0)], re(-0.5));
        assert_eq!(pm[(1, 1)], re(0.5));
        assert!(matches!(atom_op(2, AtomOp::SigmaFf), Err(Error::LevelMismatch(_))));
    }

    #[test]
    fn embed_dimensions_and_identity() {
        let spec = HilbertSpec::qubit_two_modes(2, 3, 3).unwrap();
        let a = embed(&annihilation_op(3).unwrap(), &spec, MODE_A).unwrap();
        assert_eq!(a.dim(), 18);
        let id = OperatorMatrix::identity(&HilbertSpec::single("mode", 3).unwrap());
        assert_eq!(embed(&id, &spec, MODE_B).unwrap().data(), &CsrMatrix::identity(18));
        let b = mode_op(&spec, MODE_B).unwrap();
        assert_eq!(a.commutator(&b).unwrap().data().nnz(), 0);
        assert!(matches!(embed(&annihilation_op(4).unwrap(), &spec, MODE_A), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(embed(&annihilation_op(3).unwrap(), &spec, "c"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn canonical_commutator_off_top_level() {
        let n = 6;
        let a = annihilation_op(n).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap().data().to_dense();
        for i in 0..n - 1 {
            assert!((comm[(i, i)] - re(1.0)).norm() < 1e-14);
        }
        // truncation artifact: the top Fock row gives 1 - n instead of 1
        assert!((comm[(n - 1, n - 1)] - re(1.0 - n as f64)).norm() < 1e-14);
    }

    #[test]
    fn incompatible_specs_are_rejected() {
        let s1 = HilbertSpec::two_modes(3, 3).unwrap();
        let s2 = HilbertSpec::two_modes(3, 4).unwrap();
        let a = mode_op(&s1, MODE_A).unwrap();
        let b = mode_op(&s2, MODE_A).unwrap();
        assert!(matches!(a.add(&b), Err(Error::IncompatibleSpaces(_))));
    }
}
