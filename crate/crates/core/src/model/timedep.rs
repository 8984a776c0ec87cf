use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{HilbertSpec, OperatorMatrix};

/// Scalar prefactor of one Hamiltonian term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Constant(Complex64),
    /// `amp * exp(-i freq t)`
    Rotating { amp: Complex64, freq: f64 },
    /// `amp * cos(freq t)`
    Cosine { amp: Complex64, freq: f64 },
}

impl Coefficient {
    pub fn at(&self, t: f64) -> Complex64 {
        match *self {
            Coefficient::Constant(c) => c,
            Coefficient::Rotating { amp, freq } => amp * Complex64::from_polar(1.0, -freq * t),
            Coefficient::Cosine { amp, freq } => amp * (freq * t).cos(),
        }
    }

    /// Fastest angular frequency present in the coefficient.
    pub fn frequency(&self) -> f64 {
        match *self {
            Coefficient::Constant(_) => 0.0,
            Coefficient::Rotating { freq, .. } | Coefficient::Cosine { freq, .. } => freq.abs(),
        }
    }

    pub fn magnitude(&self) -> f64 {
        match *self {
            Coefficient::Constant(c) => c.norm(),
            Coefficient::Rotating { amp, .. } | Coefficient::Cosine { amp, .. } => amp.norm(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Constant(_))
    }
}

/// `H(t) = sum_k c_k(t) H_k` with fixed sparse parts.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDependentOperator {
    spec: HilbertSpec,
    terms: Vec<(Coefficient, OperatorMatrix)>,
}

impl TimeDependentOperator {
    pub fn new(spec: &HilbertSpec) -> Self {
        TimeDependentOperator { spec: spec.clone(), terms: Vec::new() }
    }

    pub fn constant(op: OperatorMatrix) -> Self {
        let spec = op.spec().clone();
        TimeDependentOperator { spec, terms: vec![(Coefficient::Constant(Complex64::new(1.0, 0.0)), op)] }
    }

    pub fn with_term(mut self, coeff: Coefficient, op: OperatorMatrix) -> Result<Self> {
        self.push(coeff, op)?;
        Ok(self)
    }

    pub fn push(&mut self, coeff: Coefficient, op: OperatorMatrix) -> Result<()> {
        if op.spec() != &self.spec {
            return Err(Error::IncompatibleSpaces(format!("{:?} vs {:?}", op.spec(), self.spec)));
        }
        if op.data().nnz() > 0 {
            self.terms.push((coeff, op));
        }
        Ok(())
    }

    /// Adds `c A + c* A†` (with the conjugate frequency for rotating terms).
    pub fn push_with_adjoint(&mut self, coeff: Coefficient, op: OperatorMatrix) -> Result<()> {
        let conj = match coeff {
            Coefficient::Constant(c) => Coefficient::Constant(c.conj()),
            Coefficient::Rotating { amp, freq } => Coefficient::Rotating { amp: amp.conj(), freq: -freq },
            Coefficient::Cosine { amp, freq } => Coefficient::Cosine { amp: amp.conj(), freq },
        };
        let adj = op.adjoint();
        self.push(coeff, op)?;
        self.push(conj, adj)
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn terms(&self) -> &[(Coefficient, OperatorMatrix)] {
        &self.terms
    }

    pub fn is_time_independent(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.is_constant())
    }

    /// Snapshot of the operator at time `t`.
    pub fn at(&self, t: f64) -> OperatorMatrix {
        self.terms
            .iter()
            .fold(OperatorMatrix::zeros(&self.spec), |acc, (c, op)| {
                acc.add(&op.scale(c.at(t))).expect("terms share the spec")
            })
    }

    /// Adds a constant operator (e.g. an anti-Hermitian damping term).
    pub fn plus_constant(&self, op: OperatorMatrix) -> Result<Self> {
        let mut out = self.clone();
        out.push(Coefficient::Constant(Complex64::new(1.0, 0.0)), op)?;
        Ok(out)
    }
}
