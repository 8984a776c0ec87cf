use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{DensityOperator, HilbertSpec, KetState, MODE_A, MODE_B, QUBIT};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// First and second moments of the two modes that determine the EPR variance.
///
/// `aa_dag` and `bb_dag` are expectations of the truncated products `a a†`
/// and `b b†`, which differ from `a†a + 1` on the top Fock level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeMoments {
    pub a: Complex64,
    pub b: Complex64,
    pub ab: Complex64,
    pub n_a: f64,
    pub n_b: f64,
    pub aa_dag: f64,
    pub bb_dag: f64,
}

/// Number of reals in [`ModeMoments::to_reals`].
pub const MOMENT_REALS: usize = 10;

impl ModeMoments {
    /// Flattened form suitable for averaging over trajectories.
    pub fn to_reals(&self) -> [f64; MOMENT_REALS] {
        [self.a.re, self.a.im, self.b.re, self.b.im, self.ab.re, self.ab.im, self.n_a, self.n_b, self.aa_dag, self.bb_dag]
    }

    pub fn from_reals(x: &[f64]) -> Self {
        ModeMoments {
            a: Complex64::new(x[0], x[1]),
            b: Complex64::new(x[2], x[3]),
            ab: Complex64::new(x[4], x[5]),
            n_a: x[6],
            n_b: x[7],
            aa_dag: x[8],
            bb_dag: x[9],
        }
    }

    /// `(c0, c2)` with `V_ar(theta) = c0 + 2 Re(c2 exp(-2 i theta))`.
    pub fn variance_coefficients(&self) -> (f64, Complex64) {
        let c0 = self.aa_dag + self.n_a + self.bb_dag + self.n_b - 2.0 * self.a.norm_sqr() - 2.0 * self.b.norm_sqr();
        let c2 = 2.0 * (self.ab - self.a * self.b);
        (c0, c2)
    }

    pub fn epr_variance(&self, theta: f64) -> f64 {
        let (c0, c2) = self.variance_coefficients();
        c0 + 2.0 * (c2 * Complex64::from_polar(1.0, -2.0 * theta)).re
    }
}

/// States whose two-mode moments can be evaluated. Other subsystems are
/// traced out implicitly.
pub trait MomentSource {
    fn spec(&self) -> &HilbertSpec;
    fn moments(&self) -> Result<ModeMoments>;
}

struct Layout {
    dim: usize,
    na: usize,
    nb: usize,
    sa: usize,
    sb: usize,
}

impl Layout {
    fn new(spec: &HilbertSpec) -> Result<Self> {
        if !(spec.has(MODE_A) && spec.has(MODE_B)) {
            return Err(Error::IncompatibleSpaces("EPR moments need modes `a` and `b`".into()));
        }
        let strides = spec.strides();
        Ok(Layout {
            dim: spec.total_dim(),
            na: spec.dim_of(MODE_A)?,
            nb: spec.dim_of(MODE_B)?,
            sa: strides[spec.position(MODE_A)?],
            sb: strides[spec.position(MODE_B)?],
        })
    }

    fn digits(&self, i: usize) -> (usize, usize) {
        ((i / self.sa) % self.na, (i / self.sb) % self.nb)
    }
}

/// Moments of a pure state given by raw amplitudes, normalized by `<psi|psi>`.
pub fn moments_of_amplitudes(spec: &HilbertSpec, psi: &[Complex64]) -> Result<ModeMoments> {
    let l = Layout::new(spec)?;
    if psi.len() != l.dim {
        return Err(Error::DimensionMismatch { expected: l.dim, got: psi.len() });
    }
    let mut m = ModeMoments::default();
    let (mut a, mut b, mut ab) = (ZERO, ZERO, ZERO);
    let mut norm = 0.0;
    for (i, p) in psi.iter().enumerate() {
        let (ka, kb) = l.digits(i);
        let w = p.norm_sqr();
        norm += w;
        m.n_a += ka as f64 * w;
        m.n_b += kb as f64 * w;
        let up_a = ka + 1 < l.na;
        let up_b = kb + 1 < l.nb;
        if up_a {
            m.aa_dag += (ka + 1) as f64 * w;
            a += p.conj() * psi[i + l.sa] * ((ka + 1) as f64).sqrt();
        }
        if up_b {
            m.bb_dag += (kb + 1) as f64 * w;
            b += p.conj() * psi[i + l.sb] * ((kb + 1) as f64).sqrt();
        }
        if up_a && up_b {
            ab += p.conj() * psi[i + l.sa + l.sb] * (((ka + 1) * (kb + 1)) as f64).sqrt();
        }
    }
    let s = 1.0 / norm;
    m.a = a * s;
    m.b = b * s;
    m.ab = ab * s;
    m.n_a *= s;
    m.n_b *= s;
    m.aa_dag *= s;
    m.bb_dag *= s;
    Ok(m)
}

impl MomentSource for KetState {
    fn spec(&self) -> &HilbertSpec {
        KetState::spec(self)
    }

    fn moments(&self) -> Result<ModeMoments> {
        moments_of_amplitudes(self.spec(), self.amplitudes())
    }
}

impl MomentSource for DensityOperator {
    fn spec(&self) -> &HilbertSpec {
        DensityOperator::spec(self)
    }

    /// `Tr(O rho)` for each moment operator `O`.
    fn moments(&self) -> Result<ModeMoments> {
        let l = Layout::new(self.spec())?;
        let rho = self.matrix();
        let mut m = ModeMoments::default();
        let mut trace = 0.0;
        for i in 0..l.dim {
            let (ka, kb) = l.digits(i);
            let w = rho[(i, i)].re;
            trace += w;
            m.n_a += ka as f64 * w;
            m.n_b += kb as f64 * w;
            let up_a = ka + 1 < l.na;
            let up_b = kb + 1 < l.nb;
            if up_a {
                m.aa_dag += (ka + 1) as f64 * w;
                m.a += rho[(i + l.sa, i)] * ((ka + 1) as f64).sqrt();
            }
            if up_b {
                m.bb_dag += (kb + 1) as f64 * w;
                m.b += rho[(i + l.sb, i)] * ((kb + 1) as f64).sqrt();
            }
            if up_a && up_b {
                m.ab += rho[(i + l.sa + l.sb, i)] * (((ka + 1) * (kb + 1)) as f64).sqrt();
            }
        }
        let s = 1.0 / trace;
        m.a *= s;
        m.b *= s;
        m.ab *= s;
        m.n_a *= s;
        m.n_b *= s;
        m.aa_dag *= s;
        m.bb_dag *= s;
        Ok(m)
    }
}

/// Photon numbers, qubit populations and truncation leakage of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n_a: f64,
    pub n_b: f64,
    /// Populations of `|g>, |e>[, |f>]`; empty without a qubit.
    pub qubit_populations: Vec<f64>,
    /// `P_e - P_g`; absent without a qubit.
    pub sigma_z: Option<f64>,
    /// Population of the top two Fock levels of each mode.
    pub leak_a: f64,
    pub leak_b: f64,
}

/// Per-basis-state populations of a pure state or the diagonal of `rho`.
fn diagnostics_from_populations(spec: &HilbertSpec, pops: impl Iterator<Item = f64>) -> Result<Diagnostics> {
    let strides = spec.strides();
    let locate = |label: &str| -> Result<Option<(usize, usize)>> {
        if spec.has(label) {
            Ok(Some((strides[spec.position(label)?], spec.dim_of(label)?)))
        } else {
            Ok(None)
        }
    };
    let (qa, qb, qq) = (locate(MODE_A)?, locate(MODE_B)?, locate(QUBIT)?);
    let mut d = Diagnostics {
        n_a: 0.0,
        n_b: 0.0,
        qubit_populations: vec![0.0; qq.map_or(0, |q| q.1)],
        sigma_z: None,
        leak_a: 0.0,
        leak_b: 0.0,
    };
    let mut total = 0.0;
    for (i, w) in pops.enumerate() {
        total += w;
        if let Some((s, n)) = qa {
            let k = (i / s) % n;
            d.n_a += k as f64 * w;
            if k + 2 >= n {
                d.leak_a += w;
            }
        }
        if let Some((s, n)) = qb {
            let k = (i / s) % n;
            d.n_b += k as f64 * w;
            if k + 2 >= n {
                d.leak_b += w;
            }
        }
        if let Some((s, n)) = qq {
            d.qubit_populations[(i / s) % n] += w;
        }
    }
    d.n_a /= total;
    d.n_b /= total;
    d.leak_a /= total;
    d.leak_b /= total;
    d.qubit_populations.iter_mut().for_each(|p| *p /= total);
    if qq.is_some() {
        d.sigma_z = Some(d.qubit_populations[1] - d.qubit_populations[0]);
    }
    Ok(d)
}

pub fn diagnostics(state: &KetState) -> Result<Diagnostics> {
    diagnostics_from_populations(state.spec(), state.amplitudes().iter().map(|a| a.norm_sqr()))
}

pub fn diagnostics_rho(rho: &DensityOperator) -> Result<Diagnostics> {
    let m = rho.matrix();
    diagnostics_from_populations(rho.spec(), (0..m.nrows()).map(|i| m[(i, i)].re))
}
