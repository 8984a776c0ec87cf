//! Flattened time-dependent operator for fast repeated application.
//!
//! All terms are merged into one CSR structure whose entries carry the index
//! of the scalar coefficient they are multiplied by, so `H(t) x` is a single
//! pass over the nonzeros. Optionally the real part of the constant diagonal
//! `D` is removed and treated exactly: the propagated variable is then
//! `phi = exp(i D t) psi`, which keeps large bare energies out of the
//! integrator step size.

use num_complex::Complex64;

use crate::fockspace::{HilbertSpec, OperatorMatrix};
use crate::model::{Coefficient, TimeDependentOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct CompiledOperator {
    spec: HilbertSpec,
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
    slots: Vec<u32>,
    coeffs: Vec<Coefficient>,
    split_diag: Option<Vec<f64>>,
}

/// Per-time evaluation cache: coefficient values and frame phases.
#[derive(Debug, Clone)]
pub struct Workspace {
    t: f64,
    coeff_values: Vec<Complex64>,
    phases: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl CompiledOperator {
    /// Compiles `h + extra` where `extra` is a constant (possibly non-Hermitian) part.
    pub fn new(h: &TimeDependentOperator, extra: Option<&OperatorMatrix>, split_diagonal: bool) -> Self {
        let spec = h.spec().clone();
        let dim = spec.total_dim();
        let mut coeffs: Vec<Coefficient> = vec![Coefficient::Constant(Complex64::new(1.0, 0.0))];
        let mut trips: Vec<(usize, usize, u32, Complex64)> = Vec::new();
        for (coeff, op) in h.terms() {
            let slot = match coeff {
                Coefficient::Constant(c) => {
                    trips.extend(op.data().iter().map(|(r, col, v)| (r, col, 0u32, v * c)));
                    continue;
                }
                _ => {
                    coeffs.push(*coeff);
                    (coeffs.len() - 1) as u32
                }
            };
            trips.extend(op.data().iter().map(|(r, col, v)| (r, col, slot, v)));
        }
        if let Some(op) = extra {
            trips.extend(op.data().iter().map(|(r, col, v)| (r, col, 0u32, v)));
        }
        trips.sort_unstable_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));

        let mut merged: Vec<(usize, usize, u32, Complex64)> = Vec::with_capacity(trips.len());
        for t in trips {
            match merged.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (t.0, t.1, t.2) => last.3 += t.3,
                _ => merged.push(t),
            }
        }

        let mut split = vec![0.0; dim];
        if split_diagonal {
            for e in merged.iter_mut() {
                if e.0 == e.1 && e.2 == 0 {
                    split[e.0] = e.3.re;
                    e.3 = Complex64::new(0.0, e.3.im);
                }
            }
        }
        merged.retain(|e| e.3 != ZERO);

        let mut indptr = vec![0usize; dim + 1];
        for e in &merged {
            indptr[e.0 + 1] += 1;
        }
        for i in 0..dim {
            indptr[i + 1] += indptr[i];
        }
        let split_diag = if split_diagonal && split.iter().any(|&d| d != 0.0) { Some(split) } else { None };
        CompiledOperator {
            spec,
            dim,
            indptr,
            indices: merged.iter().map(|e| e.1).collect(),
            values: merged.iter().map(|e| e.3).collect(),
            slots: merged.iter().map(|e| e.2).collect(),
            coeffs,
            split_diag,
        }
    }

    /// Splits the diagonal only when that at least halves the step-size bound.
    pub fn auto(h: &TimeDependentOperator, extra: Option<&OperatorMatrix>) -> Self {
        let plain = Self::new(h, extra, false);
        let split = Self::new(h, extra, true);
        if split.has_split() && split.max_frequency() < 0.5 * plain.max_frequency() {
            split
        } else {
            plain
        }
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn has_split(&self) -> bool {
        self.split_diag.is_some()
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            t: f64::NAN,
            coeff_values: vec![ZERO; self.coeffs.len()],
            phases: vec![Complex64::new(1.0, 0.0); if self.has_split() { self.dim } else { 0 }],
            tmp: vec![ZERO; self.dim],
        }
    }

    fn prepare(&self, t: f64, ws: &mut Workspace) {
        if ws.t.to_bits() == t.to_bits() {
            return;
        }
        ws.t = t;
        for (v, c) in ws.coeff_values.iter_mut().zip(&self.coeffs) {
            *v = c.at(t);
        }
        if let Some(d) = &self.split_diag {
            for (p, &di) in ws.phases.iter_mut().zip(d) {
                *p = Complex64::from_polar(1.0, di * t);
            }
        }
    }

    /// `y = H_rest(t) x` in the frame of the split diagonal.
    pub fn apply(&self, t: f64, x: &[Complex64], y: &mut [Complex64], ws: &mut Workspace) {
        self.prepare(t, ws);
        let cv = &ws.coeff_values;
        if self.split_diag.is_some() {
            for ((tm, xi), p) in ws.tmp.iter_mut().zip(x).zip(&ws.phases) {
                *tm = xi * p.conj();
            }
            for (r, yr) in y.iter_mut().enumerate() {
                let mut acc = ZERO;
                for k in self.indptr[r]..self.indptr[r + 1] {
                    acc += cv[self.slots[k] as usize] * self.values[k] * ws.tmp[self.indices[k]];
                }
                *yr = acc * ws.phases[r];
            }
        } else {
            for (r, yr) in y.iter_mut().enumerate() {
                let mut acc = ZERO;
                for k in self.indptr[r]..self.indptr[r + 1] {
                    acc += cv[self.slots[k] as usize] * self.values[k] * x[self.indices[k]];
                }
                *yr = acc;
            }
        }
    }

    /// Converts the propagated variable back to the Schrödinger-picture state.
    pub fn to_lab(&self, t: f64, phi: &[Complex64]) -> Vec<Complex64> {
        match &self.split_diag {
            None => phi.to_vec(),
            Some(d) => phi.iter().zip(d).map(|(p, &di)| p * Complex64::from_polar(1.0, -di * t)).collect(),
        }
    }

    pub fn from_lab(&self, t: f64, psi: &[Complex64]) -> Vec<Complex64> {
        match &self.split_diag {
            None => psi.to_vec(),
            Some(d) => psi.iter().zip(d).map(|(p, &di)| p * Complex64::from_polar(1.0, di * t)).collect(),
        }
    }

    /// Fastest angular frequency the integrator must resolve: the largest of
    /// the coefficient and frame oscillation rates of any entry, and a
    /// row-sum bound on the spectral radius of the remaining operator.
    pub fn max_frequency(&self) -> f64 {
        let mut fmax = 0.0f64;
        let mut row_max = 0.0f64;
        for r in 0..self.dim {
            let mut row = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = &self.coeffs[self.slots[k] as usize];
                let c_idx = self.indices[k];
                let frame = match &self.split_diag {
                    Some(d) => (d[r] - d[c_idx]).abs(),
                    None => 0.0,
                };
                fmax = fmax.max(frame + c.frequency());
                row += self.values[k].norm() * c.magnitude();
            }
            row_max = row_max.max(row);
        }
        fmax.max(row_max)
    }
}

/// Classic fourth-order Runge-Kutta for `dphi/dt = -i H(t) phi`, with
/// preallocated stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    stage: Vec<Complex64>,
    next: Vec<Complex64>,
    ws: Workspace,
}

impl Rk4 {
    pub fn new(op: &CompiledOperator) -> Self {
        let n = op.dim();
        Rk4 {
            k1: vec![ZERO; n],
            k2: vec![ZERO; n],
            k3: vec![ZERO; n],
            k4: vec![ZERO; n],
            stage: vec![ZERO; n],
            next: vec![ZERO; n],
            ws: op.workspace(),
        }
    }

    /// Writes `phi(t + h)` into `out`.
    pub fn step(&mut self, op: &CompiledOperator, t: f64, h: f64, phi: &[Complex64], out: &mut [Complex64]) {
        let mi = Complex64::new(0.0, -1.0);
        let half = 0.5 * h;
        op.apply(t, phi, &mut self.k1, &mut self.ws);
        for ((s, p), k) in self.stage.iter_mut().zip(phi).zip(&self.k1) {
            *s = p + mi * half * k;
        }
        op.apply(t + half, &self.stage, &mut self.k2, &mut self.ws);
        for ((s, p), k) in self.stage.iter_mut().zip(phi).zip(&self.k2) {
            *s = p + mi * half * k;
        }
        op.apply(t + half, &self.stage, &mut self.k3, &mut self.ws);
        for ((s, p), k) in self.stage.iter_mut().zip(phi).zip(&self.k3) {
            *s = p + mi * h * k;
        }
        op.apply(t + h, &self.stage, &mut self.k4, &mut self.ws);
        let w = mi * (h / 6.0);
        for i in 0..phi.len() {
            out[i] = phi[i] + w * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }

    pub fn step_in_place(&mut self, op: &CompiledOperator, t: f64, h: f64, phi: &mut [Complex64]) {
        let mut next = std::mem::take(&mut self.next);
        self.step(op, t, h, phi, &mut next);
        phi.copy_from_slice(&next);
        self.next = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{mode_op, MODE_A};

    #[test]
    fn merged_apply_matches_snapshot() {
        let spec = HilbertSpec::two_modes(4, 3).unwrap();
        let a = mode_op(&spec, MODE_A).unwrap();
        let mut h = TimeDependentOperator::constant(a.adjoint().multiply(&a).unwrap().scale_real(3.0));
        h.push_with_adjoint(Coefficient::Rotating { amp: Complex64::new(0.4, 0.1), freq: 5.0 }, a.clone()).unwrap();
        let x: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        for split in [false, true] {
            let comp = CompiledOperator::new(&h, None, split);
            let mut ws = comp.workspace();
            let t = 0.83;
            // the frame variable for psi = x is phi = e^{iDt} x
            let phi = comp.from_lab(t, &x);
            let mut y = vec![ZERO; 12];
            comp.apply(t, &phi, &mut y, &mut ws);
            let y_lab = comp.to_lab(t, &y);
            let mut expected = vec![ZERO; 12];
            let snap = h.at(t);
            snap.data().matvec(&x, &mut expected);
            if split {
                // remove the split diagonal part
                let d = 3.0;
                for (i, e) in expected.iter_mut().enumerate() {
                    let na = spec.digits(i)[0] as f64;
                    *e -= x[i] * d * na;
                }
            }
            for (u, v) in y_lab.iter().zip(&expected) {
                assert!((u - v).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn frequency_bound_includes_frame() {
        let spec = HilbertSpec::two_modes(3, 2).unwrap();
        let a = mode_op(&spec, MODE_A).unwrap();
        let n = a.adjoint().multiply(&a).unwrap();
        let h = TimeDependentOperator::constant(n.scale_real(100.0).add(&a.plus_adjoint().scale_real(0.1)).unwrap());
        let split = CompiledOperator::new(&h, None, true);
        let plain = CompiledOperator::new(&h, None, false);
        assert!((split.max_frequency() - 100.0).abs() < 1e-9);
        assert!(plain.max_frequency() >= 200.0);
    }
}
