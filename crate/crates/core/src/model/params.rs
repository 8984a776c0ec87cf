use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the driven qubit coupled to two resonators.
///
/// All frequencies are angular and expressed in units of the reference
/// coupling `g`. The drive is resonant with the qubit (`omega_d == omega_0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g_a: Complex64,
    pub g_b: Complex64,
    /// g-e transition frequency.
    pub omega_0: f64,
    /// e-f transition frequency (only used by the three-level model).
    pub omega_ef: f64,
    /// Half Rabi frequency of the drive; the drive amplitude is `2 * omega_drive`.
    pub omega_drive: Complex64,
    pub omega_d: f64,
    /// Detuning of mode `a` from the qubit, `omega_a - omega_0`.
    pub delta_big: f64,
    pub qubit_levels: usize,
    /// Quadrature phase used for fixed-angle variances.
    pub theta: f64,
}

impl ModelParams {
    /// Equal real couplings `g_a = g_b = g`, resonant drive, two-level qubit.
    pub fn symmetric(g: f64, delta_big: f64, omega_drive: f64, omega_0: f64, omega_ef: f64) -> Self {
        ModelParams {
            g_a: Complex64::new(g, 0.0),
            g_b: Complex64::new(g, 0.0),
            omega_0,
            omega_ef,
            omega_drive: Complex64::new(omega_drive, 0.0),
            omega_d: omega_0,
            delta_big,
            qubit_levels: 2,
            theta: std::f64::consts::FRAC_PI_4,
        }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.qubit_levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_0, self.omega_ef, self.omega_d, self.delta_big, self.theta]
            .iter()
            .all(|x| x.is_finite())
            && [self.g_a, self.g_b, self.omega_drive].iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::ConfigInvalid("model parameters must be finite".into()));
        }
        if !(2..=3).contains(&self.qubit_levels) {
            return Err(Error::ConfigInvalid(format!("qubit_levels must be 2 or 3, got {}", self.qubit_levels)));
        }
        if self.omega_d != self.omega_0 {
            return Err(Error::ConfigInvalid("the drive must be resonant: omega_d == omega_0".into()));
        }
        Ok(())
    }
}

/// Quantities derived from [`ModelParams`] for the dispersive squeezing regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// `2|Omega| - Delta`
    pub eta: f64,
    pub chi_a: f64,
    pub chi_b: f64,
    /// Effective two-mode coupling `g_a g_b / (4 eta)`.
    pub lambda: Complex64,
    /// Tuned detuning offset `-(chi_a + chi_b)`.
    pub delta: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub omega_a: f64,
    pub omega_b: f64,
}

pub fn derive(params: &ModelParams) -> Result<DerivedParams> {
    let eta = 2.0 * params.omega_drive.norm() - params.delta_big;
    if eta == 0.0 {
        return Err(Error::DegenerateDetuning);
    }
    let chi_a = params.g_a.norm_sqr() / (4.0 * eta);
    let chi_b = params.g_b.norm_sqr() / (4.0 * eta);
    let lambda = params.g_a * params.g_b / (4.0 * eta);
    let delta = -(chi_a + chi_b);
    let delta_a = params.delta_big;
    let delta_b = -params.delta_big - delta;
    Ok(DerivedParams {
        eta,
        chi_a,
        chi_b,
        lambda,
        delta,
        delta_a,
        delta_b,
        omega_a: params.omega_0 + delta_a,
        omega_b: params.omega_0 + delta_b,
    })
}

impl DerivedParams {
    /// Interaction time reaching squeezing factor `r = |lambda| tau`.
    pub fn tau_for(&self, r: f64) -> f64 {
        r / self.lambda.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig2(delta: f64, omega: f64) -> DerivedParams {
        derive(&ModelParams::symmetric(1.0, delta, omega, 500.0, 2500.0)).unwrap()
    }

    #[test]
    fn figure_two_parameter_sets() {
        let b = fig2(90.0, 50.0);
        assert_eq!(b.eta, 10.0);
        assert_eq!(b.chi_a, 1.0 / 40.0);
        assert_eq!(b.chi_b, 1.0 / 40.0);
        assert_eq!(b.lambda, Complex64::new(1.0 / 40.0, 0.0));
        assert_eq!(b.delta, -1.0 / 20.0);

        let a = fig2(35.0, 20.0);
        assert_eq!(a.eta, 5.0);
        assert_eq!(a.lambda.re, 1.0 / 20.0);

        let c = fig2(180.0, 100.0);
        assert_eq!(c.eta, 20.0);
        assert_eq!(c.lambda.re, 1.0 / 80.0);
    }

    #[test]
    fn degenerate_detuning() {
        let p = ModelParams::symmetric(1.0, 100.0, 50.0, 500.0, 2500.0);
        assert_eq!(derive(&p), Err(Error::DegenerateDetuning));
    }

    #[test]
    fn off_resonant_drive_rejected() {
        let mut p = ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 2500.0);
        p.omega_d = 501.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn detuning_chain_round_trips(delta_big in 10.0f64..300.0, omega in 5.0f64..200.0, g in 0.1f64..3.0) {
            prop_assume!((2.0 * omega - delta_big).abs() > 1e-3);
            let p = ModelParams::symmetric(g, delta_big, omega, 500.0, 2500.0);
            let d = derive(&p).unwrap();
            prop_assert_eq!(d.delta_a.to_bits(), delta_big.to_bits());
            // recovering delta from delta_b loses at most the rounding of -Delta - delta
            let back = -delta_big - d.delta_b;
            prop_assert!((back - d.delta).abs() <= f64::EPSILON * delta_big.abs());
            prop_assert_eq!(d.lambda, Complex64::new(g * g / (4.0 * d.eta), 0.0));
        }
    }
}
