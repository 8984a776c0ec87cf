//! Checks of the frequency hierarchy that justifies the reduced models.

use serde::{Deserialize, Serialize};

use super::params::{DerivedParams, ModelParams};

/// Minimum `left / right` for a "much greater than" condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub ratio: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { ratio: 3.0 }
    }
}

/// Drive-RWA ceiling: counter-rotating drive terms stop being negligible once
/// `omega_0 / |Omega|` drops to 5 (Rabi frequency 2 GHz on a 10 GHz qubit).
pub const DRIVE_RWA_MIN_RATIO: f64 = 5.0;
/// Flux-qubit-like anharmonicity `|omega_ef| / omega_0`; transmons sit near 0.95.
pub const ANHARMONICITY_MIN_RATIO: f64 = 2.0;
/// Beyond-strong-coupling limit `g / max(omega_0, omega_alpha) < 0.1`.
pub const COUPLING_MIN_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub left: f64,
    pub right: f64,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RegimeCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.failures()
            .map(|c| format!("regime check `{}` failed: ratio {:.3} <= {}", c.name, c.ratio, c.threshold))
            .collect()
    }

    fn push(&mut self, name: impl Into<String>, left: f64, right: f64, threshold: f64) {
        let (left, right) = (left.abs(), right.abs());
        let ratio = if right == 0.0 { f64::INFINITY } else { left / right };
        self.checks.push(RegimeCheck { name: name.into(), left, right, ratio, threshold, pass: ratio > threshold });
    }
}

pub fn validate_regime(params: &ModelParams, derived: &DerivedParams, thresholds: RegimeThresholds) -> RegimeReport {
    let t = thresholds.ratio;
    let mut rep = RegimeReport { checks: Vec::new() };
    let omega = params.omega_drive.norm();
    let fields = [
        ("a", derived.omega_a, params.g_a.norm()),
        ("b", derived.omega_b, params.g_b.norm()),
        ("d", params.omega_d, 2.0 * omega),
    ];

    // qubit transition: rotating-wave and dispersive hierarchy
    for (x, wx, gx) in fields {
        let sum = params.omega_0 + wx;
        let diff = params.omega_0 - wx;
        if diff == 0.0 {
            // resonant drive: only the counter-rotating term can be dropped
            rep.push(format!("omega_0+omega_{x} >> |g_{x}|"), sum, gx, t);
        } else {
            rep.push(format!("omega_0+omega_{x} >> |omega_0-omega_{x}|"), sum, diff, t);
            rep.push(format!("|omega_0-omega_{x}| >> |g_{x}|"), diff, gx, t);
        }
    }

    // e-f transition stays off-resonant with every field
    if params.qubit_levels == 3 || params.omega_ef > 0.0 {
        for (x, wx, gx) in fields {
            rep.push(format!("omega_ef+omega_{x} >> |g_{x}|"), params.omega_ef + wx, gx, t);
            rep.push(format!("|omega_ef-omega_{x}| >> |g_{x}|"), params.omega_ef - wx, gx, t);
        }
        rep.push("|omega_ef|/omega_0 anharmonicity", params.omega_ef, params.omega_0, ANHARMONICITY_MIN_RATIO);
    }

    let g = params.g_a.norm().max(params.g_b.norm());
    rep.push("|Delta+2Omega| >> |eta|", params.delta_big + 2.0 * omega, derived.eta, t);
    rep.push("|eta| >> g", derived.eta, g, t);
    rep.push("|Delta| >> |delta|", params.delta_big, derived.delta, t);
    rep.push("omega_0/|Omega| drive RWA", params.omega_0, omega, DRIVE_RWA_MIN_RATIO);
    let wmax = params.omega_0.max(derived.omega_a).max(derived.omega_b);
    rep.push("max(omega)/g below ultrastrong", wmax, g, COUPLING_MIN_RATIO);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive;

    fn report(delta: f64, omega: f64, omega_0: f64, ratio: f64) -> RegimeReport {
        let p = ModelParams::symmetric(1.0, delta, omega, omega_0, 5.0 * omega_0);
        let d = derive(&p).unwrap();
        validate_regime(&p, &d, RegimeThresholds { ratio })
    }

    #[test]
    fn fig2b_passes_at_ratio_five() {
        let rep = report(90.0, 50.0, 500.0, 5.0);
        assert!(rep.all_pass(), "{:?}", rep.warnings());
    }

    #[test]
    fn strong_drive_flags_rwa() {
        let rep = report(90.0, 400.0, 500.0, 3.0);
        let names: Vec<_> = rep.failures().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"omega_0/|Omega| drive RWA"), "{names:?}");
    }

    #[test]
    fn lambda_over_eighty_warns_only_on_drive() {
        let rep = report(180.0, 100.0, 500.0, 3.0);
        let names: Vec<_> = rep.failures().map(|c| c.name.clone()).collect();
        assert_eq!(names, vec!["omega_0/|Omega| drive RWA".to_string()]);
    }

    #[test]
    fn zero_coupling_passes_coupling_checks() {
        let mut p = ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 2500.0);
        p.g_b = num_complex::Complex64::new(0.0, 0.0);
        let d = derive(&p).unwrap();
        let rep = validate_regime(&p, &d, RegimeThresholds::default());
        for c in rep.checks.iter().filter(|c| c.name.ends_with("|g_b|")) {
            assert!(c.pass && c.ratio.is_infinite());
        }
    }

    #[test]
    fn transmon_anharmonicity_fails() {
        let mut p = ModelParams::symmetric(1.0, 90.0, 50.0, 500.0, 475.0);
        p.qubit_levels = 3;
        let d = derive(&p).unwrap();
        let rep = validate_regime(&p, &d, RegimeThresholds::default());
        assert!(rep.failures().any(|c| c.name.contains("anharmonicity")));
    }
}
