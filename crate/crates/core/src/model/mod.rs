//! Model parameters, regime validation and Hamiltonian builders.
//!
//! Frequencies are angular and measured in units of the qubit-mode coupling
//! `g` unless a conversion is requested explicitly.

mod frames;
mod hamiltonians;
mod params;
mod regime;
mod timedep;

pub use frames::{
    evolution_squeeze_parameter, frame_u_drive, frame_u_minus, squeeze_operator, squeeze_operator_unchecked,
    SQUEEZE_LEAK_LIMIT,
};
pub use hamiltonians::{build_h_eff, build_h_full, build_h_minus, build_h_rwa, build_v_i};
pub use params::{derive, DerivedParams, ModelParams};
pub use regime::{
    validate_regime, RegimeCheck, RegimeReport, RegimeThresholds, ANHARMONICITY_MIN_RATIO, COUPLING_MIN_RATIO,
    DRIVE_RWA_MIN_RATIO,
};
pub use timedep::{Coefficient, TimeDependentOperator};
