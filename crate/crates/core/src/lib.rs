//! Simulation engine for two-mode squeezing of a pair of resonators by a
//! strongly driven qubit in circuit QED.
//!
//! The crate is organised bottom-up:
//!
//! * [`fockspace`]: truncated Fock spaces, sparse operators and states;
//! * [`model`]: parameters, regime checks and Hamiltonians from the full
//!   three-level lab-frame model down to the ideal squeezing generator;
//! * [`solvers`]: Schrödinger, Lindblad and quantum-trajectory propagation;
//! * [`observables`]: quadratures, EPR variance, squeezing in dB;
//! * [`scenarios`]: configuration, builtin reproductions, sweeps and output.

pub mod error;
pub mod fockspace;
pub mod model;
pub mod observables;
pub mod scenarios;
pub mod solvers;

pub use error::{Error, Result};
