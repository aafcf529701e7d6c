//! Simulation and analysis of a three-mode optomechanical force transducer whose two
//! sideband outputs are combined offline to remove quantum back action.
//!
//! - [`model`]: parameters, derived couplings, signal pulse.
//! - [`freq_solver`]: exact frequency-domain transfer matrices and output PSDs.
//! - [`analytics`]: closed-form spectra and pump-level optimization.
//! - [`estimator`]: back-action-evading combination weights and force-referred noise.
//! - [`timedomain`]: stochastic integration, Welch estimation, detection experiments.
//! - [`structure`]: stability, coherent-coupling eigenmodes, closed-system structure.

pub mod analytics;
pub mod estimator;
pub mod freq_solver;
pub mod model;
pub mod numerics;
pub mod structure;
pub mod timedomain;

pub use model::{DerivedCouplings, SignalPulse, SystemParams};
