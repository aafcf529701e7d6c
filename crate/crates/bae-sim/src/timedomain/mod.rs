//! Stochastic time-domain oracle: exact discretization of the Langevin dynamics driven by
//! white noise, Welch spectral estimation, offline back-action-evading filters and a
//! Monte Carlo pulse-detection experiment.
//!
//! Inputs are independent real Gaussian white noises with single-sided PSD 1 for each optical
//! quadrature and `2n_T + 1` for each thermal quadrature. Outputs are step averages of
//! `β = -α + √(2γ) g`, formed from the same increments that drive the state.

pub mod detection;
pub mod discretize;
pub mod filter;
pub mod integrate;
pub mod validation;
pub mod welch;

use thiserror::Error;

pub use detection::{
    run_detection_experiment, run_detection_sweep, snr_linearity, DetectionConfig, DetectionOutcome,
    MatchedFilter,
};
pub use integrate::{integrate, integrate_paired, integrate_with, IntegrationConfig, PulseSchedule, Trajectory};
pub use validation::{run_psd_validation, BandSpec, PsdValidation, PsdValidationConfig, ValidationChannel};
pub use welch::{estimate_psd, BandComparison, PsdEstimate, WelchConfig, WindowKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeDomainError {
    #[error("parameter set is unstable (largest real part {max_real})")]
    Unstable { max_real: f64 },
    #[error("step {dt} exceeds the limit 0.05/gamma for gamma = {gamma}")]
    StepTooLarge { dt: f64, gamma: f64 },
    #[error("invalid step {dt}")]
    InvalidStep { dt: f64 },
    #[error("invalid duration {duration}")]
    InvalidDuration { duration: f64 },
    #[error("no stationary state: the drift is singular")]
    NoStationaryState,
    #[error("invalid segmentation: length {segment_len}, overlap {overlap}")]
    InvalidSegment { segment_len: usize, overlap: usize },
    #[error("{got} segments available, at least {need} required")]
    TooFewSegments { got: usize, need: usize },
    #[error("at least two trials are required, got {trials}")]
    TooFewTrials { trials: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Independent child seed for stream `(a, b)` of a base seed.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
