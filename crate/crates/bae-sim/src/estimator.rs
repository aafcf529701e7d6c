//! Back-action-evading post-processing of the two homodyne records.
//!
//! Outputs are grouped by a quadrature angle `φ`:
//! the *sum* channel `β_{a+} cos φ + β_{φ-} sin φ` carries the back-action driver but no
//! mechanical motion, and the *difference* channel `β_{a-} cos φ + β_{φ+} sin φ` carries the
//! motion. The combination `w_plus · sum + w_minus · diff` with `w_plus = K/(γ_m - iΩ)` and
//! `w_minus = 1` cancels back action at every frequency. Weights act on measured outputs, so
//! the `ξ` factor relating `β_{a+}` to `α_{a+}` is absorbed.
//!
//! Post-processing is offline: weights are two-sided in time and applied to whole records.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

use crate::freq_solver::{
    self, psd_of_row, transfer_matrix, Input, Output, SolverError, OUTPUT_DIM,
};
use crate::model::{pump_parameter, SystemParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("combined output has no force transfer at omega = {omega}")]
    ZeroForceTransfer { omega: f64 },
    #[error("pump parameter must be positive, got {0}")]
    NonPositivePump(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Quadrature pair used for the combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSector {
    Amplitude,
    Phase,
    GeneralPhi(f64),
}

impl WeightSector {
    pub fn angle(self) -> f64 {
        match self {
            WeightSector::Amplitude => 0.0,
            WeightSector::Phase => FRAC_PI_2,
            WeightSector::GeneralPhi(phi) => phi,
        }
    }

    /// Unit force direction `(cos φ, sin φ)` in the `(f_a, f_φ)` plane.
    pub fn force_direction(self) -> (f64, f64) {
        let phi = self.angle();
        match self {
            WeightSector::Amplitude => (1.0, 0.0),
            WeightSector::Phase => (0.0, 1.0),
            WeightSector::GeneralPhi(_) => (phi.cos(), phi.sin()),
        }
    }

    /// The input whose back action the combination cancels.
    pub fn back_action_inputs(self) -> Vec<Input> {
        match self {
            WeightSector::Amplitude => vec![Input::AlphaPlusA],
            WeightSector::Phase => vec![Input::AlphaMinusPhi],
            WeightSector::GeneralPhi(_) => vec![Input::AlphaPlusA, Input::AlphaMinusPhi],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinationWeights {
    pub frequency: f64,
    /// Weight on the sum channel.
    pub w_plus: Complex64,
    /// Weight on the difference channel.
    pub w_minus: Complex64,
    pub sector: WeightSector,
}

impl CombinationWeights {
    /// The difference channel alone (raw measurement, no back-action removal).
    pub fn raw(frequency: f64, sector: WeightSector) -> Self {
        Self {
            frequency,
            w_plus: Complex64::from(0.0),
            w_minus: Complex64::from(1.0),
            sector,
        }
    }

    /// Weights on `(β_{a+}, β_{a-}, β_{φ+}, β_{φ-})`.
    pub fn output_weights(&self) -> [Complex64; OUTPUT_DIM] {
        let (c, s) = self.sector.force_direction();
        let mut w = [Complex64::from(0.0); OUTPUT_DIM];
        w[Output::BetaPlusA.index()] = self.w_plus * c;
        w[Output::BetaMinusPhi.index()] = self.w_plus * s;
        w[Output::BetaMinusA.index()] = self.w_minus * c;
        w[Output::BetaPlusPhi.index()] = self.w_minus * s;
        w
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            w_plus: self.w_plus * factor,
            w_minus: self.w_minus * factor,
            ..*self
        }
    }
}

/// Canonical weights `w_plus = K(Ω)/(γ_m - iΩ)`, `w_minus = 1`.
pub fn bae_weights(params: &SystemParams, omega: f64, sector: WeightSector) -> CombinationWeights {
    let k = pump_parameter(params, omega);
    CombinationWeights {
        frequency: omega,
        w_plus: Complex64::from(k) / Complex64::new(params.gamma_m, -omega),
        w_minus: Complex64::from(1.0),
        sector,
    }
}

/// Whether weights stay canonical or are re-optimized per frequency under detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightPolicy {
    #[default]
    Canonical,
    Reoptimized,
}

/// Weights minimizing the force-referred PSD along the optimal force direction.
///
/// Solves the 2×2 generalized eigenproblem `F v = λ N v` for `v = (w_plus, w_minus)`, where `N` is
/// the noise Gram matrix of (sum, diff) and `F` the force Gram matrix; the largest `λ` wins.
pub fn reoptimized_weights(
    params: &SystemParams,
    omega: f64,
    sector: WeightSector,
) -> Result<CombinationWeights, EstimatorError> {
    let tm = transfer_matrix(params, omega)?;
    let unit = |w_plus: f64, w_minus: f64| CombinationWeights {
        frequency: omega,
        w_plus: Complex64::from(w_plus),
        w_minus: Complex64::from(w_minus),
        sector,
    };
    let rows = [
        tm.combined_row(&unit(1.0, 0.0).output_weights()),
        tm.combined_row(&unit(0.0, 1.0).output_weights()),
    ];
    let gram = |inputs: &[Input], weight: &dyn Fn(Input) -> f64| {
        Matrix2::from_fn(|i, j| {
            inputs
                .iter()
                .map(|&n| rows[i][n.index()].conj() * rows[j][n.index()] * weight(n))
                .sum::<Complex64>()
        })
    };
    let noise = gram(&Input::NOISE, &|n| freq_solver::input_psd(params, n));
    let force = gram(&[Input::ForceA, Input::ForcePhi], &|_| 1.0);
    let m = noise
        .try_inverse()
        .ok_or(EstimatorError::ZeroForceTransfer { omega })?
        * force;
    // largest eigenvalue of a 2x2 complex matrix
    let tr = m.trace();
    let det = m.determinant();
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    let lambda = if l1.re >= l2.re { l1 } else { l2 };
    // eigenvector from the row with the larger pivot
    let (a, b) = if (m[(0, 1)]).norm() >= (m[(1, 0)]).norm() {
        (m[(0, 1)], lambda - m[(0, 0)])
    } else {
        (lambda - m[(1, 1)], m[(1, 0)])
    };
    if b.norm() == 0.0 {
        return Err(EstimatorError::ZeroForceTransfer { omega });
    }
    Ok(CombinationWeights {
        frequency: omega,
        w_plus: a / b,
        w_minus: Complex64::from(1.0),
        sector,
    })
}

/// Noise PSD of the combination divided by its squared force transfer along the sector's
/// force direction.
pub fn force_referred_psd(
    params: &SystemParams,
    omega: f64,
    weights: &CombinationWeights,
) -> Result<f64, EstimatorError> {
    let tm = transfer_matrix(params, omega)?;
    let row = tm.combined_row(&weights.output_weights());
    let (c, s) = weights.sector.force_direction();
    let force = c * row[Input::ForceA.index()] + s * row[Input::ForcePhi.index()];
    let gain = force.norm_sqr();
    if gain == 0.0 || !gain.is_finite() {
        return Err(EstimatorError::ZeroForceTransfer { omega });
    }
    Ok(psd_of_row(params, &row, None) / gain)
}

/// Detuned exact spectrum: canonical amplitude-sector weights applied to the detuned solver,
/// referred to the optimal mix of both force quadratures.
///
/// `eta_c0` is set so that `K(Ω)` equals `k`.
pub fn detuned_combination_psd(params: &SystemParams, omega: f64, k: f64) -> Result<f64, EstimatorError> {
    detuned_combination_psd_with(params, omega, k, WeightPolicy::Canonical)
}

pub fn detuned_combination_psd_with(
    params: &SystemParams,
    omega: f64,
    k: f64,
    policy: WeightPolicy,
) -> Result<f64, EstimatorError> {
    let p = with_pump(params, omega, k)?;
    let weights = match policy {
        WeightPolicy::Canonical => bae_weights(&p, omega, WeightSector::Amplitude),
        WeightPolicy::Reoptimized => reoptimized_weights(&p, omega, WeightSector::Amplitude)?,
    };
    let tm = transfer_matrix(&p, omega)?;
    let row = tm.combined_row(&weights.output_weights());
    let gain = row[Input::ForceA.index()].norm_sqr() + row[Input::ForcePhi.index()].norm_sqr();
    if gain == 0.0 {
        return Err(EstimatorError::ZeroForceTransfer { omega });
    }
    Ok(psd_of_row(&p, &row, None) / gain)
}

/// Transfer row of the canonical amplitude combination of the detuned system at pump `k`.
pub fn detuned_combination_row(
    params: &SystemParams,
    omega: f64,
    k: f64,
) -> Result<[Complex64; freq_solver::INPUT_DIM], EstimatorError> {
    let p = with_pump(params, omega, k)?;
    let w = bae_weights(&p, omega, WeightSector::Amplitude);
    Ok(transfer_matrix(&p, omega)?.combined_row(&w.output_weights()))
}

/// Copy of `params` with `eta_c0` chosen so that `K(Ω) = k`.
pub fn with_pump(params: &SystemParams, omega: f64, k: f64) -> Result<SystemParams, EstimatorError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(EstimatorError::NonPositivePump(k));
    }
    let g = params.gamma;
    Ok(SystemParams {
        eta_c0: (k * (g * g + omega * omega) / (4.0 * g)).sqrt(),
        ..*params
    })
}
