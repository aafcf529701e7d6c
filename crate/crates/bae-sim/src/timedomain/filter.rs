//! Offline time-domain filters that form the back-action-evading combination from the two
//! recorded channels.
//!
//! Records are treated as piecewise constant over each step; every first-order section is
//! propagated exactly under that assumption and its output is step-averaged.

use crate::estimator::WeightSector;
use crate::freq_solver::Output;
use crate::model::SystemParams;

use super::integrate::Trajectory;

/// Sum and difference channels of a sector: `(β_{a+} cos φ + β_{φ-} sin φ, β_{a-} cos φ + β_{φ+} sin φ)`.
pub fn sector_channels(traj: &Trajectory, sector: WeightSector) -> (Vec<f64>, Vec<f64>) {
    let (c, s) = sector.force_direction();
    let mix = |a: Output, b: Output| -> Vec<f64> {
        traj.output(a)
            .iter()
            .zip(traj.output(b))
            .map(|(x, y)| c * x + s * y)
            .collect()
    };
    (
        mix(Output::BetaPlusA, Output::BetaMinusPhi),
        mix(Output::BetaMinusA, Output::BetaPlusPhi),
    )
}

fn section_gains(rate: f64, dt: f64) -> (f64, f64, f64) {
    let x = rate * dt;
    let decay = (-x).exp();
    let one_minus = -(-x).exp_m1();
    let avg_carry = one_minus / x;
    (decay, one_minus / rate, (1.0 - avg_carry) / rate)
}

/// Response `1/(a - iΩ)`: `ẏ = -a y + x`, started from rest.
pub fn causal_section(input: &[f64], rate: f64, dt: f64) -> Vec<f64> {
    let (decay, gain, direct) = section_gains(rate, dt);
    let carry = gain / dt;
    let mut y = 0.0;
    input
        .iter()
        .map(|&x| {
            let out = y * carry + x * direct;
            y = decay * y + gain * x;
            out
        })
        .collect()
}

/// Response `1/(a + iΩ)`: the time-reversed section, started from rest at the record end.
pub fn anticausal_section(input: &[f64], rate: f64, dt: f64) -> Vec<f64> {
    let mut rev: Vec<f64> = input.iter().rev().copied().collect();
    rev = causal_section(&rev, rate, dt);
    rev.reverse();
    rev
}

/// Applies `w(Ω) = K(Ω)/(γ_m - iΩ)` to a record, by partial fractions over the optical and
/// mechanical poles.
pub fn pump_weight_filter(params: &SystemParams, input: &[f64], dt: f64) -> Vec<f64> {
    let g = params.gamma;
    let gm = params.gamma_m;
    let scale = 4.0 * g * params.eta_c0 * params.eta_c0;
    let a = 1.0 / (2.0 * g * (gm - g));
    let b = 1.0 / (2.0 * g * (gm + g));
    let c = 1.0 / ((g - gm) * (g + gm));
    let ya = causal_section(input, g, dt);
    let yb = anticausal_section(input, g, dt);
    let yc = causal_section(input, gm, dt);
    (0..input.len())
        .map(|k| scale * (a * ya[k] + b * yb[k] + c * yc[k]))
        .collect()
}

/// Applies `K(Ω) = 4γ(ηC₀)²/(γ² + Ω²)`, a two-sided exponential kernel.
pub fn pump_filter(params: &SystemParams, input: &[f64], dt: f64) -> Vec<f64> {
    let g = params.gamma;
    let scale = 2.0 * params.eta_c0 * params.eta_c0;
    let fwd = causal_section(input, g, dt);
    let bwd = anticausal_section(input, g, dt);
    fwd.iter().zip(&bwd).map(|(f, b)| scale * (f + b)).collect()
}

/// A filtered record with the samples spoiled by filter start-up removed.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedRecord {
    pub values: Vec<f64>,
    pub dt: f64,
    /// Index of `values[0]` in the original record.
    pub offset: usize,
}

/// Canonical combination `w_plus · sum + diff` of a record, dropping `20/γ_m` at the start
/// and `40/γ` at the end where the filter sections have not settled.
pub fn bae_combine(traj: &Trajectory, params: &SystemParams, sector: WeightSector) -> CombinedRecord {
    let (sum, diff) = sector_channels(traj, sector);
    let filtered = pump_weight_filter(params, &sum, traj.dt);
    let front = ((20.0 / params.gamma_m) / traj.dt).ceil() as usize;
    let back = ((40.0 / params.gamma) / traj.dt).ceil() as usize;
    let end = traj.len().saturating_sub(back);
    let start = front.min(end);
    CombinedRecord {
        values: (start..end).map(|k| filtered[k] + diff[k]).collect(),
        dt: traj.dt,
        offset: start,
    }
}

/// `(γ_m - iΩ)` times the canonical combination: `K ⊛ sum + γ_m diff + d(diff)/dt`.
///
/// The mechanical pole is removed, so the result has short memory; the derivative is a
/// central difference and the first and last samples are dropped.
pub fn whitened_combination(traj: &Trajectory, params: &SystemParams, sector: WeightSector) -> CombinedRecord {
    let (sum, diff) = sector_channels(traj, sector);
    let k_sum = pump_filter(params, &sum, traj.dt);
    let n = traj.len();
    let h = traj.dt;
    let values = (1..n.saturating_sub(1))
        .map(|k| k_sum[k] + params.gamma_m * diff[k] + (diff[k + 1] - diff[k - 1]) / (2.0 * h))
        .collect();
    CombinedRecord { values, dt: h, offset: 1 }
}

/// Frequency response of the central difference used in [`whitened_combination`].
pub fn central_difference_response(params: &SystemParams, omega: f64, dt: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(params.gamma_m, -(omega * dt).sin() / dt)
}
