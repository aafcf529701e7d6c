//! Monte Carlo detection of a resonant force pulse with a matched filter on the
//! back-action-evading combination.
//!
//! Each trial records `τ + 2·margin` of data with the pulse centred, forms
//! `(γ_m - iΩ) × (combined channel)` (which removes the mechanical pole and leaves short-memory
//! noise), and estimates `f_{s0}` with the frequency-domain matched filter
//! `f̂ = Re Σ_k G_k* Z_k / V_k / Σ_k |G_k|² / V_k`. `G` is the noiseless response to a unit
//! pulse processed the same way and `V_k` the expected bin power of the noise.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::Serialize;

use crate::analytics::detection_threshold;
use crate::estimator::{bae_weights, force_referred_psd, CombinationWeights, WeightSector};
use crate::freq_solver::{psd_of_row, transfer_matrix};
use crate::model::{pump_parameter, SignalPulse, SystemParams};
use crate::numerics::linear_fit;

use super::filter::{central_difference_response, whitened_combination};
use super::integrate::{check_params, integrate_with, IntegrationConfig, PulseSchedule};
use super::{derive_seed, TimeDomainError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionConfig {
    pub trials: usize,
    pub seed: u64,
    pub dt: f64,
    /// Quiet data on each side of the pulse, in units of `1/γ`.
    pub margin: f64,
    pub sector: WeightSector,
}

impl DetectionConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            dt: 0.05,
            margin: 50.0,
            sector: WeightSector::Amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub amplitude: f64,
    /// `√(S_f/τ)` with the exact force-referred PSD at zero frequency.
    pub threshold: f64,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    /// `mean / std` over trials.
    pub snr: f64,
    /// Standard deviation of the estimate predicted from the noise spectrum.
    pub predicted_std: f64,
    /// `amplitude / predicted_std`.
    pub predicted_snr: f64,
    /// Fraction of trials whose estimate exceeds the threshold.
    pub detection_rate: f64,
    /// Fraction of trials whose estimate is positive.
    pub positive_rate: f64,
    #[serde(skip)]
    pub estimates: Vec<f64>,
}

/// Precomputed matched filter for one parameter set, pulse shape and record layout.
pub struct MatchedFilter {
    steps: usize,
    center: f64,
    coefficients: Vec<Complex64>,
    normalization: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl MatchedFilter {
    pub fn new(params: &SystemParams, pulse: &SignalPulse, config: &DetectionConfig) -> Result<Self, TimeDomainError> {
        check_params(params, config.dt)?;
        let margin = config.margin / params.gamma;
        let steps = ((pulse.tau + 2.0 * margin) / config.dt).ceil() as usize;
        let center = 0.5 * steps as f64 * config.dt;
        let unit = pulse.with_amplitude(1.0);
        let mut cfg = IntegrationConfig::new(steps as f64 * config.dt, config.dt, 0);
        cfg.stochastic = false;
        cfg.pulse = Some(PulseSchedule { pulse: unit, center });
        let response = whitened_combination(&integrate_with(params, &cfg)?, params, config.sector);
        let m = response.values.len();
        let fft = FftPlanner::<f64>::new().plan_fft(m, FftDirection::Inverse);
        let mut g: Vec<Complex64> = response.values.iter().map(|&v| Complex64::from(v)).collect();
        fft.process(&mut g);

        let tm_weights = |w_plus: f64, w_minus: f64| CombinationWeights {
            frequency: 0.0,
            w_plus: Complex64::from(w_plus),
            w_minus: Complex64::from(w_minus),
            sector: config.sector,
        };
        let sum_w = tm_weights(1.0, 0.0).output_weights();
        let diff_w = tm_weights(0.0, 1.0).output_weights();
        let bins: Vec<f64> = (0..m)
            .map(|k| {
                let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
                2.0 * PI * kk / (m as f64 * config.dt)
            })
            .collect();
        let powers: Vec<f64> = bins
            .par_iter()
            .map(|&w| -> Result<f64, TimeDomainError> {
                let tm = transfer_matrix(params, w).map_err(|e| TimeDomainError::Numerical(e.to_string()))?;
                let sum = tm.combined_row(&sum_w);
                let diff = tm.combined_row(&diff_w);
                let kw = pump_parameter(params, w);
                let dw = central_difference_response(params, w, config.dt);
                let row: [Complex64; 8] = std::array::from_fn(|i| kw * sum[i] + dw * diff[i]);
                // E|Z_k|² = m S_two / dt with S_two half the single-sided PSD
                Ok(m as f64 * psd_of_row(params, &row, None) / (2.0 * config.dt))
            })
            .collect::<Result<_, _>>()?;
        let coefficients: Vec<Complex64> = g.iter().zip(&powers).map(|(gk, v)| gk.conj() / *v).collect();
        let normalization: f64 = g.iter().zip(&powers).map(|(gk, v)| gk.norm_sqr() / v).sum();
        Ok(Self {
            steps,
            center,
            coefficients,
            normalization,
            fft,
        })
    }

    /// Predicted standard deviation of the estimate.
    pub fn predicted_std(&self) -> f64 {
        1.0 / self.normalization.sqrt()
    }

    pub fn estimate(&self, record: &[f64]) -> f64 {
        let mut z: Vec<Complex64> = record.iter().map(|&v| Complex64::from(v)).collect();
        self.fft.process(&mut z);
        let acc: Complex64 = z.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum();
        acc.re / self.normalization
    }

    fn trial(&self, params: &SystemParams, pulse: &SignalPulse, config: &DetectionConfig, seed: u64) -> Result<f64, TimeDomainError> {
        let mut cfg = IntegrationConfig::new(self.steps as f64 * config.dt, config.dt, seed);
        cfg.pulse = Some(PulseSchedule { pulse: *pulse, center: self.center });
        let traj = integrate_with(params, &cfg)?;
        Ok(self.estimate(&whitened_combination(&traj, params, config.sector).values))
    }
}

/// Force detection threshold `√(S_f/τ)` of a pulse in the given sector.
pub fn sector_threshold(params: &SystemParams, pulse: &SignalPulse, sector: WeightSector) -> Result<f64, TimeDomainError> {
    let s = force_referred_psd(params, 0.0, &bae_weights(params, 0.0, sector))
        .map_err(|e| TimeDomainError::Numerical(e.to_string()))?;
    Ok(detection_threshold(pulse, s))
}

fn summarize(amplitude: f64, threshold: f64, predicted_std: f64, estimates: Vec<f64>) -> DetectionOutcome {
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let std = (estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    DetectionOutcome {
        amplitude,
        threshold,
        trials: estimates.len(),
        mean,
        std,
        snr: mean / std,
        predicted_std,
        predicted_snr: amplitude / predicted_std,
        detection_rate: estimates.iter().filter(|&&v| v > threshold).count() as f64 / n,
        positive_rate: estimates.iter().filter(|&&v| v > 0.0).count() as f64 / n,
        estimates,
    }
}

/// Runs `trials` independent records with the pulse as given.
pub fn run_detection_experiment(
    params: &SystemParams,
    pulse: &SignalPulse,
    sector: WeightSector,
    trials: usize,
    seed: u64,
) -> Result<DetectionOutcome, TimeDomainError> {
    let config = DetectionConfig { sector, ..DetectionConfig::new(trials, seed) };
    let mut out = run_detection_sweep(params, pulse, &[pulse.f_s0], &config)?;
    Ok(out.remove(0))
}

/// Runs independent trial sets at each absolute amplitude in `amplitudes`.
pub fn run_detection_sweep(
    params: &SystemParams,
    pulse: &SignalPulse,
    amplitudes: &[f64],
    config: &DetectionConfig,
) -> Result<Vec<DetectionOutcome>, TimeDomainError> {
    if config.trials < 2 {
        return Err(TimeDomainError::TooFewTrials { trials: config.trials });
    }
    let filter = MatchedFilter::new(params, pulse, config)?;
    let threshold = sector_threshold(params, pulse, config.sector)?;
    amplitudes
        .iter()
        .enumerate()
        .map(|(i, &amp)| {
            let p = pulse.with_amplitude(amp);
            let estimates = (0..config.trials)
                .into_par_iter()
                .map(|t| filter.trial(params, &p, config, derive_seed(config.seed, i as u64, t as u64)))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(summarize(amp, threshold, filter.predicted_std(), estimates))
        })
        .collect()
}

/// Least-squares fit of SNR against amplitude: `(slope, R²)`.
pub fn snr_linearity(outcomes: &[DetectionOutcome]) -> (f64, f64) {
    let x: Vec<f64> = outcomes.iter().map(|o| o.amplitude).collect();
    let y: Vec<f64> = outcomes.iter().map(|o| o.snr).collect();
    linear_fit(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thermal_params() -> SystemParams {
        SystemParams::new(1.0, 1e-2, 100.0, 0.5, 20.0).unwrap()
    }

    #[test]
    fn noiseless_estimate_is_exact() {
        let p = thermal_params();
        let pulse = SignalPulse::new(1.0, 0.3, 20.0).unwrap();
        let cfg = DetectionConfig::new(4, 1);
        let f = MatchedFilter::new(&p, &pulse, &cfg).unwrap();
        let mut ic = IntegrationConfig::new(f.steps as f64 * cfg.dt, cfg.dt, 0);
        ic.stochastic = false;
        ic.pulse = Some(PulseSchedule { pulse: pulse.with_amplitude(2.5), center: f.center });
        let t = integrate_with(&p, &ic).unwrap();
        let est = f.estimate(&whitened_combination(&t, &p, cfg.sector).values);
        assert!((est - 2.5).abs() < 1e-9, "{est}");
    }

    #[test]
    fn null_pulse_is_unbiased() {
        let p = thermal_params();
        let pulse = SignalPulse::new(0.0, 0.0, 20.0).unwrap();
        let out = run_detection_experiment(&p, &pulse, WeightSector::Amplitude, 200, 4).unwrap();
        assert!(out.mean.abs() < 4.0 * out.std / (200f64).sqrt());
        assert!((out.positive_rate - 0.5).abs() < 0.15);
        assert!((out.std / out.predicted_std - 1.0).abs() < 0.15, "{} {}", out.std, out.predicted_std);
    }

    #[test]
    fn zero_trials_rejected() {
        let p = thermal_params();
        let pulse = SignalPulse::new(1.0, 0.0, 20.0).unwrap();
        let cfg = DetectionConfig::new(0, 1);
        assert!(matches!(
            run_detection_sweep(&p, &pulse, &[1.0], &cfg),
            Err(TimeDomainError::TooFewTrials { .. })
        ));
    }
}
