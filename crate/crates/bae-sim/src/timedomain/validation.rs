//! Monte Carlo comparison of simulated output spectra with the frequency-domain solver.

use serde::{Deserialize, Serialize};

use crate::estimator::{bae_weights, WeightSector};
use crate::freq_solver::{output_psd, psd_of_row, transfer_matrix, Output, OutputSelector};
use crate::model::SystemParams;

use super::filter::bae_combine;
use super::integrate::{integrate, integrate_paired, Trajectory};
use super::welch::{estimate_psd, BandComparison, PsdEstimate, WelchConfig, WindowKind};
use super::TimeDomainError;

/// Channels compared against the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationChannel {
    /// `β_{a+}`, flat at one.
    BetaPlusA,
    /// `β_{a-}` without post-processing.
    RawBetaMinusA,
    /// Canonical amplitude-sector combination.
    Bae,
}

impl ValidationChannel {
    pub const ALL: [ValidationChannel; 3] = [Self::BetaPlusA, Self::RawBetaMinusA, Self::Bae];

    pub fn label(self) -> &'static str {
        match self {
            Self::BetaPlusA => "beta_plus_a",
            Self::RawBetaMinusA => "raw_beta_minus_a",
            Self::Bae => "bae_combination",
        }
    }

    /// Exact single-sided output PSD at `Ω`.
    pub fn psd(self, params: &SystemParams, omega: f64) -> f64 {
        let single = |o| output_psd(params, omega, &OutputSelector::Single(o), None).unwrap_or(f64::NAN);
        match self {
            Self::BetaPlusA => single(Output::BetaPlusA),
            Self::RawBetaMinusA => single(Output::BetaMinusA),
            Self::Bae => transfer_matrix(params, omega)
                .map(|tm| {
                    let w = bae_weights(params, omega, WeightSector::Amplitude);
                    psd_of_row(params, &tm.combined_row(&w.output_weights()), None)
                })
                .unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdValidationConfig {
    pub segment_len: usize,
    pub segments: usize,
    pub dt: f64,
    pub seed: u64,
    pub window: WindowKind,
}

impl Default for PsdValidationConfig {
    fn default() -> Self {
        Self {
            segment_len: 8192,
            segments: 400,
            dt: 0.05,
            seed: 20_240_601,
            window: WindowKind::BlackmanHarris,
        }
    }
}

/// One band of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub channel: ValidationChannel,
    pub lo: f64,
    pub hi: f64,
}

/// Bands used by default: the flat channel broadly, the raw and combined channels in two bands
/// above the mechanical linewidth.
pub fn default_bands() -> Vec<BandSpec> {
    let mut v = vec![BandSpec { channel: ValidationChannel::BetaPlusA, lo: 0.05, hi: 2.0 }];
    for channel in [ValidationChannel::RawBetaMinusA, ValidationChannel::Bae] {
        v.push(BandSpec { channel, lo: 0.1, hi: 0.3 });
        v.push(BandSpec { channel, lo: 0.3, hi: 1.0 });
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandResult {
    pub channel: ValidationChannel,
    #[serde(flatten)]
    pub comparison: BandComparison,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdValidation {
    pub bands: Vec<BandResult>,
    pub estimates: Vec<(ValidationChannel, PsdEstimate)>,
    pub steps: usize,
}

/// Record length needed for `cfg.segments` segments after the combination filter settles.
pub fn required_duration(params: &SystemParams, cfg: &PsdValidationConfig) -> f64 {
    let front = (20.0 / params.gamma_m / cfg.dt).ceil() + 1.0;
    let back = (40.0 / params.gamma / cfg.dt).ceil() + 1.0;
    (front + back + (cfg.segments * cfg.segment_len) as f64) * cfg.dt
}

/// Estimates every channel over the same settled span of one trajectory.
pub fn channel_estimates(
    traj: &Trajectory,
    params: &SystemParams,
    welch: &WelchConfig,
) -> Result<Vec<(ValidationChannel, PsdEstimate)>, TimeDomainError> {
    let combined = bae_combine(traj, params, WeightSector::Amplitude);
    let span = combined.offset..combined.offset + combined.values.len();
    ValidationChannel::ALL
        .iter()
        .map(|&ch| {
            let est = match ch {
                ValidationChannel::BetaPlusA => estimate_psd(&traj.output(Output::BetaPlusA)[span.clone()], traj.dt, welch),
                ValidationChannel::RawBetaMinusA => {
                    estimate_psd(&traj.output(Output::BetaMinusA)[span.clone()], traj.dt, welch)
                }
                ValidationChannel::Bae => estimate_psd(&combined.values, traj.dt, welch),
            }?;
            Ok((ch, est))
        })
        .collect()
}

fn compare(
    estimates: &[(ValidationChannel, PsdEstimate)],
    params: &SystemParams,
    bands: &[BandSpec],
) -> Vec<BandResult> {
    bands
        .iter()
        .map(|b| {
            let est = &estimates.iter().find(|(c, _)| *c == b.channel).expect("all channels estimated").1;
            BandResult {
                channel: b.channel,
                comparison: est.compare_band(b.lo, b.hi, |w| b.channel.psd(params, w)),
            }
        })
        .collect()
}

pub fn run_psd_validation(
    params: &SystemParams,
    cfg: &PsdValidationConfig,
    bands: &[BandSpec],
) -> Result<PsdValidation, TimeDomainError> {
    let duration = required_duration(params, cfg);
    let traj = integrate(params, None, duration, cfg.dt, cfg.seed)?;
    let welch = WelchConfig { window: cfg.window, ..WelchConfig::new(cfg.segment_len) };
    let estimates = channel_estimates(&traj, params, &welch)?;
    Ok(PsdValidation {
        bands: compare(&estimates, params, bands),
        estimates,
        steps: traj.len(),
    })
}

/// Relative change of band averages between a run at `dt` and the same path at `dt/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepHalving {
    pub channel: ValidationChannel,
    pub lo: f64,
    pub hi: f64,
    pub coarse: f64,
    pub fine: f64,
    pub relative_change: f64,
}

pub fn step_halving_check(
    params: &SystemParams,
    cfg: &PsdValidationConfig,
    bands: &[BandSpec],
) -> Result<Vec<StepHalving>, TimeDomainError> {
    let duration = required_duration(params, cfg);
    let (coarse, fine) = integrate_paired(params, duration, cfg.dt, cfg.seed)?;
    let welch_c = WelchConfig { window: cfg.window, ..WelchConfig::new(cfg.segment_len) };
    let welch_f = WelchConfig { window: cfg.window, ..WelchConfig::new(2 * cfg.segment_len) };
    let est_c = channel_estimates(&coarse, params, &welch_c)?;
    let est_f = channel_estimates(&fine, params, &welch_f)?;
    Ok(bands
        .iter()
        .map(|b| {
            let band_mean = |est: &[(ValidationChannel, PsdEstimate)]| {
                let e = &est.iter().find(|(c, _)| *c == b.channel).expect("all channels estimated").1;
                let r = e.band(b.lo, b.hi);
                e.values[r.clone()].iter().sum::<f64>() / r.len().max(1) as f64
            };
            let (c, f) = (band_mean(&est_c), band_mean(&est_f));
            StepHalving {
                channel: b.channel,
                lo: b.lo,
                hi: b.hi,
                coarse: c,
                fine: f,
                relative_change: f / c - 1.0,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_channel_is_unity() {
        let p = SystemParams::default();
        for w in [0.0, 0.1, 3.0] {
            assert!((ValidationChannel::BetaPlusA.psd(&p, w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_curves_are_finite() {
        let p = SystemParams::default();
        for w in [0.05, 0.2, 1.0] {
            let raw = ValidationChannel::RawBetaMinusA.psd(&p, w);
            let bae = ValidationChannel::Bae.psd(&p, w);
            assert!(raw.is_finite() && bae.is_finite());
        }
    }

    #[test]
    fn small_validation_run() {
        let p = SystemParams { gamma_m: 0.05, ..SystemParams::default() };
        let cfg = PsdValidationConfig { segment_len: 1024, segments: 40, seed: 9, ..Default::default() };
        let v = run_psd_validation(&p, &cfg, &default_bands()).unwrap();
        for b in &v.bands {
            assert!(b.comparison.z.abs() < 4.5, "{:?}", b);
        }
        assert_eq!(v.estimates[0].1.segment_count, 40);
    }
}
