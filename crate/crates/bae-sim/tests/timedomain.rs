//! Statistical and reproducibility properties of the time-domain oracle.

use bae_sim::analytics::bae_spectrum;
use bae_sim::estimator::{bae_weights, force_referred_psd, WeightSector};
use bae_sim::freq_solver::{transfer_matrix, Input, Output};
use bae_sim::model::{pump_parameter, SignalPulse, SystemParams};
use bae_sim::numerics::linear_fit;
use bae_sim::timedomain::filter::bae_combine;
use bae_sim::timedomain::validation::{default_bands, step_halving_check};
use bae_sim::timedomain::{
    estimate_psd, integrate, integrate_with, run_detection_sweep, DetectionConfig, IntegrationConfig,
    PsdValidationConfig, TimeDomainError, WelchConfig,
};

fn thermal_params() -> SystemParams {
    SystemParams::new(1.0, 1e-2, 100.0, 0.5, 20.0).unwrap()
}

#[test]
fn identical_inputs_give_bit_identical_records() {
    let p = SystemParams::default();
    let a = integrate(&p, None, 500.0, 0.05, 11).unwrap();
    let b = integrate(&p, None, 500.0, 0.05, 11).unwrap();
    let c = integrate(&p, None, 500.0, 0.05, 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.outputs, c.outputs);
}

#[test]
fn decoupled_outputs_are_vacuum() {
    let p = SystemParams { eta_c0: 0.0, ..SystemParams::default() };
    let traj = integrate(&p, None, 0.05 * 1024.0 * 64.0, 0.05, 5).unwrap();
    for o in Output::ALL {
        let est = estimate_psd(traj.output(o), traj.dt, &WelchConfig::new(1024)).unwrap();
        let band = est.compare_band(0.05, 10.0, |_| 1.0);
        assert!(band.z.abs() < 4.0, "{o:?}: {band:?}");
    }
}

#[test]
fn unstable_parameters_are_rejected_before_integration() {
    let p = SystemParams { eta_c0: 2.0, ..SystemParams::default() }.with_sideband_detunings(0.01, 0.01);
    assert!(matches!(integrate(&p, None, 10.0, 0.05, 1), Err(TimeDomainError::Unstable { .. })));
}

#[test]
fn halving_the_step_changes_band_averages_below_one_percent() {
    let p = SystemParams { gamma_m: 0.02, ..SystemParams::default() };
    let cfg = PsdValidationConfig { segment_len: 2048, segments: 32, seed: 3, ..Default::default() };
    for h in step_halving_check(&p, &cfg, &default_bands()).unwrap() {
        assert!(h.relative_change.abs() < 0.01, "{h:?}");
    }
}

#[test]
fn thermal_mechanical_spectrum_is_lorentzian() {
    let p = SystemParams { eta_c0: 0.0, gamma_m: 0.1, n_thermal: 5.0, ..SystemParams::default() };
    let n = 16_384;
    let mut cfg = IntegrationConfig::new(0.05 * (n * 200) as f64, 0.05, 8);
    cfg.store_states = true;
    let traj = integrate_with(&p, &cfg).unwrap();
    let d_a: Vec<f64> = traj.states.as_ref().unwrap().iter().map(|s| s[4]).collect();
    let est = estimate_psd(&d_a, traj.dt, &WelchConfig::new(n)).unwrap();
    let gm = p.gamma_m;
    let lorentzian = |w: f64| 2.0 * gm * (2.0 * p.n_thermal + 1.0) / (gm * gm + w * w);
    for (lo, hi) in [(0.0, 0.05), (0.05, 0.15), (0.15, 0.5)] {
        let band = est.compare_band(lo, hi, lorentzian);
        assert!(band.z.abs() < 4.0, "{band:?}");
    }
    // 1/S is linear in Ω² with intercept/slope = γ_m²
    let range = est.band(0.05, 0.3);
    let x: Vec<f64> = est.frequencies[range.clone()].iter().map(|w| w * w).collect();
    let y: Vec<f64> = est.values[range].iter().map(|s| 1.0 / s).collect();
    let (slope, r2) = linear_fit(&x, &y);
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let width = ((my - slope * mx) / slope).sqrt();
    assert!((width / gm - 1.0).abs() < 0.1 && r2 > 0.9, "half-width {width}, R² {r2}");
}

#[test]
fn combined_channel_is_force_referred_bae_spectrum() {
    let p = SystemParams { gamma_m: 0.02, ..SystemParams::default() };
    let n = 2048;
    let duration = 0.05 * (n * 64) as f64 + 20.0 / p.gamma_m + 100.0;
    let traj = integrate(&p, None, duration, 0.05, 21).unwrap();
    let combined = bae_combine(&traj, &p, WeightSector::Amplitude);
    let est = estimate_psd(&combined.values, combined.dt, &WelchConfig::new(n)).unwrap();
    let gain = |w: f64| {
        let tm = transfer_matrix(&p, w).unwrap();
        tm.combined_row(&bae_weights(&p, w, WeightSector::Amplitude).output_weights())[Input::ForceA.index()]
            .norm_sqr()
    };
    for (lo, hi) in [(0.1, 0.3), (0.3, 1.0)] {
        let band = est.compare_band(lo, hi, |w| gain(w) * bae_spectrum(&p, w, pump_parameter(&p, w)).unwrap());
        assert!(band.z.abs() < 4.0, "{band:?}");
        let w = 0.5 * (lo + hi);
        let exact = force_referred_psd(&p, w, &bae_weights(&p, w, WeightSector::Amplitude)).unwrap();
        assert!((exact / bae_spectrum(&p, w, pump_parameter(&p, w)).unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn detection_null_and_linearity() {
    let p = thermal_params();
    let pulse = SignalPulse::new(1.0, 0.0, 20.0).unwrap();
    let cfg = DetectionConfig::new(400, 77);
    let out = run_detection_sweep(&p, &pulse, &[0.0, 1.0, 2.0], &cfg).unwrap();
    let bound = 3.0 / (cfg.trials as f64).sqrt();
    assert!(out[0].snr.abs() < bound, "null SNR {}", out[0].snr);
    assert!((out[0].positive_rate - 0.5).abs() < 0.1);
    let ratio = out[2].mean / out[1].mean;
    let err = 2.0 * out[1].std / (cfg.trials as f64).sqrt();
    assert!((out[2].mean - 2.0 * out[1].mean).abs() < 4.0 * err, "ratio {ratio}");
    for o in &out {
        assert!((o.std / o.predicted_std - 1.0).abs() < 0.15);
    }
}

#[test]
fn detection_is_reproducible_per_seed() {
    let p = thermal_params();
    let pulse = SignalPulse::new(1.0, 0.0, 20.0).unwrap();
    let cfg = DetectionConfig::new(16, 5);
    let a = run_detection_sweep(&p, &pulse, &[1.0], &cfg).unwrap();
    let b = run_detection_sweep(&p, &pulse, &[1.0], &cfg).unwrap();
    assert_eq!(a[0].estimates, b[0].estimates);
}
