//! Cross-module properties of the exact solver, the closed forms and the structure checks.

use num_complex::Complex64;
use proptest::prelude::*;

use bae_sim::analytics::{
    bae_spectrum, closed_forms, detuned_spectrum, minimize_in_regime, optimal_pump, regime_classify, sql_bound, sql_pump,
    sql_spectrum_raw, thermal_floor, PumpOptimum, PumpRegime, ThermalConvention,
};
use bae_sim::estimator::{bae_weights, detuned_combination_psd, force_referred_psd, CombinationWeights, WeightSector};
use bae_sim::freq_solver::{output_psd, transfer_matrix, Output, OutputSelector};
use bae_sim::model::{pump_parameter, DerivedCouplings, SystemParams};
use bae_sim::numerics::{log_log_slope, log_space};
use bae_sim::structure::{
    coherent_coupling_eigen, eigenvector_orthonormality_defect, stability_eigenvalues, CoherentCoupling,
};

#[test]
fn raw_spectrum_touches_sql_at_balanced_pump() {
    let p = SystemParams::default();
    for w in [0.0, 1e-3, 0.2, 3.0] {
        let k = sql_pump(&p, w);
        let s = sql_spectrum_raw(&p, w, k).unwrap();
        let expected = thermal_floor(&p, ThermalConvention::Symmetric) + sql_bound(&p, w);
        assert!((s / expected - 1.0).abs() < 1e-14);
    }
}

#[test]
fn tuned_detuned_spectrum_is_bae() {
    let p = SystemParams::default();
    for w in log_space(1e-4, 5.0, 12) {
        let k = pump_parameter(&p, w);
        let exact = detuned_combination_psd(&p, w, k).unwrap();
        let closed = detuned_spectrum(&p, w, k, ThermalConvention::Symmetric).unwrap();
        assert!((exact / bae_spectrum(&p, w, k).unwrap() - 1.0).abs() < 1e-10);
        assert!((closed / exact - 1.0).abs() < 1e-10);
    }
}

#[test]
fn pump_optimum_diverges_as_symmetric_detuning_vanishes() {
    let p = SystemParams::default();
    let opt = optimal_pump(&p, 0.1, ThermalConvention::Symmetric).unwrap();
    assert!(matches!(opt.numeric, PumpOptimum::Monotone { .. }), "{:?}", opt.numeric);
    assert_eq!(regime_classify(&p, 0.1, 1e9).regime, PumpRegime::SmallPump);
    let k_opt = |d: f64| {
        let q = p.with_detunings(DerivedCouplings::new(d, 0.0));
        closed_forms(&q, 0.1, ThermalConvention::Symmetric).k_opt_intermediate.unwrap()
    };
    assert!((k_opt(1e-6) / k_opt(1e-4) - 10.0).abs() < 1e-9);
    let q = p.with_detunings(DerivedCouplings::new(0.0, 1e-2));
    assert!(closed_forms(&q, 0.1, ThermalConvention::Symmetric).k_opt_intermediate.is_none());
}

#[test]
fn intermediate_minimum_scales_as_square_root_of_detuning() {
    let base = SystemParams::new(1.0, 1e-3, 100.0, 0.5, 0.0).unwrap();
    let deltas = log_space(1e-5, 1e-3, 5);
    let excess: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            let p = base.with_detunings(DerivedCouplings::new(d, 0.1 * d));
            let floor = thermal_floor(&p, ThermalConvention::Symmetric);
            minimize_in_regime(&p, 0.0, PumpRegime::IntermediatePump, ThermalConvention::Symmetric).unwrap().1 - floor
        })
        .collect();
    let (slope, r2) = log_log_slope(&deltas, &excess);
    assert!((slope - 0.5).abs() < 0.02 && r2 > 0.999, "slope {slope}, R² {r2}");
}

#[test]
fn phase_sector_mirrors_amplitude_sector() {
    let p = SystemParams::default();
    for w in [0.0, 0.05, 1.0] {
        let a = force_referred_psd(&p, w, &bae_weights(&p, w, WeightSector::Amplitude)).unwrap();
        let f = force_referred_psd(&p, w, &bae_weights(&p, w, WeightSector::Phase)).unwrap();
        assert!((a / f - 1.0).abs() < 1e-12);
        let raw_a = force_referred_psd(&p, w, &CombinationWeights::raw(w, WeightSector::Amplitude)).unwrap();
        let raw_f = force_referred_psd(&p, w, &CombinationWeights::raw(w, WeightSector::Phase)).unwrap();
        assert!((raw_a / raw_f - 1.0).abs() < 1e-12);
    }
}

#[test]
fn coherent_coupling_eigenvalues_are_exact() {
    let p = SystemParams::default();
    let c = CoherentCoupling { omega_0: 1e3, eta_d: Complex64::new(0.3, -0.4) };
    let e = coherent_coupling_eigen(&p, &c);
    let split = (p.omega_m.powi(2) + 2.0 * c.eta_d.norm_sqr()).sqrt();
    assert!((e.frequencies[0] - c.omega_0).abs() < 1e-9);
    assert!((e.frequencies[1] - (c.omega_0 + split)).abs() < 1e-9);
    assert!((e.frequencies[2] - (c.omega_0 - split)).abs() < 1e-9);
    assert!(eigenvector_orthonormality_defect(&p, &c) < 1e-4);
}

fn tuned_params() -> impl Strategy<Value = SystemParams> {
    (-4.0f64..-2.0, -2.0f64..1.0, 0.0f64..10.0).prop_map(|(lgm, lk, n)| {
        SystemParams::new(1.0, 10f64.powf(lgm), 100.0, 0.5, n).unwrap().with_pump_at_dc(10f64.powf(lk))
    })
}

proptest! {
    #[test]
    fn tuned_system_is_stable(p in tuned_params()) {
        let r = stability_eigenvalues(&p);
        prop_assert!(r.stable);
        prop_assert!((r.max_real_part() + p.gamma_m).abs() < 1e-12);
    }

    #[test]
    fn combination_never_exceeds_raw(p in tuned_params(), w in 0.0f64..5.0) {
        let bae = force_referred_psd(&p, w, &bae_weights(&p, w, WeightSector::Amplitude)).unwrap();
        let raw = force_referred_psd(&p, w, &CombinationWeights::raw(w, WeightSector::Amplitude)).unwrap();
        prop_assert!(bae < raw);
    }

    #[test]
    fn upper_amplitude_output_is_flat(p in tuned_params(), w in 0.0f64..5.0) {
        let s = output_psd(&p, w, &OutputSelector::Single(Output::BetaPlusA), None).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn back_action_input_is_nulled(p in tuned_params(), w in 0.0f64..5.0) {
        let tm = transfer_matrix(&p, w).unwrap();
        for sector in [WeightSector::Amplitude, WeightSector::Phase] {
            let row = tm.combined_row(&bae_weights(&p, w, sector).output_weights());
            for input in sector.back_action_inputs() {
                prop_assert!(row[input.index()].norm() < 1e-12 * (1.0 + row.iter().map(|c| c.norm()).fold(0.0, f64::max)));
            }
        }
    }
}
