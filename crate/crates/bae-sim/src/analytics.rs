//! Closed-form force-referred spectral densities and pump-level optimization.
//!
//! Every spectrum here is force-referred and single-sided, in the units of
//! [`crate::freq_solver`]. `a = γ_m² + Ω²` and `b = γ² + Ω²` recur throughout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{detuning_kernel, xi_factor, SignalPulse, SystemParams};
use crate::numerics::{minimize_log, BracketLocation, MinimizeError};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("pump parameter must be positive, got {0}")]
    NonPositivePump(f64),
    #[error("regime {0:?} has an empty pump window at this frequency")]
    EmptyWindow(PumpRegime),
    #[error(transparent)]
    Minimize(#[from] MinimizeError),
}

/// Which thermal prefactor the detuned formulas use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalConvention {
    /// `2 γ_m (2 n_T + 1)`, consistent with the tuned spectra.
    #[default]
    Symmetric,
    /// `2 γ_m (n_T + 1)`, the prefactor written with the detuned closed forms.
    OccupancyPlusOne,
}

/// Thermal floor of the force-referred spectrum.
pub fn thermal_floor(params: &SystemParams, convention: ThermalConvention) -> f64 {
    let n = params.n_thermal;
    match convention {
        ThermalConvention::Symmetric => 2.0 * params.gamma_m * (2.0 * n + 1.0),
        ThermalConvention::OccupancyPlusOne => 2.0 * params.gamma_m * (n + 1.0),
    }
}

fn mech_sq(params: &SystemParams, omega: f64) -> f64 {
    params.gamma_m * params.gamma_m + omega * omega
}

fn opt_sq(params: &SystemParams, omega: f64) -> f64 {
    params.gamma * params.gamma + omega * omega
}

fn check_pump(k: f64) -> Result<(), AnalyticsError> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(AnalyticsError::NonPositivePump(k))
    }
}

/// Shot noise plus back action, without the thermal floor: `a/K + K`.
pub fn sql_quantum_part(params: &SystemParams, omega: f64, k: f64) -> Result<f64, AnalyticsError> {
    check_pump(k)?;
    Ok(mech_sq(params, omega) / k + k)
}

/// Raw (single-output) spectrum: thermal + shot + back action.
pub fn sql_spectrum_raw(params: &SystemParams, omega: f64, k: f64) -> Result<f64, AnalyticsError> {
    Ok(thermal_floor(params, ThermalConvention::Symmetric) + sql_quantum_part(params, omega, k)?)
}

/// Standard quantum limit `2 √(γ_m² + Ω²)`.
pub fn sql_bound(params: &SystemParams, omega: f64) -> f64 {
    2.0 * mech_sq(params, omega).sqrt()
}

/// Pump level at which the raw spectrum touches the SQL.
pub fn sql_pump(params: &SystemParams, omega: f64) -> f64 {
    mech_sq(params, omega).sqrt()
}

/// Back-action-evading spectrum: thermal + shot noise only.
pub fn bae_spectrum(params: &SystemParams, omega: f64, k: f64) -> Result<f64, AnalyticsError> {
    check_pump(k)?;
    Ok(thermal_floor(params, ThermalConvention::Symmetric) + mech_sq(params, omega) / k)
}

/// Detuned spectrum of the zero-detuning combination, referred to the optimal force mix.
pub fn detuned_spectrum(
    params: &SystemParams,
    omega: f64,
    k: f64,
    convention: ThermalConvention,
) -> Result<f64, AnalyticsError> {
    Ok(thermal_floor(params, convention) + detuned_quantum_part(params, omega, k)?)
}

/// [`detuned_spectrum`] without the thermal floor.
pub fn detuned_quantum_part(params: &SystemParams, omega: f64, k: f64) -> Result<f64, AnalyticsError> {
    check_pump(k)?;
    let dc = params.derived();
    let a = mech_sq(params, omega);
    let b = opt_sq(params, omega);
    let d = detuning_kernel(params, omega);
    let xi = xi_factor(params, omega);
    let s = Complex64::new(params.gamma, -omega);
    let den = 1.0 + d.norm_sqr() * k * k;
    let bracket = (Complex64::from(dc.small_delta) - xi * k * d * s).norm_sqr()
        + 4.0 * params.gamma * params.gamma * d.norm_sqr() * a;
    Ok(a / (k * den) + k * bracket / (b * den))
}

/// Small-pump form: thermal + shot + residual back action.
pub fn small_pump_spectrum(
    params: &SystemParams,
    omega: f64,
    k: f64,
    convention: ThermalConvention,
) -> Result<f64, AnalyticsError> {
    check_pump(k)?;
    Ok(thermal_floor(params, convention)
        + mech_sq(params, omega) / k
        + residual_back_action(params, omega, k)?)
}

/// Residual back action of the small-pump form: `K (δ²/b + 4γ²Δ²/b²)`.
pub fn residual_back_action(params: &SystemParams, omega: f64, k: f64) -> Result<f64, AnalyticsError> {
    check_pump(k)?;
    let dc = params.derived();
    let b = opt_sq(params, omega);
    let g = params.gamma;
    Ok(k * (dc.small_delta.powi(2) / b + 4.0 * g * g * dc.capital_delta.powi(2) / (b * b)))
}

/// Pump-level regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PumpRegime {
    SmallPump,
    IntermediatePump,
    LargePump,
}

impl PumpRegime {
    pub fn label(self) -> &'static str {
        match self {
            PumpRegime::SmallPump => "small",
            PumpRegime::IntermediatePump => "intermediate",
            PumpRegime::LargePump => "large",
        }
    }
}

/// Which small-pump sub-case applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmallPumpCase {
    /// `|Δ| >= |δ|`: the back-action term is negligible and the minimum sits at `K_crit1`.
    SymmetricDominated,
    /// `|Δ| < |δ|`: the interior optimum applies.
    SplitDominated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    pub regime: PumpRegime,
    pub k_crit1: f64,
    pub k_crit2: f64,
    pub small_pump_case: SmallPumpCase,
}

/// Critical pump levels `(K_crit1, K_crit2)`; both infinite when `Δ = 0`.
pub fn critical_pumps(params: &SystemParams, omega: f64) -> (f64, f64) {
    let dc = params.derived();
    if dc.capital_delta == 0.0 {
        return (f64::INFINITY, f64::INFINITY);
    }
    let big = dc.capital_delta.abs();
    let a = mech_sq(params, omega).sqrt();
    let b = opt_sq(params, omega).sqrt();
    (a * dc.small_delta.abs() / big, a * b / big)
}

pub fn regime_classify(params: &SystemParams, omega: f64, k: f64) -> RegimeClassification {
    let (k_crit1, k_crit2) = critical_pumps(params, omega);
    let regime = if k < k_crit1 {
        PumpRegime::SmallPump
    } else if k < k_crit2 {
        PumpRegime::IntermediatePump
    } else {
        PumpRegime::LargePump
    };
    let dc = params.derived();
    let small_pump_case = if dc.capital_delta.abs() >= dc.small_delta.abs() {
        SmallPumpCase::SymmetricDominated
    } else {
        SmallPumpCase::SplitDominated
    };
    RegimeClassification {
        regime,
        k_crit1,
        k_crit2,
        small_pump_case,
    }
}

/// Per-regime closed-form optima. `None` where a formula is undefined (a zero detuning part).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForms {
    /// Small pump, interior optimum.
    pub k_opt_small: Option<f64>,
    /// Small pump with `|Δ| >= |δ|`: minimum at `K_crit1`.
    pub s_min_small_symmetric: Option<f64>,
    /// Small pump with `|Δ| << |δ|`.
    pub s_min_small_split: Option<f64>,
    pub k_opt_intermediate: Option<f64>,
    pub s_min_intermediate: Option<f64>,
    pub k_opt_large: f64,
    /// Large pump: minimum at `K_crit2`.
    pub s_min_large: Option<f64>,
}

pub fn closed_forms(params: &SystemParams, omega: f64, convention: ThermalConvention) -> ClosedForms {
    let thermal = thermal_floor(params, convention);
    let dc = params.derived();
    let (big, small) = (dc.capital_delta.abs(), dc.small_delta.abs());
    let a = mech_sq(params, omega);
    let b = opt_sq(params, omega);
    let g = params.gamma;
    let sql = sql_bound(params, omega);
    let nonzero = |x: f64| (x > 0.0).then_some(x);

    let residual = small * small * b + 4.0 * g * g * big * big;
    let k_opt_small = nonzero(residual).map(|r| a.sqrt() * b / r.sqrt());
    let s_min_small_symmetric = nonzero(small).map(|s| thermal + sql * big / (2.0 * s));
    let s_min_small_split = Some(thermal + sql * small / b.sqrt());
    let k_opt_intermediate =
        nonzero(big).map(|d| a.sqrt() * b.powf(0.25) / (3f64.powf(0.25) * d.sqrt()));
    let s_min_intermediate = nonzero(big).map(|d| {
        thermal + (3f64.sqrt() + 1.0) / (2.0 * 3f64.powf(0.25)) * d.sqrt() / b.powf(0.25) * sql
    });
    let k_opt_large = (4.0 * g * g * a / b).sqrt();
    let s_min_large = nonzero(big).map(|d| thermal + sql * b.sqrt() / (2.0 * d));
    ClosedForms {
        k_opt_small,
        s_min_small_symmetric,
        s_min_small_split,
        k_opt_intermediate,
        s_min_intermediate,
        k_opt_large,
        s_min_large,
    }
}

/// Numeric outcome of minimizing the detuned spectrum over the pump level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PumpOptimum {
    /// An interior minimum.
    Interior { k_opt: f64, s_min: f64, regime: PumpRegime },
    /// The spectrum keeps decreasing up to the search limit; no finite optimum.
    Monotone { k_limit: f64, s_at_limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalPump {
    pub numeric: PumpOptimum,
    pub closed: ClosedForms,
    pub classification: RegimeClassification,
}

/// Search range for pump optimization, relative to `√(γ_m² + Ω²)`.
pub const PUMP_SEARCH_DECADES: f64 = 1e6;

fn search_window(params: &SystemParams, omega: f64) -> (f64, f64) {
    let scale = sql_pump(params, omega);
    (scale / PUMP_SEARCH_DECADES, scale * PUMP_SEARCH_DECADES)
}

/// Global numeric optimum of the detuned spectrum, with closed forms attached.
pub fn optimal_pump(
    params: &SystemParams,
    omega: f64,
    convention: ThermalConvention,
) -> Result<OptimalPump, AnalyticsError> {
    let (lo, hi) = search_window(params, omega);
    let thermal = thermal_floor(params, convention);
    let m = minimize_log(|k| detuned_quantum_part(params, omega, k).unwrap_or(f64::NAN), lo, hi)?;
    let numeric = match m.location {
        BracketLocation::UpperEdge => PumpOptimum::Monotone {
            k_limit: m.x,
            s_at_limit: thermal + m.value,
        },
        _ => PumpOptimum::Interior {
            k_opt: m.x,
            s_min: thermal + m.value,
            regime: regime_classify(params, omega, m.x).regime,
        },
    };
    Ok(OptimalPump {
        numeric,
        closed: closed_forms(params, omega, convention),
        classification: regime_classify(params, omega, m.x),
    })
}

/// Minimum of the detuned spectrum with the pump restricted to one regime's window.
///
/// Returns `(K, S)`; a minimum on the window boundary is a valid result.
pub fn minimize_in_regime(
    params: &SystemParams,
    omega: f64,
    regime: PumpRegime,
    convention: ThermalConvention,
) -> Result<(f64, f64), AnalyticsError> {
    let (lo, hi) = search_window(params, omega);
    let (k1, k2) = critical_pumps(params, omega);
    let (wlo, whi) = match regime {
        PumpRegime::SmallPump => (lo, k1.min(hi)),
        PumpRegime::IntermediatePump => (k1.max(lo), k2.min(hi)),
        PumpRegime::LargePump => (k2.max(lo), hi),
    };
    if whi.partial_cmp(&wlo) != Some(std::cmp::Ordering::Greater) {
        return Err(AnalyticsError::EmptyWindow(regime));
    }
    let m = minimize_log(|k| detuned_quantum_part(params, omega, k).unwrap_or(f64::NAN), wlo, whi)?;
    Ok((m.x, thermal_floor(params, convention) + m.value))
}

/// Minimum of the raw spectrum's quantum part over the pump level.
pub fn minimize_sql(params: &SystemParams, omega: f64) -> Result<(f64, f64), AnalyticsError> {
    let (lo, hi) = search_window(params, omega);
    let m = minimize_log(|k| sql_quantum_part(params, omega, k).unwrap_or(f64::NAN), lo, hi)?;
    Ok((m.x, m.value))
}

/// Minimum detectable amplitude `√(S ΔΩ / 2π)` with `ΔΩ = 2π/τ`.
pub fn detection_threshold(pulse: &SignalPulse, spectrum: f64) -> f64 {
    (spectrum * pulse.bandwidth() / (2.0 * std::f64::consts::PI)).sqrt()
}
