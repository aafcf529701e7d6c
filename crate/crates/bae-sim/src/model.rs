//! Parameter types, derived couplings and unit conventions.
//!
//! All rates share one angular-frequency unit. Nothing here assumes `gamma = 1`,
//! but the CLI defaults use that normalization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while validating model inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be finite and positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite and non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("resolved-sideband hierarchy violated: need gamma_m * {ratio} <= gamma and gamma * {ratio} <= omega_m (gamma_m = {gamma_m}, gamma = {gamma}, omega_m = {omega_m})")]
    Hierarchy {
        gamma_m: f64,
        gamma: f64,
        omega_m: f64,
        ratio: f64,
    },
    #[error("detuning {name} = {value} must satisfy |{name}| < gamma = {gamma}")]
    DetuningTooLarge {
        name: &'static str,
        value: f64,
        gamma: f64,
    },
}

/// How strictly "much less than" is enforced when validating rate ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyPolicy {
    /// Minimum ratio between neighbouring rates (`gamma / gamma_m` and `omega_m / gamma`).
    pub ratio: f64,
}

impl Default for HierarchyPolicy {
    fn default() -> Self {
        Self { ratio: 10.0 }
    }
}

impl HierarchyPolicy {
    /// Only the strict ordering `gamma_m < gamma < omega_m`.
    pub fn strict_order() -> Self {
        Self { ratio: 1.0 }
    }
}

/// Physical rates and couplings of the transducer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Optical half-linewidth.
    pub gamma: f64,
    /// Mechanical half-linewidth.
    pub gamma_m: f64,
    /// Mechanical eigenfrequency.
    pub omega_m: f64,
    /// Coupling times mean pump amplitude (both taken real).
    pub eta_c0: f64,
    /// Detuning of the upper sideband mode.
    #[serde(default)]
    pub delta_plus: f64,
    /// Detuning of the lower sideband mode.
    #[serde(default)]
    pub delta_minus: f64,
    /// Thermal occupancy entering the mechanical bath correlator.
    #[serde(default)]
    pub n_thermal: f64,
}

impl SystemParams {
    /// Builds and validates a tuned parameter set with the default hierarchy policy.
    pub fn new(
        gamma: f64,
        gamma_m: f64,
        omega_m: f64,
        eta_c0: f64,
        n_thermal: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            gamma,
            gamma_m,
            omega_m,
            eta_c0,
            delta_plus: 0.0,
            delta_minus: 0.0,
            n_thermal,
        };
        p.validate()?;
        Ok(p)
    }

    /// Sets `eta_c0` so that the pump parameter at zero frequency equals `k0`.
    pub fn with_pump_at_dc(mut self, k0: f64) -> Self {
        self.eta_c0 = (k0.max(0.0) * self.gamma / 4.0).sqrt();
        self
    }

    /// Sets the sideband detunings from their symmetric and antisymmetric parts.
    pub fn with_detunings(mut self, couplings: DerivedCouplings) -> Self {
        let (plus, minus) = couplings.sidebands();
        self.delta_plus = plus;
        self.delta_minus = minus;
        self
    }

    pub fn with_sideband_detunings(mut self, delta_plus: f64, delta_minus: f64) -> Self {
        self.delta_plus = delta_plus;
        self.delta_minus = delta_minus;
        self
    }

    /// Copy with both detunings set to zero.
    pub fn tuned(mut self) -> Self {
        self.delta_plus = 0.0;
        self.delta_minus = 0.0;
        self
    }

    /// Copy with the optical and mechanical damping removed (closed system).
    pub fn decay_free(mut self) -> Self {
        self.gamma = 0.0;
        self.gamma_m = 0.0;
        self
    }

    pub fn derived(&self) -> DerivedCouplings {
        DerivedCouplings::from_sidebands(self.delta_plus, self.delta_minus)
    }

    pub fn is_tuned(&self) -> bool {
        self.delta_plus == 0.0 && self.delta_minus == 0.0
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.validate_with(HierarchyPolicy::default())
    }

    pub fn validate_with(&self, policy: HierarchyPolicy) -> Result<(), ModelError> {
        positive("gamma", self.gamma)?;
        positive("gamma_m", self.gamma_m)?;
        positive("omega_m", self.omega_m)?;
        non_negative("eta_c0", self.eta_c0)?;
        non_negative("n_thermal", self.n_thermal)?;
        finite("delta_plus", self.delta_plus)?;
        finite("delta_minus", self.delta_minus)?;
        positive("hierarchy ratio", policy.ratio)?;

        let ordered = self.gamma_m < self.gamma && self.gamma < self.omega_m;
        let separated = self.gamma_m * policy.ratio <= self.gamma
            && self.gamma * policy.ratio <= self.omega_m;
        if !(ordered && separated) {
            return Err(ModelError::Hierarchy {
                gamma_m: self.gamma_m,
                gamma: self.gamma,
                omega_m: self.omega_m,
                ratio: policy.ratio,
            });
        }
        for (name, value) in [
            ("delta_plus", self.delta_plus),
            ("delta_minus", self.delta_minus),
        ] {
            if value.abs() >= self.gamma {
                return Err(ModelError::DetuningTooLarge {
                    name,
                    value,
                    gamma: self.gamma,
                });
            }
        }
        Ok(())
    }
}

impl Default for SystemParams {
    /// Desk-scale set: `gamma = 1`, `gamma_m = 1e-3`, `omega_m = 100`, `K(0) = 1`, `n_T = 1`.
    fn default() -> Self {
        Self {
            gamma: 1.0,
            gamma_m: 1e-3,
            omega_m: 100.0,
            eta_c0: 0.5,
            delta_plus: 0.0,
            delta_minus: 0.0,
            n_thermal: 1.0,
        }
    }
}

/// Symmetric and antisymmetric combinations of the sideband detunings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCouplings {
    /// `(delta_plus + delta_minus) / 2`
    pub capital_delta: f64,
    /// `(delta_plus - delta_minus) / 2`
    pub small_delta: f64,
}

impl DerivedCouplings {
    pub fn new(capital_delta: f64, small_delta: f64) -> Self {
        Self {
            capital_delta,
            small_delta,
        }
    }

    pub fn from_sidebands(delta_plus: f64, delta_minus: f64) -> Self {
        Self {
            capital_delta: 0.5 * (delta_plus + delta_minus),
            small_delta: 0.5 * (delta_plus - delta_minus),
        }
    }

    /// Returns `(delta_plus, delta_minus)`.
    pub fn sidebands(&self) -> (f64, f64) {
        (
            self.capital_delta + self.small_delta,
            self.capital_delta - self.small_delta,
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.capital_delta * s, self.small_delta * s)
    }
}

/// Conversion from a physical force amplitude to the normalized one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalNorm {
    /// Oscillator mass.
    pub mass: f64,
    /// Energy quantum `hbar * omega_m`.
    pub hbar_omega_m: f64,
}

impl PhysicalNorm {
    /// `F / sqrt(2 hbar omega_m m)`.
    pub fn normalize(&self, force: f64) -> f64 {
        force / (2.0 * self.hbar_omega_m * self.mass).sqrt()
    }
}

/// Resonant square force pulse of duration `tau` centred on `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalPulse {
    /// Normalized amplitude.
    pub f_s0: f64,
    /// Carrier phase.
    #[serde(default)]
    pub psi_f: f64,
    /// Duration.
    pub tau: f64,
    #[serde(default)]
    pub physical_norm: Option<PhysicalNorm>,
}

impl SignalPulse {
    pub fn new(f_s0: f64, psi_f: f64, tau: f64) -> Result<Self, ModelError> {
        let pulse = Self {
            f_s0,
            psi_f,
            tau,
            physical_norm: None,
        };
        pulse.validate()?;
        Ok(pulse)
    }

    /// Builds a pulse from a physical force amplitude.
    pub fn from_physical(
        force: f64,
        psi_f: f64,
        tau: f64,
        norm: PhysicalNorm,
    ) -> Result<Self, ModelError> {
        positive("mass", norm.mass)?;
        positive("hbar_omega_m", norm.hbar_omega_m)?;
        let mut pulse = Self::new(norm.normalize(force), psi_f, tau)?;
        pulse.physical_norm = Some(norm);
        Ok(pulse)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        non_negative("f_s0", self.f_s0)?;
        finite("psi_f", self.psi_f)?;
        positive("tau", self.tau)?;
        Ok(())
    }

    /// Effective measurement bandwidth `2 pi / tau`.
    pub fn bandwidth(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.tau
    }

    /// Rotating-frame force quadratures `(f_a, f_phi)` during the pulse.
    pub fn quadratures(&self) -> (f64, f64) {
        let s = self.f_s0 / std::f64::consts::SQRT_2;
        (s * self.psi_f.cos(), -s * self.psi_f.sin())
    }

    pub fn with_amplitude(mut self, f_s0: f64) -> Self {
        self.f_s0 = f_s0;
        self
    }
}

/// Normalized probe power `K = 4 gamma eta_c0^2 / (gamma^2 + omega^2)`.
pub fn pump_parameter(params: &SystemParams, omega: f64) -> f64 {
    4.0 * params.gamma * params.eta_c0 * params.eta_c0 / (params.gamma * params.gamma + omega * omega)
}

/// `(gamma + i omega) / (gamma - i omega)`.
pub fn xi_factor(params: &SystemParams, omega: f64) -> Complex64 {
    Complex64::new(params.gamma, omega) / Complex64::new(params.gamma, -omega)
}

/// `Delta / ((gamma - i omega)(gamma_m - i omega))`.
pub fn detuning_kernel(params: &SystemParams, omega: f64) -> Complex64 {
    let delta = params.derived().capital_delta;
    Complex64::from(delta)
        / (Complex64::new(params.gamma, -omega) * Complex64::new(params.gamma_m, -omega))
}

/// Occupancy `1 / (1 - exp(-x))` with `x = hbar omega_m / (k_B T)`.
///
/// This equals the Bose occupancy plus one and tends to 1 as `T -> 0`.
pub fn thermal_occupancy(hbar_omega_over_kt: f64) -> Result<f64, ModelError> {
    positive("hbar_omega_over_kT", hbar_omega_over_kt)?;
    Ok(1.0 / -(-hbar_omega_over_kt).exp_m1())
}

fn finite(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NotFinite { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositive { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::Negative { name, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> SystemParams {
        SystemParams::new(1.0, 1e-3, 100.0, 0.5, 0.0).unwrap()
    }

    #[test]
    fn pump_examples() {
        let p = unit();
        assert!((pump_parameter(&p, 0.0) - 1.0).abs() < 1e-15);
        assert!((pump_parameter(&p, 1.0) - 0.5).abs() < 1e-15);
        let off = SystemParams { eta_c0: 0.0, ..p };
        assert_eq!(pump_parameter(&off, 0.37), 0.0);
    }

    #[test]
    fn xi_examples() {
        let p = unit();
        assert!((xi_factor(&p, 0.0) - 1.0).norm() < 1e-15);
        assert!((xi_factor(&p, 1.0) - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn kernel_examples() {
        let p = SystemParams::new(1.0, 1e-6, 100.0, 0.1, 0.0)
            .unwrap()
            .with_detunings(DerivedCouplings::new(1e-2, 0.0));
        let d = detuning_kernel(&p, 0.0);
        // 1e-2 / (1 * 1e-6)
        assert!((d.re - 1e4).abs() < 1e-8 && d.im.abs() < 1e-12);
        let q = p.with_detunings(DerivedCouplings::new(0.0, 3e-3));
        assert_eq!(detuning_kernel(&q, 0.4), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn occupancy_examples() {
        assert!((thermal_occupancy(std::f64::consts::LN_2).unwrap() - 2.0).abs() < 1e-14);
        assert!((thermal_occupancy(60.0).unwrap() - 1.0).abs() < 1e-15);
        for x in [1e-3, 1e-5, 1e-7] {
            let n = thermal_occupancy(x).unwrap();
            // 1/x + 1/2 + x/12
            let series = 1.0 / x + 0.5 + x / 12.0;
            assert!((n - series).abs() / series < 1e-9, "x={x}");
        }
        assert!(thermal_occupancy(0.0).is_err());
        assert!(thermal_occupancy(-1.0).is_err());
    }

    #[test]
    fn hierarchy_validation() {
        assert!(SystemParams::new(1.0, 1.0, 100.0, 0.1, 0.0).is_err());
        assert!(SystemParams::new(1.0, 2.0, 100.0, 0.1, 0.0).is_err());
        assert!(SystemParams::new(1.0, 0.5, 100.0, 0.1, 0.0).is_err());
        assert!(SystemParams::new(1.0, 1e-6, 1e3, 0.1, 0.0).is_ok());
        let p = SystemParams {
            gamma_m: 0.5,
            ..unit()
        };
        assert!(p.validate_with(HierarchyPolicy::strict_order()).is_ok());
        let detuned = unit().with_sideband_detunings(1.0, 0.0);
        assert!(matches!(
            detuned.validate(),
            Err(ModelError::DetuningTooLarge { .. })
        ));
    }

    #[test]
    fn pulse_bandwidth_and_norm() {
        let pulse = SignalPulse::new(1.0, 0.0, 2.0).unwrap();
        assert!((pulse.bandwidth() - std::f64::consts::PI).abs() < 1e-15);
        let norm = PhysicalNorm {
            mass: 2.0,
            hbar_omega_m: 0.25,
        };
        let phys = SignalPulse::from_physical(3.0, 0.0, 1.0, norm).unwrap();
        assert!((phys.f_s0 - 3.0).abs() < 1e-15);
        assert!(SignalPulse::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn dc_pump_setter() {
        let p = unit().with_pump_at_dc(30.0);
        assert!((pump_parameter(&p, 0.0) - 30.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn detuning_reconstruction(dp in -0.9f64..0.9, dm in -0.9f64..0.9) {
            let d = DerivedCouplings::from_sidebands(dp, dm);
            let (p, m) = d.sidebands();
            prop_assert!((p - dp).abs() <= 1e-15 && (m - dm).abs() <= 1e-15);
        }

        #[test]
        fn pump_even_and_decreasing(w in 0.0f64..50.0, dw in 1e-6f64..5.0, eta in 1e-3f64..3.0) {
            let p = SystemParams { eta_c0: eta, ..unit() };
            prop_assert_eq!(pump_parameter(&p, w), pump_parameter(&p, -w));
            prop_assert!(pump_parameter(&p, w + dw) < pump_parameter(&p, w));
        }

        #[test]
        fn xi_unimodular(w in -100.0f64..100.0) {
            let p = unit();
            let x = xi_factor(&p, w);
            let y = xi_factor(&p, -w);
            prop_assert!((x.norm() - 1.0).abs() < 1e-14);
            prop_assert!((x * y - 1.0).norm() < 1e-14);
            prop_assert!((x.conj() - y).norm() < 1e-14);
        }

        #[test]
        fn kernel_vanishes_iff_symmetric_part_zero(big in -0.5f64..0.5, small in -0.5f64..0.5, w in -10.0f64..10.0) {
            let p = unit().with_detunings(DerivedCouplings::new(big, small));
            let d = detuning_kernel(&p, w);
            prop_assert_eq!(d.norm() == 0.0, big == 0.0);
        }
    }
}
