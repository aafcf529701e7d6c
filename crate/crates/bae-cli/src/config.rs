//! Versioned TOML run configuration. Every section is optional and falls back to the
//! desk-scale defaults; unknown keys are rejected.

use std::path::Path;

use bae_sim::analytics::ThermalConvention;
use bae_sim::model::{HierarchyPolicy, SystemParams};
use bae_sim::timedomain::WindowKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub montecarlo: MonteCarloSection,
    #[serde(default)]
    pub qmfs: QmfsSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            params: ParamsSection::default(),
            spectrum: SpectrumSection::default(),
            sweep: SweepSection::default(),
            montecarlo: MonteCarloSection::default(),
            qmfs: QmfsSection::default(),
        }
    }
}

/// System parameters. `pump_at_dc`, when present, overrides `eta_c0` so that `K(0)` takes
/// that value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub gamma: f64,
    pub gamma_m: f64,
    pub omega_m: f64,
    pub eta_c0: f64,
    pub pump_at_dc: Option<f64>,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub n_thermal: f64,
    /// Minimum ratio enforced between neighbouring rates.
    pub hierarchy_ratio: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            gamma: p.gamma,
            gamma_m: p.gamma_m,
            omega_m: p.omega_m,
            eta_c0: p.eta_c0,
            pump_at_dc: None,
            delta_plus: p.delta_plus,
            delta_minus: p.delta_minus,
            n_thermal: p.n_thermal,
            hierarchy_ratio: HierarchyPolicy::default().ratio,
        }
    }
}

impl ParamsSection {
    pub fn resolve(&self) -> Result<SystemParams, CliError> {
        let mut p = SystemParams {
            gamma: self.gamma,
            gamma_m: self.gamma_m,
            omega_m: self.omega_m,
            eta_c0: self.eta_c0,
            delta_plus: self.delta_plus,
            delta_minus: self.delta_minus,
            n_thermal: self.n_thermal,
        };
        if let Some(k0) = self.pump_at_dc {
            if !(k0 > 0.0 && k0.is_finite()) {
                return Err(CliError::Config(format!("params.pump_at_dc must be positive, got {k0}")));
            }
            p = p.with_pump_at_dc(k0);
        }
        p.validate_with(HierarchyPolicy { ratio: self.hierarchy_ratio })
            .map_err(|e| CliError::Config(format!("params: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub thermal_convention: ThermalConvention,
    /// Also write an SVG overlay of the closed-form curves.
    pub svg: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            omega_min: 1e-5,
            omega_max: 10.0,
            points: 200,
            thermal_convention: ThermalConvention::Symmetric,
            svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub omega: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub k_points: usize,
    /// `[Δ, δ]` pairs.
    pub detunings: Vec<[f64; 2]>,
    pub thermal_convention: ThermalConvention,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            omega: 0.0,
            k_min: 1e-6,
            k_max: 1e3,
            k_points: 181,
            detunings: vec![[1e-2, 5e-3], [1e-3, 1e-4], [1e-6, 3e-2], [0.0, 1e-3]],
            thermal_convention: ThermalConvention::Symmetric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub segment_len: usize,
    pub segments: usize,
    pub dt: f64,
    pub seed: u64,
    pub window: WindowKind,
    /// Upper end of the frequency range written to the PSD table.
    pub report_omega_max: f64,
    pub detection: DetectionSection,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            segment_len: 8192,
            segments: 400,
            dt: 0.05,
            seed: 20_240_601,
            window: WindowKind::BlackmanHarris,
            report_omega_max: 2.0,
            detection: DetectionSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    pub enabled: bool,
    pub trials: usize,
    pub tau: f64,
    pub psi: f64,
    /// Amplitudes as multiples of the threshold.
    pub multiples: Vec<f64>,
    /// Quiet record on each side of the pulse, in units of `1/γ`.
    pub margin: f64,
    /// Thermal occupancy used for the detection runs; the top-level value when absent.
    pub n_thermal: Option<f64>,
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self {
            enabled: true,
            trials: 1000,
            tau: 200.0,
            psi: 0.0,
            multiples: vec![0.0, 1.0, 2.0, 5.0, 10.0],
            margin: 50.0,
            n_thermal: Some(150.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QmfsSection {
    /// Initial `(Π₁, Q, Π₂, Φ₂, P, Φ₁)`.
    pub initial: [f64; 6],
    pub points: usize,
}

impl Default for QmfsSection {
    fn default() -> Self {
        Self {
            initial: [0.3, -1.2, 0.7, 2.0, 0.4, -0.9],
            points: 401,
        }
    }
}

fn require(ok: bool, message: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(message()))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        require(self.schema_version == SCHEMA_VERSION, || {
            format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version)
        })?;
        self.params.resolve()?;
        let s = &self.spectrum;
        require(s.omega_min > 0.0 && s.omega_max > s.omega_min, || {
            format!("spectrum.omega_min/omega_max must satisfy 0 < min < max, got {} and {}", s.omega_min, s.omega_max)
        })?;
        require(s.points >= 2, || format!("spectrum.points must be at least 2, got {}", s.points))?;
        let w = &self.sweep;
        require(w.omega >= 0.0, || format!("sweep.omega must be non-negative, got {}", w.omega))?;
        require(w.k_min > 0.0 && w.k_max > w.k_min, || {
            format!("sweep.k_min/k_max must satisfy 0 < min < max, got {} and {}", w.k_min, w.k_max)
        })?;
        require(w.k_points >= 2, || format!("sweep.k_points must be at least 2, got {}", w.k_points))?;
        require(!w.detunings.is_empty(), || "sweep.detunings must not be empty".to_string())?;
        let m = &self.montecarlo;
        require(m.segment_len >= 16 && m.segments >= 8, || {
            format!("montecarlo needs segment_len >= 16 and segments >= 8, got {} and {}", m.segment_len, m.segments)
        })?;
        require(m.dt > 0.0, || format!("montecarlo.dt must be positive, got {}", m.dt))?;
        let d = &m.detection;
        require(!d.enabled || d.trials >= 2, || {
            format!("montecarlo.detection.trials must be at least 2, got {}", d.trials)
        })?;
        require(d.tau > 0.0 && d.margin >= 0.0, || {
            format!("montecarlo.detection needs tau > 0 and margin >= 0, got {} and {}", d.tau, d.margin)
        })?;
        require(self.qmfs.points >= 2, || format!("qmfs.points must be at least 2, got {}", self.qmfs.points))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::parse("schema_version = 1").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.params.resolve().unwrap(), SystemParams::default());
    }

    #[test]
    fn unknown_keys_are_reported_with_location() {
        let err = RunConfig::parse("schema_version = 1\n[params]\ngama = 2.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gama") && msg.contains("line 3"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn wrong_schema_and_bad_values_rejected() {
        assert!(RunConfig::parse("schema_version = 2").is_err());
        assert!(RunConfig::parse("[params]\ngamma = 1.0").is_err());
        let err = RunConfig::parse("schema_version = 1\n[params]\ngamma_m = 2.0").unwrap_err();
        assert!(err.to_string().contains("params"));
        assert!(RunConfig::parse("schema_version = 1\n[spectrum]\npoints = 1").is_err());
    }

    #[test]
    fn pump_at_dc_sets_coupling() {
        let cfg = RunConfig::parse("schema_version = 1\n[params]\npump_at_dc = 4.0").unwrap();
        let p = cfg.params.resolve().unwrap();
        assert!((bae_sim::model::pump_parameter(&p, 0.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }
}
