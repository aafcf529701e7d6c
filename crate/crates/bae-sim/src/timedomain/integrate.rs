//! Stochastic integration of the quadrature dynamics with step-averaged homodyne outputs.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::freq_solver::{Output, QuadratureState, OUTPUT_DIM, STATE_DIM};
use crate::model::{SignalPulse, SystemParams};
use crate::structure::stability_eigenvalues;

use super::discretize::{
    psd_factor, stationary_covariance, Discretization, NoiseVector, StateVector, NOISE_DIM, OPTICAL_DIM,
};
use super::TimeDomainError;

/// Largest allowed `dt·γ`.
pub const MAX_STEP_RATIO: f64 = 0.05;

/// A signal pulse placed on the time axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSchedule {
    pub pulse: SignalPulse,
    /// Time of the pulse centre, measured from the start of the record.
    pub center: f64,
}

impl PulseSchedule {
    /// Mean force quadratures over `[t0, t0 + dt)`.
    pub fn mean_force(&self, t0: f64, dt: f64) -> (f64, f64) {
        let lo = self.center - 0.5 * self.pulse.tau;
        let hi = self.center + 0.5 * self.pulse.tau;
        let overlap = ((t0 + dt).min(hi) - t0.max(lo)).max(0.0) / dt;
        let (fa, fp) = self.pulse.quadratures();
        (fa * overlap, fp * overlap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub pulse: Option<PulseSchedule>,
    /// Keep the state at the start of every step.
    pub store_states: bool,
    /// Draw noise and a stationary initial state; when false the run is the deterministic
    /// response from rest.
    pub stochastic: bool,
}

impl IntegrationConfig {
    pub fn new(duration: f64, dt: f64, seed: u64) -> Self {
        Self {
            duration,
            dt,
            seed,
            pulse: None,
            store_states: false,
            stochastic: true,
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Sampled output records (step averages) and optionally the state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub seed: u64,
    /// Output channels in [`Output::ALL`] order.
    pub outputs: [Vec<f64>; OUTPUT_DIM],
    /// Sum/difference state at the start of each step, when requested.
    pub states: Option<Vec<[f64; STATE_DIM]>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.outputs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.len() as f64
    }

    pub fn output(&self, output: Output) -> &[f64] {
        &self.outputs[output.index()]
    }

    /// Mode-basis state at the start of step `k`.
    pub fn state(&self, k: usize) -> Option<QuadratureState<f64>> {
        self.states
            .as_ref()
            .and_then(|s| s.get(k))
            .map(|g| QuadratureState::from_sum_difference(*g))
    }
}

pub(crate) fn check_params(params: &SystemParams, dt: f64) -> Result<(), TimeDomainError> {
    let report = stability_eigenvalues(params);
    if !report.stable {
        return Err(TimeDomainError::Unstable {
            max_real: report.max_real_part(),
        });
    }
    if !(dt > 0.0 && dt * params.gamma <= MAX_STEP_RATIO * (1.0 + 1e-12)) {
        return Err(TimeDomainError::StepTooLarge { dt, gamma: params.gamma });
    }
    Ok(())
}

/// One exact step: advances `x` and returns the step-averaged outputs.
struct Stepper {
    disc: Discretization,
    optical_gain: f64,
}

impl Stepper {
    fn new(params: &SystemParams, dt: f64) -> Result<Self, TimeDomainError> {
        Ok(Self {
            disc: Discretization::new(params, dt)?,
            optical_gain: (2.0 * params.gamma).sqrt(),
        })
    }

    #[inline]
    fn step(&self, x: &mut StateVector, force: Vector2<f64>, xi: &NoiseVector) -> [f64; OUTPUT_DIM] {
        let d = &self.disc;
        let integral = d.state_integral * *x + d.force_integral * force;
        let mut out = [0.0; OUTPUT_DIM];
        for (i, o) in out.iter_mut().enumerate() {
            let g = integral[i] + xi[STATE_DIM + i];
            let w = xi[STATE_DIM + OPTICAL_DIM + i];
            *o = (self.optical_gain * g - w) / d.dt;
        }
        *x = d.transition * *x + d.force_step * force + xi.fixed_rows::<STATE_DIM>(0);
        out
    }
}

fn standard_normals<const N: usize>(rng: &mut ChaCha8Rng) -> nalgebra::SVector<f64, N> {
    nalgebra::SVector::<f64, N>::from_fn(|_, _| rng.sample(StandardNormal))
}

fn initial_state(params: &SystemParams, rng: &mut ChaCha8Rng) -> Result<StateVector, TimeDomainError> {
    let factor = psd_factor(&stationary_covariance(params)?);
    Ok(factor * standard_normals::<STATE_DIM>(rng))
}

/// Integrates with a stationary start, no pulse.
pub fn integrate(
    params: &SystemParams,
    pulse: Option<&PulseSchedule>,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory, TimeDomainError> {
    let mut cfg = IntegrationConfig::new(duration, dt, seed);
    cfg.pulse = pulse.copied();
    integrate_with(params, &cfg)
}

pub fn integrate_with(params: &SystemParams, config: &IntegrationConfig) -> Result<Trajectory, TimeDomainError> {
    check_params(params, config.dt)?;
    let steps = config.steps();
    if steps == 0 || !config.duration.is_finite() {
        return Err(TimeDomainError::InvalidDuration { duration: config.duration });
    }
    let stepper = Stepper::new(params, config.dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x = if config.stochastic {
        initial_state(params, &mut rng)?
    } else {
        StateVector::zeros()
    };
    let mut outputs: [Vec<f64>; OUTPUT_DIM] = std::array::from_fn(|_| Vec::with_capacity(steps));
    let mut states = config.store_states.then(|| Vec::with_capacity(steps));
    let zero = NoiseVector::zeros();
    for k in 0..steps {
        let force = match &config.pulse {
            Some(p) => {
                let (fa, fp) = p.mean_force(k as f64 * config.dt, config.dt);
                Vector2::new(fa, fp)
            }
            None => Vector2::zeros(),
        };
        if let Some(s) = states.as_mut() {
            s.push(x.into());
        }
        let xi = if config.stochastic {
            stepper.disc.noise_factor * standard_normals::<NOISE_DIM>(&mut rng)
        } else {
            zero
        };
        let out = stepper.step(&mut x, force, &xi);
        for (rec, v) in outputs.iter_mut().zip(out) {
            rec.push(v);
        }
    }
    Ok(Trajectory {
        dt: config.dt,
        seed: config.seed,
        outputs,
        states,
    })
}

/// Integrates the same Brownian path at `dt` and at `dt/2`, returning `(coarse, fine)`.
///
/// Fine-step noise is drawn and the coarse-step noise is assembled from it exactly, so the
/// two runs differ only by discretization.
pub fn integrate_paired(
    params: &SystemParams,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<(Trajectory, Trajectory), TimeDomainError> {
    check_params(params, dt)?;
    let steps = (duration / dt).round() as usize;
    if steps == 0 {
        return Err(TimeDomainError::InvalidDuration { duration });
    }
    let coarse = Stepper::new(params, dt)?;
    let fine = Stepper::new(params, 0.5 * dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = initial_state(params, &mut rng)?;
    let (mut xc, mut xf) = (x0, x0);
    let mut out_c: [Vec<f64>; OUTPUT_DIM] = std::array::from_fn(|_| Vec::with_capacity(steps));
    let mut out_f: [Vec<f64>; OUTPUT_DIM] = std::array::from_fn(|_| Vec::with_capacity(2 * steps));
    let zero = Vector2::zeros();
    for _ in 0..steps {
        let xi1 = fine.disc.noise_factor * standard_normals::<NOISE_DIM>(&mut rng);
        let xi2 = fine.disc.noise_factor * standard_normals::<NOISE_DIM>(&mut rng);
        for xi in [&xi1, &xi2] {
            let o = fine.step(&mut xf, zero, xi);
            for (rec, v) in out_f.iter_mut().zip(o) {
                rec.push(v);
            }
        }
        let o = coarse.step(&mut xc, zero, &fine.disc.coarsen(&xi1, &xi2));
        for (rec, v) in out_c.iter_mut().zip(o) {
            rec.push(v);
        }
    }
    Ok((
        Trajectory { dt, seed, outputs: out_c, states: None },
        Trajectory { dt: 0.5 * dt, seed, outputs: out_f, states: None },
    ))
}
