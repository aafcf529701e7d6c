//! Closed-system (decay-free) structure: quantum-mechanics-free subsystem evolution, the
//! canonical form, and the quadrature interaction Hamiltonian.
//!
//! Canonical ordering is `(Q, P, Φ₁, Π₁, Φ₂, Π₂) = (d_a, d_φ, g_{a+}, g_{φ+}, g_{a-}, g_{φ-})`
//! with `J` block-diagonal over consecutive pairs.

use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::freq_solver::{drift, DriftMatrix};
use crate::model::SystemParams;

/// Solver (sum/difference) index of each canonical slot.
pub const CANONICAL_ORDER: [usize; 6] = [4, 5, 0, 2, 1, 3];

/// `J = diag([[0, 1], [-1, 0]] × 3)`.
pub fn canonical_form() -> Matrix6<f64> {
    let mut j = Matrix6::zeros();
    for k in 0..3 {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// Re-expresses a solver-basis linear map in canonical ordering.
pub fn to_canonical_order(m: &DriftMatrix) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| m[(CANONICAL_ORDER[i], CANONICAL_ORDER[j])])
}

/// `max |Φᵀ J Φ - J|` for a canonical-order transition matrix.
pub fn symplectic_defect(transition: &Matrix6<f64>) -> f64 {
    let j = canonical_form();
    (transition.transpose() * j * transition - j).amax()
}

/// Worst symplectic defect of the decay-free flow over `t·g ∈ [0, 10]`, `g = √2 ηC₀`.
pub fn symplectic_check(params: &SystemParams) -> f64 {
    let closed = params.decay_free();
    let a = to_canonical_order(&drift(&closed).a);
    let g = SQRT_2 * params.eta_c0;
    let horizon = if g > 0.0 { 10.0 / g } else { 10.0 };
    (0..=40)
        .map(|k| symplectic_defect(&(a * (horizon * k as f64 / 40.0)).exp()))
        .fold(0.0, f64::max)
}

/// Drift generated by `ẋ = J ∇H` for `H = ½ zᵀ h z`.
fn hamiltonian_drift(h: &Matrix6<f64>) -> Matrix6<f64> {
    canonical_form() * h
}

fn symmetric_entry(h: &mut Matrix6<f64>, i: usize, j: usize, v: f64) {
    h[(i, j)] += v;
    if i != j {
        h[(j, i)] += v;
    }
}

/// Maps the mechanical pair of the Hamiltonian frame to the solver frame:
/// `(d_a, d_φ)_H = (d_φ, -d_a)`. Returns `T` with `z = T x`.
fn frame_map(optical: [usize; 4]) -> Matrix6<f64> {
    let mut t = Matrix6::zeros();
    for (slot, &src) in optical.iter().enumerate() {
        t[(slot, src)] = 1.0;
    }
    t[(4, 5)] = 1.0;
    t[(5, 4)] = -1.0;
    t
}

/// Decay-free mode-basis drift generated by
/// `V = ηC₀ (c_{+a} + c_{-a}) d_a + ηC₀ (c_{+φ} - c_{-φ}) d_φ` plus the detuning energies,
/// on canonical pairs `(c_{+a}, c_{+φ}), (c_{-a}, c_{-φ}), (d_a, d_φ)`.
pub fn interaction_hamiltonian_mode_drift(params: &SystemParams) -> DriftMatrix {
    // z = (c+a, c+φ, c-a, c-φ, d_a, d_φ)
    let k = params.eta_c0;
    let mut h = Matrix6::zeros();
    symmetric_entry(&mut h, 0, 4, k);
    symmetric_entry(&mut h, 2, 4, k);
    symmetric_entry(&mut h, 1, 5, k);
    symmetric_entry(&mut h, 3, 5, -k);
    for (i, d) in [(0, params.delta_plus), (1, params.delta_plus), (2, params.delta_minus), (3, params.delta_minus)] {
        symmetric_entry(&mut h, i, i, -d);
    }
    // mode basis x = (c+a, c-a, c+φ, c-φ, d_a, d_φ)
    let t = frame_map([0, 2, 1, 3]);
    t.transpose() * hamiltonian_drift(&h) * t
}

/// The same Hamiltonian written in the sum/difference quadratures, returning the drift in the
/// solver basis `(g_{a+}, g_{a-}, g_{φ+}, g_{φ-}, d_a, d_φ)`.
pub fn interaction_hamiltonian_drift(params: &SystemParams) -> DriftMatrix {
    // z = (g_a+, g_φ+, g_a-, g_φ-, d_a, d_φ)
    let c = SQRT_2 * params.eta_c0;
    let dc = params.derived();
    let mut h = Matrix6::zeros();
    symmetric_entry(&mut h, 0, 4, c);
    symmetric_entry(&mut h, 3, 5, c);
    for i in 0..4 {
        symmetric_entry(&mut h, i, i, -dc.capital_delta);
    }
    symmetric_entry(&mut h, 0, 2, -dc.small_delta);
    symmetric_entry(&mut h, 1, 3, -dc.small_delta);
    let t = frame_map([0, 2, 1, 3]);
    t.transpose() * hamiltonian_drift(&h) * t
}

/// Largest `|J_{ij}|` within each of `{Π₁, Q, Π₂}` and `{Φ₂, P, Φ₁}`.
pub fn qmfs_commutator_blocks() -> (f64, f64) {
    let j = canonical_form();
    let block = |set: [usize; 3]| {
        set.iter()
            .flat_map(|&a| set.iter().map(move |&b| j[(a, b)].abs()))
            .fold(0.0, f64::max)
    };
    (block([3, 0, 5]), block([4, 1, 2]))
}

/// Values of the six subsystem variables at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QmfsVariables {
    pub pi1: f64,
    pub q: f64,
    pub pi2: f64,
    pub phi2: f64,
    pub p: f64,
    pub phi1: f64,
}

impl QmfsVariables {
    fn to_vector(self) -> Vector6<f64> {
        Vector6::new(self.pi1, self.q, self.pi2, self.phi2, self.p, self.phi1)
    }

    fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            pi1: v[0],
            q: v[1],
            pi2: v[2],
            phi2: v[3],
            p: v[4],
            phi1: v[5],
        }
    }
}

/// Time series of [`QmfsVariables`].
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct QmfsTrack {
    pub values: Vec<QmfsVariables>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QmfsEvolution {
    pub coupling: f64,
    pub times: Vec<f64>,
    /// Polynomial closed-form solution.
    pub closed_form: QmfsTrack,
    /// Fourth-order Runge–Kutta integration of the equations of motion.
    pub integrated: QmfsTrack,
}

impl QmfsEvolution {
    /// Worst relative mismatch between the two tracks, normalized per variable by its peak.
    pub fn max_relative_mismatch(&self) -> f64 {
        let a: Vec<Vector6<f64>> = self.closed_form.values.iter().map(|v| v.to_vector()).collect();
        let b: Vec<Vector6<f64>> = self.integrated.values.iter().map(|v| v.to_vector()).collect();
        (0..6)
            .map(|k| {
                let peak = a.iter().map(|v| v[k].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                a.iter().zip(&b).map(|(x, y)| (x[k] - y[k]).abs() / peak).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Largest change of `Π₂` and `Φ₁` from their initial values along the integrated track.
    pub fn constants_drift(&self) -> f64 {
        let first = self.integrated.values[0];
        self.integrated
            .values
            .iter()
            .map(|v| (v.pi2 - first.pi2).abs().max((v.phi1 - first.phi1).abs()))
            .fold(0.0, f64::max)
    }
}

fn polynomial(g: f64, v0: &QmfsVariables, t: f64) -> QmfsVariables {
    QmfsVariables {
        pi1: v0.pi1 + g * v0.q * t + 0.5 * g * g * v0.pi2 * t * t,
        q: v0.q + g * v0.pi2 * t,
        pi2: v0.pi2,
        phi2: v0.phi2 + g * v0.p * t - 0.5 * g * g * v0.phi1 * t * t,
        p: v0.p - g * v0.phi1 * t,
        phi1: v0.phi1,
    }
}

fn rate(g: f64, v: &Vector6<f64>) -> Vector6<f64> {
    Vector6::new(g * v[1], g * v[2], 0.0, g * v[4], -g * v[5], 0.0)
}

/// Evolves the two subsystems with coupling `g` on `times` (ascending, first entry is the
/// initial time), both by the polynomial solution and by one RK4 step per interval.
pub fn qmfs_evolve(g: f64, initial: QmfsVariables, times: &[f64]) -> QmfsEvolution {
    let t0 = times.first().copied().unwrap_or(0.0);
    let closed_form = QmfsTrack {
        values: times.iter().map(|&t| polynomial(g, &initial, t - t0)).collect(),
    };
    let mut state = initial.to_vector();
    let mut integrated = Vec::with_capacity(times.len());
    let mut prev = t0;
    for &t in times {
        let h = t - prev;
        if h != 0.0 {
            let k1 = rate(g, &state);
            let k2 = rate(g, &(state + k1 * (h / 2.0)));
            let k3 = rate(g, &(state + k2 * (h / 2.0)));
            let k4 = rate(g, &(state + k3 * h));
            state += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        }
        integrated.push(QmfsVariables::from_vector(&state));
        prev = t;
    }
    QmfsEvolution {
        coupling: g,
        times: times.to_vec(),
        closed_form,
        integrated: QmfsTrack { values: integrated },
    }
}
