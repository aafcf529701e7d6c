//! Linear stability of the coupled `(c₋*, c₊, d)` system.
//!
//! With complex amplitudes `c₊ = c_{+a} + i c_{+φ}`, `c₋* = c_{-a} - i c_{-φ}`, `d = d_a + i d_φ`
//! the characteristic polynomial factors as
//! `(λ + γ + iδ₋)(λ + γ - iδ₊)(λ + γ_m) + 2iΔ(ηC₀)²`.
//! The coupling enters only through the symmetric detuning `Δ`.

use nalgebra::Complex;
use num_complex::Complex64;
use serde::Serialize;

use crate::freq_solver::drift;
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Roots of the characteristic cubic; the real system also has their conjugates.
    pub eigenvalues: [Complex64; 3],
    pub stable: bool,
}

impl StabilityReport {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest distance from each root to the nearest eigenvalue of the real 6×6 drift.
    pub fn dense_mismatch(&self, params: &SystemParams) -> f64 {
        let dense = drift(params).a.complex_eigenvalues();
        self.eigenvalues
            .iter()
            .map(|l| {
                dense
                    .iter()
                    .map(|m: &Complex<f64>| (l - m).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

/// Coefficients `[c0, c1, c2]` of the monic cubic `λ³ + c2 λ² + c1 λ + c0`.
pub fn characteristic_coefficients(params: &SystemParams) -> [Complex64; 3] {
    let [p, q, r] = unperturbed_offsets(params);
    let s = coupling_shift(params);
    [p * q * r + s, p * q + p * r + q * r, p + q + r]
}

fn unperturbed_offsets(params: &SystemParams) -> [Complex64; 3] {
    [
        Complex64::new(params.gamma, params.delta_minus),
        Complex64::new(params.gamma, -params.delta_plus),
        Complex64::from(params.gamma_m),
    ]
}

fn coupling_shift(params: &SystemParams) -> Complex64 {
    Complex64::new(0.0, 2.0 * params.derived().capital_delta * params.eta_c0 * params.eta_c0)
}

pub fn stability_eigenvalues(params: &SystemParams) -> StabilityReport {
    let offsets = unperturbed_offsets(params);
    let mut eigenvalues = offsets.map(|o| -o);
    if coupling_shift(params) != Complex64::from(0.0) {
        eigenvalues = cubic_roots(characteristic_coefficients(params), eigenvalues);
    }
    let stable = eigenvalues.iter().all(|l| l.re < 0.0);
    StabilityReport { eigenvalues, stable }
}

fn eval(c: &[Complex64; 3], z: Complex64) -> (Complex64, Complex64) {
    let p = ((z + c[2]) * z + c[1]) * z + c[0];
    let dp = (3.0 * z + 2.0 * c[2]) * z + c[1];
    (p, dp)
}

/// Aberth–Ehrlich simultaneous iteration started near `guess`, then Newton polish.
fn cubic_roots(c: [Complex64; 3], guess: [Complex64; 3]) -> [Complex64; 3] {
    let scale = guess.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let mut z = guess;
    // split coincident starting points
    for (i, zi) in z.iter_mut().enumerate() {
        *zi += Complex64::from_polar(1e-3 * scale, 0.4 + 2.1 * i as f64);
    }
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..3 {
            let (p, dp) = eval(&c, z[i]);
            if p == Complex64::from(0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..3).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved <= 1e-16 * scale {
            break;
        }
    }
    for zi in &mut z {
        for _ in 0..3 {
            let (p, dp) = eval(&c, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            *zi -= p / dp;
        }
    }
    z
}
