//! Coherent coupling of one optical mode at `ω₀` to two modes at `ω₀ ± ω_m` through a
//! mechanical amplitude treated as a fixed parameter `d`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::SystemParams;

/// Centre frequency and coupling strength `η·d` (one complex number).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentCoupling {
    pub omega_0: f64,
    pub eta_d: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentEigen {
    /// Eigenfrequencies ordered as (centre, upper, lower).
    pub frequencies: [f64; 3],
    /// Column eigenvectors, each scaled so its own mode's component equals 1.
    pub vectors: [Vector3<Complex64>; 3],
}

/// Hermitian mode matrix in the order (centre, upper, lower).
pub fn coupling_matrix(params: &SystemParams, coupling: &CoherentCoupling) -> Matrix3<Complex64> {
    let w0 = Complex64::from(coupling.omega_0);
    let wm = params.omega_m;
    let i = Complex64::i();
    let x = i * coupling.eta_d.conj();
    let y = -i * coupling.eta_d;
    Matrix3::new(
        w0,
        x,
        y,
        x.conj(),
        w0 + wm,
        Complex64::from(0.0),
        y.conj(),
        Complex64::from(0.0),
        w0 - wm,
    )
}

pub fn coherent_coupling_eigen(params: &SystemParams, coupling: &CoherentCoupling) -> CoherentEigen {
    let eig = SymmetricEigen::new(coupling_matrix(params, coupling));
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // ascending is (lower, centre, upper)
    let slots = [order[1], order[2], order[0]];
    let frequencies = slots.map(|k| eig.eigenvalues[k]);
    let mut vectors = [Vector3::zeros(); 3];
    for (mode, &k) in slots.iter().enumerate() {
        let v: Vector3<Complex64> = eig.eigenvectors.column(k).into_owned();
        vectors[mode] = v / v[mode];
    }
    CoherentEigen { frequencies, vectors }
}

/// First-order analytic eigenvectors in the same scaling as [`coherent_coupling_eigen`].
pub fn first_order_eigenvectors(params: &SystemParams, coupling: &CoherentCoupling) -> [Vector3<Complex64>; 3] {
    let i = Complex64::i();
    let e = coupling.eta_d / params.omega_m;
    let one = Complex64::from(1.0);
    let zero = Complex64::from(0.0);
    [
        Vector3::new(one, i * e, i * e.conj()),
        Vector3::new(i * e.conj(), one, zero),
        Vector3::new(i * e, zero, one),
    ]
}

/// `max_{i,j} |(v_i, v_j) - δ_ij|` with `(a, b) = Σ conj(a_k) b_k`.
pub fn orthonormality_defect(vectors: &[Vector3<Complex64>; 3]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dotc(b) - delta).norm());
        }
    }
    worst
}

/// Defect of the numerically computed eigenvectors.
pub fn eigenvector_orthonormality_defect(params: &SystemParams, coupling: &CoherentCoupling) -> f64 {
    orthonormality_defect(&coherent_coupling_eigen(params, coupling).vectors)
}

/// Eigenfrequencies `(ω₊+ω₋)/2 ± ½√((ω₊-ω₋)² + 4|ηd|²)` of two directly coupled modes.
pub fn two_mode_eigenfrequencies(omega_plus: f64, omega_minus: f64, eta_d: Complex64) -> (f64, f64) {
    let mean = 0.5 * (omega_plus + omega_minus);
    let half = 0.5 * (omega_plus - omega_minus).hypot(2.0 * eta_d.norm());
    (mean + half, mean - half)
}

/// Eigenvalues of the 2×2 Hermitian matrix behind [`two_mode_eigenfrequencies`], ascending.
pub fn two_mode_numeric(omega_plus: f64, omega_minus: f64, eta_d: Complex64) -> [f64; 2] {
    let m = Matrix2::new(
        Complex64::from(omega_plus),
        eta_d,
        eta_d.conj(),
        Complex64::from(omega_minus),
    );
    let e = SymmetricEigen::new(m).eigenvalues;
    let (a, b) = (e[0], e[1]);
    [a.min(b), a.max(b)]
}
