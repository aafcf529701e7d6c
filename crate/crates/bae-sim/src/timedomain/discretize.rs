//! Exact discretization of the linear stochastic dynamics over one step.
//!
//! Per step of length `h` with piecewise-constant force `f`:
//!
//! ```text
//! x_{k+1}      = Φ x_k + Γ f + ξ_x
//! ∫ x dt       = Ψ x_k + Λ f + ξ_I
//! ∫ α dt       = W
//! ```
//!
//! The noise vector `(ξ_x, ξ_I restricted to the optical rows, W)` has 14 components and its
//! joint covariance is computed by Van Loan's block exponential.

use nalgebra::{DMatrix, SMatrix, SVector, SymmetricEigen};

use crate::freq_solver::{drift, input_psd, DriftMatrix, Input, STATE_DIM};
use crate::model::SystemParams;

use super::TimeDomainError;

/// Optical state components (the sum/difference cavity quadratures).
pub const OPTICAL_DIM: usize = 4;
/// Length of the per-step noise vector.
pub const NOISE_DIM: usize = STATE_DIM + 2 * OPTICAL_DIM;
/// Number of stochastic input channels (four optical, two thermal).
pub const DRIVE_DIM: usize = 6;

pub type NoiseVector = SVector<f64, NOISE_DIM>;
pub type NoiseMatrix = SMatrix<f64, NOISE_DIM, NOISE_DIM>;
pub type ForceMatrix = SMatrix<f64, STATE_DIM, 2>;
pub type StateVector = SVector<f64, STATE_DIM>;

/// Two-sided white-noise intensities of the stochastic inputs: half the single-sided PSD.
pub fn noise_intensities(params: &SystemParams) -> [f64; DRIVE_DIM] {
    let mut q = [0.0; DRIVE_DIM];
    for (slot, input) in q.iter_mut().zip(Input::NOISE) {
        *slot = 0.5 * input_psd(params, input);
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub dt: f64,
    /// State transition `Φ = e^{A h}`.
    pub transition: DriftMatrix,
    /// `Ψ = ∫₀ʰ e^{A s} ds`.
    pub state_integral: DriftMatrix,
    /// Force response of the state at the end of the step.
    pub force_step: ForceMatrix,
    /// Force response of the integrated state over the step.
    pub force_integral: ForceMatrix,
    pub noise_covariance: NoiseMatrix,
    /// Any `L` with `L Lᵀ` equal to the noise covariance.
    pub noise_factor: NoiseMatrix,
}

impl Discretization {
    pub fn new(params: &SystemParams, dt: f64) -> Result<Self, TimeDomainError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(TimeDomainError::InvalidStep { dt });
        }
        let d = drift(params);
        let n = STATE_DIM;

        // deterministic part: exp of [[A, 0, B_f], [I, 0, 0], [0, 0, 0]]
        let m = 2 * n + 2;
        let mut aug = DMatrix::<f64>::zeros(m, m);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = d.a[(i, j)] * dt;
            }
            aug[(i, 2 * n)] = d.b[(i, Input::ForceA.index())] * dt;
            aug[(i, 2 * n + 1)] = d.b[(i, Input::ForcePhi.index())] * dt;
            aug[(n + i, i)] = dt;
        }
        let e = aug.exp();
        let transition = DriftMatrix::from_fn(|i, j| e[(i, j)]);
        let state_integral = DriftMatrix::from_fn(|i, j| e[(n + i, j)]);
        let force_step = ForceMatrix::from_fn(|i, j| e[(i, 2 * n + j)]);
        let force_integral = ForceMatrix::from_fn(|i, j| e[(n + i, 2 * n + j)]);

        let noise_covariance = van_loan_covariance(params, dt);
        let noise_factor = psd_factor(&noise_covariance);
        Ok(Self {
            dt,
            transition,
            state_integral,
            force_step,
            force_integral,
            noise_covariance,
            noise_factor,
        })
    }

    /// Combines the noise of two consecutive steps of this discretization into the noise of
    /// one step of twice the length.
    pub fn coarsen(&self, first: &NoiseVector, second: &NoiseVector) -> NoiseVector {
        let x1: StateVector = first.fixed_rows::<STATE_DIM>(0).into_owned();
        let carried = self.transition * x1;
        let integrated = self.state_integral * x1;
        let mut out = *first + *second;
        for i in 0..STATE_DIM {
            out[i] = carried[i] + second[i];
        }
        for i in 0..OPTICAL_DIM {
            out[STATE_DIM + i] += integrated[i];
        }
        out
    }

    /// Covariance of [`Self::coarsen`] applied to two independent draws.
    pub fn coarsened_covariance(&self) -> NoiseMatrix {
        let mut t = SMatrix::<f64, NOISE_DIM, { 2 * NOISE_DIM }>::zeros();
        for i in 0..NOISE_DIM {
            t[(i, i)] = 1.0;
            t[(i, NOISE_DIM + i)] = 1.0;
        }
        for i in 0..STATE_DIM {
            for j in 0..STATE_DIM {
                t[(i, j)] = self.transition[(i, j)];
            }
        }
        for i in 0..OPTICAL_DIM {
            for j in 0..STATE_DIM {
                t[(STATE_DIM + i, j)] = self.state_integral[(i, j)];
            }
        }
        let mut pair = SMatrix::<f64, { 2 * NOISE_DIM }, { 2 * NOISE_DIM }>::zeros();
        pair.fixed_view_mut::<NOISE_DIM, NOISE_DIM>(0, 0).copy_from(&self.noise_covariance);
        pair.fixed_view_mut::<NOISE_DIM, NOISE_DIM>(NOISE_DIM, NOISE_DIM)
            .copy_from(&self.noise_covariance);
        t * pair * t.transpose()
    }
}

/// Joint covariance of `(ξ_x, ξ_I[optical], W)` over one step.
fn van_loan_covariance(params: &SystemParams, dt: f64) -> NoiseMatrix {
    let d = drift(params);
    let n = STATE_DIM;
    let z = 2 * n + OPTICAL_DIM;
    let q = noise_intensities(params);

    let mut f = DMatrix::<f64>::zeros(z, z);
    for i in 0..n {
        for j in 0..n {
            f[(i, j)] = d.a[(i, j)];
        }
        f[(n + i, i)] = 1.0;
    }
    let mut g = DMatrix::<f64>::zeros(z, DRIVE_DIM);
    for (col, input) in Input::NOISE.iter().enumerate() {
        for i in 0..n {
            g[(i, col)] = d.b[(i, input.index())];
        }
    }
    for i in 0..OPTICAL_DIM {
        g[(2 * n + i, i)] = 1.0;
    }
    let qd = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&q));
    let gqg = &g * qd * g.transpose();

    let mut c = DMatrix::<f64>::zeros(2 * z, 2 * z);
    c.view_mut((0, 0), (z, z)).copy_from(&(-&f * dt));
    c.view_mut((0, z), (z, z)).copy_from(&(gqg * dt));
    c.view_mut((z, z), (z, z)).copy_from(&(f.transpose() * dt));
    let e = c.exp();
    let e12 = e.view((0, z), (z, z));
    let e22 = e.view((z, z), (z, z));
    let full = e22.transpose() * e12;

    let keep: Vec<usize> = (0..n).chain(n..n + OPTICAL_DIM).chain(2 * n..2 * n + OPTICAL_DIM).collect();
    let cov = NoiseMatrix::from_fn(|i, j| full[(keep[i], keep[j])]);
    0.5 * (cov + cov.transpose())
}

/// Square-root factor of a symmetric positive semi-definite matrix via its eigendecomposition.
pub fn psd_factor<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let sym = DMatrix::from_fn(N, N, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let eig = SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let factor = eig.eigenvectors * DMatrix::from_diagonal(&roots);
    SMatrix::<f64, N, N>::from_fn(|i, j| factor[(i, j)])
}

/// Stationary state covariance `P` solving `A P + P Aᵀ + B Q Bᵀ = 0`.
pub fn stationary_covariance(params: &SystemParams) -> Result<DriftMatrix, TimeDomainError> {
    let d = drift(params);
    let n = STATE_DIM;
    let q = noise_intensities(params);
    let mut bqb = DriftMatrix::zeros();
    for (col, input) in Input::NOISE.iter().enumerate() {
        let b = d.b.column(input.index());
        bqb += b * b.transpose() * q[col];
    }
    // (I ⊗ A + A ⊗ I) vec(P) = -vec(BQBᵀ), column-major vec
    let mut k = DMatrix::<f64>::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                k[(j * n + i, j * n + l)] += d.a[(i, l)];
                k[(j * n + i, l * n + i)] += d.a[(j, l)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(n * n, bqb.iter().map(|v| -v));
    let sol = k.lu().solve(&rhs).ok_or(TimeDomainError::NoStationaryState)?;
    let p = DriftMatrix::from_column_slice(sol.as_slice());
    Ok(0.5 * (p + p.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemParams {
        SystemParams::new(1.0, 1e-3, 100.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn white_input_increments() {
        let p = base();
        let d = Discretization::new(&p, 0.05).unwrap();
        for i in 0..OPTICAL_DIM {
            let w = STATE_DIM + OPTICAL_DIM + i;
            assert!((d.noise_covariance[(w, w)] - 0.5 * 0.05).abs() < 1e-15);
        }
        assert!(((d.noise_factor * d.noise_factor.transpose()) - d.noise_covariance).amax() < 1e-15);
    }

    #[test]
    fn zero_coupling_optical_blocks_are_scalar() {
        let p = SystemParams { eta_c0: 0.0, ..base() };
        let h = 0.05;
        let d = Discretization::new(&p, h).unwrap();
        // decoupled cavity quadrature: var of state increment = q 2γ (1 - e^{-2γh}) / (2γ)
        let expect = 0.5 * (-(-2.0 * h).exp_m1());
        assert!((d.noise_covariance[(0, 0)] / expect - 1.0).abs() < 1e-12);
        assert!((d.transition[(0, 0)] - (-h).exp()).abs() < 1e-15);
        assert!((d.state_integral[(0, 0)] + (-h).exp_m1()).abs() < 1e-15);
    }

    #[test]
    fn coarsening_is_exact() {
        let p = base();
        let fine = Discretization::new(&p, 0.025).unwrap();
        let coarse = Discretization::new(&p, 0.05).unwrap();
        let diff = (fine.coarsened_covariance() - coarse.noise_covariance).amax();
        assert!(diff < 1e-15 * 1e2, "{diff}");
        assert!((fine.transition * fine.transition - coarse.transition).amax() < 1e-14);
    }

    #[test]
    fn stationary_covariance_solves_lyapunov() {
        let p = base();
        let cov = stationary_covariance(&p).unwrap();
        let d = drift(&p);
        let q = noise_intensities(&p);
        let mut bqb = DriftMatrix::zeros();
        for (col, input) in Input::NOISE.iter().enumerate() {
            let b = d.b.column(input.index());
            bqb += b * b.transpose() * q[col];
        }
        let res = d.a * cov + cov * d.a.transpose() + bqb;
        assert!(res.amax() < 1e-9 * cov.amax(), "{}", res.amax());
        // discrete consistency: P = Φ P Φᵀ + Σ_x
        let disc = Discretization::new(&p, 0.05).unwrap();
        let sx = disc.noise_covariance.fixed_view::<STATE_DIM, STATE_DIM>(0, 0).into_owned();
        let res = disc.transition * cov * disc.transition.transpose() + sx - cov;
        assert!(res.amax() < 1e-9 * cov.amax());
    }
}
