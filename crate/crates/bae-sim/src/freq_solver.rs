//! Exact linearized quadrature dynamics in the frequency domain.
//!
//! Fourier convention: `a(t) = ∫ a(Ω) e^{-iΩt} dΩ/2π`, so `d/dt -> -iΩ`. A white input
//! with unit single-sided PSD has correlator `2π δ(Ω - Ω')`.
//!
//! Two state bases are used. The mode basis is [`QuadratureState`]:
//! `(c_{+a}, c_{-a}, c_{+φ}, c_{-φ}, d_a, d_φ)`. The sum/difference basis is what the
//! solver works in: `(g_{a+}, g_{a-}, g_{φ+}, g_{φ-}, d_a, d_φ)` with
//! `g_{a±} = (c_{+a} ± c_{-a})/√2` and `g_{φ±} = (c_{+φ} ± c_{-φ})/√2`. Inputs follow the same
//! rule: `(α_{a+}, α_{a-}, α_{φ+}, α_{φ-}, q_a, q_φ, f_a, f_φ)`.
//!
//! Outputs are `β = -α + √(2γ) g` for the four optical sum/difference channels.

use nalgebra::SMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

use crate::model::SystemParams;

pub const STATE_DIM: usize = 6;
pub const INPUT_DIM: usize = 8;
pub const OUTPUT_DIM: usize = 4;
pub const TRANSFER_ROWS: usize = STATE_DIM + OUTPUT_DIM;

pub type DriftMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type InputMatrix = SMatrix<f64, STATE_DIM, INPUT_DIM>;
pub type ComplexDynamics = SMatrix<Complex64, STATE_DIM, STATE_DIM>;
pub type ComplexInputs = SMatrix<Complex64, STATE_DIM, INPUT_DIM>;
pub type TransferEntries = SMatrix<Complex64, TRANSFER_ROWS, INPUT_DIM>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("dynamics matrix is singular or ill-conditioned at omega = {omega} (condition {condition:e})")]
    Singular { omega: f64, condition: f64 },
    #[error("combination weights must have {expected} entries, got {got}")]
    WrongArity { expected: usize, got: usize },
}

/// Input channels in the sum/difference basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Input {
    AlphaPlusA,
    AlphaMinusA,
    AlphaPlusPhi,
    AlphaMinusPhi,
    ThermalA,
    ThermalPhi,
    ForceA,
    ForcePhi,
}

impl Input {
    pub const ALL: [Input; INPUT_DIM] = [
        Input::AlphaPlusA,
        Input::AlphaMinusA,
        Input::AlphaPlusPhi,
        Input::AlphaMinusPhi,
        Input::ThermalA,
        Input::ThermalPhi,
        Input::ForceA,
        Input::ForcePhi,
    ];

    /// The six statistically independent noise inputs.
    pub const NOISE: [Input; 6] = [
        Input::AlphaPlusA,
        Input::AlphaMinusA,
        Input::AlphaPlusPhi,
        Input::AlphaMinusPhi,
        Input::ThermalA,
        Input::ThermalPhi,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn sector(self) -> Sector {
        match self {
            Input::AlphaPlusA | Input::AlphaMinusA | Input::ThermalA | Input::ForceA => {
                Sector::Amplitude
            }
            _ => Sector::Phase,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Input::AlphaPlusA => "alpha_a+",
            Input::AlphaMinusA => "alpha_a-",
            Input::AlphaPlusPhi => "alpha_phi+",
            Input::AlphaMinusPhi => "alpha_phi-",
            Input::ThermalA => "q_a",
            Input::ThermalPhi => "q_phi",
            Input::ForceA => "f_a",
            Input::ForcePhi => "f_phi",
        }
    }
}

/// Measured output channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    BetaPlusA,
    BetaMinusA,
    BetaPlusPhi,
    BetaMinusPhi,
}

impl Output {
    pub const ALL: [Output; OUTPUT_DIM] = [
        Output::BetaPlusA,
        Output::BetaMinusA,
        Output::BetaPlusPhi,
        Output::BetaMinusPhi,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Row of this output in a [`TransferMatrix`].
    pub fn row(self) -> usize {
        STATE_DIM + self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Output::BetaPlusA => "beta_a+",
            Output::BetaMinusA => "beta_a-",
            Output::BetaPlusPhi => "beta_phi+",
            Output::BetaMinusPhi => "beta_phi-",
        }
    }
}

/// Sum/difference state rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateRow {
    GPlusA,
    GMinusA,
    GPlusPhi,
    GMinusPhi,
    DA,
    DPhi,
}

impl StateRow {
    pub const ALL: [StateRow; STATE_DIM] = [
        StateRow::GPlusA,
        StateRow::GMinusA,
        StateRow::GPlusPhi,
        StateRow::GMinusPhi,
        StateRow::DA,
        StateRow::DPhi,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn sector(self) -> Sector {
        match self {
            StateRow::GPlusA | StateRow::GMinusA | StateRow::DA => Sector::Amplitude,
            _ => Sector::Phase,
        }
    }
}

/// Amplitude (`a`) or phase (`φ`) quadrature sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Amplitude,
    Phase,
}

/// Mode-basis quadrature amplitudes, in the fixed order documented at module level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadratureState<T> {
    pub c_plus_a: T,
    pub c_minus_a: T,
    pub c_plus_phi: T,
    pub c_minus_phi: T,
    pub d_a: T,
    pub d_phi: T,
}

impl<T: Copy> QuadratureState<T> {
    pub fn from_array(v: [T; STATE_DIM]) -> Self {
        Self {
            c_plus_a: v[0],
            c_minus_a: v[1],
            c_plus_phi: v[2],
            c_minus_phi: v[3],
            d_a: v[4],
            d_phi: v[5],
        }
    }

    pub fn to_array(&self) -> [T; STATE_DIM] {
        [
            self.c_plus_a,
            self.c_minus_a,
            self.c_plus_phi,
            self.c_minus_phi,
            self.d_a,
            self.d_phi,
        ]
    }
}

impl QuadratureState<f64> {
    /// Sum/difference components `(g_{a+}, g_{a-}, g_{φ+}, g_{φ-}, d_a, d_φ)`.
    pub fn to_sum_difference(&self) -> [f64; STATE_DIM] {
        let s = FRAC_1_SQRT_2;
        [
            s * (self.c_plus_a + self.c_minus_a),
            s * (self.c_plus_a - self.c_minus_a),
            s * (self.c_plus_phi + self.c_minus_phi),
            s * (self.c_plus_phi - self.c_minus_phi),
            self.d_a,
            self.d_phi,
        ]
    }

    pub fn from_sum_difference(g: [f64; STATE_DIM]) -> Self {
        let s = FRAC_1_SQRT_2;
        Self {
            c_plus_a: s * (g[0] + g[1]),
            c_minus_a: s * (g[0] - g[1]),
            c_plus_phi: s * (g[2] + g[3]),
            c_minus_phi: s * (g[2] - g[3]),
            d_a: g[4],
            d_phi: g[5],
        }
    }
}

/// Mode-basis inputs `(a_{+a}, a_{-a}, a_{+φ}, a_{-φ}, q_a, q_φ, f_a, f_φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InputVector {
    pub a_plus_a: f64,
    pub a_minus_a: f64,
    pub a_plus_phi: f64,
    pub a_minus_phi: f64,
    pub q_a: f64,
    pub q_phi: f64,
    pub f_a: f64,
    pub f_phi: f64,
}

impl InputVector {
    /// Components in the sum/difference input order of [`Input::ALL`].
    pub fn to_sum_difference(&self) -> [f64; INPUT_DIM] {
        let s = FRAC_1_SQRT_2;
        [
            s * (self.a_plus_a + self.a_minus_a),
            s * (self.a_plus_a - self.a_minus_a),
            s * (self.a_plus_phi + self.a_minus_phi),
            s * (self.a_plus_phi - self.a_minus_phi),
            self.q_a,
            self.q_phi,
            self.f_a,
            self.f_phi,
        ]
    }
}

/// Single-sided PSD of an input channel.
pub fn input_psd(params: &SystemParams, input: Input) -> f64 {
    match input {
        Input::ThermalA | Input::ThermalPhi => 2.0 * params.n_thermal + 1.0,
        Input::ForceA | Input::ForcePhi => 0.0,
        _ => 1.0,
    }
}

/// Real time-domain drift `ẋ = A x + B n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub a: DriftMatrix,
    pub b: InputMatrix,
}

/// Drift in the sum/difference basis, exact in the detunings.
pub fn drift(params: &SystemParams) -> Drift {
    let g = params.gamma;
    let gm = params.gamma_m;
    let c = std::f64::consts::SQRT_2 * params.eta_c0;
    let dc = params.derived();
    let (big, small) = (dc.capital_delta, dc.small_delta);
    #[rustfmt::skip]
    let a = DriftMatrix::from_row_slice(&[
        -g,    0.0,  -big,  -small, 0.0, 0.0,
        0.0,   -g,   -small, -big,  -c,  0.0,
        big,   small, -g,   0.0,    0.0, -c,
        small, big,   0.0,  -g,     0.0, 0.0,
        c,     0.0,   0.0,  0.0,    -gm, 0.0,
        0.0,   0.0,   0.0,  c,      0.0, -gm,
    ]);
    Drift {
        a,
        b: input_coupling(params),
    }
}

/// Drift in the mode basis `(c_{+a}, c_{-a}, c_{+φ}, c_{-φ}, d_a, d_φ)`, exact in the detunings.
pub fn mode_drift(params: &SystemParams) -> Drift {
    let g = params.gamma;
    let gm = params.gamma_m;
    let k = params.eta_c0;
    let (dp, dm) = (params.delta_plus, params.delta_minus);
    #[rustfmt::skip]
    let a = DriftMatrix::from_row_slice(&[
        -g,  0.0, -dp, 0.0, -k,  0.0,
        0.0, -g,  0.0, -dm,  k,  0.0,
        dp,  0.0, -g,  0.0, 0.0, -k,
        0.0, dm,  0.0, -g,  0.0, -k,
        k,   k,   0.0, 0.0, -gm, 0.0,
        0.0, 0.0, k,   -k,  0.0, -gm,
    ]);
    Drift {
        a,
        b: input_coupling(params),
    }
}

fn input_coupling(params: &SystemParams) -> InputMatrix {
    let so = (2.0 * params.gamma).sqrt();
    let sm = (2.0 * params.gamma_m).sqrt();
    let mut b = InputMatrix::zeros();
    for i in 0..4 {
        b[(i, i)] = so;
    }
    b[(4, 4)] = sm;
    b[(5, 5)] = sm;
    b[(4, 6)] = 1.0;
    b[(5, 7)] = 1.0;
    b
}

/// Orthogonal map from mode-basis to sum/difference state (and input) components.
pub fn sum_difference_map() -> DriftMatrix {
    let s = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let u = DriftMatrix::from_row_slice(&[
        s,   s,   0.0, 0.0, 0.0, 0.0,
        s,   -s,  0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, s,   s,   0.0, 0.0,
        0.0, 0.0, s,   -s,  0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
    ]);
    u
}

/// Frequency-domain linear system `M x = B n` with `M = -iΩ I - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub omega: f64,
    pub dynamics: ComplexDynamics,
    pub coupling: ComplexInputs,
}

pub fn build_system(params: &SystemParams, omega: f64) -> LinearSystem {
    let d = drift(params);
    let dynamics = ComplexDynamics::from_fn(|i, j| {
        let diag = if i == j { Complex64::new(0.0, -omega) } else { Complex64::new(0.0, 0.0) };
        diag - d.a[(i, j)]
    });
    let coupling = d.b.map(Complex64::from);
    LinearSystem {
        omega,
        dynamics,
        coupling,
    }
}

/// Transfer functions at one frequency: 6 state rows followed by 4 output rows, 8 input columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub frequency: f64,
    pub entries: TransferEntries,
    /// 1-norm condition number of the dynamics matrix.
    pub condition: f64,
}

impl TransferMatrix {
    pub fn state(&self, row: StateRow, input: Input) -> Complex64 {
        self.entries[(row.index(), input.index())]
    }

    pub fn output(&self, output: Output, input: Input) -> Complex64 {
        self.entries[(output.row(), input.index())]
    }

    pub fn output_row(&self, output: Output) -> [Complex64; INPUT_DIM] {
        std::array::from_fn(|j| self.entries[(output.row(), j)])
    }

    /// Transfer row of `Σ_k w_k β_k`.
    pub fn combined_row(&self, weights: &[Complex64; OUTPUT_DIM]) -> [Complex64; INPUT_DIM] {
        std::array::from_fn(|j| {
            Output::ALL
                .iter()
                .map(|o| weights[o.index()] * self.entries[(o.row(), j)])
                .sum()
        })
    }
}

const CONDITION_LIMIT: f64 = 1e14;

pub fn transfer_matrix(params: &SystemParams, omega: f64) -> Result<TransferMatrix, SolverError> {
    let sys = build_system(params, omega);
    let lu = sys.dynamics.lu();
    let singular = |condition| SolverError::Singular { omega, condition };
    let inverse = lu.try_inverse().ok_or(singular(f64::INFINITY))?;
    let condition = one_norm(&sys.dynamics) * one_norm(&inverse);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(singular(condition));
    }
    let states = lu.solve(&sys.coupling).ok_or(singular(condition))?;
    let sqrt2g = Complex64::from((2.0 * params.gamma).sqrt());
    let mut entries = TransferEntries::zeros();
    entries.fixed_view_mut::<STATE_DIM, INPUT_DIM>(0, 0).copy_from(&states);
    for o in 0..OUTPUT_DIM {
        for j in 0..INPUT_DIM {
            let direct = if o == j { Complex64::from(-1.0) } else { Complex64::from(0.0) };
            entries[(STATE_DIM + o, j)] = direct + sqrt2g * states[(o, j)];
        }
    }
    Ok(TransferMatrix {
        frequency: omega,
        entries,
        condition,
    })
}

fn one_norm(m: &ComplexDynamics) -> f64 {
    (0..STATE_DIM)
        .map(|j| (0..STATE_DIM).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Which output (or linear combination of outputs) a PSD refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputSelector {
    Single(Output),
    /// Weights on `(β_{a+}, β_{a-}, β_{φ+}, β_{φ-})`.
    Weighted(Vec<Complex64>),
}

impl OutputSelector {
    pub fn weights(&self) -> Result<[Complex64; OUTPUT_DIM], SolverError> {
        match self {
            OutputSelector::Single(o) => {
                let mut w = [Complex64::from(0.0); OUTPUT_DIM];
                w[o.index()] = Complex64::from(1.0);
                Ok(w)
            }
            OutputSelector::Weighted(w) => {
                <[Complex64; OUTPUT_DIM]>::try_from(w.as_slice()).map_err(|_| {
                    SolverError::WrongArity {
                        expected: OUTPUT_DIM,
                        got: w.len(),
                    }
                })
            }
        }
    }
}

/// Single-sided PSDs of white force inputs, when they are to be included.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceSpectrum {
    pub f_a: f64,
    pub f_phi: f64,
}

/// Single-sided PSD of the selected output: `Σ |H|² S_in` over independent inputs.
pub fn output_psd(
    params: &SystemParams,
    omega: f64,
    selector: &OutputSelector,
    force: Option<ForceSpectrum>,
) -> Result<f64, SolverError> {
    let weights = selector.weights()?;
    let tm = transfer_matrix(params, omega)?;
    Ok(psd_of_row(params, &tm.combined_row(&weights), force))
}

/// PSD of a transfer row under the module's input statistics.
pub fn psd_of_row(
    params: &SystemParams,
    row: &[Complex64; INPUT_DIM],
    force: Option<ForceSpectrum>,
) -> f64 {
    let noise: f64 = Input::NOISE
        .iter()
        .map(|&i| row[i.index()].norm_sqr() * input_psd(params, i))
        .sum();
    let force = force.map_or(0.0, |f| {
        row[Input::ForceA.index()].norm_sqr() * f.f_a
            + row[Input::ForcePhi.index()].norm_sqr() * f.f_phi
    });
    noise + force
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pump_parameter, xi_factor, DerivedCouplings};
    use proptest::prelude::*;

    fn base() -> SystemParams {
        SystemParams::new(1.0, 1e-3, 100.0, 0.5, 1.0).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn tuned_rows_at_dc() {
        let p = base();
        let sys = build_system(&p, 0.0);
        // gamma * g_{a+} = sqrt(2 gamma) alpha_{a+}
        assert_eq!(sys.dynamics[(0, 0)], Complex64::from(p.gamma));
        for j in 1..STATE_DIM {
            assert_eq!(sys.dynamics[(0, j)], Complex64::from(0.0));
        }
        assert_eq!(sys.coupling[(0, 0)], Complex64::from((2.0 * p.gamma).sqrt()));
        // (gamma - i W) g_{a-} + sqrt2 eta_c0 d_a = ...
        let c = std::f64::consts::SQRT_2 * p.eta_c0;
        assert_eq!(sys.dynamics[(1, 4)], Complex64::from(c));
        assert_eq!(sys.dynamics[(4, 0)], Complex64::from(-c));
    }

    #[test]
    fn zero_coupling_decouples_blocks() {
        let p = SystemParams { eta_c0: 0.0, ..base() }.with_sideband_detunings(0.1, -0.05);
        let sys = build_system(&p, 0.3);
        for i in 0..4 {
            for j in 4..6 {
                assert_eq!(sys.dynamics[(i, j)], Complex64::from(0.0));
                assert_eq!(sys.dynamics[(j, i)], Complex64::from(0.0));
            }
        }
    }

    #[test]
    fn tuned_closed_forms() {
        let p = base();
        for &w in &[0.0, 1e-3, 0.05, 0.7, 3.0] {
            let tm = transfer_matrix(&p, w).unwrap();
            let xi = xi_factor(&p, w);
            let k = pump_parameter(&p, w);
            let gm = Complex64::new(p.gamma_m, -w);
            let s = Complex64::new(p.gamma, -w);
            assert!(close(tm.output(Output::BetaPlusA, Input::AlphaPlusA), xi, 1e-13));
            for &i in &Input::ALL[1..] {
                assert!(tm.output(Output::BetaPlusA, i).norm() < 1e-15);
            }
            // sqrt(xi K) = 2 sqrt(gamma) eta_c0 / (gamma - i W)
            let sqrt_xi_k = 2.0 * p.gamma.sqrt() * p.eta_c0 / s;
            assert!(close((sqrt_xi_k * sqrt_xi_k) / (xi * k), Complex64::from(1.0), 1e-13));
            assert!(close(tm.output(Output::BetaMinusA, Input::ForceA), -sqrt_xi_k / gm, 1e-12));
            assert!(close(
                tm.output(Output::BetaMinusA, Input::AlphaPlusA),
                -xi * k / gm,
                1e-12
            ));
            assert!(close(tm.output(Output::BetaMinusPhi, Input::AlphaMinusPhi), xi, 1e-13));
            assert!(tm.output(Output::BetaMinusPhi, Input::ForcePhi).norm() < 1e-15);
            assert!(close(
                tm.output(Output::BetaPlusPhi, Input::AlphaMinusPhi),
                -xi * k / gm,
                1e-12
            ));
        }
    }

    #[test]
    fn sector_blocks_are_exactly_zero_when_tuned() {
        let p = base();
        for &w in &[0.0, 0.02, 1.3] {
            let tm = transfer_matrix(&p, w).unwrap();
            for r in 0..TRANSFER_ROWS {
                let row_sector = if r < STATE_DIM {
                    StateRow::ALL[r].sector()
                } else if matches!(r - STATE_DIM, 0 | 1) {
                    Sector::Amplitude
                } else {
                    Sector::Phase
                };
                for i in Input::ALL {
                    if i.sector() != row_sector {
                        assert_eq!(tm.entries[(r, i.index())], Complex64::from(0.0), "row {r} {i:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn mode_and_sum_difference_drifts_agree() {
        let p = base().with_detunings(DerivedCouplings::new(0.03, -0.02));
        let u = sum_difference_map();
        let m = mode_drift(&p);
        let s = drift(&p);
        let a_from_mode = u * m.a * u.transpose();
        assert!((a_from_mode - s.a).abs().max() < 1e-15);
        // inputs transform with the same orthogonal map on the optical block
        let mut u_in = SMatrix::<f64, INPUT_DIM, INPUT_DIM>::identity();
        u_in.fixed_view_mut::<STATE_DIM, STATE_DIM>(0, 0).copy_from(&u);
        let b_from_mode = u * m.b * u_in.transpose();
        assert!((b_from_mode - s.b).abs().max() < 1e-15);
    }

    #[test]
    fn state_conversions_round_trip() {
        let q = QuadratureState::from_array([0.3, -1.2, 2.0, 0.5, -0.7, 0.1]);
        let back = QuadratureState::from_sum_difference(q.to_sum_difference());
        for (a, b) in q.to_array().iter().zip(back.to_array()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn shot_noise_floor_without_coupling() {
        let p = SystemParams { eta_c0: 0.0, ..base() }.with_sideband_detunings(0.02, 0.01);
        for &w in &[0.0, 0.4, 2.0] {
            for o in Output::ALL {
                let s = output_psd(&p, w, &OutputSelector::Single(o), None).unwrap();
                assert!((s - 1.0).abs() < 1e-14, "{o:?} at {w}: {s}");
            }
            let tm = transfer_matrix(&p, w).unwrap();
            assert_eq!(tm.output(Output::BetaMinusA, Input::ForceA), Complex64::from(0.0));
        }
    }

    #[test]
    fn beta_plus_a_psd_is_unity() {
        let p = base();
        for &w in &[0.0, 0.01, 0.5, 5.0] {
            let s = output_psd(&p, w, &OutputSelector::Single(Output::BetaPlusA), None).unwrap();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn wrong_arity_rejected() {
        let sel = OutputSelector::Weighted(vec![Complex64::from(1.0); 3]);
        assert_eq!(
            output_psd(&base(), 0.1, &sel, None),
            Err(SolverError::WrongArity { expected: 4, got: 3 })
        );
    }

    #[test]
    fn force_inclusion_adds_force_power() {
        let p = base();
        let sel = OutputSelector::Single(Output::BetaMinusA);
        let n = output_psd(&p, 0.2, &sel, None).unwrap();
        let f = output_psd(&p, 0.2, &sel, Some(ForceSpectrum { f_a: 2.0, f_phi: 5.0 })).unwrap();
        let t = transfer_matrix(&p, 0.2).unwrap().output(Output::BetaMinusA, Input::ForceA);
        assert!(((f - n) - 2.0 * t.norm_sqr()).abs() < 1e-12 * f);
    }

    proptest! {
        #[test]
        fn reality_symmetry(w in 0.0f64..5.0, dp in -0.2f64..0.2, dm in -0.2f64..0.2, eta in 0.0f64..1.0) {
            let p = SystemParams { eta_c0: eta, ..base() }.with_sideband_detunings(dp, dm);
            let a = transfer_matrix(&p, w).unwrap();
            let b = transfer_matrix(&p, -w).unwrap();
            for r in 0..TRANSFER_ROWS {
                for c in 0..INPUT_DIM {
                    let (x, y) = (a.entries[(r, c)], b.entries[(r, c)]);
                    prop_assert!((x - y.conj()).norm() <= 1e-12 * (1.0 + x.norm()));
                }
            }
        }
    }
}
