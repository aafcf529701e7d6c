//! One function per subcommand. Each writes its files and returns whether its `--check`
//! conditions held, with a reason when they did not.

use std::f64::consts::SQRT_2;

use bae_sim::analytics::{
    bae_spectrum, closed_forms, critical_pumps, detuned_spectrum, minimize_in_regime, optimal_pump, regime_classify,
    sql_bound, sql_spectrum_raw, PumpOptimum, PumpRegime, SmallPumpCase, ThermalConvention,
};
use bae_sim::estimator::{bae_weights, detuned_combination_psd, force_referred_psd, CombinationWeights, WeightSector};
use bae_sim::model::{pump_parameter, DerivedCouplings, SignalPulse, SystemParams};
use bae_sim::numerics::{lin_space, log_space};
use bae_sim::structure::{
    interaction_hamiltonian_drift, qmfs_commutator_blocks, qmfs_evolve, stability_eigenvalues, symplectic_check,
    QmfsVariables,
};
use bae_sim::freq_solver::drift;
use bae_sim::timedomain::detection::sector_threshold;
use bae_sim::timedomain::validation::default_bands;
use bae_sim::timedomain::{run_detection_sweep, run_psd_validation, DetectionConfig, PsdValidationConfig};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{bounded, OutputDir};
use crate::svg::{log_log_plot, Series};

/// Outcome of the `--check` conditions of a subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    fn new() -> Self {
        Self { passed: true, failures: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.passed = false;
            self.failures.push(what());
        }
    }
}

fn numeric<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(CliError::numerical)
}

fn detuned_params(p: &SystemParams, pair: [f64; 2]) -> SystemParams {
    p.with_detunings(DerivedCouplings::new(pair[0], pair[1]))
}

#[derive(Serialize)]
struct SpectrumRow {
    omega: f64,
    k: f64,
    s_sql: f64,
    s_raw: f64,
    s_bae: f64,
    s_detuned: f64,
    s_raw_exact: f64,
    s_bae_exact: f64,
    s_detuned_exact: f64,
}

const SPECTRUM_COLUMNS: [&str; 9] =
    ["omega", "k", "s_sql", "s_raw", "s_bae", "s_detuned", "s_raw_exact", "s_bae_exact", "s_detuned_exact"];

pub fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<CheckOutcome, CliError> {
    let p = cfg.params.resolve()?;
    let s = &cfg.spectrum;
    let tuned = p.tuned();
    let rows = log_space(s.omega_min, s.omega_max, s.points)
        .into_iter()
        .map(|w| {
            let k = pump_parameter(&p, w);
            Ok(SpectrumRow {
                omega: w,
                k,
                s_sql: sql_bound(&p, w),
                s_raw: numeric(sql_spectrum_raw(&p, w, k))?,
                s_bae: numeric(bae_spectrum(&p, w, k))?,
                s_detuned: numeric(detuned_spectrum(&p, w, k, s.thermal_convention))?,
                s_raw_exact: numeric(force_referred_psd(&tuned, w, &CombinationWeights::raw(w, WeightSector::Amplitude)))?,
                s_bae_exact: numeric(force_referred_psd(&tuned, w, &bae_weights(&tuned, w, WeightSector::Amplitude)))?,
                s_detuned_exact: numeric(detuned_combination_psd(&p, w, k))?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    out.write_table("spectrum", &SPECTRUM_COLUMNS, &rows)?;
    if s.svg {
        let series = |label, f: fn(&SpectrumRow) -> f64| Series { label, points: rows.iter().map(|r| (r.omega, f(r))).collect() };
        let svg = log_log_plot(
            "Force-referred noise",
            "Ω",
            "S(Ω)",
            &[
                series("SQL", |r| r.s_sql),
                series("raw", |r| r.s_raw),
                series("BAE", |r| r.s_bae),
                series("detuned", |r| r.s_detuned),
            ],
        );
        out.write_text("spectrum.svg", &svg)?;
    }
    let mut check = CheckOutcome::new();
    for r in &rows {
        check.require(r.s_bae < r.s_raw, || format!("S_BAE >= S_raw at Ω = {}", r.omega));
        check.require((r.s_raw_exact / r.s_raw - 1.0).abs() < 1e-10, || {
            format!("exact raw spectrum deviates from closed form at Ω = {}", r.omega)
        });
        check.require((r.s_bae_exact / r.s_bae - 1.0).abs() < 1e-10, || {
            format!("exact BAE spectrum deviates from closed form at Ω = {}", r.omega)
        });
    }
    Ok(check)
}

#[derive(Serialize)]
struct SweepRow {
    capital_delta: f64,
    small_delta: f64,
    omega: f64,
    k: f64,
    s_detuned: f64,
    s_detuned_exact: f64,
    regime: &'static str,
}

#[derive(Serialize)]
struct OptimumRow {
    capital_delta: f64,
    small_delta: f64,
    omega: f64,
    k_opt: String,
    s_min: f64,
    regime: &'static str,
    k_crit1: String,
    k_crit2: String,
}

pub fn sweep(cfg: &RunConfig, out: &mut OutputDir) -> Result<CheckOutcome, CliError> {
    let base = cfg.params.resolve()?;
    let s = &cfg.sweep;
    let w = s.omega;
    let mut rows = Vec::new();
    let mut optima = Vec::new();
    let mut check = CheckOutcome::new();
    for &pair in &s.detunings {
        let p = detuned_params(&base, pair);
        let (k1, k2) = critical_pumps(&p, w);
        let mut previous: Option<PumpRegime> = None;
        for k in log_space(s.k_min, s.k_max, s.k_points) {
            let regime = regime_classify(&p, w, k).regime;
            if let Some(prev) = previous {
                if prev != regime {
                    let expected = if prev == PumpRegime::SmallPump { k1 } else { k2 };
                    check.require(k >= expected, || format!("regime changed below its threshold at K = {k}"));
                }
            }
            previous = Some(regime);
            rows.push(SweepRow {
                capital_delta: pair[0],
                small_delta: pair[1],
                omega: w,
                k,
                s_detuned: numeric(detuned_spectrum(&p, w, k, s.thermal_convention))?,
                s_detuned_exact: numeric(detuned_combination_psd(&p, w, k))?,
                regime: regime.label(),
            });
        }
        let opt = numeric(optimal_pump(&p, w, s.thermal_convention))?;
        let (k_opt, s_min, regime) = match opt.numeric {
            PumpOptimum::Interior { k_opt, s_min, regime } => (bounded(k_opt), s_min, regime.label()),
            PumpOptimum::Monotone { s_at_limit, .. } => (bounded(f64::INFINITY), s_at_limit, "unbounded"),
        };
        if pair[0] == 0.0 && pair[1] == 0.0 {
            check.require(k_opt == "unbounded", || "tuned optimum should be unbounded".to_string());
        }
        optima.push(OptimumRow {
            capital_delta: pair[0],
            small_delta: pair[1],
            omega: w,
            k_opt,
            s_min,
            regime,
            k_crit1: bounded(k1),
            k_crit2: bounded(k2),
        });
    }
    out.write_table("sweep", &["capital_delta", "small_delta", "omega", "k", "s_detuned", "s_detuned_exact", "regime"], &rows)?;
    out.write_table(
        "optima",
        &["capital_delta", "small_delta", "omega", "k_opt", "s_min", "regime", "k_crit1", "k_crit2"],
        &optima,
    )?;
    Ok(check)
}

#[derive(Serialize)]
struct RegimeRow {
    capital_delta: f64,
    small_delta: f64,
    omega: f64,
    regime: &'static str,
    formula: &'static str,
    k_numeric: f64,
    s_numeric: f64,
    s_closed: f64,
    relative_gap: f64,
}

pub fn regimes(cfg: &RunConfig, out: &mut OutputDir) -> Result<CheckOutcome, CliError> {
    let base = cfg.params.resolve()?;
    let s = &cfg.sweep;
    let w = s.omega;
    let conv: ThermalConvention = s.thermal_convention;
    let mut rows = Vec::new();
    for &pair in &s.detunings {
        let p = detuned_params(&base, pair);
        let cf = closed_forms(&p, w, conv);
        let small = match regime_classify(&p, w, 1.0).small_pump_case {
            SmallPumpCase::SymmetricDominated => ("small_symmetric", cf.s_min_small_symmetric),
            SmallPumpCase::SplitDominated => ("small_split", cf.s_min_small_split),
        };
        let candidates = [
            (PumpRegime::SmallPump, small),
            (PumpRegime::IntermediatePump, ("intermediate", cf.s_min_intermediate)),
            (PumpRegime::LargePump, ("large", cf.s_min_large)),
        ];
        for (regime, (formula, closed)) in candidates {
            let (Some(closed), Ok((k, s_num))) = (closed, minimize_in_regime(&p, w, regime, conv)) else {
                continue;
            };
            rows.push(RegimeRow {
                capital_delta: pair[0],
                small_delta: pair[1],
                omega: w,
                regime: regime.label(),
                formula,
                k_numeric: k,
                s_numeric: s_num,
                s_closed: closed,
                relative_gap: s_num / closed - 1.0,
            });
        }
    }
    out.write_table(
        "regimes",
        &["capital_delta", "small_delta", "omega", "regime", "formula", "k_numeric", "s_numeric", "s_closed", "relative_gap"],
        &rows,
    )?;
    Ok(CheckOutcome::new())
}

#[derive(Serialize)]
struct PsdRow {
    channel: &'static str,
    omega: f64,
    measured: f64,
    expected: f64,
    exact: f64,
}

#[derive(Serialize)]
struct BandRow {
    channel: &'static str,
    lo: f64,
    hi: f64,
    bins: usize,
    measured: f64,
    expected: f64,
    std_error: f64,
    z: f64,
    relative_error: f64,
}

#[derive(Serialize)]
struct DetectionRow {
    multiple: f64,
    amplitude: f64,
    threshold: f64,
    trials: usize,
    mean: f64,
    std: f64,
    snr: f64,
    predicted_snr: f64,
    detection_rate: f64,
    positive_rate: f64,
}

#[derive(Serialize)]
struct MonteCarloSummary {
    steps: usize,
    segments: usize,
    bands_within_tolerance: bool,
    check: CheckOutcome,
}

pub fn montecarlo(cfg: &RunConfig, out: &mut OutputDir) -> Result<CheckOutcome, CliError> {
    let p = cfg.params.resolve()?;
    let m = &cfg.montecarlo;
    let vcfg = PsdValidationConfig {
        segment_len: m.segment_len,
        segments: m.segments,
        dt: m.dt,
        seed: m.seed,
        window: m.window,
    };
    let v = numeric(run_psd_validation(&p, &vcfg, &default_bands()))?;
    let mut check = CheckOutcome::new();

    let mut psd_rows = Vec::new();
    for (channel, est) in &v.estimates {
        let curve = |w: f64| channel.psd(&p, w);
        for k in est.band(0.0, m.report_omega_max) {
            psd_rows.push(PsdRow {
                channel: channel.label(),
                omega: est.frequencies[k],
                measured: est.values[k],
                expected: est.expected_bin(k, &curve),
                exact: curve(est.frequencies[k]),
            });
        }
    }
    out.write_table("psd", &["channel", "omega", "measured", "expected", "exact"], &psd_rows)?;

    let band_rows: Vec<BandRow> = v
        .bands
        .iter()
        .map(|b| {
            let c = &b.comparison;
            check.require(c.within(0.05, 3.0), || {
                format!("{} [{}, {}]: relative {:+.3}, z {:+.2}", b.channel.label(), c.lo, c.hi, c.relative_error, c.z)
            });
            BandRow {
                channel: b.channel.label(),
                lo: c.lo,
                hi: c.hi,
                bins: c.bins,
                measured: c.measured,
                expected: c.expected,
                std_error: c.std_error,
                z: c.z,
                relative_error: c.relative_error,
            }
        })
        .collect();
    let bands_ok = check.passed;
    out.write_table(
        "bands",
        &["channel", "lo", "hi", "bins", "measured", "expected", "std_error", "z", "relative_error"],
        &band_rows,
    )?;

    let d = &m.detection;
    if d.enabled {
        let dp = SystemParams { n_thermal: d.n_thermal.unwrap_or(p.n_thermal), ..p };
        let pulse = numeric(SignalPulse::new(1.0, d.psi, d.tau))?;
        let dcfg = DetectionConfig { dt: m.dt, margin: d.margin, ..DetectionConfig::new(d.trials, m.seed) };
        let threshold = numeric(sector_threshold(&dp, &pulse, dcfg.sector))?;
        let amplitudes: Vec<f64> = d.multiples.iter().map(|x| x * threshold).collect();
        let outcomes = numeric(run_detection_sweep(&dp, &pulse, &amplitudes, &dcfg))?;
        let rows: Vec<DetectionRow> = d
            .multiples
            .iter()
            .zip(&outcomes)
            .map(|(&multiple, o)| {
                if multiple == 1.0 {
                    check.require((o.snr - 1.0).abs() <= 0.1, || format!("SNR at threshold {:.3}", o.snr));
                }
                if multiple == 0.0 {
                    let bound = 3.0 / (o.trials as f64).sqrt();
                    check.require(o.snr.abs() < bound, || format!("null-pulse SNR {:.3} exceeds {bound:.3}", o.snr));
                }
                DetectionRow {
                    multiple,
                    amplitude: o.amplitude,
                    threshold: o.threshold,
                    trials: o.trials,
                    mean: o.mean,
                    std: o.std,
                    snr: o.snr,
                    predicted_snr: o.predicted_snr,
                    detection_rate: o.detection_rate,
                    positive_rate: o.positive_rate,
                }
            })
            .collect();
        out.write_table(
            "detection",
            &[
                "multiple", "amplitude", "threshold", "trials", "mean", "std", "snr", "predicted_snr", "detection_rate",
                "positive_rate",
            ],
            &rows,
        )?;
    }

    let summary = MonteCarloSummary {
        steps: v.steps,
        segments: v.estimates.iter().map(|(_, e)| e.segment_count).min().unwrap_or(0),
        bands_within_tolerance: bands_ok,
        check: check.clone(),
    };
    out.write_report("montecarlo", &summary)?;
    Ok(check)
}

#[derive(Serialize)]
struct Eigenvalue {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct StabilitySummary {
    eigenvalues: Vec<Eigenvalue>,
    stable: bool,
    max_real_part: f64,
    expected_real_parts: [f64; 3],
    max_real_part_deviation: f64,
    dense_mismatch: f64,
}

pub fn stability(cfg: &RunConfig, out: &mut OutputDir) -> Result<CheckOutcome, CliError> {
    let p = cfg.params.resolve()?;
    let r = stability_eigenvalues(&p);
    let mut re: Vec<f64> = r.eigenvalues.iter().map(|l| l.re).collect();
    re.sort_by(f64::total_cmp);
    let expected = [-p.gamma, -p.gamma, -p.gamma_m];
    let deviation = re.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let summary = StabilitySummary {
        eigenvalues: r.eigenvalues.iter().map(|l| Eigenvalue { re: l.re, im: l.im }).collect(),
        stable: r.stable,
        max_real_part: r.max_real_part(),
        expected_real_parts: expected,
        max_real_part_deviation: deviation,
        dense_mismatch: r.dense_mismatch(&p),
    };
    let mut check = CheckOutcome::new();
    check.require(r.stable, || format!("unstable: largest real part {}", r.max_real_part()));
    check.require(deviation < 1e-12, || format!("real parts deviate from {{-γ, -γ, -γ_m}} by {deviation:e}"));
    out.write_report("stability", &summary)?;
    Ok(check)
}

#[derive(Serialize)]
struct QmfsSummary {
    coupling: f64,
    horizon: f64,
    polynomial_mismatch: f64,
    constants_drift: f64,
    symplectic_defect: f64,
    hamiltonian_drift_exact: bool,
    commutator_blocks: (f64, f64),
}

pub fn qmfs(cfg: &RunConfig, out: &mut OutputDir) -> Result<CheckOutcome, CliError> {
    let p = cfg.params.resolve()?;
    let g = SQRT_2 * p.eta_c0;
    if g <= 0.0 {
        return Err(CliError::Config("qmfs-check needs a positive params.eta_c0".to_string()));
    }
    let [pi1, q, pi2, phi2, pm, phi1] = cfg.qmfs.initial;
    let start = QmfsVariables { pi1, q, pi2, phi2, p: pm, phi1 };
    let evolution = qmfs_evolve(g, start, &lin_space(0.0, 10.0 / g, cfg.qmfs.points));
    let closed = p.decay_free();
    let summary = QmfsSummary {
        coupling: g,
        horizon: 10.0 / g,
        polynomial_mismatch: evolution.max_relative_mismatch(),
        constants_drift: evolution.constants_drift(),
        symplectic_defect: symplectic_check(&p),
        hamiltonian_drift_exact: interaction_hamiltonian_drift(&closed) == drift(&closed).a,
        commutator_blocks: qmfs_commutator_blocks(),
    };
    let mut check = CheckOutcome::new();
    check.require(summary.polynomial_mismatch < 1e-9, || format!("polynomial mismatch {:e}", summary.polynomial_mismatch));
    check.require(summary.constants_drift < 1e-10, || format!("constants drift {:e}", summary.constants_drift));
    check.require(summary.symplectic_defect < 1e-10, || format!("symplectic defect {:e}", summary.symplectic_defect));
    check.require(summary.hamiltonian_drift_exact, || "Hamiltonian drift differs from the solver".to_string());
    out.write_report("qmfs", &summary)?;
    Ok(check)
}
