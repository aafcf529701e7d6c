//! Small numerical helpers: bracketed 1-D minimization on a log axis.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinimizeError {
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("objective returned a non-finite value at x = {x} inside [{lo}, {hi}]")]
    NonFinite { x: f64, lo: f64, hi: f64 },
    #[error("golden-section search did not converge in [{lo}, {hi}] after {iterations} iterations")]
    NoConvergence { lo: f64, hi: f64, iterations: usize },
}

/// Result of a bracketed minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    /// Where the coarse scan found its best point.
    pub location: BracketLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketLocation {
    Interior,
    LowerEdge,
    UpperEdge,
}

const SCAN_POINTS: usize = 481;
const MAX_ITER: usize = 400;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes `f` over `[lo, hi]` in `ln x`: coarse log-grid scan, then golden-section refinement.
pub fn minimize_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<Minimum, MinimizeError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(MinimizeError::InvalidBracket { lo, hi });
    }
    let (u0, u1) = (lo.ln(), hi.ln());
    let eval = |u: f64| {
        let x = u.exp().clamp(lo, hi);
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(MinimizeError::NonFinite { x, lo, hi })
        }
    };
    let step = (u1 - u0) / (SCAN_POINTS - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..SCAN_POINTS {
        let v = eval(u0 + step * i as f64)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let location = match best.0 {
        0 => BracketLocation::LowerEdge,
        i if i == SCAN_POINTS - 1 => BracketLocation::UpperEdge,
        _ => BracketLocation::Interior,
    };
    let mut a = u0 + step * best.0.saturating_sub(1) as f64;
    let mut b = (u0 + step * (best.0 + 1) as f64).min(u1);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    let mut iterations = 0;
    while (b - a).abs() > 1e-13 * (1.0 + a.abs().max(b.abs())) {
        iterations += 1;
        if iterations > MAX_ITER {
            return Err(MinimizeError::NoConvergence { lo, hi, iterations });
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    let u = 0.5 * (a + b);
    let mut out = Minimum {
        x: u.exp().clamp(lo, hi),
        value: eval(u)?,
        location,
    };
    // the scan grid point may beat the refined one at a bracket edge
    for (x, v) in [(lo, eval(u0)?), (hi, eval(u1)?), ((u0 + step * best.0 as f64).exp(), best.1)] {
        if v < out.value {
            out.x = x.clamp(lo, hi);
            out.value = v;
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`, with the coefficient of determination.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Ordinary least squares `y = a + b x`; returns `(b, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum() {
        let m = minimize_log(|x| 4.0 / x + x, 1e-6, 1e6).unwrap();
        assert_eq!(m.location, BracketLocation::Interior);
        assert!((m.x - 2.0).abs() < 1e-6);
        assert!((m.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn reports_edges() {
        let m = minimize_log(|x| 1.0 / x, 1e-3, 1e3).unwrap();
        assert_eq!(m.location, BracketLocation::UpperEdge);
        assert!((m.x - 1e3).abs() < 1e-9);
        let m = minimize_log(|x| x, 1e-3, 1e3).unwrap();
        assert_eq!(m.location, BracketLocation::LowerEdge);
        assert!((m.x - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(minimize_log(|x| x, 0.0, 1.0).is_err());
        assert!(minimize_log(|x| x, 2.0, 1.0).is_err());
        assert!(matches!(
            minimize_log(|_| f64::NAN, 1.0, 2.0),
            Err(MinimizeError::NonFinite { .. })
        ));
    }

    #[test]
    fn slopes() {
        let x = [1.0, 2.0, 4.0];
        let y = [3.0, 12.0, 48.0];
        let (s, r2) = log_log_slope(&x, &y);
        assert!((s - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        let g = log_space(1e-2, 10.0, 4);
        assert!((g[1] - 1e-1).abs() < 1e-15 && (g[3] - 10.0).abs() < 1e-13);
    }
}
