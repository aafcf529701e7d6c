//! Segment-averaged periodogram (Welch) estimation of single-sided PSDs.
//!
//! Frequencies are angular, `Ω_k = 2πk/(N dt)`, and transforms use `e^{+iΩt}`. A white record
//! whose single-sided PSD is `S` (sample variance `S/(2 dt)`) estimates to `S` in every bin.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use super::TimeDomainError;

/// Fewest segments accepted by [`estimate_psd`].
pub const MIN_SEGMENTS: usize = 8;
/// Half-width, in bins, of the window kernel used for expected values.
pub const KERNEL_HALF_WIDTH: usize = 10;
const KERNEL_SUBSAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    #[default]
    BlackmanHarris,
    Hann,
    Rectangular,
}

impl WindowKind {
    /// Periodic window of length `n`.
    pub fn samples(self, n: usize) -> Vec<f64> {
        let coeffs: &[f64] = match self {
            WindowKind::BlackmanHarris => &[0.35875, 0.48829, 0.14128, 0.01168],
            WindowKind::Hann => &[0.5, 0.5],
            WindowKind::Rectangular => &[1.0],
        };
        (0..n)
            .map(|i| {
                let x = 2.0 * PI * i as f64 / n as f64;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| if j % 2 == 0 { a } else { -a } * (j as f64 * x).cos())
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_len: usize,
    /// Samples shared between consecutive segments.
    pub overlap: usize,
    pub window: WindowKind,
}

impl WelchConfig {
    pub fn new(segment_len: usize) -> Self {
        Self {
            segment_len,
            overlap: 0,
            window: WindowKind::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    /// Angular frequencies of bins `0..=N/2`.
    pub frequencies: Vec<f64>,
    /// Mean single-sided PSD over segments.
    pub values: Vec<f64>,
    pub segment_count: usize,
    /// Relative standard deviation of `values`, averaged over bins.
    pub relative_std: f64,
    pub dt: f64,
    pub config: WelchConfig,
    /// Per-segment periodograms.
    pub segments: Vec<Vec<f64>>,
    /// Normalized window power kernel `(offset in bins, weight)`.
    kernel: Vec<(f64, f64)>,
}

/// Band-averaged comparison between an estimate and an expected curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandComparison {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
    pub measured: f64,
    pub expected: f64,
    /// Standard error of `measured` from the spread of segment-level band averages.
    pub std_error: f64,
    pub z: f64,
    pub relative_error: f64,
}

impl BandComparison {
    pub fn within(&self, relative: f64, z_max: f64) -> bool {
        self.relative_error.abs() < relative && self.z.abs() < z_max
    }
}

impl PsdEstimate {
    pub fn bin_width(&self) -> f64 {
        2.0 * PI / (self.config.segment_len as f64 * self.dt)
    }

    /// Bins whose frequency lies in `[lo, hi]`.
    pub fn band(&self, lo: f64, hi: f64) -> Range<usize> {
        let start = self.frequencies.partition_point(|&w| w < lo);
        let end = self.frequencies.partition_point(|&w| w <= hi);
        start..end.max(start)
    }

    /// Expected estimator value in bin `k` for a true single-sided PSD `psd(|Ω|)`.
    pub fn expected_bin<F: Fn(f64) -> f64>(&self, k: usize, psd: &F) -> f64 {
        let w = self.frequencies[k];
        let dw = self.bin_width();
        self.kernel
            .iter()
            .map(|(off, weight)| weight * psd((w + off * dw).abs()))
            .sum()
    }

    pub fn compare_band<F: Fn(f64) -> f64 + Sync>(&self, lo: f64, hi: f64, psd: F) -> BandComparison {
        let range = self.band(lo, hi);
        let bins = range.len();
        let n = bins.max(1) as f64;
        let expected = range.clone().into_par_iter().map(|k| self.expected_bin(k, &psd)).sum::<f64>() / n;
        let per_segment: Vec<f64> = self
            .segments
            .iter()
            .map(|s| s[range.clone()].iter().sum::<f64>() / n)
            .collect();
        let m = per_segment.len() as f64;
        let measured = per_segment.iter().sum::<f64>() / m;
        let var = per_segment.iter().map(|v| (v - measured).powi(2)).sum::<f64>() / (m - 1.0);
        let std_error = (var / m).sqrt();
        BandComparison {
            lo,
            hi,
            bins,
            measured,
            expected,
            std_error,
            z: (measured - expected) / std_error,
            relative_error: measured / expected - 1.0,
        }
    }
}

fn window_kernel(window: &[f64]) -> Vec<(f64, f64)> {
    let n = window.len() as f64;
    let steps = 2 * KERNEL_HALF_WIDTH * KERNEL_SUBSAMPLES;
    let mut raw: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let off = -(KERNEL_HALF_WIDTH as f64) + i as f64 / KERNEL_SUBSAMPLES as f64;
            let sum: Complex64 = window
                .iter()
                .enumerate()
                .map(|(j, w)| Complex64::from_polar(*w, 2.0 * PI * off * j as f64 / n))
                .sum();
            (off, sum.norm_sqr())
        })
        .collect();
    // trapezoid weights
    raw[0].1 *= 0.5;
    raw[steps].1 *= 0.5;
    let total: f64 = raw.iter().map(|r| r.1).sum();
    raw.iter_mut().for_each(|r| r.1 /= total);
    raw
}

/// Welch estimate of a real record sampled at `dt`.
pub fn estimate_psd(record: &[f64], dt: f64, config: &WelchConfig) -> Result<PsdEstimate, TimeDomainError> {
    let n = config.segment_len;
    if n < 2 || config.overlap >= n {
        return Err(TimeDomainError::InvalidSegment { segment_len: n, overlap: config.overlap });
    }
    let hop = n - config.overlap;
    let count = if record.len() >= n { (record.len() - n) / hop + 1 } else { 0 };
    if count < MIN_SEGMENTS {
        return Err(TimeDomainError::TooFewSegments { got: count, need: MIN_SEGMENTS });
    }
    let window = config.window.samples(n);
    let power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft(n, FftDirection::Inverse);
    let half = n / 2;
    let scale = 2.0 * dt / power;
    let segments: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|s| {
            let seg = &record[s * hop..s * hop + n];
            let mut buf: Vec<Complex64> = seg.iter().zip(&window).map(|(x, w)| Complex64::from(x * w)).collect();
            fft.process(&mut buf);
            let mut p: Vec<f64> = buf[..=half].iter().map(|c| scale * c.norm_sqr()).collect();
            // DC and Nyquist carry no mirrored partner
            p[0] *= 0.5;
            if n.is_multiple_of(2) {
                p[half] *= 0.5;
            }
            p
        })
        .collect();
    let m = count as f64;
    let values: Vec<f64> = (0..=half).map(|k| segments.iter().map(|s| s[k]).sum::<f64>() / m).collect();
    let rel: f64 = (1..half)
        .map(|k| {
            let var = segments.iter().map(|s| (s[k] - values[k]).powi(2)).sum::<f64>() / (m - 1.0);
            var.sqrt() / values[k]
        })
        .sum::<f64>()
        / (half.max(2) - 1) as f64;
    let dw = 2.0 * PI / (n as f64 * dt);
    Ok(PsdEstimate {
        frequencies: (0..=half).map(|k| k as f64 * dw).collect(),
        values,
        segment_count: count,
        relative_std: rel / m.sqrt(),
        dt,
        config: *config,
        segments,
        kernel: window_kernel(&window),
    })
}
