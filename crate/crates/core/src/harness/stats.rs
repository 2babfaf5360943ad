//! Summary statistics for restart studies.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Standard error of the mean (sample standard deviation over `sqrt(len)`).
/// Zero for fewer than two samples.
pub fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs).unwrap_or_default();
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

pub fn rms(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len().max(1) as f64).sqrt()
}

/// `(conv - init) / (opt - init)`, or `None` when `opt == init`.
pub fn gain(init: f64, conv: f64, opt: f64) -> Option<f64> {
    let denom = opt - init;
    (denom != 0.0).then(|| (conv - init) / denom)
}

/// Gains and convergence of one set of restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub gains: Vec<Option<f64>>,
    pub mean_gain: Option<f64>,
    pub gain_se: f64,
    /// Runs whose gain is undefined and excluded from the mean.
    pub undefined: usize,
    pub runs: usize,
    pub converged: usize,
    pub convergence_rate: f64,
}

impl GainReport {
    pub fn new(gains: Vec<Option<f64>>, converged: &[bool]) -> Self {
        assert_eq!(gains.len(), converged.len());
        let defined: Vec<f64> = gains.iter().flatten().copied().collect();
        let runs = gains.len();
        let hits = converged.iter().filter(|&&c| c).count();
        GainReport {
            mean_gain: mean(&defined),
            gain_se: standard_error(&defined),
            undefined: runs - defined.len(),
            runs,
            converged: hits,
            convergence_rate: if runs == 0 { 0.0 } else { hits as f64 / runs as f64 },
            gains,
        }
    }
}

/// Fraction of overlaps at or above `gamma`.
pub fn convergence_rate(overlaps: &[f64], gamma: f64) -> f64 {
    if overlaps.is_empty() {
        return 0.0;
    }
    overlaps.iter().filter(|&&o| o >= gamma).count() as f64 / overlaps.len() as f64
}

/// Counts of `values` in `bins` equal-width bins over `[lo, hi]`; values
/// outside the range land in the end bins.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64, usize)> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = ((v - lo) / width).floor();
        let k = if k.is_nan() { 0 } else { (k.max(0.0) as usize).min(bins - 1) };
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c))
        .collect()
}
