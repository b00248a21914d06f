//! Distribution measurement: Gini, histograms, empirical CCDF, mode,
//! Kolmogorov–Smirnov distances, Gamma references and Pareto tail fits.

mod gamma;
mod tail;

pub use gamma::{exponential_cdf, gamma_cdf, gamma_gini, gamma_pdf};
pub use tail::{fit_pareto_tail, FitMethod, TailFit, TailFitReport};

use serde::{Deserialize, Serialize};

use crate::error::{KinexError, Result};

/// Default number of linear histogram bins.
pub const DEFAULT_BINS: usize = 100;
/// Default fraction of the largest samples used for tail fitting.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Gini coefficient of a non-negative population.
///
/// With `w` sorted non-decreasingly and 1-based ranks `n`:
/// `G = (1/N)·[N + 1 - 2·Σ(N+1-n)·w_n / Σw_n]`.
pub fn gini(wealth: &[f64]) -> Result<f64> {
    if let Some(&bad) = wealth.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(KinexError::Domain { name: "wealth", value: bad, domain: "[0, inf)" });
    }
    let sorted = sorted_copy(wealth);
    let n = sorted.len();
    let total: f64 = sorted.iter().sum();
    if n == 0 || total <= 0.0 {
        return Err(KinexError::Undefined("gini of an empty or all-zero population".into()));
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(k, w)| (n - k) as f64 * w)
        .sum();
    let nf = n as f64;
    let g = (nf + 1.0 - 2.0 * weighted / total) / nf;
    Ok(g.clamp(0.0, 1.0))
}

/// Linear-bin histogram over `[0, w_max]`. Samples outside the range are
/// clamped into the end bins so the counts always sum to the sample count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub w_max: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bins: usize, w_max: f64) -> Result<Self> {
        if bins == 0 {
            return Err(KinexError::Config("histogram needs at least one bin".into()));
        }
        if !(w_max > 0.0) || !w_max.is_finite() {
            return Err(KinexError::Domain { name: "w_max", value: w_max, domain: "(0, inf)" });
        }
        Ok(Self { w_max, counts: vec![0; bins] })
    }

    pub fn from_samples(samples: &[f64], bins: usize, w_max: f64) -> Result<Self> {
        let mut h = Self::new(bins, w_max)?;
        h.extend(samples);
        Ok(h)
    }

    pub fn extend(&mut self, samples: &[f64]) {
        let bins = self.counts.len();
        let scale = bins as f64 / self.w_max;
        for &w in samples {
            // `as usize` saturates negatives to 0.
            let k = ((w * scale) as usize).min(bins - 1);
            self.counts[k] += 1;
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.w_max / self.bins() as f64
    }

    pub fn n_samples(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        let dw = self.bin_width();
        (0..self.bins()).map(|k| (k as f64 + 0.5) * dw).collect()
    }

    /// `counts / (n·Δw)`, integrating to one.
    pub fn density(&self) -> Vec<f64> {
        let norm = self.n_samples() as f64 * self.bin_width();
        self.counts.iter().map(|&c| if norm > 0.0 { c as f64 / norm } else { 0.0 }).collect()
    }

    /// Adds another histogram with identical binning.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.bins() != other.bins() || self.w_max != other.w_max {
            return Err(KinexError::Config("cannot merge histograms with different binning".into()));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }
}

/// Upper edge used for PDF panels: `max(5·mean, observed max)`.
pub fn default_hist_max(samples: &[f64]) -> f64 {
    let max = samples.iter().copied().fold(0.0, f64::max);
    let m = if samples.is_empty() { 1.0 } else { mean(samples) };
    let upper = (5.0 * m).max(max);
    if upper > 0.0 {
        upper
    } else {
        1.0
    }
}

/// Linear histogram of `wealth` with `bins` bins over `[0, w_max]`.
pub fn histogram(wealth: &[f64], bins: usize, w_max: f64) -> Result<Histogram> {
    Histogram::from_samples(wealth, bins, w_max)
}

/// Empirical complementary CDF `F̂(w) = #{samples ≥ w} / N`, stored at each
/// distinct sample value in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ccdf {
    pub values: Vec<f64>,
    pub exceedance: Vec<f64>,
    pub n: usize,
}

impl Ccdf {
    /// `F̂(w)` at an arbitrary point.
    pub fn eval(&self, w: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < w);
        self.exceedance.get(k).copied().unwrap_or(0.0)
    }

    /// `(w, F̂(w))` at `points` logarithmically spaced values between the
    /// smallest positive sample and the maximum.
    pub fn log_spaced(&self, points: usize) -> Vec<(f64, f64)> {
        let lo = match self.values.iter().find(|&&v| v > 0.0) {
            Some(&v) => v,
            None => return Vec::new(),
        };
        let hi = *self.values.last().unwrap();
        if points < 2 || hi <= lo {
            return vec![(lo, self.eval(lo))];
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        (0..points)
            .map(|k| {
                let w = if k + 1 == points {
                    hi
                } else {
                    (llo + (lhi - llo) * k as f64 / (points - 1) as f64).exp()
                };
                (w, self.eval(w))
            })
            .collect()
    }
}

pub fn ccdf(wealth: &[f64]) -> Result<Ccdf> {
    if wealth.is_empty() {
        return Err(KinexError::Undefined("ccdf of an empty sample".into()));
    }
    let sorted = sorted_copy(wealth);
    let n = sorted.len();
    let mut values = Vec::new();
    let mut exceedance = Vec::new();
    for (k, &w) in sorted.iter().enumerate() {
        if values.last() != Some(&w) {
            values.push(w);
            exceedance.push((n - k) as f64 / n as f64);
        }
    }
    Ok(Ccdf { values, exceedance, n })
}

/// Center of the first bin with the largest 3-bin moving-average count.
/// The window is truncated at the histogram edges.
pub fn mode_estimate(h: &Histogram) -> f64 {
    let c = &h.counts;
    let bins = c.len();
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 0..bins {
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(bins - 1);
        let window = &c[lo..=hi];
        let smoothed = window.iter().sum::<u64>() as f64 / window.len() as f64;
        if smoothed > best.1 {
            best = (k, smoothed);
        }
    }
    (best.0 as f64 + 0.5) * h.bin_width()
}

/// Mode from a histogram over `[0, 5·mean]` with `bins` bins.
pub fn sample_mode(samples: &[f64], bins: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(KinexError::Undefined("mode of an empty sample".into()));
    }
    let m = mean(samples);
    let h = Histogram::from_samples(samples, bins, if m > 0.0 { 5.0 * m } else { 1.0 })?;
    Ok(mode_estimate(&h))
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n - F|`.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], reference_cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(KinexError::Undefined("ks distance of an empty sample".into()));
    }
    let sorted = sorted_copy(sample);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = reference_cdf(x);
        d = d.max(f - k as f64 / n).max((k + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(KinexError::Undefined("ks distance of an empty sample".into()));
    }
    let (a, b) = (sorted_copy(a), sorted_copy(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic two-sample KS rejection threshold at significance `alpha`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Measurements of one pooled sample.
#[derive(Debug, Clone)]
pub struct DistributionSummary {
    pub n_samples: usize,
    pub histogram: Histogram,
    pub ccdf: Ccdf,
    pub gini: f64,
    pub mode: f64,
    pub tail_fit: std::result::Result<TailFitReport, KinexError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    pub bins: usize,
    pub tail_fraction: f64,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, tail_fraction: DEFAULT_TAIL_FRACTION }
    }
}

impl DistributionSummary {
    pub fn from_samples(samples: &[f64], opts: &SummaryOptions) -> Result<Self> {
        Ok(Self {
            n_samples: samples.len(),
            histogram: Histogram::from_samples(samples, opts.bins, default_hist_max(samples))?,
            ccdf: ccdf(samples)?,
            gini: gini(samples)?,
            mode: sample_mode(samples, opts.bins)?,
            tail_fit: fit_pareto_tail(samples, opts.tail_fraction),
        })
    }
}
