use serde::{Deserialize, Serialize};

use crate::error::{KinexError, Result};

/// Smallest tail accepted by [`fit_pareto_tail`].
pub const MIN_TAIL_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    LogLogRegression,
    Hill,
}

/// One Pareto tail-index estimate for `F(w) ∝ w^-ν` above `w_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub method: FitMethod,
    pub nu: f64,
    pub stderr: f64,
    pub w_min: f64,
    pub n_tail: usize,
}

/// Both estimators over the same tail window. `regression` is the primary
/// estimate; `hill` is the cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFitReport {
    pub regression: TailFit,
    pub hill: TailFit,
}

impl TailFitReport {
    pub fn nu(&self) -> f64 {
        self.regression.nu
    }

    /// `|ν_regression - ν_hill|`
    pub fn disagreement(&self) -> f64 {
        (self.regression.nu - self.hill.nu).abs()
    }
}

/// Fits the Pareto index to the largest `tail_fraction` of `wealth`.
///
/// The cutoff `w_min` is the `(1 - tail_fraction)` quantile. The primary
/// estimate is the least-squares slope of `ln F̂(w)` against `ln w` over the
/// tail samples (`ν = -slope`); the Hill estimate
/// `ν = n_tail / Σ ln(w_k / w_min)` is reported alongside.
pub fn fit_pareto_tail(wealth: &[f64], tail_fraction: f64) -> Result<TailFitReport> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(KinexError::Domain { name: "tail_fraction", value: tail_fraction, domain: "(0, 0.5]" });
    }
    let n = wealth.len();
    let k = (tail_fraction * n as f64).round() as usize;
    let fail = |reason: &str| KinexError::Fit { n_tail: k, reason: reason.to_string() };
    if k < MIN_TAIL_SAMPLES || k >= n {
        return Err(fail(&format!("need at least {MIN_TAIL_SAMPLES} tail samples out of {n}")));
    }
    let mut sorted = wealth.to_vec();
    sorted.sort_by(f64::total_cmp);
    let w_min = sorted[n - k - 1];
    if !(w_min > 0.0) || !w_min.is_finite() {
        return Err(fail("tail cutoff is not strictly positive"));
    }
    let tail = &sorted[n - k..];

    let log_excess: f64 = tail.iter().map(|w| (w / w_min).ln()).sum();
    if !(log_excess > 0.0) {
        return Err(fail("degenerate tail: all tail samples equal the cutoff"));
    }
    let nu_hill = k as f64 / log_excess;
    let hill = TailFit {
        method: FitMethod::Hill,
        nu: nu_hill,
        stderr: nu_hill / (k as f64).sqrt(),
        w_min,
        n_tail: k,
    };

    // Regression points (ln w, ln F̂(w)), one per distinct tail value, where
    // F̂(w) counts samples ≥ w.
    let mut xs = Vec::with_capacity(k);
    let mut ys = Vec::with_capacity(k);
    for (offset, &w) in tail.iter().enumerate() {
        if offset > 0 && tail[offset - 1] == w {
            continue;
        }
        let at_least = k - offset;
        xs.push(w.ln());
        ys.push((at_least as f64 / n as f64).ln());
    }
    if xs.len() < 3 {
        return Err(fail("degenerate tail: fewer than three distinct values"));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(fail("degenerate tail: no spread in log wealth"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    let regression = TailFit {
        method: FitMethod::LogLogRegression,
        nu: -slope,
        stderr,
        w_min,
        n_tail: k,
    };
    Ok(TailFitReport { regression, hill })
}
