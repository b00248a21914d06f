use statrs::distribution::{ContinuousCDF, Gamma};
use statrs::function::gamma::ln_gamma;

use crate::error::{KinexError, Result};

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(KinexError::Domain { name, value: v, domain: "(0, inf)" })
    }
}

/// Gamma density `w^(k-1)·e^(-w/θ) / (Γ(k)·θ^k)`.
pub fn gamma_pdf(w: f64, k: f64, theta: f64) -> Result<f64> {
    check_positive("k", k)?;
    check_positive("theta", theta)?;
    if !(w >= 0.0) {
        return Err(KinexError::Domain { name: "w", value: w, domain: "[0, inf)" });
    }
    if w == 0.0 {
        return Ok(match k {
            k if k < 1.0 => f64::INFINITY,
            1.0 => 1.0 / theta,
            _ => 0.0,
        });
    }
    let log = (k - 1.0) * w.ln() - w / theta - ln_gamma(k) - k * theta.ln();
    Ok(log.exp())
}

/// Gamma CDF with shape `k` and scale `θ`.
pub fn gamma_cdf(w: f64, k: f64, theta: f64) -> Result<f64> {
    check_positive("k", k)?;
    check_positive("theta", theta)?;
    let g = Gamma::new(k, 1.0 / theta).map_err(|e| KinexError::Config(e.to_string()))?;
    Ok(if w <= 0.0 { 0.0 } else { g.cdf(w) })
}

/// Unit-mean exponential CDF.
pub fn exponential_cdf(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        -(-w).exp_m1()
    }
}

/// Gini coefficient of a Gamma law with shape `k`:
/// `Γ(k + 1/2) / (Γ(k + 1)·√π)`; independent of the scale.
pub fn gamma_gini(k: f64) -> Result<f64> {
    check_positive("k", k)?;
    Ok((ln_gamma(k + 0.5) - ln_gamma(k + 1.0)).exp() / std::f64::consts::PI.sqrt())
}
