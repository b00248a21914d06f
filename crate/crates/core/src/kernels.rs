//! Pairwise exchange rules.
//!
//! Kernels are pure: every random variate (`eta`, `u`) is passed in by the
//! caller, so any transaction can be replayed exactly. The public functions
//! validate their parameters; the engine calls the `*_unchecked` forms after
//! validating a [`KernelSpec`] once.

use serde::{Deserialize, Serialize};

use crate::error::{check_closed, check_unit, KinexError, Result};
use crate::operators::{ExchangeOperator, WealthPair};

/// Law of the frozen per-agent parameters of the heterogeneous kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamDist {
    /// `u`
    #[default]
    Uniform01,
    /// `1 - u²`
    OneMinusXiSquared,
    /// `1 - u⁴`
    OneMinusXiFourth,
}

impl ParamDist {
    pub const ALL: [ParamDist; 3] = [
        ParamDist::Uniform01,
        ParamDist::OneMinusXiSquared,
        ParamDist::OneMinusXiFourth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamDist::Uniform01 => "uniform01",
            ParamDist::OneMinusXiSquared => "one_minus_xi_squared",
            ParamDist::OneMinusXiFourth => "one_minus_xi_fourth",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == s)
    }

    /// Maps a uniform variate `u` onto this law.
    #[inline]
    pub fn sample(self, u: f64) -> f64 {
        match self {
            ParamDist::Uniform01 => u,
            ParamDist::OneMinusXiSquared => 1.0 - u * u,
            ParamDist::OneMinusXiFourth => {
                let u2 = u * u;
                1.0 - u2 * u2
            }
        }
    }
}

/// Maps a uniform variate onto the chosen parameter law.
pub fn sample_param(d: ParamDist, u: f64) -> f64 {
    d.sample(u)
}

/// The exchange rule driving a simulation, with exactly the parameters it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// Pool the pair and split by a fresh `η`.
    Basic,
    /// Global saving propensity `λ`.
    UniformSavings { lambda: f64 },
    /// Fraction `f` of each transaction is taxed and shared by everybody.
    Taxation { f: f64 },
    /// Frozen per-agent saving propensities `λ_n`.
    HeterogeneousSavings {
        #[serde(default)]
        param_dist: ParamDist,
    },
    /// `ξ·T-(ε) + (1-ξ)·T+(ε')` with fresh `ε, ε'` each step.
    Interpolated { xi: f64 },
    /// `T+(ε, ρ)` with fresh `ε, ρ` each step.
    TwoParamPlus,
    /// `T-(ε, ρ)` with fresh `ε, ρ` each step.
    TwoParamMinus,
    /// `T+(ε_i, ρ_j)` with frozen per-agent risk aversion.
    RiskAversion {
        #[serde(default)]
        param_dist: ParamDist,
    },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::UniformSavings { lambda } => check_unit("lambda", lambda).map(drop),
            KernelSpec::Taxation { f } => {
                if (0.0..1.0).contains(&f) {
                    Ok(())
                } else {
                    Err(KinexError::Domain { name: "f", value: f, domain: "[0, 1)" })
                }
            }
            KernelSpec::Interpolated { xi } => check_unit("xi", xi).map(drop),
            _ => Ok(()),
        }
    }

    /// Law of the frozen per-agent parameters; kernels without frozen
    /// parameters still get uniform draws so every population carries them.
    pub fn param_dist(&self) -> ParamDist {
        match *self {
            KernelSpec::HeterogeneousSavings { param_dist } | KernelSpec::RiskAversion { param_dist } => param_dist,
            _ => ParamDist::Uniform01,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Basic => "basic",
            KernelSpec::UniformSavings { .. } => "uniform_savings",
            KernelSpec::Taxation { .. } => "taxation",
            KernelSpec::HeterogeneousSavings { .. } => "heterogeneous_savings",
            KernelSpec::Interpolated { .. } => "interpolated",
            KernelSpec::TwoParamPlus => "two_param_plus",
            KernelSpec::TwoParamMinus => "two_param_minus",
            KernelSpec::RiskAversion { .. } => "risk_aversion",
        }
    }
}

/// Frozen per-agent parameters: risk aversion `ε_n, ρ_n` and saving
/// propensity `λ_n`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentParams {
    pub eps: Vec<f64>,
    pub rho: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl AgentParams {
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }
}

/// `(η·S, (1-η)·S)` with `S = wi + wj`.
pub fn basic_exchange(p: WealthPair, eta: f64) -> Result<WealthPair> {
    check_unit("eta", eta)?;
    Ok(basic_unchecked(p, eta))
}

#[inline]
pub(crate) fn basic_unchecked(p: WealthPair, eta: f64) -> WealthPair {
    ExchangeOperator::from_top_row(eta, eta).apply(p)
}

/// Each agent keeps `λ` of its wealth; the rest is pooled and split by `η`.
pub fn savings_exchange(p: WealthPair, lambda: f64, eta: f64) -> Result<WealthPair> {
    check_unit("lambda", lambda)?;
    check_unit("eta", eta)?;
    Ok(savings_unchecked(p, lambda, eta))
}

#[inline]
pub(crate) fn savings_unchecked(p: WealthPair, lambda: f64, eta: f64) -> WealthPair {
    hetero_savings_unchecked(p, lambda, lambda, eta)
}

/// First half of a taxed transaction: the pair keeps `(1-f)·S`, split by `η`,
/// and `τ = f·S` is returned for redistribution.
pub fn taxed_exchange(p: WealthPair, f: f64, eta: f64) -> Result<(WealthPair, f64)> {
    KernelSpec::Taxation { f }.validate()?;
    check_unit("eta", eta)?;
    Ok(taxed_unchecked(p, f, eta))
}

#[inline]
pub(crate) fn taxed_unchecked(p: WealthPair, f: f64, eta: f64) -> (WealthPair, f64) {
    let s = p.total();
    let tau = f * s;
    let kept = s - tau;
    (
        WealthPair {
            wi: eta * kept,
            wj: (1.0 - eta) * kept,
        },
        tau,
    )
}

/// Heterogeneous savings: agent `i` keeps `λi·wi`, agent `j` keeps `λj·wj`,
/// the remainder is pooled and split by `η`.
pub fn hetero_savings_exchange(p: WealthPair, lambda_i: f64, lambda_j: f64, eta: f64) -> Result<WealthPair> {
    check_unit("lambda_i", lambda_i)?;
    check_unit("lambda_j", lambda_j)?;
    check_unit("eta", eta)?;
    Ok(hetero_savings_unchecked(p, lambda_i, lambda_j, eta))
}

#[inline]
pub(crate) fn hetero_savings_unchecked(p: WealthPair, lambda_i: f64, lambda_j: f64, eta: f64) -> WealthPair {
    let kept_i = lambda_i * p.wi;
    let kept_j = lambda_j * p.wj;
    let pool = (1.0 - lambda_i) * p.wi + (1.0 - lambda_j) * p.wj;
    WealthPair {
        wi: kept_i + eta * pool,
        wj: kept_j + (1.0 - eta) * pool,
    }
}

/// Operator parameters `(ε', ρ')` such that `T+(ε', ρ')` reproduces
/// [`hetero_savings_exchange`]:
/// `ε' = 1 - (1-η)(1-λi)`, `ρ' = η(1-λj)`.
///
/// `ρ'` is the share of `wj` that lands with agent `i`, which is `η(1-λj)`
/// in the kernel above. The often-quoted `(1-η)(1-λj)` only matches after
/// relabelling `η → 1-η` (same law, different individual outcomes).
pub fn savings_to_operator_params(eta: f64, lambda_i: f64, lambda_j: f64) -> Result<(f64, f64)> {
    check_unit("eta", eta)?;
    check_unit("lambda_i", lambda_i)?;
    check_unit("lambda_j", lambda_j)?;
    Ok((1.0 - (1.0 - eta) * (1.0 - lambda_i), eta * (1.0 - lambda_j)))
}

/// `T+(εi, ρj)` applied to the pair, with `εi` owned by the first agent and
/// `ρj` by the second.
pub fn risk_aversion_exchange(p: WealthPair, eps_i: f64, rho_j: f64) -> Result<WealthPair> {
    Ok(ExchangeOperator::tplus2(eps_i, rho_j)?.apply(p))
}

/// Adds `τ/N` to every agent.
pub fn redistribute(wealth: &mut [f64], tau: f64) -> Result<()> {
    check_closed("tau", tau, 0.0, f64::MAX, "[0, inf)")?;
    if wealth.is_empty() {
        return Ok(());
    }
    let share = tau / wealth.len() as f64;
    if share != 0.0 {
        wealth.iter_mut().for_each(|w| *w += share);
    }
    Ok(())
}
