//! Conservative 2×2 exchange operators acting on a pair of agent wealths.
//!
//! Every operator here is column-stochastic, so applying it to a pair
//! `(wi, wj)` conserves `wi + wj`. The second row is always stored as
//! `1 - first row`, which makes each column sum to exactly `1.0` in
//! floating point for any first-row entry in `[0, 1]`.

use crate::error::{check_closed, check_unit, KinexError, Result};

/// Wealth held by the two agents taking part in one transaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WealthPair {
    pub wi: f64,
    pub wj: f64,
}

impl WealthPair {
    /// Builds a pair, rejecting negative or non-finite wealth.
    pub fn new(wi: f64, wj: f64) -> Result<Self> {
        check_closed("wi", wi, 0.0, f64::MAX, "[0, inf)")?;
        check_closed("wj", wj, 0.0, f64::MAX, "[0, inf)")?;
        Ok(Self { wi, wj })
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.wi + self.wj
    }
}

/// A column-stochastic 2×2 matrix `[[m11, m12], [m21, m22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeOperator {
    m11: f64,
    m12: f64,
    m21: f64,
    m22: f64,
}

impl ExchangeOperator {
    /// Builds an operator from its first row; the second row is `1 - first`.
    /// Callers guarantee both entries lie in `[0, 1]`.
    #[inline]
    pub(crate) fn from_top_row(m11: f64, m12: f64) -> Self {
        Self {
            m11,
            m12,
            m21: 1.0 - m11,
            m22: 1.0 - m12,
        }
    }

    /// Builds an operator from explicit entries, checking column-stochasticity.
    pub fn from_entries(entries: [[f64; 2]; 2]) -> Result<Self> {
        let [[m11, m12], [m21, m22]] = entries;
        for v in [m11, m12, m21, m22] {
            check_unit("entry", v)?;
        }
        if (m11 + m21 - 1.0).abs() > 1e-12 || (m12 + m22 - 1.0).abs() > 1e-12 {
            return Err(KinexError::Domain {
                name: "column sum",
                value: (m11 + m21).max(m12 + m22),
                domain: "{1}",
            });
        }
        Ok(Self { m11, m12, m21, m22 })
    }

    /// `T+(ε) = [[ε, ε], [1-ε, 1-ε]]`: pools the pair and splits it by `ε`.
    pub fn tplus(eps: f64) -> Result<Self> {
        check_unit("eps", eps)?;
        Ok(Self::from_top_row(eps, eps))
    }

    /// `T-(ε) = [[ε, 1-ε], [1-ε, ε]]`: doubly stochastic, contracts the pair
    /// toward equal wealth.
    pub fn tminus(eps: f64) -> Result<Self> {
        check_unit("eps", eps)?;
        Ok(Self::from_top_row(eps, 1.0 - eps))
    }

    /// `T+(ε, ρ) = [[ε, ρ], [1-ε, 1-ρ]]`.
    pub fn tplus2(eps: f64, rho: f64) -> Result<Self> {
        check_unit("eps", eps)?;
        check_unit("rho", rho)?;
        Ok(Self::from_top_row(eps, rho))
    }

    /// `T-(ε, ρ) = [[ε, 1-ρ], [1-ε, ρ]]`.
    pub fn tminus2(eps: f64, rho: f64) -> Result<Self> {
        check_unit("eps", eps)?;
        check_unit("rho", rho)?;
        Ok(Self::from_top_row(eps, 1.0 - rho))
    }

    /// `ξ·T-(ε) + (1-ξ)·T+(ε')`.
    pub fn interpolated(xi: f64, eps: f64, eps_prime: f64) -> Result<Self> {
        check_unit("xi", xi)?;
        check_unit("eps", eps)?;
        check_unit("eps_prime", eps_prime)?;
        Ok(Self::interpolated_unchecked(xi, eps, eps_prime))
    }

    #[inline]
    pub(crate) fn interpolated_unchecked(xi: f64, eps: f64, eps_prime: f64) -> Self {
        let plus = (1.0 - xi) * eps_prime;
        let m11 = (xi * eps + plus).clamp(0.0, 1.0);
        let m12 = (xi * (1.0 - eps) + plus).clamp(0.0, 1.0);
        Self::from_top_row(m11, m12)
    }

    #[inline]
    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    pub fn determinant(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// `(wi', wj') = (m11·wi + m12·wj, m21·wi + m22·wj)`.
    #[inline]
    pub fn apply(&self, p: WealthPair) -> WealthPair {
        WealthPair {
            wi: self.m11 * p.wi + self.m12 * p.wj,
            wj: self.m21 * p.wi + self.m22 * p.wj,
        }
    }

    /// Matrix product `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &ExchangeOperator) -> ExchangeOperator {
        let m11 = self.m11 * other.m11 + self.m12 * other.m21;
        let m12 = self.m11 * other.m12 + self.m12 * other.m22;
        // The product of column-stochastic matrices is column-stochastic.
        Self::from_top_row(m11.clamp(0.0, 1.0), m12.clamp(0.0, 1.0))
    }
}

/// Free-function aliases mirroring the operator constructors.
pub fn make_tplus(eps: f64) -> Result<ExchangeOperator> {
    ExchangeOperator::tplus(eps)
}

pub fn make_tminus(eps: f64) -> Result<ExchangeOperator> {
    ExchangeOperator::tminus(eps)
}

pub fn make_tplus2(eps: f64, rho: f64) -> Result<ExchangeOperator> {
    ExchangeOperator::tplus2(eps, rho)
}

pub fn make_tminus2(eps: f64, rho: f64) -> Result<ExchangeOperator> {
    ExchangeOperator::tminus2(eps, rho)
}

pub fn make_interpolated(xi: f64, eps: f64, eps_prime: f64) -> Result<ExchangeOperator> {
    ExchangeOperator::interpolated(xi, eps, eps_prime)
}

pub fn apply(op: &ExchangeOperator, p: WealthPair) -> WealthPair {
    op.apply(p)
}

pub fn compose(a: &ExchangeOperator, b: &ExchangeOperator) -> ExchangeOperator {
    a.compose(b)
}
