use std::fmt;

use crate::error::{Error, Result};
use crate::measures::BalanceCertificate;
use crate::numerics::{geometric_tail, pow2, DyadicExponent, DyadicInterval};

/// Parameters of a supergale-to-gale conversion.
///
/// `cert` supplies `ν(w) ≤ 2^{c−ε|w|}`. The infinite sums are cut at
/// index `max_index` (I) and depth `max_depth` (K); what is cut off is
/// bounded from the certificate and carried as a budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConversionPlan {
    pub s: DyadicExponent,
    pub s_prime: DyadicExponent,
    pub cert: BalanceCertificate,
    pub max_index: u32,
    pub max_depth: usize,
    pub precision: u32,
}

impl ConversionPlan {
    pub fn new(
        s: DyadicExponent,
        s_prime: DyadicExponent,
        cert: BalanceCertificate,
        max_index: u32,
        max_depth: usize,
        precision: u32,
    ) -> Result<Self> {
        let plan = ConversionPlan {
            s,
            s_prime,
            cert,
            max_index,
            max_depth,
            precision,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s.is_negative() {
            return Err(Error::InvalidPlan(format!("s = {} is negative", self.s)));
        }
        if self.s_prime <= self.s {
            return Err(Error::InvalidPlan(format!(
                "sprime = {} must exceed s = {}",
                self.s_prime, self.s
            )));
        }
        if !self.cert.epsilon.is_positive() {
            return Err(Error::InvalidPlan(format!(
                "epsilon = {} is not positive",
                self.cert.epsilon
            )));
        }
        if self.precision < 8 {
            return Err(Error::InvalidPrecision(self.precision));
        }
        if self.max_index > 62 {
            return Err(Error::InvalidPlan(format!(
                "max_index = {} is above 62",
                self.max_index
            )));
        }
        Ok(())
    }

    /// `s' − s`.
    pub fn gap(&self) -> DyadicExponent {
        self.s_prime.sub(self.s)
    }

    /// `2^{−(s'−s)ε}`, the per-level decay of the level-set mass bound.
    pub fn ratio(&self) -> Result<DyadicInterval> {
        pow2(self.gap().mul(self.cert.epsilon).neg(), self.precision)
    }

    /// `2^{(s'−s)c} / (1 − 2^{−(s'−s)ε})`, the factor in every root bound.
    pub fn geometric_factor(&self) -> Result<DyadicInterval> {
        tail_bound(self, 0, 0)
    }

    /// `Σ_{i>I} i·2^{−i}·G = G·(I+2)/2^I`.
    pub fn index_tail(&self) -> Result<DyadicInterval> {
        let i = self.max_index as i64;
        Ok(self
            .geometric_factor()?
            .scale_int(i + 2, self.precision)
            .shl(-i))
    }

    /// `Σ_{1≤i≤I} i·2^{−i}·G`, the bound on the explicitly summed part at λ.
    pub fn partial_root_bound(&self) -> Result<DyadicInterval> {
        let g = self.geometric_factor()?;
        let weights: Vec<DyadicInterval> = (1..=self.max_index as i64)
            .map(|i| DyadicInterval::from_int(i).shl(-i))
            .collect();
        let total = weights
            .iter()
            .fold(DyadicInterval::zero(), |acc, w| acc.add_exact(w));
        Ok(g.mul(&total, self.precision))
    }

    /// `Σ_i i·2^{−i}·G = 2G`, the bound on `d'(λ)`.
    pub fn root_bound(&self) -> Result<DyadicInterval> {
        Ok(self.geometric_factor()?.shl(1))
    }
}

impl fmt::Display for ConversionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "s={} sprime={} {} I={} K={} precision={}",
            self.s, self.s_prime, self.cert, self.max_index, self.max_depth, self.precision
        )
    }
}

/// Encloses `Σ_{k≥k0} 2^{(s'−s)(c−εk)−i}`, which bounds the part of
/// `d_{U_i}^{s'}(λ)` contributed by members of length at least `k0`.
pub fn tail_bound(plan: &ConversionPlan, i: u32, k0: usize) -> Result<DyadicInterval> {
    let gap = plan.gap();
    if !gap.is_positive() || !plan.cert.epsilon.is_positive() {
        return Err(Error::DivergentSeries(format!(
            "ratio 2^-({}*{}) is not below 1",
            gap, plan.cert.epsilon
        )));
    }
    let first = gap
        .mul(plan.cert.c.sub(plan.cert.epsilon.mul_int(k0 as i64)))
        .sub(DyadicExponent::integer(i as i64));
    geometric_tail(
        &plan.ratio()?,
        &pow2(first, plan.precision)?,
        plan.precision,
    )
}
