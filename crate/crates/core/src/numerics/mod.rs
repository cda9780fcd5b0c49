//! Exact dyadic arithmetic and outward-rounded interval arithmetic.
//!
//! Nothing here touches floating point except the `to_f64` helpers, which
//! exist for human-readable reports only.

mod dyadic;
mod exponent;
mod interval;

pub use dyadic::{Dyadic, ParseDyadicError, Rounding};
pub use exponent::{DyadicExponent, ParseExponentError};
pub use interval::{geometric_tail, pow2, DyadicInterval, ParseIntervalError, MIN_POW_PRECISION};

/// Sums intervals in the given order with outward rounding after each step.
///
/// Callers pass terms in canonical order so results are reproducible.
pub fn sum_in_order<'a, I>(terms: I, prec: u32) -> DyadicInterval
where
    I: IntoIterator<Item = &'a DyadicInterval>,
{
    terms
        .into_iter()
        .fold(DyadicInterval::zero(), |acc, t| acc.add(t, prec))
}
