use std::fmt;
use std::str::FromStr;

use super::{Dyadic, DyadicExponent, Rounding};
use crate::error::{Error, Result};

/// Extra bits carried through multi-step computations before the final
/// outward rounding.
const GUARD_BITS: u32 = 16;

/// Smallest precision accepted by [`DyadicInterval::pow`].
pub const MIN_POW_PRECISION: u32 = 4;

/// A closed interval `[lo, hi]` with dyadic endpoints.
///
/// Every rounded operation widens outward, so the exact result for any
/// points of the operands lies inside the returned interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl DyadicInterval {
    /// Returns `None` when `lo > hi`.
    pub fn new(lo: Dyadic, hi: Dyadic) -> Option<Self> {
        (lo <= hi).then_some(DyadicInterval { lo, hi })
    }

    pub fn point(x: Dyadic) -> Self {
        DyadicInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Self {
        Self::point(Dyadic::zero())
    }

    pub fn one() -> Self {
        Self::point(Dyadic::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(Dyadic::from_int(n))
    }

    /// The point interval `[2^e, 2^e]`.
    pub fn pow2(e: i64) -> Self {
        Self::point(Dyadic::pow2(e))
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersection(&self, other: &Self) -> Option<Self> {
        Self::new(
            self.lo.clone().max(other.lo.clone()),
            self.hi.clone().min(other.hi.clone()),
        )
    }

    pub fn hull(&self, other: &Self) -> Self {
        DyadicInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn mag(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }

    /// Rounds both endpoints outward to `prec` significant bits.
    pub fn round_outward(&self, prec: u32) -> Self {
        DyadicInterval {
            lo: self.lo.round(prec, Rounding::Down),
            hi: self.hi.round(prec, Rounding::Up),
        }
    }

    pub fn neg(&self) -> Self {
        DyadicInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    /// Multiplication by `2^k`; exact.
    pub fn shl(&self, k: i64) -> Self {
        DyadicInterval {
            lo: self.lo.shl(k),
            hi: self.hi.shl(k),
        }
    }

    pub fn add_exact(&self, other: &Self) -> Self {
        DyadicInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        self.add_exact(other).round_outward(prec)
    }

    pub fn sub(&self, other: &Self, prec: u32) -> Self {
        self.add(&other.neg(), prec)
    }

    pub fn mul_exact(&self, other: &Self) -> Self {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = products[0].clone();
        let mut hi = products[0].clone();
        for p in &products[1..] {
            if p < &lo {
                lo = p.clone();
            }
            if p > &hi {
                hi = p.clone();
            }
        }
        DyadicInterval { lo, hi }
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        self.mul_exact(other).round_outward(prec)
    }

    pub fn scale_int(&self, n: i64, prec: u32) -> Self {
        self.mul(&Self::from_int(n), prec)
    }

    pub fn recip(&self, prec: u32) -> Result<Self> {
        Self::one().div(self, prec)
    }

    pub fn div(&self, other: &Self, prec: u32) -> Result<Self> {
        if other.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&other.lo, &other.hi] {
                let down = a.div_round(b, prec, Rounding::Down);
                let up = a.div_round(b, prec, Rounding::Up);
                lo = Some(match lo {
                    Some(l) => l.min(down),
                    None => down,
                });
                hi = Some(match hi {
                    Some(h) => h.max(up),
                    None => up,
                });
            }
        }
        Ok(DyadicInterval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        })
    }

    /// Integer power with outward rounding to `prec` bits at every step.
    pub fn pow_int(&self, n: u32, prec: u32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let up = |x: &Dyadic| x.abs().pow_rounded(n, prec, Rounding::Up);
        let down = |x: &Dyadic| x.abs().pow_rounded(n, prec, Rounding::Down);
        if !self.lo.is_negative() {
            DyadicInterval {
                lo: down(&self.lo),
                hi: up(&self.hi),
            }
        } else if !self.hi.is_positive() {
            if n.is_multiple_of(2) {
                DyadicInterval {
                    lo: down(&self.hi),
                    hi: up(&self.lo),
                }
            } else {
                DyadicInterval {
                    lo: -up(&self.lo),
                    hi: -down(&self.hi),
                }
            }
        } else if n.is_multiple_of(2) {
            DyadicInterval {
                lo: Dyadic::zero(),
                hi: up(&self.mag()),
            }
        } else {
            DyadicInterval {
                lo: -up(&self.lo),
                hi: up(&self.hi),
            }
        }
    }

    /// Square root of a nonnegative interval.
    pub fn sqrt(&self, prec: u32) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::NegativeBase);
        }
        Ok(DyadicInterval {
            lo: self.lo.sqrt_round(prec, Rounding::Down),
            hi: self.hi.sqrt_round(prec, Rounding::Up),
        })
    }

    /// Encloses `x^t` for a dyadic exponent `t = a / 2^k`.
    ///
    /// Computes the integer power `x^|a|`, inverts it when `a < 0`, then
    /// takes `k` square roots, all at `prec` plus guard bits; the result
    /// is rounded outward to `prec` bits once at the end.
    pub fn pow(&self, t: DyadicExponent, prec: u32) -> Result<Self> {
        if prec < MIN_POW_PRECISION {
            return Err(Error::InvalidPrecision(prec));
        }
        if t.is_zero() {
            return Ok(Self::one());
        }
        if !t.is_integer() && self.lo.is_negative() {
            return Err(Error::NegativeBase);
        }
        if t.is_negative() && self.contains_zero() {
            return Err(Error::ZeroToNegative);
        }
        let work = prec + GUARD_BITS;
        let a = t.numerator();
        let n = u32::try_from(a.unsigned_abs())
            .map_err(|_| Error::InvalidArgument(format!("exponent numerator {a} too large")))?;
        let mut y = self.pow_int(n, work);
        if a < 0 {
            y = y.recip(work)?;
        }
        for _ in 0..t.log2_denominator() {
            y = y.sqrt(work)?;
        }
        Ok(y.round_outward(prec))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }
}

/// Encloses `2^e` for a dyadic exponent `e`.
pub fn pow2(e: DyadicExponent, prec: u32) -> Result<DyadicInterval> {
    let (whole, frac) = e.split_floor();
    if frac.is_zero() {
        return Ok(DyadicInterval::pow2(whole));
    }
    Ok(DyadicInterval::from_int(2).pow(frac, prec)?.shl(whole))
}

/// Encloses the geometric series `scale · Σ_{k≥0} ratio^k = scale / (1 - ratio)`.
pub fn geometric_tail(
    ratio: &DyadicInterval,
    scale: &DyadicInterval,
    prec: u32,
) -> Result<DyadicInterval> {
    if ratio.hi() >= &Dyadic::one() {
        return Err(Error::DivergentSeries(ratio.hi().to_string()));
    }
    if ratio.lo().is_negative() {
        return Err(Error::InvalidArgument(format!(
            "geometric ratio {} must be nonnegative",
            ratio
        )));
    }
    let denom = DyadicInterval::one().add_exact(&ratio.neg());
    scale.div(&denom, prec)
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIntervalError(pub String);

impl fmt::Display for ParseIntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid interval literal {:?}", self.0)
    }
}

impl std::error::Error for ParseIntervalError {}

impl FromStr for DyadicInterval {
    type Err = ParseIntervalError;

    /// Accepts `[lo,hi]` (canonical) or a single dyadic literal.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let err = || ParseIntervalError(s.to_string());
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let (a, b) = inner.split_once(',').ok_or_else(err)?;
            let lo: Dyadic = a.parse().map_err(|_| err())?;
            let hi: Dyadic = b.parse().map_err(|_| err())?;
            DyadicInterval::new(lo, hi).ok_or_else(err)
        } else {
            t.parse::<Dyadic>()
                .map(DyadicInterval::point)
                .map_err(|_| err())
        }
    }
}
