use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::Dyadic;

/// A dyadic rational exponent `numerator / 2^log2_denominator`.
///
/// Canonical: the numerator is odd whenever the denominator exceeds one,
/// and zero is `0/2^0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicExponent {
    numerator: i64,
    log2_denominator: u32,
}

impl DyadicExponent {
    pub fn new(numerator: i64, log2_denominator: u32) -> Self {
        let mut n = numerator;
        let mut k = log2_denominator;
        if n == 0 {
            return Self::zero();
        }
        while k > 0 && n % 2 == 0 {
            n /= 2;
            k -= 1;
        }
        DyadicExponent {
            numerator: n,
            log2_denominator: k,
        }
    }

    pub fn zero() -> Self {
        DyadicExponent {
            numerator: 0,
            log2_denominator: 0,
        }
    }

    pub fn integer(n: i64) -> Self {
        Self::new(n, 0)
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn is_positive(&self) -> bool {
        self.numerator > 0
    }

    pub fn is_negative(&self) -> bool {
        self.numerator < 0
    }

    pub fn is_integer(&self) -> bool {
        self.log2_denominator == 0
    }

    fn aligned(a: Self, b: Self) -> (i64, i64, u32) {
        let k = a.log2_denominator.max(b.log2_denominator);
        (
            a.numerator << (k - a.log2_denominator),
            b.numerator << (k - b.log2_denominator),
            k,
        )
    }

    pub fn add(self, other: Self) -> Self {
        let (a, b, k) = Self::aligned(self, other);
        Self::new(a + b, k)
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    pub fn neg(self) -> Self {
        DyadicExponent {
            numerator: -self.numerator,
            log2_denominator: self.log2_denominator,
        }
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(
            self.numerator * other.numerator,
            self.log2_denominator + other.log2_denominator,
        )
    }

    pub fn mul_int(self, n: i64) -> Self {
        Self::new(self.numerator * n, self.log2_denominator)
    }

    /// Splits into `floor(self)` and the fractional part in `[0, 1)`.
    pub fn split_floor(self) -> (i64, DyadicExponent) {
        let floor = self.numerator >> self.log2_denominator;
        let frac = Self::new(
            self.numerator - (floor << self.log2_denominator),
            self.log2_denominator,
        );
        (floor, frac)
    }

    pub fn to_dyadic(self) -> Dyadic {
        Dyadic::new(self.numerator, -(self.log2_denominator as i64))
    }

    /// Exact conversion from a dyadic value; `None` when it does not fit.
    pub fn from_dyadic(d: &Dyadic) -> Option<Self> {
        use num_traits::ToPrimitive;
        let n = d.mantissa().to_i64()?;
        if d.exponent() >= 0 {
            let n = n.checked_mul(1i64.checked_shl(d.exponent() as u32)?)?;
            Some(Self::integer(n))
        } else {
            let k = u32::try_from(-d.exponent()).ok()?;
            Some(Self::new(n, k))
        }
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / 2f64.powi(self.log2_denominator as i32)
    }
}

impl Ord for DyadicExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Self::aligned(*self, *other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.log2_denominator)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseExponentError(pub String);

impl fmt::Display for ParseExponentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid exponent literal {:?}", self.0)
    }
}

impl std::error::Error for ParseExponentError {}

impl FromStr for DyadicExponent {
    type Err = ParseExponentError;

    /// Accepts `a/2^k` (canonical) or a bare integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseExponentError(s.to_string());
        let s = s.trim();
        match s.split_once("/2^") {
            Some((a, k)) => {
                let a = a.trim().parse::<i64>().map_err(|_| err())?;
                let k = k.trim().parse::<u32>().map_err(|_| err())?;
                if k > 62 {
                    return Err(err());
                }
                Ok(Self::new(a, k))
            }
            None => s.parse::<i64>().map(Self::integer).map_err(|_| err()),
        }
    }
}
