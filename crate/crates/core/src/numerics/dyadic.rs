//! Exact dyadic rationals `m · 2^e`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for inexact operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Toward negative infinity.
    Down,
    /// Toward positive infinity.
    Up,
}

impl Rounding {
    pub fn flip(self) -> Self {
        match self {
            Rounding::Down => Rounding::Up,
            Rounding::Up => Rounding::Down,
        }
    }
}

/// A dyadic rational `mantissa · 2^exponent`.
///
/// Always canonical: the mantissa is odd, or zero with exponent zero. Two
/// values are equal iff their representations are equal, so the derived
/// `Eq` and `Hash` agree with numeric equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: impl Into<BigInt>, exponent: i64) -> Self {
        let mut mantissa = mantissa.into();
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        let mut exponent = exponent;
        if tz > 0 {
            mantissa >>= tz;
            exponent += tz as i64;
        }
        Dyadic { mantissa, exponent }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(n, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    /// Number of significant bits in the mantissa.
    pub fn bits(&self) -> u64 {
        self.mantissa.bits()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplication by `2^k`; always exact.
    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }

    /// Exact integer power.
    pub fn pow(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Dyadic {
            mantissa: num_traits::pow(self.mantissa.clone(), n as usize),
            exponent: self.exponent * n as i64,
        }
    }

    /// Integer power of a nonnegative value with directed rounding to `prec`
    /// bits after every multiplication.
    pub fn pow_rounded(&self, n: u32, prec: u32, dir: Rounding) -> Self {
        debug_assert!(!self.is_negative());
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = (&acc * &base).round(prec, dir);
            }
            n >>= 1;
            if n > 0 {
                base = (&base * &base).round(prec, dir);
            }
        }
        acc
    }

    /// Rounds to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Rounding) -> Self {
        let bits = self.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let m = shift_right(&self.mantissa, shift, dir);
        Self::new(m, self.exponent + shift as i64)
    }

    /// Quotient `self / other` rounded to `prec` significant bits.
    ///
    /// Panics when `other` is zero; interval division checks first.
    pub fn div_round(&self, other: &Dyadic, prec: u32, dir: Rounding) -> Self {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Self::zero();
        }
        // Scale the numerator so the integer quotient carries prec + 2 bits.
        let want = other.bits() as i64 + prec as i64 + 2 - self.bits() as i64;
        let shift = want.max(0) as u64;
        let num = &self.mantissa << shift;
        let (q, r) = num.div_mod_floor(&other.mantissa);
        let q = if dir == Rounding::Up && !r.is_zero() {
            q + 1
        } else {
            q
        };
        Self::new(q, self.exponent - other.exponent - shift as i64).round(prec, dir)
    }

    /// Square root of a nonnegative value, rounded to `prec` bits.
    ///
    /// Uses the integer floor square root of a scaled mantissa: with
    /// `r = isqrt(N)` the bracket `r^2 <= N < (r+1)^2` is checked explicitly.
    pub fn sqrt_round(&self, prec: u32, dir: Rounding) -> Self {
        assert!(!self.is_negative(), "square root of a negative value");
        if self.is_zero() {
            return Self::zero();
        }
        let target_bits = 2 * prec as u64 + 4;
        let mut shift = target_bits.saturating_sub(self.bits());
        if (self.exponent - shift as i64).rem_euclid(2) != 0 {
            shift += 1;
        }
        let n = &self.mantissa << shift;
        let e = self.exponent - shift as i64;
        let r = n.sqrt();
        let r_sq = &r * &r;
        assert!(r_sq <= n && (&r + 1u32) * (&r + 1u32) > n);
        let r = if dir == Rounding::Up && r_sq != n { r + 1 } else { r };
        Self::new(r, e / 2).round(prec, dir)
    }

    /// `floor(log2 |x|)` for nonzero `x`.
    pub fn floor_log2(&self) -> i64 {
        assert!(!self.is_zero());
        self.exponent + self.bits() as i64 - 1
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Nearest `f64`, for display only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.bits();
        let (m, e) = if bits > 60 {
            let shift = bits - 60;
            (&self.mantissa >> shift, self.exponent + shift as i64)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let m = m.to_f64().unwrap_or(f64::NAN);
        m * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }
}

/// `floor(m / 2^k)` or `ceil(m / 2^k)`.
fn shift_right(m: &BigInt, k: u64, dir: Rounding) -> BigInt {
    match dir {
        Rounding::Down => floor_shr(m, k),
        Rounding::Up => -floor_shr(&-m, k),
    }
}

fn floor_shr(m: &BigInt, k: u64) -> BigInt {
    let divisor = BigInt::one() << k;
    m.div_floor(&divisor)
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mantissa.sign(), other.mantissa.sign());
        if sa != sb {
            let rank = |s: Sign| match s {
                Sign::Minus => 0,
                Sign::NoSign => 1,
                Sign::Plus => 2,
            };
            return rank(sa).cmp(&rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &rhs.mantissa << (rhs.exponent - e) as u64;
        Dyadic::new(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // Product of odd mantissas is odd, so this is already canonical.
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

/// Error returned when a dyadic literal does not parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDyadicError(pub String);

impl fmt::Display for ParseDyadicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid dyadic literal {:?}", self.0)
    }
}

impl std::error::Error for ParseDyadicError {}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    /// Accepts `m*2^e` (canonical), `m/2^k` and bare integers `m`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDyadicError(s.to_string());
        let s = s.trim();
        let int = |t: &str| t.trim().parse::<BigInt>().map_err(|_| err());
        let exp = |t: &str| t.trim().parse::<i64>().map_err(|_| err());
        if let Some((m, e)) = s.split_once("*2^") {
            Ok(Dyadic::new(int(m)?, exp(e)?))
        } else if let Some((m, k)) = s.split_once("/2^") {
            let k = exp(k)?;
            Ok(Dyadic::new(int(m)?, -k))
        } else {
            Ok(Dyadic::new(int(s)?, 0))
        }
    }
}
