//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use galekit::construct::StringSet;
use galekit::measures::BinaryString;
use galekit::numerics::{Dyadic, DyadicExponent, DyadicInterval};
use num_bigint::BigInt;
use rand::Rng;

/// Bits carried by the oracle brackets.
pub const ORACLE_BITS: i64 = 256;

/// Bracket of `2^{r / 2^k}` from an integer root, `0 ≤ r < 2^k`.
pub fn root_of_two(r: i64, k: u32) -> (Dyadic, Dyadic) {
    let n = 1u32 << k;
    let radicand = BigInt::from(1) << (r as u64 + n as u64 * ORACLE_BITS as u64);
    let floor = radicand.nth_root(n);
    let exact = floor.pow(n) == radicand;
    let lo = Dyadic::new(floor.clone(), -ORACLE_BITS);
    let hi = if exact {
        lo.clone()
    } else {
        Dyadic::new(floor + 1, -ORACLE_BITS)
    };
    (lo, hi)
}

/// A finite sum `Σ_r c_r 2^{r/2^k}` with exact dyadic coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSum {
    pub k: u32,
    pub coeffs: BTreeMap<i64, Dyadic>,
}

impl RootSum {
    pub fn new(k: u32) -> Self {
        RootSum {
            k,
            coeffs: BTreeMap::new(),
        }
    }

    /// Adds `2^{q / 2^k}`.
    pub fn add_power(&mut self, q: i64) {
        let n = 1i64 << self.k;
        let (whole, r) = (q.div_euclid(n), q.rem_euclid(n));
        let c = self.coeffs.entry(r).or_insert_with(Dyadic::zero);
        *c = &*c + &Dyadic::pow2(whole);
    }

    pub fn plus(&self, other: &RootSum) -> RootSum {
        assert_eq!(self.k, other.k);
        let mut out = self.clone();
        for (r, c) in &other.coeffs {
            let e = out.coeffs.entry(*r).or_insert_with(Dyadic::zero);
            *e = &*e + c;
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        out
    }

    /// The value when it is a dyadic, i.e. no irrational basis term is used.
    pub fn exact(&self) -> Option<Dyadic> {
        if self.coeffs.keys().all(|&r| r == 0) {
            Some(self.coeffs.get(&0).cloned().unwrap_or_else(Dyadic::zero))
        } else {
            None
        }
    }

    /// Bracket of the value; coefficients are nonnegative.
    pub fn bracket(&self) -> (Dyadic, Dyadic) {
        let mut lo = Dyadic::zero();
        let mut hi = Dyadic::zero();
        for (r, c) in &self.coeffs {
            let (a, b) = root_of_two(*r, self.k);
            lo = &lo + &(c * &a);
            hi = &hi + &(c * &b);
        }
        (lo, hi)
    }
}

/// Literal evaluation of `d_U^t(w)` under the uniform measure, where
/// `ν(v) = 2^{-|v|}`: each member extending `w` contributes
/// `2^{-t(|m|-|w|)}` and each proper prefix `m` of `w` contributes
/// `2^{(t-1)(|w|-|m|)}`.
pub fn dut_uniform_oracle(u: &StringSet, t: DyadicExponent, w: &BinaryString) -> RootSum {
    let k = t.log2_denominator();
    let a = t.numerator();
    let n = 1i64 << k;
    let mut sum = RootSum::new(k);
    for m in u.iter() {
        if m.len() >= w.len() && m.prefix(w.len()) == *w {
            sum.add_power(-a * (m.len() - w.len()) as i64);
        } else if m.len() < w.len() && w.prefix(m.len()) == *m {
            sum.add_power((a - n) * (w.len() - m.len()) as i64);
        }
    }
    sum.coeffs.retain(|_, c| !c.is_zero());
    sum
}

pub fn random_string<R: Rng>(rng: &mut R, max_len: usize) -> BinaryString {
    let len = rng.gen_range(0..=max_len);
    BinaryString::from_bits((0..len).map(|_| rng.gen_range(0..2u8)))
}

pub fn random_set<R: Rng>(rng: &mut R, max_len: usize, max_size: usize) -> StringSet {
    let size = rng.gen_range(1..=max_size);
    (0..size).map(|_| random_string(rng, max_len)).collect()
}

/// `true` when the enclosure meets the oracle bracket and is no wider
/// than `2^{-bits}` relative to the value.
pub fn encloses_tightly(v: &DyadicInterval, oracle: &(Dyadic, Dyadic), bits: i64) -> bool {
    let meets = v.lo() <= &oracle.1 && &oracle.0 <= v.hi();
    let scale = &Dyadic::one() + &oracle.1;
    meets && v.width() <= &scale * &Dyadic::pow2(-bits)
}
