//! Ready-made measures used by tests, the CLI and the documentation.

use std::collections::BTreeMap;

use super::{BinaryString, MarkovTable, Measure, NodeTable};
use crate::numerics::{Dyadic, DyadicInterval};

/// `Bernoulli(1/4)`: each bit is 1 with probability 1/4.
pub fn bernoulli_quarter() -> Measure {
    Measure::bernoulli(Dyadic::pow2(-2))
}

/// An enclosure of 1/3 of width at most `2^{-bits}`.
pub fn third_enclosure(bits: u32) -> DyadicInterval {
    DyadicInterval::from_int(1)
        .div(&DyadicInterval::from_int(3), bits)
        .expect("3 is nonzero")
}

/// A Markov source that repeats the previous bit with probability 3/4.
pub fn sticky_markov() -> Measure {
    let half = DyadicInterval::pow2(-1);
    let stay = DyadicInterval::point(Dyadic::new(3, -2));
    let flip = DyadicInterval::pow2(-2);
    Measure::Markov(MarkovTable {
        probs: [
            [half.clone(), half],
            [stay.clone(), flip.clone()],
            [flip, stay],
        ],
    })
}

/// An ill-balanced table measure with `ν(0^k) = 1/(k+1)`.
///
/// Off the 0-spine, the mass `ν(0^k 1) = 1/((k+1)(k+2))` is split evenly
/// below. The conditional probability of a 1 after `0^k` is `1/(k+2)`,
/// which tends to zero, so no balance certificate holds for all depths.
pub fn harmonic_decay(depth: usize, prec: u32) -> Measure {
    let recip = |n: i64| {
        DyadicInterval::one()
            .div(&DyadicInterval::from_int(n), prec)
            .expect("nonzero")
    };
    let mut values = BTreeMap::new();
    for w in BinaryString::up_to(depth) {
        let value = match w.bits().iter().position(|&b| b == 1) {
            None => recip(w.len() as i64 + 1),
            Some(k) => {
                let k = k as i64;
                recip((k + 1) * (k + 2)).shl(-(w.len() as i64 - k - 1))
            }
        };
        values.insert(w, value);
    }
    Measure::NodeTable(NodeTable::new(values).expect("table is complete"))
}
