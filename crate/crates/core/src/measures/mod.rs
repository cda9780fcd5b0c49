//! Probability measures on Cantor space, queried one cylinder at a time.
//!
//! A measure `ν` assigns to every binary string `w` the probability of the
//! cylinder of sequences extending `w`, with `ν(λ) = 1` and
//! `ν(w) = ν(w0) + ν(w1)`. Built-in kinds factor through conditional
//! probabilities, so any depth can be queried without materialising the tree.

mod balance;
pub mod fixtures;
mod string;

use std::collections::BTreeMap;
use std::fmt;

pub use balance::{
    check_balance, suggest_balance, weak_balance_trace, BalanceCandidate, BalanceCertificate,
    BalanceReport, BalanceViolation, ViolationKind, WeakBalanceTrace,
};
pub use string::{BinaryString, ParseStringError};

use crate::error::{Error, Result};
use crate::numerics::{Dyadic, DyadicInterval};

/// Transition probabilities of a first-order Markov source.
///
/// `probs[state][bit]` is the probability of emitting `bit` in `state`,
/// where state 0 is the start state and states 1 and 2 mean the previous
/// bit was 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovTable {
    pub probs: [[DyadicInterval; 2]; 3],
}

impl MarkovTable {
    pub fn state_of(w: &BinaryString) -> usize {
        match w.last() {
            None => 0,
            Some(b) => 1 + b as usize,
        }
    }
}

/// A finite-depth table of node values, complete up to `depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeTable {
    depth: usize,
    values: BTreeMap<BinaryString, DyadicInterval>,
}

impl NodeTable {
    /// Builds a table; every string of length at most the maximum stored
    /// length must be present.
    pub fn new(values: BTreeMap<BinaryString, DyadicInterval>) -> Result<Self> {
        let depth = values.keys().map(BinaryString::len).max().unwrap_or(0);
        if let Some(missing) = BinaryString::up_to(depth).find(|w| !values.contains_key(w)) {
            return Err(Error::MissingNode(missing.to_string()));
        }
        Ok(NodeTable { depth, values })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &BTreeMap<BinaryString, DyadicInterval> {
        &self.values
    }

    fn get(&self, w: &BinaryString) -> Result<&DyadicInterval> {
        if w.len() > self.depth {
            return Err(Error::DepthExceeded {
                word: w.to_string(),
                max: self.depth,
            });
        }
        self.values
            .get(w)
            .ok_or_else(|| Error::MissingNode(w.to_string()))
    }
}

/// A probability measure `ν` on Cantor space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Measure {
    /// `μ(w) = 2^{-|w|}`.
    Uniform,
    /// Independent bits, each equal to 1 with probability `p`.
    Bernoulli { p: DyadicInterval },
    Markov(MarkovTable),
    NodeTable(NodeTable),
}

impl Measure {
    pub fn bernoulli(p: Dyadic) -> Self {
        Measure::Bernoulli {
            p: DyadicInterval::point(p),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Measure::Uniform => "uniform",
            Measure::Bernoulli { .. } => "bernoulli",
            Measure::Markov(_) => "markov",
            Measure::NodeTable(_) => "nodetable",
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Measure::Uniform)
    }

    /// Deepest level that can be queried, `None` when unbounded.
    pub fn supported_depth(&self) -> Option<usize> {
        match self {
            Measure::NodeTable(t) => Some(t.depth()),
            _ => None,
        }
    }

    /// Probability that the bit following `w` is `b`.
    ///
    /// Defined for the factorised kinds only.
    pub fn conditional(&self, w: &BinaryString, b: u8) -> Option<DyadicInterval> {
        match self {
            Measure::Uniform => Some(DyadicInterval::pow2(-1)),
            Measure::Bernoulli { p } => Some(if b == 1 {
                p.clone()
            } else {
                DyadicInterval::one().add_exact(&p.neg())
            }),
            Measure::Markov(t) => Some(t.probs[MarkovTable::state_of(w)][b as usize].clone()),
            Measure::NodeTable(_) => None,
        }
    }

    /// Enclosure of `ν(w)`; exact for uniform and dyadic-parameter kinds
    /// while the mantissas fit in `prec` bits.
    pub fn value(&self, w: &BinaryString, prec: u32) -> Result<DyadicInterval> {
        match self {
            Measure::Uniform => Ok(uniform_value(w)),
            Measure::Bernoulli { p } => {
                let q = DyadicInterval::one().add_exact(&p.neg());
                let ones = p.pow_int(w.ones() as u32, prec);
                let zeros = q.pow_int(w.zeros() as u32, prec);
                Ok(ones.mul(&zeros, prec))
            }
            Measure::Markov(_) => {
                let mut v = DyadicInterval::one();
                for n in 0..w.len() {
                    let prefix = w.prefix(n);
                    let c = self.conditional(&prefix, w.bits()[n]).unwrap();
                    v = v.mul(&c, prec);
                }
                Ok(v)
            }
            Measure::NodeTable(t) => t.get(w).cloned(),
        }
    }

    /// `ν(wb)` given an enclosure of `ν(w)`; avoids recomputing the path.
    pub fn child_value(
        &self,
        w: &BinaryString,
        value_w: &DyadicInterval,
        b: u8,
        prec: u32,
    ) -> Result<DyadicInterval> {
        match self {
            Measure::Uniform => Ok(value_w.shl(-1)),
            Measure::NodeTable(t) => t.get(&w.child(b)).cloned(),
            _ => Ok(value_w.mul(&self.conditional(w, b).unwrap(), prec)),
        }
    }

    /// Like [`Measure::value`] but rejects nodes whose enclosure is not
    /// strictly positive, as conversion contexts divide by `ν(w)^t`.
    pub fn positive_value(&self, w: &BinaryString, prec: u32) -> Result<DyadicInterval> {
        let v = self.value(w, prec)?;
        if !v.lo().is_positive() {
            return Err(Error::NonPositiveNode(w.to_string()));
        }
        Ok(v)
    }

    /// Visits every node of depth at most `depth` in depth-first preorder,
    /// passing the node and its enclosure.
    pub fn walk<F>(&self, depth: usize, prec: u32, mut visit: F) -> Result<()>
    where
        F: FnMut(&BinaryString, &DyadicInterval) -> Result<()>,
    {
        fn go<F>(
            nu: &Measure,
            w: &BinaryString,
            v: &DyadicInterval,
            depth: usize,
            prec: u32,
            visit: &mut F,
        ) -> Result<()>
        where
            F: FnMut(&BinaryString, &DyadicInterval) -> Result<()>,
        {
            visit(w, v)?;
            if w.len() < depth {
                for b in 0..2 {
                    let c = nu.child_value(w, v, b, prec)?;
                    go(nu, &w.child(b), &c, depth, prec, visit)?;
                }
            }
            Ok(())
        }
        let root = BinaryString::empty();
        let v = self.value(&root, prec)?;
        go(self, &root, &v, depth, prec, &mut visit)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Bernoulli { p } => write!(f, "bernoulli(p={})", p),
            Measure::NodeTable(t) => write!(f, "nodetable(depth={})", t.depth()),
            other => f.write_str(other.kind_name()),
        }
    }
}

/// `μ(w) = 2^{-|w|}` as an exact point interval.
pub fn uniform_value(w: &BinaryString) -> DyadicInterval {
    DyadicInterval::pow2(-(w.len() as i64))
}

/// One violation found by [`verify_measure`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureViolation {
    RootNotOne { value: DyadicInterval },
    Additivity {
        word: BinaryString,
        parent: DyadicInterval,
        children_sum: DyadicInterval,
    },
    NonPositive { word: BinaryString, value: DyadicInterval },
    Unavailable { word: BinaryString, reason: String },
}

impl fmt::Display for MeasureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureViolation::RootNotOne { value } => {
                write!(f, "FAIL - root value {} does not contain 1", value)
            }
            MeasureViolation::Additivity {
                word,
                parent,
                children_sum,
            } => write!(
                f,
                "FAIL {} additivity L={} R={}",
                word, parent, children_sum
            ),
            MeasureViolation::NonPositive { word, value } => {
                write!(f, "FAIL {} non-positive value {}", word, value)
            }
            MeasureViolation::Unavailable { word, reason } => {
                write!(f, "FAIL {} unavailable: {}", word, reason)
            }
        }
    }
}

/// Outcome of [`verify_measure`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureReport {
    pub depth: usize,
    pub nodes_checked: u64,
    pub violations: Vec<MeasureViolation>,
}

impl MeasureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for MeasureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{}", v)?;
        }
        writeln!(
            f,
            "measure check to depth {}: {} nodes, {} violations: {}",
            self.depth,
            self.nodes_checked,
            self.violations.len(),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Checks normalization, additivity (as interval intersection) and
/// positivity at every node up to `depth`.
pub fn verify_measure(nu: &Measure, depth: usize, prec: u32) -> MeasureReport {
    let mut report = MeasureReport {
        depth,
        nodes_checked: 0,
        violations: Vec::new(),
    };
    let root = BinaryString::empty();
    match nu.value(&root, prec) {
        Ok(v) if v.contains(&Dyadic::one()) => {}
        Ok(v) => report
            .violations
            .push(MeasureViolation::RootNotOne { value: v }),
        Err(e) => {
            report.violations.push(MeasureViolation::Unavailable {
                word: root,
                reason: e.to_string(),
            });
            return report;
        }
    }
    let result = nu.walk(depth, prec, |w, v| {
        report.nodes_checked += 1;
        if !v.lo().is_positive() {
            report.violations.push(MeasureViolation::NonPositive {
                word: w.clone(),
                value: v.clone(),
            });
        }
        if w.len() < depth {
            let c0 = nu.child_value(w, v, 0, prec)?;
            let c1 = nu.child_value(w, v, 1, prec)?;
            let sum = c0.add(&c1, prec);
            if !sum.intersects(v) {
                report.violations.push(MeasureViolation::Additivity {
                    word: w.clone(),
                    parent: v.clone(),
                    children_sum: sum,
                });
            }
        }
        Ok(())
    });
    if let Err(e) = result {
        report.violations.push(MeasureViolation::Unavailable {
            word: BinaryString::empty(),
            reason: e.to_string(),
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    fn iv(s: &str) -> DyadicInterval {
        s.parse().unwrap()
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(uniform_value(&w("-")), iv("1"));
        assert_eq!(uniform_value(&w("01")), iv("1*2^-2"));
        assert_eq!(uniform_value(&w("000")), iv("1*2^-3"));
    }

    #[test]
    fn bernoulli_examples() {
        let half = Measure::bernoulli("1*2^-1".parse().unwrap());
        for x in BinaryString::up_to(5) {
            assert_eq!(half.value(&x, 64).unwrap(), uniform_value(&x));
        }
        let quarter = Measure::bernoulli("1*2^-2".parse().unwrap());
        assert_eq!(quarter.value(&w("10"), 64).unwrap(), iv("3*2^-4"));
    }

    #[test]
    fn node_table_lookup_and_depth() {
        let third = iv("[5*2^-4,3*2^-3]");
        let two_thirds = iv("[5*2^-3,11*2^-4]");
        let mut values = BTreeMap::new();
        values.insert(w("-"), iv("1"));
        values.insert(w("0"), third.clone());
        values.insert(w("1"), two_thirds);
        let nu = Measure::NodeTable(NodeTable::new(values).unwrap());
        assert_eq!(nu.value(&w("0"), 64).unwrap(), third);
        assert!(matches!(
            nu.value(&w("00"), 64),
            Err(Error::DepthExceeded { .. })
        ));
        assert!(verify_measure(&nu, 1, 64).passed());
    }

    #[test]
    fn incomplete_table_rejected() {
        let mut values = BTreeMap::new();
        values.insert(w("-"), iv("1"));
        values.insert(w("0"), iv("1*2^-1"));
        assert_eq!(
            NodeTable::new(values).unwrap_err(),
            Error::MissingNode("1".into())
        );
    }

    #[test]
    fn verify_examples() {
        assert!(verify_measure(&Measure::Uniform, 10, 64).passed());

        let mut values = BTreeMap::new();
        values.insert(w("-"), iv("1"));
        values.insert(w("0"), iv("1*2^-1"));
        values.insert(w("1"), iv("1*2^-2"));
        let broken = Measure::NodeTable(NodeTable::new(values).unwrap());
        let report = verify_measure(&broken, 1, 64);
        assert!(!report.passed());
        assert!(matches!(
            &report.violations[0],
            MeasureViolation::Additivity { word, .. } if word.is_empty()
        ));

        let third = Measure::Bernoulli {
            p: fixtures::third_enclosure(40),
        };
        let report = verify_measure(&third, 8, 64);
        assert!(report.passed(), "{}", report);
        assert_eq!(report.nodes_checked, 511);
    }

    #[test]
    fn positive_value_rejects_zero() {
        let mut values = BTreeMap::new();
        values.insert(w("-"), iv("1"));
        values.insert(w("0"), iv("1"));
        values.insert(w("1"), iv("0"));
        let nu = Measure::NodeTable(NodeTable::new(values).unwrap());
        assert_eq!(
            nu.positive_value(&w("1"), 64),
            Err(Error::NonPositiveNode("1".into()))
        );
        let report = verify_measure(&nu, 1, 64);
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn markov_value_matches_walk() {
        let nu = fixtures::sticky_markov();
        nu.walk(6, 64, |x, v| {
            assert_eq!(&nu.value(x, 64).unwrap(), v);
            Ok(())
        })
        .unwrap();
        assert!(verify_measure(&nu, 6, 64).passed());
    }
}
