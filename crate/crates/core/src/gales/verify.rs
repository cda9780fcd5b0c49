//! Node-by-node checks of the gale inequality and level sums.

use std::fmt;

use rayon::prelude::*;

use super::{Capital, GaleSpec, Strictness};
use crate::error::{Error, Result};
use crate::measures::BinaryString;
use crate::numerics::{sum_in_order, Dyadic, DyadicInterval};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeStatus::Pass => "PASS",
            NodeStatus::Fail => "FAIL",
            NodeStatus::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// `L = D(w)` against `R = D(w0) + D(w1)` at one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub status: NodeStatus,
    pub word: BinaryString,
    pub left: Capital,
    pub right: Capital,
}

impl fmt::Display for NodeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} L={} R={}", self.status, self.word, self.left, self.right)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Consistent nodes whose `L` or `R` is wider than this are inconclusive.
    pub width_budget: Option<Dyadic>,
    /// Stage used for staged payoffs.
    pub stage: Option<u32>,
    /// Keep PASS records as well as the others.
    pub keep_passes: bool,
}

#[derive(Clone, Debug)]
pub struct GaleReport {
    pub strictness: Strictness,
    pub depth: usize,
    pub passes: usize,
    pub fails: usize,
    pub inconclusive: usize,
    /// Records in canonical order; PASS records only with `keep_passes`.
    pub records: Vec<NodeRecord>,
}

impl GaleReport {
    pub fn passed(&self) -> bool {
        self.fails == 0
    }

    pub fn nodes(&self) -> usize {
        self.passes + self.fails + self.inconclusive
    }

    pub fn failures(&self) -> impl Iterator<Item = &NodeRecord> {
        self.records.iter().filter(|r| r.status == NodeStatus::Fail)
    }
}

impl fmt::Display for GaleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        write!(
            f,
            "{} check to depth {}: {} nodes, {} pass, {} fail, {} inconclusive",
            self.strictness,
            self.depth,
            self.nodes(),
            self.passes,
            self.fails,
            self.inconclusive
        )
    }
}

fn classify(
    strictness: Strictness,
    left: &Capital,
    right: &Capital,
    budget: Option<&Dyadic>,
) -> NodeStatus {
    // Certain violations only: the supergale side needs L.hi < R.lo, the
    // gale side additionally L.lo > R.hi.
    let super_fail = left.upper().is_some_and(|hi| hi < right.lower());
    let gale_fail = strictness == Strictness::Gale
        && right.upper().is_some_and(|hi| left.lower() > hi);
    if super_fail || gale_fail {
        return NodeStatus::Fail;
    }
    match (left.enclosure(), right.enclosure()) {
        (Some(l), Some(r)) => match budget {
            Some(b) if &l.width() > b || &r.width() > b => NodeStatus::Inconclusive,
            _ => NodeStatus::Pass,
        },
        _ => NodeStatus::Inconclusive,
    }
}

fn level_capitals(g: &GaleSpec, k: usize, prec: u32, stage: Option<u32>) -> Result<Vec<Capital>> {
    let results: Vec<Result<Capital>> = (0..1u64 << k)
        .into_par_iter()
        .map(|i| g.scaled_capital(&BinaryString::from_index(k, i), prec, stage))
        .collect();
    results.into_iter().collect()
}

fn check_depth(g: &GaleSpec, depth: usize) -> Result<()> {
    match g.available_depth() {
        Some(max) if depth > max => Err(Error::DepthExceeded {
            word: BinaryString::repeat(0, depth).to_string(),
            max,
        }),
        _ => Ok(()),
    }
}

/// Checks every node `|w| < depth` with default options.
pub fn verify_gale(g: &GaleSpec, depth: usize, prec: u32) -> Result<GaleReport> {
    verify_gale_with(g, depth, prec, &VerifyOptions::default())
}

/// Checks the gale (or supergale) inequality at every node `|w| < depth`.
///
/// Violations are reported, not raised; errors mean the payoff or measure
/// could not be evaluated.
pub fn verify_gale_with(
    g: &GaleSpec,
    depth: usize,
    prec: u32,
    opts: &VerifyOptions,
) -> Result<GaleReport> {
    check_depth(g, depth)?;
    if g.is_staged() && opts.stage.is_none() {
        return Err(Error::StageRequired);
    }
    let mut report = GaleReport {
        strictness: g.strictness,
        depth,
        passes: 0,
        fails: 0,
        inconclusive: 0,
        records: Vec::new(),
    };
    if depth == 0 {
        return Ok(report);
    }
    let mut parents = level_capitals(g, 0, prec, opts.stage)?;
    for k in 0..depth {
        let children = level_capitals(g, k + 1, prec, opts.stage)?;
        for (i, left) in parents.into_iter().enumerate() {
            let right = children[2 * i].add(&children[2 * i + 1], prec);
            let status = classify(g.strictness, &left, &right, opts.width_budget.as_ref());
            match status {
                NodeStatus::Pass => report.passes += 1,
                NodeStatus::Fail => report.fails += 1,
                NodeStatus::Inconclusive => report.inconclusive += 1,
            }
            if status != NodeStatus::Pass || opts.keep_passes {
                report.records.push(NodeRecord {
                    status,
                    word: BinaryString::from_index(k, i as u64),
                    left,
                    right,
                });
            }
        }
        parents = children;
    }
    Ok(report)
}

/// `Σ_{|w|=k} ν(w)^s d(w)` against `d(λ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSum {
    pub level: usize,
    pub sum: DyadicInterval,
    pub root: DyadicInterval,
    /// `sum.lo > d(λ).hi`: a certain breach of the supergale level bound.
    pub violation: bool,
}

impl fmt::Display for LevelSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {}: sum={} root={} {}",
            self.level,
            self.sum,
            self.root,
            if self.violation { "VIOLATION" } else { "ok" }
        )
    }
}

pub fn level_sum(g: &GaleSpec, k: usize, prec: u32) -> Result<LevelSum> {
    check_depth(g, k)?;
    if g.is_staged() {
        return Err(Error::OneSided);
    }
    let terms: Vec<DyadicInterval> = level_capitals(g, k, prec, None)?
        .into_iter()
        .map(|c| c.enclosure().cloned().ok_or(Error::OneSided))
        .collect::<Result<_>>()?;
    let sum = sum_in_order(terms.iter(), prec);
    let root = g.value(&BinaryString::empty(), prec)?;
    let violation = sum.lo() > root.hi();
    Ok(LevelSum {
        level: k,
        sum,
        root,
        violation,
    })
}
