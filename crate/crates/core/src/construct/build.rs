//! Assembly of `d' = Σ_i i·d_{U_i}^{s'}` with explicit truncation budgets.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use super::dut::{eval_dut_uniform, node_index, positive_measure, scaled_table};
use super::levels::{enumerate_scaled, LevelSetFamily};
use super::plan::{tail_bound, ConversionPlan};
use super::StringSet;
use crate::error::{Error, Result};
use crate::gales::{
    verify_gale_with, GaleReport, GaleSpec, GaleTable, Payoff, Strictness, VerifyOptions,
};
use crate::measures::{check_balance, BinaryString};
use crate::numerics::{pow2, sum_in_order, Dyadic, DyadicInterval, Rounding};

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    /// Stage at which a staged source is read.
    pub stage: Option<u32>,
}

/// Per-index summary of a conversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexPart {
    pub i: u32,
    pub certain: usize,
    pub uncertain: usize,
    /// `d_{Ũ_i}^{s'}(λ)` for the certified finite part `Ũ_i`.
    pub root_lower: DyadicInterval,
    /// Upper bound on `d_{U_i}^{s'}(λ)`.
    pub root_upper: Dyadic,
    /// Bound on the mass of members deeper than the enumeration depth.
    pub depth_tail: DyadicInterval,
}

/// The result of a conversion: an enclosure table of `d'` plus budgets.
#[derive(Clone, Debug)]
pub struct Conversion {
    pub plan: ConversionPlan,
    /// Enumeration and output depth.
    pub depth: usize,
    pub stage: Option<u32>,
    /// Factor applied to the source so that `d(λ) ≤ 1`.
    pub normalization: Option<Dyadic>,
    pub family: LevelSetFamily,
    pub parts: Vec<IndexPart>,
    pub index_tail: DyadicInterval,
    /// `Σ_{i≤I} i·d_{Ũ_i}^{s'}`, node by node.
    pub lower: BTreeMap<BinaryString, DyadicInterval>,
    /// The Gale with exponent `s'` whose table encloses `d'`.
    pub gale: GaleSpec,
}

impl Conversion {
    pub fn table(&self) -> &GaleTable {
        match &self.gale.payoff {
            Payoff::Table(t) => t,
            _ => unreachable!("conversions produce tables"),
        }
    }

    pub fn value(&self, w: &BinaryString) -> Result<&DyadicInterval> {
        self.table().get(w)
    }

    /// Width of the root enclosure: everything truncation may have hidden.
    pub fn total_budget(&self) -> Dyadic {
        self.value(&BinaryString::empty())
            .expect("root is present")
            .width()
    }

    /// Widest scaled enclosure a node check may see: twice the root budget
    /// (the right side adds two children) plus a rounding allowance.
    pub fn width_budget(&self) -> Dyadic {
        let slack = Dyadic::pow2(-(self.plan.precision as i64) / 2);
        &self.total_budget().shl(1) + &(&slack * &(&Dyadic::one() + &self.total_budget()))
    }

    /// Checks the table as a Gale, counting wider-than-budget nodes as
    /// inconclusive.
    pub fn verify(&self) -> Result<GaleReport> {
        let opts = VerifyOptions {
            width_budget: Some(self.width_budget()),
            ..Default::default()
        };
        verify_gale_with(&self.gale, self.depth, self.plan.precision, &opts)
    }
}

impl fmt::Display for Conversion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let root = self.value(&BinaryString::empty()).expect("root is present");
        writeln!(f, "plan {}", self.plan)?;
        writeln!(f, "depth {}", self.depth)?;
        if let Some(r) = self.stage {
            writeln!(f, "stage {r}")?;
        }
        if let Some(n) = &self.normalization {
            writeln!(f, "source scaled by {n}")?;
        }
        for p in &self.parts {
            writeln!(
                f,
                "i={} certain={} uncertain={} root_lower={} root_upper={} depth_tail={}",
                p.i, p.certain, p.uncertain, p.root_lower, p.root_upper, p.depth_tail
            )?;
        }
        writeln!(f, "index tail {}", self.index_tail)?;
        writeln!(f, "root {root}")?;
        writeln!(f, "total budget {}", self.total_budget())?;
        match self.plan.root_bound() {
            Ok(b) => write!(f, "closed-form root bound 2G = {b}"),
            Err(e) => write!(f, "closed-form root bound unavailable: {e}"),
        }
    }
}

/// Lower and upper `d_{U_i}^{s'}` values for every node, canonical order.
struct IndexTable {
    lower: Vec<DyadicInterval>,
    upper: Vec<Dyadic>,
}

struct Prepared {
    depth: usize,
    normalization: Option<Dyadic>,
    family: LevelSetFamily,
    words: Vec<BinaryString>,
}

fn prepare(source: &GaleSpec, plan: &ConversionPlan, opts: &BuildOptions) -> Result<Prepared> {
    plan.validate()?;
    if source.s != plan.s {
        return Err(Error::InvalidPlan(format!(
            "source exponent {} differs from plan s = {}",
            source.s, plan.s
        )));
    }
    let prec = plan.precision;
    let depth = source
        .available_depth()
        .map_or(plan.max_depth, |d| d.min(plan.max_depth));

    let balance_depth = source
        .nu
        .supported_depth()
        .map_or(plan.max_depth, |d| d.min(plan.max_depth));
    let balance = check_balance(&source.nu, &plan.cert, balance_depth, prec);
    if let Some(v) = balance.first_violation() {
        return Err(Error::NotWellBalanced(v.to_string()));
    }

    let root_hi = match &source.payoff {
        Payoff::Staged(g) => g.oracle().root_bound().ok_or_else(|| {
            Error::RootUnbounded("staged source supplies no root bound".into())
        })?,
        _ => source.value(&BinaryString::empty(), prec)?.hi().clone(),
    };
    let normalization = (root_hi > Dyadic::one())
        .then(|| Dyadic::one().div_round(&root_hi, prec, Rounding::Down));
    if let Some(f) = &normalization {
        if (f * &root_hi) > Dyadic::one() {
            return Err(Error::RootUnbounded(format!("{root_hi} scaled by {f}")));
        }
    }

    if !source.is_staged() {
        let mut as_super = source.clone();
        as_super.strictness = Strictness::Supergale;
        let report = verify_gale_with(&as_super, depth, prec, &VerifyOptions::default())?;
        let first = report.failures().next().map(|r| r.to_string());
        if let Some(fail) = first {
            return Err(Error::NotASupergale(fail));
        }
    }

    let indices: Vec<u32> = (1..=plan.max_index).collect();
    let family = enumerate_scaled(
        source,
        &indices,
        depth,
        prec,
        opts.stage,
        normalization.as_ref(),
    )?;
    Ok(Prepared {
        depth,
        normalization,
        family,
        words: BinaryString::up_to(depth).collect(),
    })
}

fn with_weights(u: &StringSet, weights: &[DyadicInterval]) -> Vec<(BinaryString, DyadicInterval)> {
    u.iter()
        .map(|m| (m.clone(), weights[node_index(m)].clone()))
        .collect()
}

fn assemble(
    source: &GaleSpec,
    plan: &ConversionPlan,
    opts: &BuildOptions,
    prep: Prepared,
    per_index: Vec<IndexTable>,
    inv_weight_hi: &[Dyadic],
) -> Result<Conversion> {
    let prec = plan.precision;
    let index_tail = plan.index_tail()?;
    let mut parts = Vec::new();
    for (k, table) in per_index.iter().enumerate() {
        let i = k as u32 + 1;
        let set = &prep.family.sets[&i];
        parts.push(IndexPart {
            i,
            certain: set.certain.len(),
            uncertain: set.possible.len(),
            root_lower: table.lower[0].clone(),
            root_upper: table.upper[0].clone(),
            depth_tail: tail_bound(plan, i, prep.depth + 1)?,
        });
    }

    let mut values = BTreeMap::new();
    let mut budgets = BTreeMap::new();
    let mut lower_map = BTreeMap::new();
    for (j, w) in prep.words.iter().enumerate() {
        let lower_terms: Vec<DyadicInterval> = per_index
            .iter()
            .enumerate()
            .map(|(k, t)| t.lower[j].scale_int(k as i64 + 1, prec))
            .collect();
        let lower = sum_in_order(lower_terms.iter(), prec);
        let mut upper_terms: Vec<DyadicInterval> = per_index
            .iter()
            .enumerate()
            .map(|(k, t)| DyadicInterval::point(t.upper[j].clone()).scale_int(k as i64 + 1, prec))
            .collect();
        upper_terms.push(DyadicInterval::point(index_tail.hi().clone()).mul(
            &DyadicInterval::point(inv_weight_hi[j].clone()),
            prec,
        ));
        let upper = sum_in_order(upper_terms.iter(), prec).hi().clone();
        let upper = upper.max(lower.hi().clone());
        let entry = DyadicInterval::new(lower.lo().clone(), upper).expect("ordered");
        budgets.insert(
            w.clone(),
            DyadicInterval::new(Dyadic::zero(), entry.width()).expect("nonnegative"),
        );
        values.insert(w.clone(), entry);
        lower_map.insert(w.clone(), lower);
    }
    let table = GaleTable::new(values)?.with_budgets(budgets)?;
    Ok(Conversion {
        plan: plan.clone(),
        depth: prep.depth,
        stage: opts.stage,
        normalization: prep.normalization,
        family: prep.family,
        parts,
        index_tail,
        lower: lower_map,
        gale: GaleSpec::table(source.nu.clone(), plan.s_prime, table, Strictness::Gale),
    })
}

/// Builds a ν-s'-gale `d'` from the ν-s-supergale `source`.
///
/// Each `U_i` (`1 ≤ i ≤ I`) is enumerated to depth `D = min(K, available
/// depth)`. The lower part of every entry is exactly `Σ i·d_{Ũ_i}^{s'}` for
/// the certified finite sets `Ũ_i`. The upper part adds uncertain strings,
/// members deeper than `D` (bounded by [`tail_bound`]) and all indices
/// above `I`.
///
/// Refuses measures failing the plan's certificate, sources that are not
/// supergales to depth `D`, and roots that cannot be normalized to 1.
pub fn build_dprime(
    source: &GaleSpec,
    plan: &ConversionPlan,
    opts: &BuildOptions,
) -> Result<Conversion> {
    let prep = prepare(source, plan, opts)?;
    let prec = plan.precision;
    let weights: Vec<DyadicInterval> = prep
        .words
        .par_iter()
        .map(|w| positive_measure(&source.nu, w, prec)?.pow(plan.s_prime, prec))
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let inv_weight_hi: Vec<Dyadic> = weights
        .iter()
        .map(|w| Dyadic::one().div_round(w.lo(), prec, Rounding::Up))
        .collect();

    let staged = source.is_staged();
    let per_index: Vec<IndexTable> = (1..=plan.max_index)
        .into_par_iter()
        .map(|i| {
            let set = &prep.family.sets[&i];
            let certain = scaled_table(&with_weights(&set.certain, &weights), prep.depth, prec);
            let scaled_upper: Vec<Dyadic> = if staged {
                // D_{U_i}(w) ≤ D_{U_i}(λ) ≤ tail_bound(i, 0) at every node.
                let bound = tail_bound(plan, i, 0)?.hi().clone();
                vec![bound; certain.len()]
            } else {
                let all = set.certain.union(&set.possible);
                let tail = tail_bound(plan, i, prep.depth + 1)?;
                scaled_table(&with_weights(&all, &weights), prep.depth, prec)
                    .iter()
                    .map(|v| v.add(&DyadicInterval::point(tail.hi().clone()), prec).hi().clone())
                    .collect()
            };
            let lower = certain
                .iter()
                .zip(&weights)
                .map(|(c, w)| c.div(w, prec))
                .collect::<Result<Vec<_>>>()?;
            let upper = scaled_upper
                .iter()
                .zip(&inv_weight_hi)
                .map(|(u, inv)| (u * inv).round(prec, Rounding::Up))
                .collect();
            Ok(IndexTable { lower, upper })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    assemble(source, plan, opts, prep, per_index, &inv_weight_hi)
}

/// [`build_dprime`] for the uniform measure, evaluating every `d_{U_i}^{s'}`
/// through the closed form with terms `2^{−s'|u|}` and `2^{(s'−1)(|w|−n)}`.
///
/// Cost grows with the product of table size and set size; it serves as an
/// independent cross-check of the general path.
pub fn build_dprime_uniform(
    source: &GaleSpec,
    plan: &ConversionPlan,
    opts: &BuildOptions,
) -> Result<Conversion> {
    if !source.nu.is_uniform() {
        return Err(Error::InvalidArgument(format!(
            "closed-form path needs the uniform measure, got {}",
            source.nu
        )));
    }
    let prep = prepare(source, plan, opts)?;
    let prec = plan.precision;
    // 1/μ(w)^{s'} = 2^{s'|w|}, by level.
    let inv_weight_by_level: Vec<DyadicInterval> = (0..=prep.depth)
        .map(|k| pow2(plan.s_prime.mul_int(k as i64), prec))
        .collect::<Result<_>>()?;
    let inv_weight_hi: Vec<Dyadic> = prep
        .words
        .iter()
        .map(|w| inv_weight_by_level[w.len()].hi().clone())
        .collect();

    let staged = source.is_staged();
    let per_index: Vec<IndexTable> = (1..=plan.max_index)
        .into_par_iter()
        .map(|i| {
            let set = &prep.family.sets[&i];
            let all = set.certain.union(&set.possible);
            let tail = if staged {
                tail_bound(plan, i, 0)?
            } else {
                tail_bound(plan, i, prep.depth + 1)?
            };
            let rows: Vec<(DyadicInterval, Dyadic)> = prep
                .words
                .par_iter()
                .map(|w| {
                    let lower = eval_dut_uniform(&set.certain, plan.s_prime, w, prec)?;
                    let scaled_tail = DyadicInterval::point(tail.hi().clone())
                        .mul(&inv_weight_by_level[w.len()], prec);
                    let upper = if staged {
                        scaled_tail.hi().clone()
                    } else {
                        eval_dut_uniform(&all, plan.s_prime, w, prec)?
                            .add(&scaled_tail, prec)
                            .hi()
                            .clone()
                    };
                    Ok((lower, upper))
                })
                .collect::<Vec<Result<_>>>()
                .into_iter()
                .collect::<Result<_>>()?;
            let (lower, upper) = rows.into_iter().unzip();
            Ok(IndexTable { lower, upper })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    assemble(source, plan, opts, prep, per_index, &inv_weight_hi)
}
