//! The gale `d_U^t` induced by a set of strings `U`:
//!
//! `d_U^t(w) = ν(w)^{−t} ( Σ_{wu∈U} ν(wu)^t + Σ_{n<|w|, w[0..n)∈U} ν(w[0..n))^t / 2^{|w|−n} )`.
//!
//! The bracketed numerator is the scaled capital `D_U^t(w)`.

use std::collections::BTreeMap;
use std::fmt;

use super::{partition_prefix_sets, StringSet};
use crate::error::{Error, Result};
use crate::gales::{verify_gale, GaleReport, GaleSpec, GaleTable, Strictness};
use crate::measures::{BinaryString, Measure};
use crate::numerics::{pow2, sum_in_order, DyadicExponent, DyadicInterval};

/// How much of the first sum is computed explicitly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Truncation {
    /// Every member is summed; `U` is finite.
    #[default]
    Exact,
    /// Only members `wu` with `|u| ≤ max_suffix` are summed. The dropped
    /// scaled mass must be covered by `tail_mass`, which widens the upper
    /// endpoint; without it a dropped member is an error.
    Depth {
        max_suffix: usize,
        tail_mass: Option<DyadicInterval>,
    },
}

/// Position of `w` in the canonical enumeration of `2*`.
pub(crate) fn node_index(w: &BinaryString) -> usize {
    (1usize << w.len()) - 1 + w.index() as usize
}

pub(crate) fn exponent_check(t: DyadicExponent) -> Result<()> {
    if t.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("exponent {t} must be positive")))
    }
}

/// Positive `ν(w)`, with a zero-measure node reported as such.
pub(crate) fn positive_measure(nu: &Measure, w: &BinaryString, prec: u32) -> Result<DyadicInterval> {
    let v = nu.value(w, prec)?;
    if v.lo().is_positive() {
        Ok(v)
    } else {
        Err(Error::ZeroMeasureNode(w.to_string()))
    }
}

/// Evaluates `d_U^t` node by node with the member weights `ν(m)^t` cached.
#[derive(Clone, Debug)]
pub struct DutEvaluator<'a> {
    nu: &'a Measure,
    t: DyadicExponent,
    prec: u32,
    members: Vec<(BinaryString, DyadicInterval)>,
}

impl<'a> DutEvaluator<'a> {
    pub fn new(u: &StringSet, t: DyadicExponent, nu: &'a Measure, prec: u32) -> Result<Self> {
        exponent_check(t)?;
        let members = u
            .iter()
            .map(|m| Ok((m.clone(), nu.value(m, prec)?.pow(t, prec)?)))
            .collect::<Result<_>>()?;
        Ok(DutEvaluator {
            nu,
            t,
            prec,
            members,
        })
    }

    /// `D_U^t(w)`, the bracketed numerator.
    pub fn scaled(&self, w: &BinaryString, trunc: &Truncation) -> Result<DyadicInterval> {
        let mut terms = Vec::new();
        let mut dropped = false;
        for (m, weight) in &self.members {
            if w.is_prefix_of(m) {
                match trunc {
                    Truncation::Depth { max_suffix, .. } if m.len() - w.len() > *max_suffix => {
                        dropped = true;
                    }
                    _ => terms.push(weight.clone()),
                }
            } else if m.is_proper_prefix_of(w) {
                terms.push(weight.shl(-((w.len() - m.len()) as i64)));
            }
        }
        let mut sum = sum_in_order(terms.iter(), self.prec);
        if dropped {
            match trunc {
                Truncation::Depth {
                    tail_mass: Some(tail),
                    ..
                } => {
                    let widened = DyadicInterval::new(sum.lo().clone(), sum.hi() + tail.hi())
                        .expect("tail is nonnegative");
                    sum = widened.round_outward(self.prec);
                }
                _ => return Err(Error::UnboundedRoot(w.to_string())),
            }
        }
        Ok(sum)
    }

    /// `d_U^t(w)`, summed as `(ν(wu)/ν(w))^t` and `(ν(w)/ν(m))^{−t} 2^{−(|w|−|m|)}`
    /// so that dyadic ratios stay exact.
    pub fn eval(&self, w: &BinaryString, trunc: &Truncation) -> Result<DyadicInterval> {
        let prec = self.prec;
        let nu_w = positive_measure(self.nu, w, prec)?;
        let mut terms = Vec::new();
        let mut dropped = false;
        for (m, _) in &self.members {
            if w.is_prefix_of(m) {
                if let Truncation::Depth { max_suffix, .. } = trunc {
                    if m.len() - w.len() > *max_suffix {
                        dropped = true;
                        continue;
                    }
                }
                terms.push(path_ratio(self.nu, w, &nu_w, m, prec)?.pow(self.t, prec)?);
            } else if m.is_proper_prefix_of(w) {
                let nu_m = positive_measure(self.nu, m, prec)?;
                let ratio = path_ratio(self.nu, m, &nu_m, w, prec)?;
                let term = ratio.pow(self.t.neg(), prec).map_err(|e| match e {
                    Error::ZeroToNegative | Error::DivisionByZero => Error::ZeroMeasureNode(w.to_string()),
                    e => e,
                })?;
                terms.push(term.shl(-((w.len() - m.len()) as i64)));
            }
        }
        let sum = sum_in_order(terms.iter(), prec);
        if !dropped {
            return Ok(sum);
        }
        match trunc {
            Truncation::Depth {
                tail_mass: Some(tail),
                ..
            } => {
                let weight = nu_w.pow(self.t, prec)?;
                let extra = DyadicInterval::point(tail.hi().clone()).div(&weight, prec)?;
                let widened = DyadicInterval::new(sum.lo().clone(), sum.hi() + extra.hi())
                    .expect("tail is nonnegative");
                Ok(widened.round_outward(prec))
            }
            _ => Err(Error::UnboundedRoot(w.to_string())),
        }
    }
}

/// `ν(to)/ν(from)` for `from ⊑ to`: a product of conditionals for the
/// factorised kinds, a quotient for node tables.
fn path_ratio(
    nu: &Measure,
    from: &BinaryString,
    nu_from: &DyadicInterval,
    to: &BinaryString,
    prec: u32,
) -> Result<DyadicInterval> {
    if let Measure::NodeTable(_) = nu {
        return nu.value(to, prec)?.div(nu_from, prec);
    }
    let mut ratio = DyadicInterval::one();
    for n in from.len()..to.len() {
        let c = nu
            .conditional(&to.prefix(n), to.bits()[n])
            .expect("factorised measure");
        ratio = ratio.mul(&c, prec);
    }
    Ok(ratio)
}

/// Enclosure of `d_U^t(w)`.
pub fn eval_dut(
    u: &StringSet,
    t: DyadicExponent,
    nu: &Measure,
    w: &BinaryString,
    trunc: &Truncation,
    prec: u32,
) -> Result<DyadicInterval> {
    DutEvaluator::new(u, t, nu, prec)?.eval(w, trunc)
}

/// `d_U^t(w)` under the uniform measure, in the closed form
/// `Σ_{wu∈U} 2^{−t|u|} + Σ_{n<|w|, w[0..n)∈U} 2^{(t−1)(|w|−n)}`.
pub fn eval_dut_uniform(
    u: &StringSet,
    t: DyadicExponent,
    w: &BinaryString,
    prec: u32,
) -> Result<DyadicInterval> {
    exponent_check(t)?;
    let below = t.neg();
    let above = t.sub(DyadicExponent::integer(1));
    let mut terms = Vec::new();
    for m in u {
        if w.is_prefix_of(m) {
            terms.push(pow2(below.mul_int((m.len() - w.len()) as i64), prec)?);
        } else if m.is_proper_prefix_of(w) {
            terms.push(pow2(above.mul_int((w.len() - m.len()) as i64), prec)?);
        }
    }
    Ok(sum_in_order(terms.iter(), prec))
}

/// Scaled capitals `D_U^t(w)` for every `|w| ≤ depth`, indexed by
/// [`node_index`]. `members` pairs each member with `ν(m)^t`, in canonical
/// order; members may lie deeper than `depth`.
///
/// Works bottom-up for the first sum (each member adds its weight to all
/// its prefixes) and top-down for the second, where a member's weight is
/// halved at each step below it.
pub(crate) fn scaled_table(
    members: &[(BinaryString, DyadicInterval)],
    depth: usize,
    prec: u32,
) -> Vec<DyadicInterval> {
    let nodes = (1usize << (depth + 1)) - 1;
    let mut below = vec![DyadicInterval::zero(); nodes];
    let mut own: Vec<Option<&DyadicInterval>> = vec![None; nodes];
    for (m, weight) in members {
        for n in 0..=m.len().min(depth) {
            let j = node_index(&m.prefix(n));
            below[j] = below[j].add(weight, prec);
        }
        if m.len() <= depth {
            own[node_index(m)] = Some(weight);
        }
    }
    let mut above = vec![DyadicInterval::zero(); nodes];
    for j in 0..(1usize << depth) - 1 {
        let carried = match own[j] {
            Some(weight) => above[j].add(weight, prec),
            None => above[j].clone(),
        };
        let half = carried.shl(-1);
        above[2 * j + 1] = half.clone();
        above[2 * j + 2] = half;
    }
    below
        .iter()
        .zip(&above)
        .map(|(b, a)| b.add(a, prec))
        .collect()
}

/// `d_U^t` for every `|w| ≤ depth` as a table; all members are summed.
pub fn dut_table(
    u: &StringSet,
    t: DyadicExponent,
    nu: &Measure,
    depth: usize,
    prec: u32,
) -> Result<GaleTable> {
    exponent_check(t)?;
    let members: Vec<_> = u
        .iter()
        .map(|m| Ok((m.clone(), nu.value(m, prec)?.pow(t, prec)?)))
        .collect::<Result<_>>()?;
    let scaled = scaled_table(&members, depth, prec);
    let mut values = BTreeMap::new();
    for w in BinaryString::up_to(depth) {
        let weight = positive_measure(nu, &w, prec)?.pow(t, prec)?;
        let d = scaled[node_index(&w)].div(&weight, prec)?;
        values.insert(w, d);
    }
    GaleTable::new(values)
}

/// Outcome of [`verify_dut_is_gale`].
#[derive(Clone, Debug)]
pub struct DutReport {
    pub gale: GaleReport,
    pub parts: usize,
    /// Nodes where `d_U^t` and `Σ_i d_{V_i}^t` do not intersect.
    pub partition_mismatches: Vec<(BinaryString, DyadicInterval, DyadicInterval)>,
    /// Nodes where both sides are points and differ.
    pub exact_mismatches: usize,
}

impl DutReport {
    pub fn passed(&self) -> bool {
        self.gale.passed() && self.partition_mismatches.is_empty() && self.exact_mismatches == 0
    }
}

impl fmt::Display for DutReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.gale)?;
        for (w, whole, parts) in &self.partition_mismatches {
            writeln!(f, "PARTITION {w} d_U={whole} sum_V={parts}")?;
        }
        write!(
            f,
            "partition identity over {} prefix sets: {} mismatches",
            self.parts,
            self.partition_mismatches.len() + self.exact_mismatches
        )
    }
}

/// Checks that `d_U^t` is a ν-t-gale to `depth` and that it equals
/// `Σ_i d_{V_i}^t` at every node.
pub fn verify_dut_is_gale(
    u: &StringSet,
    t: DyadicExponent,
    nu: &Measure,
    depth: usize,
    prec: u32,
) -> Result<DutReport> {
    let whole = DutEvaluator::new(u, t, nu, prec)?;
    let parts = partition_prefix_sets(u)
        .iter()
        .map(|v| DutEvaluator::new(v, t, nu, prec))
        .collect::<Result<Vec<_>>>()?;
    let mut values = BTreeMap::new();
    let mut partition_mismatches = Vec::new();
    let mut exact_mismatches = 0;
    for w in BinaryString::up_to(depth) {
        let d = whole.eval(&w, &Truncation::Exact)?;
        let pieces = parts
            .iter()
            .map(|p| p.eval(&w, &Truncation::Exact))
            .collect::<Result<Vec<_>>>()?;
        let sum = sum_in_order(pieces.iter(), prec);
        if !d.intersects(&sum) {
            partition_mismatches.push((w.clone(), d.clone(), sum));
        } else if d.is_point() && sum.is_point() && d != sum {
            exact_mismatches += 1;
        }
        values.insert(w, d);
    }
    let table = GaleTable::new(values)?;
    let spec = GaleSpec::table(nu.clone(), t, table, Strictness::Gale);
    Ok(DutReport {
        gale: verify_gale(&spec, depth, prec)?,
        parts: parts.len(),
        partition_mismatches,
        exact_mismatches,
    })
}
