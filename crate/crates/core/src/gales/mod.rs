//! Gales and supergales: exact tables, staged oracles, closed formulas,
//! and the checks built on them.
//!
//! A ν-s-supergale is a payoff `d: 2* → [0,∞)` with
//! `ν(w)^s d(w) ≥ ν(w0)^s d(w0) + ν(w1)^s d(w1)`; a gale has equality.
//! The product `D(w) = ν(w)^s d(w)` is the scaled capital.

mod staged;
mod success;
mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use staged::{FnOracle, StageSchedule, StagedGale, StagedOracle, TableStages};
pub use success::{dimension_scan, success_trace, ScanReport, ScanRow, SuccessTrace, ThresholdHit};
pub use verify::{
    level_sum, verify_gale, verify_gale_with, GaleReport, LevelSum, NodeRecord, NodeStatus,
    VerifyOptions,
};

use crate::error::{Error, Result};
use crate::measures::{BinaryString, Measure};
use crate::numerics::{Dyadic, DyadicExponent, DyadicInterval};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strictness {
    Gale,
    Supergale,
}

impl fmt::Display for Strictness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strictness::Gale => "Gale",
            Strictness::Supergale => "Supergale",
        })
    }
}

impl FromStr for Strictness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Gale" => Ok(Strictness::Gale),
            "Supergale" => Ok(Strictness::Supergale),
            _ => Err(Error::InvalidArgument(format!(
                "strictness must be Gale or Supergale, got {s:?}"
            ))),
        }
    }
}

/// A payoff table complete to its depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaleTable {
    depth: usize,
    values: BTreeMap<BinaryString, DyadicInterval>,
    budgets: BTreeMap<BinaryString, DyadicInterval>,
}

impl GaleTable {
    /// Validates completeness (every string up to the deepest key) and
    /// nonnegativity.
    pub fn new(values: BTreeMap<BinaryString, DyadicInterval>) -> Result<Self> {
        let depth = values.keys().map(BinaryString::len).max().unwrap_or(0);
        if values.len() != (1usize << (depth + 1)) - 1 {
            let missing = BinaryString::up_to(depth)
                .find(|w| !values.contains_key(w))
                .expect("a key is missing");
            return Err(Error::MissingNode(missing.to_string()));
        }
        if let Some((w, _)) = values.iter().find(|(_, v)| v.lo().is_negative()) {
            return Err(Error::NegativePayoff(w.to_string()));
        }
        Ok(GaleTable {
            depth,
            values,
            budgets: BTreeMap::new(),
        })
    }

    /// Attaches per-node truncation budgets (written as `budget` lines).
    pub fn with_budgets(mut self, budgets: BTreeMap<BinaryString, DyadicInterval>) -> Result<Self> {
        if let Some(w) = budgets.keys().find(|w| !self.values.contains_key(*w)) {
            return Err(Error::MissingNode(w.to_string()));
        }
        self.budgets = budgets;
        Ok(self)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &BTreeMap<BinaryString, DyadicInterval> {
        &self.values
    }

    pub fn budgets(&self) -> &BTreeMap<BinaryString, DyadicInterval> {
        &self.budgets
    }

    pub fn get(&self, w: &BinaryString) -> Result<&DyadicInterval> {
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

/// Named closed-form gales.
///
/// Each is written as `d(w) = c·π(w) / ν(w)^s` for a measure `π`, which is
/// a ν-s-gale for every ν and s. Under the uniform measure μ:
/// constant-1 at s = 1 is 1, uniform-scaling is `2^{(s−1)|w|}`, all-in-on-0
/// is `2^{s|w|}` on the 0-spine, and spine doubling is `2^{|w|}` at s = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosedGale {
    /// `c·ν(w)^{1−s}` (π = ν).
    Constant(Dyadic),
    /// `2^{−|w|}·ν(w)^{−s}` (π = μ).
    UniformScaling,
    /// `ν(0^k)^{−s}` on the 0-spine, 0 elsewhere (π = point mass on 0^∞).
    AllInOnZero,
    /// `ν(0^k)^{1−s} / ν(0^k)` on the 0-spine, 0 elsewhere.
    SpineDoubling,
}

impl ClosedGale {
    pub fn builtins() -> Vec<ClosedGale> {
        vec![
            ClosedGale::Constant(Dyadic::one()),
            ClosedGale::UniformScaling,
            ClosedGale::AllInOnZero,
            ClosedGale::SpineDoubling,
        ]
    }

    /// Enclosure of `d(w)` given an enclosure `nu_w` of `ν(w)`.
    pub fn eval(
        &self,
        s: DyadicExponent,
        w: &BinaryString,
        nu_w: &DyadicInterval,
        prec: u32,
    ) -> Result<DyadicInterval> {
        let zero_measure = |e: Error| match e {
            Error::ZeroToNegative | Error::DivisionByZero => Error::ZeroMeasureNode(w.to_string()),
            e => e,
        };
        let one_minus_s = DyadicExponent::integer(1).sub(s);
        let on_spine = w.ones() == 0;
        match self {
            ClosedGale::Constant(c) => Ok(nu_w
                .pow(one_minus_s, prec)
                .map_err(zero_measure)?
                .mul(&DyadicInterval::point(c.clone()), prec)),
            ClosedGale::UniformScaling => Ok(nu_w
                .pow(s.neg(), prec)
                .map_err(zero_measure)?
                .shl(-(w.len() as i64))),
            ClosedGale::AllInOnZero if on_spine => nu_w.pow(s.neg(), prec).map_err(zero_measure),
            ClosedGale::SpineDoubling if on_spine => {
                let recip = nu_w.recip(prec).map_err(zero_measure)?;
                Ok(nu_w
                    .pow(one_minus_s, prec)
                    .map_err(zero_measure)?
                    .mul(&recip, prec))
            }
            ClosedGale::AllInOnZero | ClosedGale::SpineDoubling => Ok(DyadicInterval::zero()),
        }
    }

    /// All values to `depth` as an exact-enclosure table.
    pub fn tabulate(
        &self,
        nu: &Measure,
        s: DyadicExponent,
        depth: usize,
        prec: u32,
    ) -> Result<GaleTable> {
        let mut values = BTreeMap::new();
        nu.walk(depth, prec, |w, nu_w| {
            values.insert(w.clone(), self.eval(s, w, nu_w, prec)?);
            Ok(())
        })?;
        GaleTable::new(values)
    }
}

impl fmt::Display for ClosedGale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedGale::Constant(c) if *c == Dyadic::one() => f.write_str("constant"),
            ClosedGale::Constant(c) => write!(f, "constant:{c}"),
            ClosedGale::UniformScaling => f.write_str("uniform-scaling"),
            ClosedGale::AllInOnZero => f.write_str("all-in-on-0"),
            ClosedGale::SpineDoubling => f.write_str("spine-doubling"),
        }
    }
}

impl FromStr for ClosedGale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownStrategy(s.to_string());
        match s.split_once(':') {
            Some(("constant", c)) => {
                let c: Dyadic = c.parse().map_err(|_| unknown())?;
                if c.is_negative() {
                    return Err(Error::NegativePayoff(format!("constant {c}")));
                }
                Ok(ClosedGale::Constant(c))
            }
            Some(_) => Err(unknown()),
            None => match s {
                "constant" => Ok(ClosedGale::Constant(Dyadic::one())),
                "uniform-scaling" => Ok(ClosedGale::UniformScaling),
                "all-in-on-0" => Ok(ClosedGale::AllInOnZero),
                "spine-doubling" => Ok(ClosedGale::SpineDoubling),
                _ => Err(unknown()),
            },
        }
    }
}

#[derive(Clone, Debug)]
pub enum Payoff {
    Table(GaleTable),
    Staged(StagedGale),
    Closed(ClosedGale),
}

/// A value of `d(w)` or `D(w)`: two-sided, or only a lower bound when the
/// payoff is staged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Capital {
    Enclosed(DyadicInterval),
    AtLeast(Dyadic),
}

impl Capital {
    pub fn lower(&self) -> &Dyadic {
        match self {
            Capital::Enclosed(v) => v.lo(),
            Capital::AtLeast(lo) => lo,
        }
    }

    pub fn upper(&self) -> Option<&Dyadic> {
        match self {
            Capital::Enclosed(v) => Some(v.hi()),
            Capital::AtLeast(_) => None,
        }
    }

    pub fn enclosure(&self) -> Option<&DyadicInterval> {
        match self {
            Capital::Enclosed(v) => Some(v),
            Capital::AtLeast(_) => None,
        }
    }

    /// Product with a nonnegative interval.
    pub fn scale(&self, factor: &DyadicInterval, prec: u32) -> Capital {
        match self {
            Capital::Enclosed(v) => Capital::Enclosed(v.mul(factor, prec)),
            Capital::AtLeast(lo) => Capital::AtLeast(
                DyadicInterval::point(lo.clone())
                    .mul(&DyadicInterval::point(factor.lo().clone()), prec)
                    .lo()
                    .clone(),
            ),
        }
    }

    pub fn add(&self, other: &Capital, prec: u32) -> Capital {
        match (self, other) {
            (Capital::Enclosed(a), Capital::Enclosed(b)) => Capital::Enclosed(a.add(b, prec)),
            _ => Capital::AtLeast(
                DyadicInterval::point(self.lower().clone())
                    .add(&DyadicInterval::point(other.lower().clone()), prec)
                    .lo()
                    .clone(),
            ),
        }
    }
}

impl fmt::Display for Capital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capital::Enclosed(v) => write!(f, "{v}"),
            Capital::AtLeast(lo) => write!(f, "[{lo},+inf)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GaleSpec {
    pub nu: Measure,
    pub s: DyadicExponent,
    pub payoff: Payoff,
    pub strictness: Strictness,
}

impl GaleSpec {
    pub fn closed(nu: Measure, s: DyadicExponent, gale: ClosedGale) -> Self {
        GaleSpec {
            nu,
            s,
            payoff: Payoff::Closed(gale),
            strictness: Strictness::Gale,
        }
    }

    pub fn table(nu: Measure, s: DyadicExponent, table: GaleTable, strictness: Strictness) -> Self {
        GaleSpec {
            nu,
            s,
            payoff: Payoff::Table(table),
            strictness,
        }
    }

    pub fn staged(nu: Measure, s: DyadicExponent, staged: StagedGale, strictness: Strictness) -> Self {
        GaleSpec {
            nu,
            s,
            payoff: Payoff::Staged(staged),
            strictness,
        }
    }

    pub fn is_staged(&self) -> bool {
        matches!(self.payoff, Payoff::Staged(_))
    }

    /// Deepest level at which both the payoff and the measure are available.
    pub fn available_depth(&self) -> Option<usize> {
        let payoff = match &self.payoff {
            Payoff::Table(t) => Some(t.depth()),
            Payoff::Staged(g) => g.oracle().max_depth(),
            Payoff::Closed(_) => None,
        };
        match (payoff, self.nu.supported_depth()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// `d(w)` given `ν(w)`; staged payoffs need a stage.
    pub fn eval_with_measure(
        &self,
        w: &BinaryString,
        nu_w: &DyadicInterval,
        prec: u32,
        stage: Option<u32>,
    ) -> Result<Capital> {
        match &self.payoff {
            Payoff::Table(t) => Ok(Capital::Enclosed(t.get(w)?.clone())),
            Payoff::Closed(c) => Ok(Capital::Enclosed(c.eval(self.s, w, nu_w, prec)?)),
            Payoff::Staged(g) => {
                let r = stage.ok_or(Error::StageRequired)?;
                Ok(Capital::AtLeast(g.lower(w, r)?))
            }
        }
    }

    /// Two-sided enclosure of `d(w)`; staged payoffs give [`Error::OneSided`].
    pub fn value(&self, w: &BinaryString, prec: u32) -> Result<DyadicInterval> {
        match eval_gale(self, w, prec, None) {
            Err(Error::StageRequired) => Err(Error::OneSided),
            Ok(Capital::Enclosed(v)) => Ok(v),
            Ok(Capital::AtLeast(_)) => Err(Error::OneSided),
            Err(e) => Err(e),
        }
    }

    /// Scaled capital `D(w) = ν(w)^s d(w)`.
    pub fn scaled_capital(&self, w: &BinaryString, prec: u32, stage: Option<u32>) -> Result<Capital> {
        let nu_w = self.nu.value(w, prec)?;
        let d = self.eval_with_measure(w, &nu_w, prec, stage)?;
        let weight = nu_w.pow(self.s, prec).map_err(|e| match e {
            Error::ZeroToNegative => Error::ZeroMeasureNode(w.to_string()),
            e => e,
        })?;
        Ok(d.scale(&weight, prec))
    }
}

/// Enclosure of `d(w)`: two-sided for tables and closed forms, a lower bound
/// at stage `r` for staged payoffs.
pub fn eval_gale(g: &GaleSpec, w: &BinaryString, prec: u32, stage: Option<u32>) -> Result<Capital> {
    let nu_w = match &g.payoff {
        Payoff::Closed(_) => g.nu.value(w, prec)?,
        _ => DyadicInterval::zero(),
    };
    g.eval_with_measure(w, &nu_w, prec, stage)
}

/// The stage-`r` lower approximation of a staged payoff.
pub fn staged_lower(g: &GaleSpec, w: &BinaryString, r: u32) -> Result<Dyadic> {
    match &g.payoff {
        Payoff::Staged(staged) => staged.lower(w, r),
        _ => Err(Error::InvalidArgument("payoff is not staged".into())),
    }
}
