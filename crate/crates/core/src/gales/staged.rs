//! Lower-semicomputable payoffs given by stage-indexed approximations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use super::GaleTable;
use crate::error::{Error, Result};
use crate::measures::BinaryString;
use crate::numerics::Dyadic;

/// A computable lower approximation `d'(w, r)` of a payoff `d(w)`.
///
/// Implementations must be nondecreasing in `r` and converge to `d(w)`;
/// [`StagedGale`] checks the first property on every query.
pub trait StagedOracle: Send + Sync {
    fn stage(&self, w: &BinaryString, r: u32) -> Result<Dyadic>;

    /// Deepest string the oracle answers for, `None` when unbounded.
    fn max_depth(&self) -> Option<usize> {
        None
    }

    /// A known upper bound on `d(λ)`, used to normalize before conversion.
    fn root_bound(&self) -> Option<Dyadic> {
        None
    }

    fn describe(&self) -> String;
}

/// How a [`TableStages`] oracle approaches the table's lower endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageSchedule {
    /// `max(0, d(w).lo − 2^{−r})`.
    Additive,
    /// `d(w).lo · (1 − 2^{−r})`.
    Relative,
}

/// Staged view of an exact table; stages increase toward `d(w).lo`.
#[derive(Clone, Debug)]
pub struct TableStages {
    table: GaleTable,
    schedule: StageSchedule,
}

impl TableStages {
    pub fn new(table: GaleTable, schedule: StageSchedule) -> Self {
        TableStages { table, schedule }
    }
}

impl StagedOracle for TableStages {
    fn stage(&self, w: &BinaryString, r: u32) -> Result<Dyadic> {
        let lo = self.table.get(w)?.lo().clone();
        let step = Dyadic::pow2(-(r as i64));
        Ok(match self.schedule {
            StageSchedule::Additive => (&lo - &step).max(Dyadic::zero()),
            StageSchedule::Relative => &lo - &(&lo * &step),
        })
    }

    fn max_depth(&self) -> Option<usize> {
        Some(self.table.depth())
    }

    fn root_bound(&self) -> Option<Dyadic> {
        self.table.get(&BinaryString::empty()).ok().map(|v| v.hi().clone())
    }

    fn describe(&self) -> String {
        format!(
            "staged table (depth {}, {:?} schedule)",
            self.table.depth(),
            self.schedule
        )
    }
}

/// An oracle backed by a closure; handy for tests and ad-hoc sources.
pub struct FnOracle<F> {
    f: F,
    name: String,
}

impl<F> FnOracle<F>
where
    F: Fn(&BinaryString, u32) -> Dyadic + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnOracle {
            f,
            name: name.into(),
        }
    }
}

impl<F> StagedOracle for FnOracle<F>
where
    F: Fn(&BinaryString, u32) -> Dyadic + Send + Sync,
{
    fn stage(&self, w: &BinaryString, r: u32) -> Result<Dyadic> {
        Ok((self.f)(w, r))
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// A staged payoff with a monotonicity cache.
///
/// Every answered `(w, r)` is remembered; an answer below an earlier stage
/// or above a later one is a [`Error::MonotonicityViolation`]. Clones share
/// the cache.
#[derive(Clone)]
pub struct StagedGale {
    oracle: Arc<dyn StagedOracle>,
    seen: Arc<Mutex<HashMap<BinaryString, BTreeMap<u32, Dyadic>>>>,
}

impl StagedGale {
    pub fn new<O: StagedOracle + 'static>(oracle: O) -> Self {
        StagedGale {
            oracle: Arc::new(oracle),
            seen: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn oracle(&self) -> &dyn StagedOracle {
        self.oracle.as_ref()
    }

    /// The stage-`r` lower approximation of `d(w)`.
    pub fn lower(&self, w: &BinaryString, r: u32) -> Result<Dyadic> {
        let value = self.oracle.stage(w, r)?;
        if value.is_negative() {
            return Err(Error::NegativePayoff(w.to_string()));
        }
        let mut seen = self.seen.lock().expect("stage cache poisoned");
        let stages = seen.entry(w.clone()).or_default();
        let violation = |earlier: u32, ev: &Dyadic, later: u32, lv: &Dyadic| {
            Error::MonotonicityViolation {
                word: w.to_string(),
                earlier,
                later,
                earlier_value: ev.to_string(),
                later_value: lv.to_string(),
            }
        };
        if let Some((&r0, v0)) = stages.range(..r).next_back() {
            if &value < v0 {
                return Err(violation(r0, v0, r, &value));
            }
        }
        if let Some((&r1, v1)) = stages.range(r + 1..).next() {
            if &value > v1 {
                return Err(violation(r, &value, r1, v1));
            }
        }
        stages.insert(r, value.clone());
        Ok(value)
    }
}

impl fmt::Debug for StagedGale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StagedGale")
            .field("oracle", &self.oracle.describe())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gales::ClosedGale;
    use crate::measures::Measure;
    use crate::numerics::DyadicExponent;

    fn doubling_table(depth: usize) -> GaleTable {
        ClosedGale::SpineDoubling
            .tabulate(&Measure::Uniform, DyadicExponent::integer(1), depth, 64)
            .unwrap()
    }

    #[test]
    fn table_stages_increase_to_lower_endpoint() {
        let staged = StagedGale::new(TableStages::new(doubling_table(4), StageSchedule::Additive));
        let w: BinaryString = "000".parse().unwrap();
        let mut prev = Dyadic::zero();
        for r in 0..12 {
            let v = staged.lower(&w, r).unwrap();
            assert!(v >= prev);
            assert!(v <= Dyadic::from_int(8));
            prev = v;
        }
        assert_eq!(staged.lower(&w, 60).unwrap(), &Dyadic::from_int(8) - &Dyadic::pow2(-60));
    }

    #[test]
    fn out_of_order_queries_checked_both_ways() {
        let staged = StagedGale::new(TableStages::new(doubling_table(3), StageSchedule::Relative));
        let w: BinaryString = "00".parse().unwrap();
        let late = staged.lower(&w, 5).unwrap();
        let early = staged.lower(&w, 0).unwrap();
        assert!(early <= late);
    }

    #[test]
    fn decreasing_oracle_rejected() {
        let staged = StagedGale::new(FnOracle::new("decreasing", |_, r| {
            Dyadic::pow2(-(r as i64))
        }));
        let w = BinaryString::empty();
        staged.lower(&w, 0).unwrap();
        assert!(matches!(
            staged.lower(&w, 1),
            Err(Error::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn negative_stage_rejected() {
        let staged = StagedGale::new(FnOracle::new("negative", |_, _| Dyadic::from_int(-1)));
        assert!(matches!(
            staged.lower(&BinaryString::empty(), 0),
            Err(Error::NegativePayoff(_))
        ));
    }
}
