//! Finite-depth surrogates for success and for dimension.

use std::fmt;

use super::{eval_gale, Capital, ClosedGale, GaleSpec};
use crate::error::{Error, Result};
use crate::measures::{BinaryString, Measure};
use crate::numerics::{Dyadic, DyadicExponent};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdHit {
    pub i: u32,
    /// First prefix whose capital certainly exceeds `2^i`, with that capital.
    pub witness: Option<(BinaryString, Capital)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessTrace {
    pub z: BinaryString,
    /// `(prefix length, d(prefix))` for every prefix evaluated.
    pub records: Vec<(usize, Capital)>,
    pub thresholds: Vec<ThresholdHit>,
    /// Why the walk stopped before the end of `z`, if it did.
    pub stopped: Option<String>,
}

impl SuccessTrace {
    pub fn evaluated_depth(&self) -> Option<usize> {
        self.records.last().map(|(n, _)| *n)
    }

    pub fn witness(&self, i: u32) -> Option<&BinaryString> {
        self.thresholds
            .iter()
            .find(|h| h.i == i)
            .and_then(|h| h.witness.as_ref().map(|(w, _)| w))
    }
}

impl fmt::Display for SuccessTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in &self.records {
            writeln!(f, "prefix {n} d={v}")?;
        }
        for h in &self.thresholds {
            match &h.witness {
                Some((w, v)) => writeln!(f, "threshold 2^{} witness {} d={}", h.i, w, v)?,
                None => writeln!(
                    f,
                    "threshold 2^{} not yet at this depth ({})",
                    h.i,
                    self.evaluated_depth()
                        .map_or("no prefix evaluated".to_string(), |n| format!("depth {n}"))
                )?,
            }
        }
        if let Some(reason) = &self.stopped {
            writeln!(f, "stopped early: {reason}")?;
        }
        Ok(())
    }
}

/// Walks the prefixes of `z` and records the first witness of each
/// threshold `2^i`. A missing witness means only "not yet at this depth".
///
/// The walk stops quietly where the payoff or measure runs out.
pub fn success_trace(
    g: &GaleSpec,
    z: &BinaryString,
    thresholds: &[u32],
    prec: u32,
    stage: Option<u32>,
) -> Result<SuccessTrace> {
    let mut trace = SuccessTrace {
        z: z.clone(),
        records: Vec::new(),
        thresholds: thresholds
            .iter()
            .map(|&i| ThresholdHit { i, witness: None })
            .collect(),
        stopped: None,
    };
    for w in z.prefixes() {
        let value = match eval_gale(g, &w, prec, stage) {
            Ok(v) => v,
            Err(e @ Error::DepthExceeded { .. }) => {
                trace.stopped = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        for hit in trace.thresholds.iter_mut().filter(|h| h.witness.is_none()) {
            if value.lower() > &Dyadic::pow2(hit.i as i64) {
                hit.witness = Some((w.clone(), value.clone()));
            }
        }
        trace.records.push((w.len(), value));
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanRow {
    pub s: DyadicExponent,
    pub witness: Option<BinaryString>,
}

/// Per-exponent outcome of a strategy family along one prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanReport {
    pub strategy: ClosedGale,
    pub threshold: u32,
    pub depth: usize,
    pub rows: Vec<ScanRow>,
}

impl ScanReport {
    /// Smallest grid exponent whose gale reached the threshold.
    pub fn frontier(&self) -> Option<DyadicExponent> {
        self.rows.iter().find(|r| r.witness.is_some()).map(|r| r.s)
    }
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "scan {} threshold 2^{} along {} bits",
            self.strategy, self.threshold, self.depth
        )?;
        for row in &self.rows {
            match &row.witness {
                Some(w) => writeln!(f, "s={} witnessed depth={}", row.s, w.len())?,
                None => writeln!(f, "s={} not witnessed", row.s)?,
            }
        }
        match self.frontier() {
            Some(s) => writeln!(f, "empirical frontier, not dim: {s}"),
            None => writeln!(f, "empirical frontier, not dim: none in grid"),
        }
    }
}

/// Runs the closed-form family `strategy` at every `s` in `grid` and records
/// whether it exceeds `2^threshold` somewhere along `z`.
pub fn dimension_scan(
    strategy: &ClosedGale,
    nu: &Measure,
    z: &BinaryString,
    grid: &[DyadicExponent],
    threshold: u32,
    prec: u32,
) -> Result<ScanReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty s grid".into()));
    }
    if grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidArgument("s grid must be strictly increasing".into()));
    }
    let rows = grid
        .iter()
        .map(|&s| {
            let g = GaleSpec::closed(nu.clone(), s, strategy.clone());
            let trace = success_trace(&g, z, &[threshold], prec, None)?;
            Ok(ScanRow {
                s,
                witness: trace.witness(threshold).cloned(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ScanReport {
        strategy: strategy.clone(),
        threshold,
        depth: z.len(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: i64, k: u32) -> DyadicExponent {
        DyadicExponent::new(a, k)
    }

    fn zeros(n: usize) -> BinaryString {
        BinaryString::repeat(0, n)
    }

    #[test]
    fn doubling_witnesses() {
        let g = GaleSpec::closed(Measure::Uniform, e(1, 0), ClosedGale::SpineDoubling);
        let trace = success_trace(&g, &zeros(20), &[1, 2, 3], 53, None).unwrap();
        for (i, k) in [(1, 2), (2, 3), (3, 4)] {
            assert_eq!(trace.witness(i), Some(&zeros(k)));
        }
        assert_eq!(trace.records.len(), 21);
    }

    #[test]
    fn constant_never_witnesses() {
        let g = GaleSpec::closed(Measure::Uniform, e(1, 0), ClosedGale::Constant(Dyadic::one()));
        let z: BinaryString = "0110100110010110".parse().unwrap();
        let trace = success_trace(&g, &z, &[1], 53, None).unwrap();
        assert_eq!(trace.witness(1), None);
        assert!(trace.to_string().contains("not yet at this depth"));
    }

    #[test]
    fn all_in_half_needs_five_zeros() {
        let g = GaleSpec::closed(Measure::Uniform, e(1, 1), ClosedGale::AllInOnZero);
        let trace = success_trace(&g, &zeros(20), &[2], 53, None).unwrap();
        assert_eq!(trace.witness(2), Some(&zeros(5)));
    }

    #[test]
    fn empty_stream_gives_root_only() {
        let g = GaleSpec::closed(Measure::Uniform, e(1, 0), ClosedGale::SpineDoubling);
        let trace = success_trace(&g, &BinaryString::empty(), &[1], 53, None).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.witness(1), None);
    }

    #[test]
    fn scan_all_in_succeeds_everywhere_on_zeros() {
        let grid = [e(1, 2), e(1, 1), e(1, 0)];
        let report =
            dimension_scan(&ClosedGale::AllInOnZero, &Measure::Uniform, &zeros(40), &grid, 4, 53)
                .unwrap();
        assert!(report.rows.iter().all(|r| r.witness.is_some()));
        assert_eq!(report.frontier(), Some(e(1, 2)));
        assert!(report.to_string().contains("empirical frontier, not dim"));
    }

    #[test]
    fn scan_failures() {
        let grid = [e(1, 2), e(1, 1), e(3, 2), e(1, 0)];
        let alternating = BinaryString::from_bits((0..40).map(|i| (i % 2) as u8));
        for strategy in [ClosedGale::AllInOnZero, ClosedGale::SpineDoubling] {
            let report =
                dimension_scan(&strategy, &Measure::Uniform, &alternating, &grid, 1, 53).unwrap();
            assert_eq!(report.frontier(), None);
        }
        let report = dimension_scan(
            &ClosedGale::Constant(Dyadic::one()),
            &Measure::Uniform,
            &zeros(30),
            &[e(1, 0)],
            1,
            53,
        )
        .unwrap();
        assert_eq!(report.frontier(), None);
        assert!(dimension_scan(&ClosedGale::AllInOnZero, &Measure::Uniform, &zeros(4), &[], 1, 53).is_err());
        assert!(dimension_scan(
            &ClosedGale::AllInOnZero,
            &Measure::Uniform,
            &zeros(4),
            &[e(1, 0), e(1, 1)],
            1,
            53
        )
        .is_err());
    }
}
