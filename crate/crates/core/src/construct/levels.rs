use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use super::StringSet;
use crate::error::Result;
use crate::gales::{eval_gale, Capital, GaleSpec};
use crate::measures::BinaryString;
use crate::numerics::{Dyadic, DyadicInterval};

/// Evidence about `U_i = {w : d(w) > 2^i}` up to a fixed depth.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelSet {
    /// Strings whose lower bound exceeds `2^i`.
    pub certain: StringSet,
    /// Strings that may be members but are not certified: their enclosure
    /// straddles `2^i`, or only a lower bound is known.
    pub possible: StringSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSetFamily {
    pub depth: usize,
    pub stage: Option<u32>,
    pub sets: BTreeMap<u32, LevelSet>,
}

impl LevelSetFamily {
    /// Certified members of `U_i`; empty for indices not enumerated.
    pub fn members(&self, i: u32) -> StringSet {
        self.sets
            .get(&i)
            .map(|s| s.certain.clone())
            .unwrap_or_default()
    }
}

impl fmt::Display for LevelSetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, set) in &self.sets {
            writeln!(
                f,
                "U_{} to depth {}: {} certain, {} uncertain",
                i,
                self.depth,
                set.certain.len(),
                set.possible.len()
            )?;
        }
        Ok(())
    }
}

/// Classifies every `|w| ≤ depth` against each threshold `2^i`, after
/// multiplying `d` by `scale` when given.
pub(crate) fn enumerate_scaled(
    d: &GaleSpec,
    indices: &[u32],
    depth: usize,
    prec: u32,
    stage: Option<u32>,
    scale: Option<&Dyadic>,
) -> Result<LevelSetFamily> {
    let words: Vec<BinaryString> = BinaryString::up_to(depth).collect();
    let values: Vec<Result<Capital>> = words
        .par_iter()
        .map(|w| {
            let v = eval_gale(d, w, prec, stage)?;
            Ok(match scale {
                Some(f) => v.scale(&DyadicInterval::point(f.clone()), prec),
                None => v,
            })
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let mut sets = BTreeMap::new();
    for &i in indices {
        let threshold = Dyadic::pow2(i as i64);
        let mut set = LevelSet::default();
        for (w, v) in words.iter().zip(&values) {
            if v.lower() > &threshold {
                set.certain.insert(w.clone());
            } else if v.upper().is_none_or(|hi| hi > &threshold) {
                set.possible.insert(w.clone());
            }
        }
        sets.insert(i, set);
    }
    Ok(LevelSetFamily {
        depth,
        stage,
        sets,
    })
}

/// Enumerates `U_i = {w : d(w) > 2^i}` for `|w| ≤ depth`.
///
/// Only strings with `d(w).lo > 2^i` (or stage value above `2^i`) are
/// certified members; for a staged source the certified sets only grow
/// with the stage.
pub fn enumerate_level_sets(
    d: &GaleSpec,
    indices: &[u32],
    depth: usize,
    prec: u32,
    stage: Option<u32>,
) -> Result<LevelSetFamily> {
    enumerate_scaled(d, indices, depth, prec, stage, None)
}
