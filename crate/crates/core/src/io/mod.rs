//! Line-based text formats for measures, gales, conversion plans and bit
//! streams. Every writer's output parses back to an identical value.
//!
//! Blank lines and text after `#` are ignored. Dyadics are written
//! `m*2^e`, exponents `a/2^k`, intervals `[lo,hi]`, and λ as `-`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::construct::ConversionPlan;
use crate::error::{Error, Result};
use crate::gales::{ClosedGale, GaleTable, Strictness};
use crate::measures::{BalanceCertificate, BinaryString, MarkovTable, Measure, NodeTable};
use crate::numerics::{DyadicExponent, DyadicInterval};

/// Non-empty lines with comments stripped, paired with 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(j, line)| {
        let line = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line.split_whitespace().collect();
        (!fields.is_empty()).then_some((j + 1, fields))
    })
}

fn field<T: FromStr>(line: usize, text: &str, what: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {text:?}")))
}

fn arity(line: usize, fields: &[&str], n: usize) -> Result<()> {
    if fields.len() == n {
        Ok(())
    } else {
        Err(Error::parse(
            line,
            format!("expected {n} fields, found {}", fields.len()),
        ))
    }
}

/// A point interval is written as its dyadic; anything else as `[lo,hi]`.
fn interval_text(v: &DyadicInterval) -> String {
    if v.is_point() {
        v.lo().to_string()
    } else {
        v.to_string()
    }
}

pub fn parse_measure(text: &str) -> Result<Measure> {
    let mut lines = content_lines(text);
    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing `measure <kind>` header"))?;
    if header.len() != 2 || header[0] != "measure" {
        return Err(Error::parse(n, "expected `measure <kind>`"));
    }
    match header[1] {
        "uniform" => {
            if let Some((n, _)) = lines.next() {
                return Err(Error::parse(n, "uniform measure takes no entries"));
            }
            Ok(Measure::Uniform)
        }
        "bernoulli" => {
            let (n, f) = lines
                .next()
                .ok_or_else(|| Error::parse(n, "missing `p <dyadic>` line"))?;
            arity(n, &f, 2)?;
            if f[0] != "p" {
                return Err(Error::parse(n, "expected `p <dyadic>`"));
            }
            let p: DyadicInterval = field(n, f[1], "probability")?;
            if p.lo().is_negative() || p.hi() > &crate::numerics::Dyadic::one() {
                return Err(Error::parse(n, format!("probability {p} outside [0,1]")));
            }
            if let Some((n, _)) = lines.next() {
                return Err(Error::parse(n, "unexpected line after `p`"));
            }
            Ok(Measure::Bernoulli { p })
        }
        "markov" => {
            let mut probs: [[Option<DyadicInterval>; 2]; 3] = Default::default();
            for (n, f) in lines {
                arity(n, &f, 3)?;
                let state = match f[0] {
                    "-" => 0,
                    "0" => 1,
                    "1" => 2,
                    other => return Err(Error::parse(n, format!("invalid state {other:?}"))),
                };
                let bit = match f[1] {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(Error::parse(n, format!("invalid bit {other:?}"))),
                };
                if probs[state][bit].is_some() {
                    return Err(Error::parse(n, "duplicate transition"));
                }
                probs[state][bit] = Some(field(n, f[2], "probability")?);
            }
            let missing = || Error::parse(text.lines().count().max(1), "markov measure needs all six transitions");
            let take = |s: usize, b: usize| probs[s][b].clone().ok_or_else(missing);
            Ok(Measure::Markov(MarkovTable {
                probs: [
                    [take(0, 0)?, take(0, 1)?],
                    [take(1, 0)?, take(1, 1)?],
                    [take(2, 0)?, take(2, 1)?],
                ],
            }))
        }
        "nodetable" | "table" => {
            let mut values = BTreeMap::new();
            let mut last = n;
            for (n, f) in lines {
                arity(n, &f, 2)?;
                let w: BinaryString = field(n, f[0], "string")?;
                if values.insert(w, field(n, f[1], "interval")?).is_some() {
                    return Err(Error::parse(n, format!("duplicate node {}", f[0])));
                }
                last = n;
            }
            NodeTable::new(values)
                .map(Measure::NodeTable)
                .map_err(|e| Error::parse(last, e.to_string()))
        }
        other => Err(Error::parse(n, format!("unknown measure kind {other:?}"))),
    }
}

pub fn write_measure(nu: &Measure) -> String {
    let mut out = format!("measure {}\n", nu.kind_name());
    match nu {
        Measure::Uniform => {}
        Measure::Bernoulli { p } => writeln!(out, "p {}", interval_text(p)).unwrap(),
        Measure::Markov(t) => {
            for (state, name) in ["-", "0", "1"].iter().enumerate() {
                for bit in 0..2 {
                    writeln!(out, "{name} {bit} {}", interval_text(&t.probs[state][bit])).unwrap();
                }
            }
        }
        Measure::NodeTable(t) => {
            for (w, v) in t.values() {
                writeln!(out, "{w} {}", interval_text(v)).unwrap();
            }
        }
    }
    out
}

/// Where a gale file's measure comes from: `uniform`, or a measure file
/// path relative to the gale file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureRef {
    Uniform,
    Path(String),
}

impl std::fmt::Display for MeasureRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasureRef::Uniform => f.write_str("uniform"),
            MeasureRef::Path(p) => f.write_str(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GaleBody {
    Table(GaleTable),
    Closed(ClosedGale),
}

/// The contents of a gale file.
///
/// Header `gale <s> <Gale|Supergale> measure=<ref> [closed=<name>]`, then
/// for tables one `<w> <interval>` line per node, each optionally followed
/// by `budget <interval>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaleFile {
    pub s: DyadicExponent,
    pub strictness: Strictness,
    pub measure: MeasureRef,
    pub body: GaleBody,
}

pub fn parse_gale(text: &str) -> Result<GaleFile> {
    let mut lines = content_lines(text);
    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing `gale` header"))?;
    if header.len() < 4 || header.len() > 5 || header[0] != "gale" {
        return Err(Error::parse(
            n,
            "expected `gale <s> <Gale|Supergale> measure=<ref> [closed=<name>]`",
        ));
    }
    let s: DyadicExponent = field(n, header[1], "exponent")?;
    let strictness: Strictness = field(n, header[2], "strictness")?;
    let measure = match header[3].strip_prefix("measure=") {
        Some("uniform") => MeasureRef::Uniform,
        Some(p) if !p.is_empty() => MeasureRef::Path(p.to_string()),
        _ => return Err(Error::parse(n, "expected `measure=<ref>`")),
    };
    let closed = match header.get(4) {
        None => None,
        Some(t) => match t.strip_prefix("closed=") {
            Some(name) => Some(
                name.parse::<ClosedGale>()
                    .map_err(|e| Error::parse(n, e.to_string()))?,
            ),
            None => return Err(Error::parse(n, "expected `closed=<name>`")),
        },
    };
    let body = match closed {
        Some(c) => {
            if let Some((n, _)) = lines.next() {
                return Err(Error::parse(n, "closed gales take no table lines"));
            }
            GaleBody::Closed(c)
        }
        None => {
            let mut values = BTreeMap::new();
            let mut budgets = BTreeMap::new();
            let mut prev: Option<BinaryString> = None;
            let mut last = n;
            for (n, f) in lines {
                arity(n, &f, 2)?;
                last = n;
                if f[0] == "budget" {
                    let w = prev
                        .take()
                        .ok_or_else(|| Error::parse(n, "`budget` must follow a node line"))?;
                    budgets.insert(w, field(n, f[1], "interval")?);
                    continue;
                }
                let w: BinaryString = field(n, f[0], "string")?;
                let v: DyadicInterval = field(n, f[1], "interval")?;
                if values.insert(w.clone(), v).is_some() {
                    return Err(Error::parse(n, format!("duplicate node {w}")));
                }
                prev = Some(w);
            }
            let table = GaleTable::new(values)
                .and_then(|t| t.with_budgets(budgets))
                .map_err(|e| Error::parse(last, e.to_string()))?;
            GaleBody::Table(table)
        }
    };
    Ok(GaleFile {
        s,
        strictness,
        measure,
        body,
    })
}

pub fn write_gale(g: &GaleFile) -> String {
    let mut out = format!("gale {} {} measure={}", g.s, g.strictness, g.measure);
    match &g.body {
        GaleBody::Closed(c) => writeln!(out, " closed={c}").unwrap(),
        GaleBody::Table(t) => {
            out.push('\n');
            for (w, v) in t.values() {
                writeln!(out, "{w} {}", interval_text(v)).unwrap();
                if let Some(b) = t.budgets().get(w) {
                    writeln!(out, "budget {}", interval_text(b)).unwrap();
                }
            }
        }
    }
    out
}

pub fn parse_plan(text: &str) -> Result<ConversionPlan> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (n, f) in content_lines(text) {
        arity(n, &f, 2)?;
        const KEYS: [&str; 7] = ["s", "sprime", "alpha", "C", "max_index", "max_depth", "precision"];
        if !KEYS.contains(&f[0]) {
            return Err(Error::parse(n, format!("unknown key {:?}", f[0])));
        }
        if entries.insert(f[0], (n, f[1])).is_some() {
            return Err(Error::parse(n, format!("duplicate key {:?}", f[0])));
        }
    }
    let end = text.lines().count().max(1);
    let get = |key: &str| {
        entries
            .get(key)
            .copied()
            .ok_or_else(|| Error::parse(end, format!("missing key {key:?}")))
    };
    let (n, v) = get("s")?;
    let s = field(n, v, "exponent")?;
    let (n, v) = get("sprime")?;
    let s_prime = field(n, v, "exponent")?;
    let (na, v) = get("alpha")?;
    let alpha: DyadicInterval = field(na, v, "dyadic")?;
    let (nc, v) = get("C")?;
    let cap_c: DyadicInterval = field(nc, v, "dyadic")?;
    if !cap_c.lo().is_positive() {
        return Err(Error::parse(nc, format!("C {cap_c} must be positive")));
    }
    let cert = BalanceCertificate::new(alpha, cap_c).map_err(|e| Error::parse(na, e.to_string()))?;
    let (n, v) = get("max_index")?;
    let max_index = field(n, v, "index")?;
    let (n, v) = get("max_depth")?;
    let max_depth = field(n, v, "depth")?;
    let (n, v) = get("precision")?;
    let precision = field(n, v, "precision")?;
    Ok(ConversionPlan {
        s,
        s_prime,
        cert,
        max_index,
        max_depth,
        precision,
    })
}

pub fn write_plan(plan: &ConversionPlan) -> String {
    format!(
        "s {}\nsprime {}\nalpha {}\nC {}\nmax_index {}\nmax_depth {}\nprecision {}\n",
        plan.s,
        plan.s_prime,
        interval_text(&plan.cert.alpha),
        interval_text(&plan.cert.cap_c),
        plan.max_index,
        plan.max_depth,
        plan.precision
    )
}

/// ASCII `0`/`1` characters; whitespace is ignored.
pub fn parse_bits(text: &str) -> Result<BinaryString> {
    let mut bits = Vec::new();
    for (j, line) in text.lines().enumerate() {
        for c in line.chars().filter(|c| !c.is_whitespace()) {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => {
                    return Err(Error::parse(j + 1, format!("invalid bit character {other:?}")))
                }
            }
        }
    }
    Ok(BinaryString::from_bits(bits))
}

/// Raw bytes, most significant bit of each byte first.
pub fn bits_from_bytes(bytes: &[u8]) -> BinaryString {
    BinaryString::from_bits(
        bytes
            .iter()
            .flat_map(|&byte| (0..8).rev().map(move |k| (byte >> k) & 1)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::fixtures;
    use crate::numerics::Dyadic;
    use proptest::prelude::*;

    #[test]
    fn measure_files_round_trip() {
        for nu in [
            Measure::Uniform,
            fixtures::bernoulli_quarter(),
            Measure::Bernoulli {
                p: fixtures::third_enclosure(40),
            },
            fixtures::sticky_markov(),
            fixtures::harmonic_decay(4, 32),
        ] {
            let text = write_measure(&nu);
            assert_eq!(parse_measure(&text).unwrap(), nu, "{text}");
        }
    }

    #[test]
    fn measure_parse_errors_name_lines() {
        let err = parse_measure("measure bernoulli\n# comment\np 1*2^x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(matches!(
            parse_measure("measure nodetable\n- 1\n0 [1*2^-1,1*2^-1]\n").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(parse_measure("").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(parse_measure("measure fractal").unwrap_err(), Error::Parse { line: 1, .. }));
    }

    #[test]
    fn gale_files_round_trip() {
        let table = ClosedGale::SpineDoubling
            .tabulate(&Measure::Uniform, DyadicExponent::integer(1), 3, 64)
            .unwrap();
        let budgets = [(BinaryString::empty(), DyadicInterval::pow2(-4))]
            .into_iter()
            .collect();
        let files = [
            GaleFile {
                s: DyadicExponent::integer(1),
                strictness: Strictness::Gale,
                measure: MeasureRef::Uniform,
                body: GaleBody::Table(table.clone().with_budgets(budgets).unwrap()),
            },
            GaleFile {
                s: DyadicExponent::new(3, 2),
                strictness: Strictness::Supergale,
                measure: MeasureRef::Path("quarter.measure".into()),
                body: GaleBody::Closed(ClosedGale::Constant(Dyadic::new(3, -1))),
            },
        ];
        for g in files {
            let text = write_gale(&g);
            assert_eq!(parse_gale(&text).unwrap(), g, "{text}");
        }
    }

    #[test]
    fn gale_parse_errors() {
        let bad = "gale 1 Gale measure=uniform\n- 1\n0 2*2^\n1 0\n";
        assert!(matches!(parse_gale(bad).unwrap_err(), Error::Parse { line: 3, .. }));
        let orphan = "gale 1 Gale measure=uniform\nbudget 1\n";
        assert!(matches!(parse_gale(orphan).unwrap_err(), Error::Parse { line: 2, .. }));
        assert!(parse_gale("gale 1 Martingale measure=uniform\n- 1\n").is_err());
    }

    #[test]
    fn plan_round_trip_and_errors() {
        let plan = ConversionPlan::new(
            DyadicExponent::integer(1),
            DyadicExponent::new(3, 1),
            BalanceCertificate::uniform(),
            8,
            12,
            64,
        )
        .unwrap();
        assert_eq!(parse_plan(&write_plan(&plan)).unwrap(), plan);
        let missing = "s 1\nsprime 3/2^1\n";
        assert!(matches!(parse_plan(missing).unwrap_err(), Error::Parse { .. }));
        let bad_alpha = write_plan(&plan).replace("alpha 1*2^-1", "alpha 1");
        assert!(matches!(parse_plan(&bad_alpha).unwrap_err(), Error::Parse { line: 3, .. }));
    }

    #[test]
    fn bit_streams() {
        assert_eq!(parse_bits("01 1\n0\n").unwrap(), "0110".parse().unwrap());
        assert!(matches!(parse_bits("01\n0a").unwrap_err(), Error::Parse { line: 2, .. }));
        assert_eq!(bits_from_bytes(&[0b1000_0001]), "10000001".parse().unwrap());
        assert_eq!(bits_from_bytes(&[]), BinaryString::empty());
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (any::<i64>(), -80i64..80).prop_map(|(m, e)| Dyadic::new(m, e))
    }

    fn arb_interval() -> impl Strategy<Value = DyadicInterval> {
        (arb_dyadic(), arb_dyadic()).prop_map(|(a, b)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            DyadicInterval::new(lo.abs().min(hi.abs()), lo.abs().max(hi.abs())).unwrap()
        })
    }

    proptest! {
        #[test]
        fn node_tables_round_trip(depth in 0usize..4, seed in prop::collection::vec(arb_interval(), 15)) {
            let values: BTreeMap<_, _> = BinaryString::up_to(depth)
                .zip(seed.iter().cycle().cloned())
                .collect();
            let nu = Measure::NodeTable(NodeTable::new(values.clone()).unwrap());
            prop_assert_eq!(parse_measure(&write_measure(&nu)).unwrap(), nu);
            let mut table = GaleTable::new(values).unwrap();
            let budgets = table.values().iter().step_by(2).map(|(w, v)| (w.clone(), v.clone())).collect();
            table = table.with_budgets(budgets).unwrap();
            let g = GaleFile {
                s: DyadicExponent::new(5, 2),
                strictness: Strictness::Supergale,
                measure: MeasureRef::Uniform,
                body: GaleBody::Table(table),
            };
            prop_assert_eq!(parse_gale(&write_gale(&g)).unwrap(), g);
        }

        #[test]
        fn plans_round_trip(a in 1i64..(1 << 16), k in 0u32..20, c in arb_dyadic(), i in 0u32..20, depth in 0usize..20, sp in 1i64..64) {
            let alpha = DyadicInterval::point(Dyadic::new(a, -17));
            let cap = DyadicInterval::point(c.abs().max(Dyadic::pow2(-3)));
            let cert = BalanceCertificate::new(alpha, cap).unwrap();
            let plan = ConversionPlan {
                s: DyadicExponent::new(1, k),
                s_prime: DyadicExponent::new(sp, k),
                cert,
                max_index: i,
                max_depth: depth,
                precision: 64,
            };
            prop_assert_eq!(parse_plan(&write_plan(&plan)).unwrap(), plan);
        }

        #[test]
        fn raw_bytes_match_ascii(bytes in prop::collection::vec(any::<u8>(), 0..16)) {
            let ascii: String = bytes.iter().map(|b| format!("{b:08b}")).collect();
            prop_assert_eq!(bits_from_bytes(&bytes), parse_bits(&ascii).unwrap());
        }
    }
}
