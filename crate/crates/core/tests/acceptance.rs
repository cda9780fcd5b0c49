//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use clap::Parser;
use galekit::cli::{run, RunConfig};
use galekit::construct::{
    build_dprime, build_dprime_uniform, partition_prefix_sets, verify_dut_is_gale, BuildOptions,
    ConversionPlan, DutEvaluator, StringSet, Truncation,
};
use galekit::gales::{
    verify_gale, ClosedGale, GaleSpec, StageSchedule, StagedGale, Strictness, TableStages,
};
use galekit::measures::{check_balance, fixtures, BalanceCertificate, BinaryString, Measure};
use galekit::numerics::{Dyadic, DyadicExponent, DyadicInterval, Rounding};
use galekit::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dut_uniform_oracle, encloses_tightly, random_set, root_of_two, RootSum};

const PREC: u32 = 64;

type Outcome = Result<String, String>;

fn exp(a: i64, k: u32) -> DyadicExponent {
    DyadicExponent::new(a, k)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spine_source() -> GaleSpec {
    let mut g = GaleSpec::closed(Measure::Uniform, DyadicExponent::integer(1), ClosedGale::SpineDoubling);
    g.strictness = Strictness::Supergale;
    g
}

fn plan(s_prime: DyadicExponent, max_index: u32, max_depth: usize) -> ConversionPlan {
    ConversionPlan::new(
        DyadicExponent::integer(1),
        s_prime,
        BalanceCertificate::uniform(),
        max_index,
        max_depth,
        PREC,
    )
    .expect("valid plan")
}

/// Upper bound on `1 / (1 - 2^{-1/2})` from an integer square root.
fn geometric_constant() -> Dyadic {
    // 2^{-1/2} = √2/2 ≤ hi/2, so 1 - hi/2 bounds the denominator below.
    let (_, hi) = root_of_two(1, 1);
    let denom_lo = &Dyadic::one() - &hi.shl(-1);
    Dyadic::one().div_round(&denom_lo, 200, Rounding::Up)
}

fn gale_law_suite() -> Outcome {
    let start = Instant::now();
    let measures = [Measure::Uniform, fixtures::bernoulli_quarter()];
    let exponents = [exp(1, 2), exp(1, 1), exp(3, 2), exp(1, 0), exp(3, 1)];
    let (mut nodes, mut fails, mut inconclusive) = (0, 0, 0);
    for nu in &measures {
        for &s in &exponents {
            for g in ClosedGale::builtins() {
                let spec = GaleSpec::closed(nu.clone(), s, g.clone());
                let report = verify_gale(&spec, 12, PREC).map_err(|e| format!("{g} s={s}: {e}"))?;
                nodes += report.nodes();
                fails += report.fails;
                inconclusive += report.inconclusive;
                ensure(report.fails == 0, || {
                    format!("{g} under {} s={s}: {} certain violations", nu.kind_name(), report.fails)
                })?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{nodes} nodes, {fails} fail, {inconclusive} inconclusive, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

struct Case {
    u: StringSet,
    t: DyadicExponent,
}

fn corpus() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let ts = [exp(1, 1), exp(1, 0), exp(5, 2)];
    let mut out = Vec::new();
    for _ in 0..240 {
        let u = random_set(&mut rng, 5, 6);
        let t = ts[rng.gen_range(0..ts.len())];
        out.push(Case { u, t });
    }
    for t in ts {
        out.push(Case {
            u: [BinaryString::empty()].into_iter().collect(),
            t,
        });
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let cases = corpus();
    let mut checked = 0usize;
    let mut exact_points = 0usize;
    for case in &cases {
        let ev = DutEvaluator::new(&case.u, case.t, &Measure::Uniform, PREC).map_err(|e| e.to_string())?;
        for w in BinaryString::up_to(8) {
            let oracle = dut_uniform_oracle(&case.u, case.t, &w);
            let general = ev.eval(&w, &Truncation::Exact).map_err(|e| e.to_string())?;
            let uniform = galekit::construct::eval_dut_uniform(&case.u, case.t, &w, PREC)
                .map_err(|e| e.to_string())?;
            for (name, v) in [("general", &general), ("uniform", &uniform)] {
                match oracle.exact() {
                    Some(x) => {
                        ensure(v.is_point() && v.lo() == &x, || {
                            format!("{name} U={} t={} w={w}: {v} != {x}", case.u, case.t)
                        })?;
                        exact_points += 1;
                    }
                    None => ensure(encloses_tightly(v, &oracle.bracket(), PREC as i64 - 8), || {
                        format!("{name} U={} t={} w={w}: {v} vs {:?}", case.u, case.t, oracle.bracket())
                    })?,
                }
            }
            checked += 1;
        }
        let report = verify_dut_is_gale(&case.u, case.t, &Measure::Uniform, 8, PREC)
            .map_err(|e| e.to_string())?;
        ensure(report.gale.passed(), || format!("U={} t={}: {}", case.u, case.t, report.gale))?;
    }
    Ok(format!(
        "{} sets, {checked} nodes, {exact_points} exact point matches",
        cases.len()
    ))
}

fn partition_identity() -> Outcome {
    let cases = corpus();
    let mut nodes = 0usize;
    for case in &cases {
        let parts = partition_prefix_sets(&case.u);
        let mut union = StringSet::new();
        for v in &parts {
            ensure(v.is_prefix_set(), || format!("{v} is not a prefix set"))?;
            for m in v.iter() {
                ensure(union.insert(m.clone()), || format!("{m} in two parts"))?;
            }
        }
        ensure(union == case.u, || format!("parts of {} do not cover it", case.u))?;
        let whole = DutEvaluator::new(&case.u, case.t, &Measure::Uniform, PREC).map_err(|e| e.to_string())?;
        let evs = parts
            .iter()
            .map(|v| DutEvaluator::new(v, case.t, &Measure::Uniform, PREC))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        for w in BinaryString::up_to(8) {
            let d = whole.eval(&w, &Truncation::Exact).map_err(|e| e.to_string())?;
            let mut sum = DyadicInterval::zero();
            let mut oracle = RootSum::new(case.t.log2_denominator());
            for (v, ev) in parts.iter().zip(&evs) {
                sum = sum.add(&ev.eval(&w, &Truncation::Exact).map_err(|e| e.to_string())?, PREC);
                oracle = oracle.plus(&dut_uniform_oracle(v, case.t, &w));
            }
            ensure(oracle == dut_uniform_oracle(&case.u, case.t, &w), || {
                format!("oracle identity fails at U={} w={w}", case.u)
            })?;
            ensure(d.intersects(&sum), || format!("U={} t={} w={w}: {d} vs {sum}", case.u, case.t))?;
            if oracle.exact().is_some() {
                ensure(d.is_point() && d == sum, || format!("U={} w={w}: {d} != {sum}", case.u))?;
            }
            nodes += 1;
        }
    }
    Ok(format!("{} sets, {nodes} nodes", cases.len()))
}

fn well_definedness() -> Outcome {
    let conv = build_dprime(&spine_source(), &plan(exp(3, 1), 8, 12), &BuildOptions::default())
        .map_err(|e| e.to_string())?;
    let g = geometric_constant();
    let budget = conv.total_budget();
    let mut worst = 0f64;
    for part in &conv.parts {
        let bound = g.shl(-(part.i as i64));
        let limit = &bound + &budget;
        ensure(part.root_lower.lo() <= &limit, || {
            format!("i={}: {} exceeds {}", part.i, part.root_lower, limit)
        })?;
        worst = worst.max(part.root_lower.lo().to_f64() / bound.to_f64());
    }
    Ok(format!(
        "i<=8, max lower/bound ratio {worst:.4}, budget {:.3e}",
        budget.to_f64()
    ))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let conv = build_dprime(&spine_source(), &plan(exp(3, 1), 8, 12), &BuildOptions::default())
        .map_err(|e| e.to_string())?;
    let report = conv.verify().map_err(|e| e.to_string())?;
    ensure(report.fails == 0 && report.inconclusive == 0, || {
        format!("verify: {} fail, {} inconclusive", report.fails, report.inconclusive)
    })?;
    let budget = conv.total_budget();
    for i in 0..=4i64 {
        let v = conv.value(&BinaryString::repeat(0, i as usize + 1)).map_err(|e| e.to_string())?;
        let need = &Dyadic::from_int(i) - &budget;
        ensure(v.lo() >= &need, || format!("d'(0^{}) = {v} below {i}", i + 1))?;
    }
    let root = conv.value(&BinaryString::empty()).map_err(|e| e.to_string())?;
    let g = geometric_constant();
    // Σ_{i≥1} i 2^{-i} = 2.
    let full = g.shl(1);
    let partial: Dyadic = (1..=8i64).fold(Dyadic::zero(), |acc, i| {
        &acc + &(&Dyadic::from_int(i) * &g.shl(-i))
    });
    ensure(root.hi() <= &full, || format!("d'(λ) = {root} above 2G = {}", full.to_f64()))?;
    ensure(root.lo() <= &partial, || format!("d'(λ) lower part {root} above Σ_{{i≤8}}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} nodes pass, d'(λ) in [{:.4}, {:.4}] <= 2G = {:.4}, {:.1}s",
        report.passes,
        root.lo().to_f64(),
        root.hi().to_f64(),
        full.to_f64(),
        elapsed.as_secs_f64()
    ))
}

fn uniform_path_equivalence() -> Outcome {
    let p = plan(exp(3, 1), 6, 8);
    let mut sources: Vec<GaleSpec> = ClosedGale::builtins()
        .into_iter()
        .map(|g| {
            let mut spec = GaleSpec::closed(Measure::Uniform, DyadicExponent::integer(1), g);
            spec.strictness = Strictness::Supergale;
            spec
        })
        .collect();
    let table = ClosedGale::SpineDoubling
        .tabulate(&Measure::Uniform, DyadicExponent::integer(1), 8, PREC)
        .map_err(|e| e.to_string())?;
    sources.push(GaleSpec::table(
        Measure::Uniform,
        DyadicExponent::integer(1),
        table,
        Strictness::Supergale,
    ));
    let mut nodes = 0;
    for src in &sources {
        let opts = BuildOptions::default();
        let a = build_dprime(src, &p, &opts).map_err(|e| e.to_string())?;
        let b = build_dprime_uniform(src, &p, &opts).map_err(|e| e.to_string())?;
        for w in BinaryString::up_to(8) {
            let (x, y) = (
                a.value(&w).map_err(|e| e.to_string())?,
                b.value(&w).map_err(|e| e.to_string())?,
            );
            ensure(x.intersects(y), || format!("{w}: {x} vs {y}"))?;
            nodes += 1;
        }
    }
    Ok(format!("{} fixtures, {nodes} nodes intersect", sources.len()))
}

fn constructivity() -> Outcome {
    let table = ClosedGale::SpineDoubling
        .tabulate(&Measure::Uniform, DyadicExponent::integer(1), 10, PREC)
        .map_err(|e| e.to_string())?;
    let staged = StagedGale::new(TableStages::new(table, StageSchedule::Relative));
    let source = GaleSpec::staged(
        Measure::Uniform,
        DyadicExponent::integer(1),
        staged,
        Strictness::Supergale,
    );
    let p = plan(exp(3, 1), 6, 10);
    let mut previous: Option<BTreeMap<BinaryString, DyadicInterval>> = None;
    let mut increases = 0;
    for r in 0..=10u32 {
        let conv = build_dprime(&source, &p, &BuildOptions { stage: Some(r) })
            .map_err(|e| format!("stage {r}: {e}"))?;
        if let Some(prev) = &previous {
            for (w, v) in prev {
                let now = conv.lower.get(w).map(|x| x.lo().clone()).unwrap_or_else(Dyadic::zero);
                ensure(&now >= v.lo(), || format!("stage {r} at {w}: {now} < {}", v.lo()))?;
                if &now > v.lo() {
                    increases += 1;
                }
            }
        }
        previous = Some(conv.lower);
    }
    ensure(increases > 0, || "lower tables never grew".into())?;
    Ok(format!("stages 0..10 nondecreasing, {increases} strict increases"))
}

fn balance_gate() -> Outcome {
    let cert = BalanceCertificate::uniform();
    let report = check_balance(&Measure::Uniform, &cert, 20, PREC);
    ensure(report.passed(), || format!("uniform refused: {report}"))?;
    let config = RunConfig::try_parse_from([
        "galekit",
        "convert",
        "--gale",
        fixture("harmonic.gale").to_str().unwrap(),
        "--plan",
        fixture("harmonic.plan").to_str().unwrap(),
    ])
    .map_err(|e| e.to_string())?;
    match run(&config, &mut Vec::new()) {
        Err(Error::NotWellBalanced(_)) => Ok("uniform (1/2,1) to depth 20; harmonic refused".into()),
        Err(e) => Err(format!("harmonic: unexpected error {e}")),
        Ok(code) => Err(format!("harmonic converted with status {code}")),
    }
}

fn random_interval(rng: &mut ChaCha8Rng, positive: bool) -> DyadicInterval {
    let mut point = || {
        let m: i64 = rng.gen_range(-(1 << 40)..(1 << 40));
        let m = if positive { m.abs() + 1 } else { m };
        Dyadic::new(m, rng.gen_range(-60..=20))
    };
    let (a, b) = (point(), point());
    if a <= b {
        DyadicInterval::new(a, b).unwrap()
    } else {
        DyadicInterval::new(b, a).unwrap()
    }
}

fn pick(rng: &mut ChaCha8Rng, x: &DyadicInterval) -> Dyadic {
    match rng.gen_range(0..3) {
        0 => x.lo().clone(),
        1 => x.hi().clone(),
        _ => (x.lo() + x.hi()).shl(-1),
    }
}

fn numerics_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut probes = 0;
    while probes < 10_000 {
        let prec = rng.gen_range(8..=96);
        let op = rng.gen_range(0..6);
        let x = random_interval(&mut rng, op >= 3);
        let y = random_interval(&mut rng, op == 3);
        let (a, b) = (pick(&mut rng, &x), pick(&mut rng, &y));
        let ok = match op {
            0 => x.add(&y, prec).contains(&(&a + &b)),
            1 => x.sub(&y, prec).contains(&(&a - &b)),
            2 => x.mul(&y, prec).contains(&(&a * &b)),
            3 => {
                // q = a/b lies in [lo,hi] iff lo·b ≤ a ≤ hi·b for b > 0.
                let q = x.div(&y, prec).map_err(|e| e.to_string())?;
                (q.lo() * &b) <= a && a <= (q.hi() * &b)
            }
            4 => {
                let r = x.sqrt(prec).map_err(|e| e.to_string())?;
                r.lo().pow(2) <= a && a <= r.hi().pow(2)
            }
            _ => {
                // y = a^{n/2^k} lies in [lo,hi] iff lo^{2^k} ≤ a^n ≤ hi^{2^k}.
                let k = rng.gen_range(0..=3u32);
                let n = rng.gen_range(-5i64..=5);
                let prec = prec.max(16);
                let r = x.pow(DyadicExponent::new(n, k), prec).map_err(|e| e.to_string())?;
                let lhs = if n >= 0 {
                    (a.pow(n as u32), Dyadic::one())
                } else {
                    (Dyadic::one(), a.pow((-n) as u32))
                };
                let e = 1u32 << k;
                // Compare lo^e · den ≤ num ≤ hi^e · den.
                (&r.lo().pow(e) * &lhs.1) <= lhs.0 && lhs.0 <= (&r.hi().pow(e) * &lhs.1)
            }
        };
        ensure(ok, || format!("op {op} at precision {prec}: x={x} y={y}"))?;
        probes += 1;
    }
    let mut refinements = 0;
    for _ in 0..1_000 {
        let x = random_interval(&mut rng, true);
        let t = DyadicExponent::new(rng.gen_range(-6..=6), rng.gen_range(0..=4));
        let p1 = rng.gen_range(16..=100);
        let p2 = p1 + rng.gen_range(1..=64);
        let coarse = x.pow(t, p1).map_err(|e| e.to_string())?;
        let fine = x.pow(t, p2).map_err(|e| e.to_string())?;
        ensure(fine.width() <= coarse.width(), || {
            format!("pow({x}, {t}) widened from {p1} to {p2} bits")
        })?;
        refinements += 1;
    }
    Ok(format!("{probes} containment probes, {refinements} pow refinements"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_galekit");
    let mut outputs = Vec::new();
    for threads in ["1", "8", "1", "8"] {
        let out = dir.path().join(format!("d{threads}_{}.gale", outputs.len()));
        let result = Command::new(bin)
            .args(["--threads", threads, "convert", "--gale"])
            .arg(fixture("spine.gale"))
            .arg("--plan")
            .arg(fixture("uniform.plan"))
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(result.status.success(), || {
            String::from_utf8_lossy(&result.stderr).into_owned()
        })?;
        let table = std::fs::read(&out).map_err(|e| e.to_string())?;
        outputs.push((result.stdout, table));
    }
    let first = &outputs[0];
    ensure(outputs.iter().all(|o| o == first), || "outputs differ".into())?;
    Ok(format!("4 runs identical, table {} bytes", first.1.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gale-law suite", gale_law_suite),
        ("set-gale oracle equivalence", oracle_equivalence),
        ("partition identity", partition_identity),
        ("well-definedness bound", well_definedness),
        ("end-to-end conversion", end_to_end),
        ("uniform-path equivalence", uniform_path_equivalence),
        ("constructivity across stages", constructivity),
        ("balance gate", balance_gate),
        ("numerics containment fuzz", numerics_fuzz),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2}s]", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
