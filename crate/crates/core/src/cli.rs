//! The `galekit` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::construct::{
    build_dprime, build_dprime_uniform, eval_dut, BuildOptions, StringSet, Truncation,
};
use crate::error::{Error, Result};
use crate::gales::{
    dimension_scan, eval_gale, success_trace, verify_gale_with, ClosedGale, GaleSpec, Payoff,
    VerifyOptions,
};
use crate::io::{
    bits_from_bytes, parse_bits, parse_gale, parse_measure, parse_plan, write_gale, GaleBody,
    GaleFile, MeasureRef,
};
use crate::measures::{
    check_balance, suggest_balance, verify_measure, weak_balance_trace, BalanceCertificate,
    BinaryString, Measure,
};
use crate::numerics::{Dyadic, DyadicExponent, DyadicInterval};

/// Default hard cap on exhaustive tree depth.
pub const DEPTH_CAP: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "galekit", version, about = "Gales, supergales and their conversion, with rigorous enclosures")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Significant bits carried by interval arithmetic (at least 8).
    #[arg(long, global = true, default_value_t = 64)]
    pub precision: u32,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Allow exhaustive depths above the cap.
    #[arg(long, global = true)]
    pub allow_deep: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the gale inequality node by node, or a measure's additivity.
    Verify(VerifyArgs),
    /// Convert a supergale into a gale with a larger exponent.
    Convert(ConvertArgs),
    /// Record threshold witnesses of a gale along a bit stream.
    Trace(TraceArgs),
    /// Find and check balance constants for a measure.
    Balance(BalanceArgs),
    /// Scan a closed-form strategy over a grid of exponents.
    Scan(ScanArgs),
    /// Evaluate a gale or a set gale at one string.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub gale: Option<PathBuf>,
    /// Check this measure instead of a gale.
    #[arg(long, conflicts_with = "gale")]
    pub measure: Option<PathBuf>,
    /// Nodes with `|w| < depth` are checked; defaults to the table depth.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub stage: Option<u32>,
    /// Print only FAIL and INCONCLUSIVE records.
    #[arg(long)]
    pub failures_only: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub gale: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub stage: Option<u32>,
    /// Use the uniform-measure closed form instead of the general path.
    #[arg(long)]
    pub uniform_path: bool,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// File of ASCII `0`/`1`, or raw bytes with `--raw`.
    #[arg(long, conflicts_with = "bits")]
    pub stream: Option<PathBuf>,
    /// Read `--stream` as raw bytes, most significant bit first.
    #[arg(long, requires = "stream")]
    pub raw: bool,
    /// Bits given inline.
    #[arg(long)]
    pub bits: Option<String>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub gale: PathBuf,
    #[command(flatten)]
    pub input: StreamArgs,
    /// Threshold exponents `i` for `2^i`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub thresholds: Vec<u32>,
    #[arg(long)]
    pub stage: Option<u32>,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
    /// Check these constants instead of suggesting them.
    #[arg(long, requires = "cap_c")]
    pub alpha: Option<DyadicInterval>,
    #[arg(long = "C", requires = "alpha")]
    pub cap_c: Option<DyadicInterval>,
    /// Also trace `2^{ε|w|}ν(w)` for this ε.
    #[arg(long)]
    pub epsilon: Option<DyadicExponent>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// constant, constant:<c>, uniform-scaling, all-in-on-0 or spine-doubling.
    #[arg(long)]
    pub strategy: String,
    #[arg(long)]
    pub measure: Option<PathBuf>,
    #[command(flatten)]
    pub input: StreamArgs,
    /// Strictly increasing exponents, e.g. `1/2^2,1/2^1,1`.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub grid: Vec<DyadicExponent>,
    #[arg(long)]
    pub threshold: u32,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, conflicts_with = "set")]
    pub gale: Option<PathBuf>,
    /// Members of `U`, comma separated, for `d_U^t`.
    #[arg(long, value_delimiter = ',', requires = "t")]
    pub set: Option<Vec<BinaryString>>,
    #[arg(long)]
    pub t: Option<DyadicExponent>,
    #[arg(long)]
    pub measure: Option<PathBuf>,
    #[arg(long)]
    pub word: BinaryString,
    #[arg(long)]
    pub stage: Option<u32>,
}

/// Exit status: 0 when nothing certainly fails, 1 on a certain violation,
/// 2 on usage or input errors.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotWellBalanced(_)
        | Error::NotASupergale(_)
        | Error::RootUnbounded(_)
        | Error::MonotonicityViolation { .. }
        | Error::NegativePayoff(_) => 1,
        _ => 2,
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        e => e,
    }
}

fn load_measure(path: &Path) -> Result<Measure> {
    parse_measure(&read_text(path)?).map_err(|e| with_path(path, e))
}

fn resolve_measure(gale_path: &Path, r: &MeasureRef) -> Result<Measure> {
    match r {
        MeasureRef::Uniform => Ok(Measure::Uniform),
        MeasureRef::Path(p) => {
            let base = gale_path.parent().unwrap_or_else(|| Path::new(""));
            load_measure(&base.join(p))
        }
    }
}

fn load_gale(path: &Path) -> Result<(GaleFile, GaleSpec)> {
    let file = parse_gale(&read_text(path)?).map_err(|e| with_path(path, e))?;
    let nu = resolve_measure(path, &file.measure)?;
    let payoff = match &file.body {
        GaleBody::Table(t) => Payoff::Table(t.clone()),
        GaleBody::Closed(c) => Payoff::Closed(c.clone()),
    };
    let spec = GaleSpec {
        nu,
        s: file.s,
        payoff,
        strictness: file.strictness,
    };
    Ok((file, spec))
}

fn load_stream(args: &StreamArgs) -> Result<BinaryString> {
    match (&args.stream, &args.bits) {
        (Some(path), _) if args.raw => {
            let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Ok(bits_from_bytes(&bytes))
        }
        (Some(path), _) => parse_bits(&read_text(path)?).map_err(|e| with_path(path, e)),
        (None, Some(bits)) => parse_bits(bits),
        (None, None) => Err(Error::InvalidArgument(
            "give a bit stream with --stream or --bits".into(),
        )),
    }
}

impl RunConfig {
    fn check_depth(&self, depth: usize) -> Result<()> {
        if depth > DEPTH_CAP && !self.allow_deep {
            return Err(Error::DepthCap {
                depth,
                cap: DEPTH_CAP,
            });
        }
        Ok(())
    }
}

/// Widest node enclosure accepted when checking a table that carries
/// truncation budgets: twice the root budget plus a rounding allowance.
fn budget_width(spec: &GaleSpec, prec: u32) -> Option<Dyadic> {
    let Payoff::Table(t) = &spec.payoff else {
        return None;
    };
    let root = t.budgets().get(&BinaryString::empty())?.hi().clone();
    let slack = Dyadic::pow2(-(prec as i64) / 2);
    Some(&root.shl(1) + &(&slack * &(&Dyadic::one() + &root)))
}

/// Runs one command, writing its report to `out`. Returns the exit status.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let prec = config.precision;
    if prec < 8 {
        return Err(Error::InvalidPrecision(prec));
    }
    match &config.command {
        Command::Verify(args) => cmd_verify(config, args, out),
        Command::Convert(args) => cmd_convert(config, args, out),
        Command::Trace(args) => cmd_trace(config, args, out),
        Command::Balance(args) => cmd_balance(config, args, out),
        Command::Scan(args) => cmd_scan(config, args, out),
        Command::Eval(args) => cmd_eval(config, args, out),
    }
}

fn cmd_verify(config: &RunConfig, args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let prec = config.precision;
    if let Some(path) = &args.measure {
        let nu = load_measure(path)?;
        let depth = args.depth.unwrap_or_else(|| nu.supported_depth().unwrap_or(8));
        config.check_depth(depth)?;
        let report = verify_measure(&nu, depth, prec);
        write!(out, "{report}")?;
        return Ok(if report.passed() { 0 } else { 1 });
    }
    let path = args
        .gale
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("give --gale or --measure".into()))?;
    let (_, spec) = load_gale(path)?;
    let depth = match args.depth {
        Some(d) => d,
        None => spec.available_depth().unwrap_or(8),
    };
    config.check_depth(depth)?;
    let opts = VerifyOptions {
        width_budget: budget_width(&spec, prec),
        stage: args.stage,
        keep_passes: !args.failures_only,
    };
    let report = verify_gale_with(&spec, depth, prec, &opts)?;
    writeln!(out, "{report}")?;
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_convert(config: &RunConfig, args: &ConvertArgs, out: &mut dyn Write) -> Result<i32> {
    let (file, source) = load_gale(&args.gale)?;
    let mut plan = parse_plan(&read_text(&args.plan)?).map_err(|e| with_path(&args.plan, e))?;
    plan.validate()?;
    config.check_depth(plan.max_depth)?;
    if config.precision != plan.precision {
        plan.precision = plan.precision.max(config.precision);
    }
    let opts = BuildOptions { stage: args.stage };
    let conversion = if args.uniform_path {
        build_dprime_uniform(&source, &plan, &opts)?
    } else {
        build_dprime(&source, &plan, &opts)?
    };
    let gale_text = write_gale(&GaleFile {
        s: plan.s_prime,
        strictness: conversion.gale.strictness,
        measure: file.measure.clone(),
        body: GaleBody::Table(conversion.table().clone()),
    });
    let report = conversion.verify()?;
    writeln!(out, "{conversion}")?;
    writeln!(
        out,
        "self-check: {} nodes, {} pass, {} fail, {} inconclusive (width budget {})",
        report.nodes(),
        report.passes,
        report.fails,
        report.inconclusive,
        conversion.width_budget()
    )?;
    match &config.out {
        Some(path) => fs::write(path, gale_text)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => write!(out, "{gale_text}")?,
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_trace(config: &RunConfig, args: &TraceArgs, out: &mut dyn Write) -> Result<i32> {
    let (_, spec) = load_gale(&args.gale)?;
    let z = load_stream(&args.input)?;
    let trace = success_trace(&spec, &z, &args.thresholds, config.precision, args.stage)?;
    write!(out, "{trace}")?;
    Ok(0)
}

fn cmd_balance(config: &RunConfig, args: &BalanceArgs, out: &mut dyn Write) -> Result<i32> {
    let prec = config.precision;
    let nu = load_measure(&args.measure)?;
    let depth = nu
        .supported_depth()
        .map_or(args.depth, |d| d.min(args.depth));
    config.check_depth(depth)?;
    let mut status = 0;
    match (&args.alpha, &args.cap_c) {
        (Some(alpha), Some(cap_c)) => {
            let cert = BalanceCertificate::new(alpha.clone(), cap_c.clone())?;
            let report = check_balance(&nu, &cert, depth, prec);
            write!(out, "{report}")?;
            if !report.passed() {
                status = 1;
            }
        }
        _ => match suggest_balance(&nu, depth, prec) {
            Ok(candidate) => {
                writeln!(out, "{candidate}")?;
                write!(out, "{}", check_balance(&nu, &candidate.certificate, depth, prec))?;
            }
            Err(Error::NoCertificate(reason)) => {
                writeln!(out, "advisory: no certificate ({reason})")?;
            }
            Err(e) => return Err(e),
        },
    }
    if let Some(eps) = args.epsilon {
        write!(out, "{}", weak_balance_trace(&nu, eps, depth, prec)?)?;
    }
    Ok(status)
}

fn cmd_scan(config: &RunConfig, args: &ScanArgs, out: &mut dyn Write) -> Result<i32> {
    let strategy: ClosedGale = args.strategy.parse()?;
    let nu = match &args.measure {
        Some(path) => load_measure(path)?,
        None => Measure::Uniform,
    };
    let z = load_stream(&args.input)?;
    let report = dimension_scan(&strategy, &nu, &z, &args.grid, args.threshold, config.precision)?;
    write!(out, "{report}")?;
    Ok(0)
}

fn cmd_eval(config: &RunConfig, args: &EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let prec = config.precision;
    if let Some(path) = &args.gale {
        let (_, spec) = load_gale(path)?;
        let d = eval_gale(&spec, &args.word, prec, args.stage)?;
        writeln!(out, "d({}) = {d}", args.word)?;
        writeln!(
            out,
            "D({}) = {}",
            args.word,
            spec.scaled_capital(&args.word, prec, args.stage)?
        )?;
        return Ok(0);
    }
    let (Some(members), Some(t)) = (&args.set, args.t) else {
        return Err(Error::InvalidArgument("give --gale, or --set with --t".into()));
    };
    let nu = match &args.measure {
        Some(path) => load_measure(path)?,
        None => Measure::Uniform,
    };
    let u: StringSet = members.iter().cloned().collect();
    let v = eval_dut(&u, t, &nu, &args.word, &Truncation::Exact, prec)?;
    writeln!(out, "d_U^{t}({}) = {v}", args.word)?;
    Ok(0)
}
