//! Command-line front end: argument parsing, dispatch and JSON reports.
//!
//! Every subcommand produces a [`RunReport`]. Exit codes: 0 when every
//! verdict passes, 1 when a check ran and failed, 2 for usage errors and 3
//! for invalid models or inputs. Bulk data goes to CSV files under `--out`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::continuous::gaussian::{gaussian_trials, summarize_gaussian, GaussianHciConfig};
use crate::continuous::qam::{default_thresholds, qam_trials, summarize_qam, ConstellationPoint, QamConfig};
use crate::continuous::triangle::{discretized_triangle_family, triangle_ratio_check, TriangleConfig};
use crate::error::{Error, Result};
use crate::families;
use crate::model::{Alphabet, ParamFamily};
use crate::modelfile::{parse_statistics, read_text, ModelFile};
use crate::source_coding::frontier::rate_pair;
use crate::source_coding::{
    ak_frontier, conditional_remote_rd, corner_point, rd_equality_check, theorem6_compare, FrontierOptions,
    RateFrontier, RdCurve,
};
use crate::statistic::{all_statistics, Statistic};
use crate::sufficiency::{
    check_markov, is_conditionally_sufficient, is_sufficient, lemma1_check, minimal_conditional_sufficient,
    minimal_sufficient, theorem1_check, theorem2_check, verify_hci, CheckReport, MarkovVerdict,
    DEFAULT_THRESHOLD_BITS,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MODEL_ERROR: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// The measured quantity (CMI, gap, …) compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl Verdict {
    /// Passes when `value ≤ tolerance`.
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Verdict { name: name.into(), pass: value <= tolerance, value, tolerance, detail: Value::Null }
    }

    /// Passes when `value > tolerance`.
    fn above(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Verdict { name: name.into(), pass: value > tolerance, value, tolerance, detail: Value::Null }
    }

    fn markov(name: impl Into<String>, v: &MarkovVerdict) -> Self {
        Verdict {
            name: name.into(),
            pass: v.holds,
            value: v.cmi_bits,
            tolerance: v.threshold_bits,
            detail: serde_json::to_value(&v.witness).unwrap_or(Value::Null),
        }
    }

    fn flag(name: impl Into<String>, pass: bool) -> Self {
        Verdict { name: name.into(), pass, value: if pass { 0.0 } else { 1.0 }, tolerance: 0.0, detail: Value::Null }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub verdicts: Vec<Verdict>,
    pub result: Value,
    pub artifacts: Vec<String>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    /// Help or version text requested with `--help`/`--version`.
    #[serde(skip)]
    pub help: Option<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Parser)]
#[command(name = "suffbench", version, about = "Sufficiency checks, minimal statistics and source-coding reductions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ModelArg {
    /// JSON model file.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
struct StatArg {
    /// JSON statistic file(s); entries override statistics embedded in the model.
    #[arg(long = "statistic")]
    statistic: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct TolArg {
    /// CMI threshold in bits below which a Markov chain is accepted.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_BITS)]
    tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct OutArg {
    /// Directory for CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SearchArgs {
    /// Auxiliary alphabet size (default |Y| + 2).
    #[arg(long)]
    ucard: Option<usize>,
    /// Random restarts.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct RdArgs {
    /// Distortion grid "a:b:steps" (steps points from a to b inclusive).
    #[arg(long, default_value = "0:0.5:11")]
    dgrid: String,
    /// Inner solver tolerance.
    #[arg(long, default_value_t = 1e-10)]
    solver_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct CheckStat {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    stat: StatArg,
    /// Axis of the statistic (default: first statistic given).
    #[arg(long)]
    axis: Option<String>,
    /// Conditioning axis.
    #[arg(long)]
    given: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    tol: TolArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct MinimalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[arg(long)]
    axis: Option<String>,
    #[arg(long)]
    given: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    tol: TolArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct MarkovArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    /// Axes of A (repeatable).
    #[arg(long = "a", required = true)]
    a: Vec<String>,
    /// Axes of B (repeatable, may be empty).
    #[arg(long = "b")]
    b: Vec<String>,
    /// Axes of C (repeatable).
    #[arg(long = "c", required = true)]
    c: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    tol: TolArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct StatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    stat: StatArg,
    #[command(flatten)]
    #[serde(flatten)]
    tol: TolArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct FrontierArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Theorem6Args {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    stat: StatArg,
    #[command(flatten)]
    #[serde(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    #[serde(flatten)]
    tol: TolArg,
    /// Largest accepted frontier gap in bits.
    #[arg(long, default_value_t = 0.02)]
    gap_tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct RdCurveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    rd: RdArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct RdEqualityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    stat: StatArg,
    #[command(flatten)]
    #[serde(flatten)]
    rd: RdArgs,
    #[command(flatten)]
    #[serde(flatten)]
    tol: TolArg,
    /// Largest accepted |R − R′| in bits.
    #[arg(long, default_value_t = 0.01)]
    gap_tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct GaussianArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    prior_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    prior_var: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Accepted |posterior mean gap| between full and reduced data.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct QamArgs {
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 1.0)]
    fading_var: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File of LR thresholds (one per line or comma-separated).
    #[arg(long)]
    thresholds: Option<PathBuf>,
    /// JSON list of {radius, phase, prob}; default unit-radius 4-QAM.
    #[arg(long)]
    constellation: Option<PathBuf>,
    /// Accepted relative LR gap between complex data and magnitudes.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct TriangleArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Candidate θ values, comma-separated.
    #[arg(long, default_value = "0,0.1,0.25")]
    thetas: String,
    /// Number of probe pairs.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    tol: TolArg,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SelftestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    tol: TolArg,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// θ − T(X) − X for a statistic on the observations (or one axis).
    CheckSufficiency(CheckStat),
    /// θ − (T(X), Y) − X for a statistic on X given Y.
    CheckConditional(CheckStat),
    /// Minimal sufficient statistic by likelihood-ratio partition.
    MinimalStat(MinimalArgs),
    /// Minimal conditional sufficient statistic of --axis given --given.
    MinimalConditionalStat(MinimalArgs),
    /// A − B − C on the model's joint distribution.
    CheckMarkov(MarkovArgs),
    /// θ − W − (X, Y) and X − W − Y; and whether an observation statistic sufficient for W is sufficient for θ.
    HciVerify(StatsArgs),
    /// Local-to-global sufficiency through a hidden variable.
    Theorem1(StatsArgs),
    /// Completing a locally sufficient Ty with Tx.
    Theorem2(StatsArgs),
    /// Rate region boundary for coding X with a helper observing Y.
    AkFrontier(FrontierArgs),
    /// Entropy of the minimal sufficient statistic of Y for X.
    CornerPoint(MinimalArgs),
    /// Rate regions from Y and from a sufficient T(Y).
    Theorem6(Theorem6Args),
    /// Remote rate-distortion curve with side information.
    RdCurve(RdCurveArgs),
    /// Rate-distortion from X and from a conditionally sufficient T(X).
    RdEquality(RdEqualityArgs),
    /// Correlated Gaussian pairs: posterior from sums vs all data.
    SimGaussian(GaussianArgs),
    /// QAM detection under fading: LR from complex data vs magnitudes.
    SimQam(QamArgs),
    /// Triangular support family: likelihood-ratio probes and the discretized family.
    ExampleTriangle(TriangleArgs),
    /// Built-in reference suites.
    Selftest(SelftestArgs),
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> RunReport
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand);
            return RunReport {
                command: String::new(),
                inputs: Value::Null,
                verdicts: vec![],
                result: Value::Null,
                artifacts: vec![],
                exit_code: if help && e.kind() != ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                    EXIT_PASS
                } else {
                    EXIT_USAGE
                },
                error: (!help || e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand)
                    .then(|| ErrorInfo { code: "USAGE".into(), message: text.clone() }),
                help: Some(text),
            };
        }
    };
    let (name, inputs) = describe(&cli.cmd);
    let mut out = Output::default();
    let outcome = dispatch(&cli.cmd, &mut out);
    let (result, error) = match outcome {
        Ok(v) => (v, None),
        Err(e) => (Value::Null, Some(ErrorInfo { code: e.code().into(), message: e.to_string() })),
    };
    let failed: Vec<&str> = out.verdicts.iter().filter(|v| !v.pass).map(|v| v.name.as_str()).collect();
    let (exit_code, error) = match error {
        Some(e) => (EXIT_MODEL_ERROR, Some(e)),
        None if failed.is_empty() => (EXIT_PASS, None),
        None => (
            EXIT_CHECK_FAILED,
            Some(ErrorInfo { code: "CHECK_FAILED".into(), message: format!("failed: {}", failed.join("; ")) }),
        ),
    };
    RunReport {
        command: name.into(),
        inputs,
        verdicts: out.verdicts,
        result,
        artifacts: out.artifacts,
        exit_code,
        error,
        help: None,
    }
}

fn describe(cmd: &Cmd) -> (&'static str, Value) {
    fn v<T: Serialize>(t: &T) -> Value {
        serde_json::to_value(t).unwrap_or(Value::Null)
    }
    match cmd {
        Cmd::CheckSufficiency(a) => ("check-sufficiency", v(a)),
        Cmd::CheckConditional(a) => ("check-conditional", v(a)),
        Cmd::MinimalStat(a) => ("minimal-stat", v(a)),
        Cmd::MinimalConditionalStat(a) => ("minimal-conditional-stat", v(a)),
        Cmd::CheckMarkov(a) => ("check-markov", v(a)),
        Cmd::HciVerify(a) => ("hci-verify", v(a)),
        Cmd::Theorem1(a) => ("theorem1", v(a)),
        Cmd::Theorem2(a) => ("theorem2", v(a)),
        Cmd::AkFrontier(a) => ("ak-frontier", v(a)),
        Cmd::CornerPoint(a) => ("corner-point", v(a)),
        Cmd::Theorem6(a) => ("theorem6", v(a)),
        Cmd::RdCurve(a) => ("rd-curve", v(a)),
        Cmd::RdEquality(a) => ("rd-equality", v(a)),
        Cmd::SimGaussian(a) => ("sim-gaussian", v(a)),
        Cmd::SimQam(a) => ("sim-qam", v(a)),
        Cmd::ExampleTriangle(a) => ("example-triangle", v(a)),
        Cmd::Selftest(a) => ("selftest", v(a)),
    }
}

#[derive(Default)]
struct Output {
    verdicts: Vec<Verdict>,
    artifacts: Vec<String>,
}

impl Output {
    fn push(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    /// Writes a CSV artifact when `--out` was given.
    fn csv<R: Serialize>(&mut self, dir: &Option<PathBuf>, file: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
        let Some(dir) = dir else { return Ok(()) };
        let io = |e: &dyn std::fmt::Display| Error::Io(format!("{}: {e}", dir.join(file).display()));
        std::fs::create_dir_all(dir).map_err(|e| io(&e))?;
        let path = dir.join(file);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path).map_err(|e| io(&e))?;
        for r in rows {
            w.serialize(r).map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))?;
        self.artifacts.push(path.display().to_string());
        Ok(())
    }
}

struct Loaded {
    file: ModelFile,
    extra: Vec<Statistic>,
}

impl Loaded {
    fn new(model: &ModelArg, stats: &[PathBuf]) -> Result<Self> {
        let file = ModelFile::load(&model.model)?;
        let mut extra = Vec::new();
        for p in stats {
            let text = read_text(p)?;
            extra.extend(parse_statistics(&text, &|name| file.alphabet(name))?);
        }
        Ok(Loaded { file, extra })
    }

    fn all_stats(&self) -> impl Iterator<Item = &Statistic> {
        self.extra.iter().chain(&self.file.statistics)
    }

    fn stat_on(&self, axis: &str) -> Result<Statistic> {
        self.all_stats()
            .find(|s| s.domain().name() == axis)
            .cloned()
            .ok_or_else(|| Error::InvalidConfig(format!("no statistic on axis {axis:?}")))
    }

    fn first_stat(&self) -> Result<Statistic> {
        self.all_stats().next().cloned().ok_or_else(|| Error::InvalidConfig("no statistic supplied".into()))
    }
}

fn partition_text(t: &Statistic) -> String {
    t.class_symbols().iter().map(|c| c.join(",")).collect::<Vec<_>>().join("|")
}

fn stat_json(t: &Statistic) -> Value {
    json!({
        "axis": t.domain().name(),
        "num_classes": t.num_classes(),
        "labels": t.labels(),
        "classes": t.class_symbols(),
        "partition": partition_text(t),
    })
}

/// Family restricted to `axis` unless it already names the full observation.
fn family_for(f: &ParamFamily, axis: &str) -> Result<ParamFamily> {
    if axis == f.obs_alphabet().name() {
        Ok(f.clone())
    } else {
        f.marginal_family(&[axis])
    }
}

fn other_axis(f: &ParamFamily, axis: &str, given: &Option<String>) -> Result<String> {
    if let Some(g) = given {
        return Ok(g.clone());
    }
    let others: Vec<&Alphabet> = f.obs_axes().iter().filter(|a| a.name() != axis).collect();
    match others.as_slice() {
        [one] => Ok(one.name().to_string()),
        _ => Err(Error::InvalidConfig("--given is required when the family has more than two axes".into())),
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("--dgrid {spec:?} is not \"a:b:steps\""));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .flat_map(|l| l.split(','))
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {t:?}"))))
        .collect()
}

fn report_value(r: &CheckReport, out: &mut Output) -> Value {
    for p in &r.premises {
        out.push(Verdict::markov(format!("premise {}", p.name), &p.verdict));
    }
    out.push(Verdict::markov(format!("conclusion {}", r.conclusion.name), &r.conclusion.verdict));
    serde_json::to_value(r).unwrap_or(Value::Null)
}

#[derive(Serialize)]
struct FrontierRow {
    r1_bits: f64,
    r2_bits: f64,
}

#[derive(Serialize)]
struct RdRow {
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "R_bits")]
    r_bits: f64,
    converged: bool,
}

fn frontier_rows(f: &RateFrontier) -> Vec<FrontierRow> {
    f.points.iter().map(|p| FrontierRow { r1_bits: p.r1_bits, r2_bits: p.r2_bits }).collect()
}

fn rd_rows(c: &RdCurve) -> Vec<RdRow> {
    c.points.iter().map(|p| RdRow { d: p.distortion, r_bits: p.rate_bits, converged: p.converged }).collect()
}

/// Largest |stored − recomputed| coordinate over frontier points.
pub fn achievability_gap(model: &crate::source_coding::SourceModel, f: &RateFrontier) -> f64 {
    let (nx, ny) = (model.x().size(), model.y().size());
    let pxy = model.pxy();
    f.points
        .iter()
        .map(|p| {
            let (r1, r2) = rate_pair(&pxy, nx, ny, &p.channel, f.u_card);
            (r1 - p.r1_bits).abs().max((r2 - p.r2_bits).abs())
        })
        .fold(0.0, f64::max)
}

/// Largest violation of midpoint convexity over consecutive grid triples,
/// with the middle rate compared to the chord between its neighbours.
pub fn convexity_violation(c: &RdCurve) -> f64 {
    c.points
        .windows(3)
        .map(|w| {
            let (a, m, b) = (&w[0], &w[1], &w[2]);
            if b.distortion == a.distortion {
                return 0.0;
            }
            let s = (m.distortion - a.distortion) / (b.distortion - a.distortion);
            m.rate_bits - (a.rate_bits + s * (b.rate_bits - a.rate_bits))
        })
        .fold(0.0, f64::max)
}

fn dispatch(cmd: &Cmd, out: &mut Output) -> Result<Value> {
    match cmd {
        Cmd::CheckSufficiency(a) => {
            let m = Loaded::new(&a.model, &a.stat.statistic)?;
            let f = m.file.family()?;
            let t = match &a.axis {
                Some(ax) => m.stat_on(ax)?,
                None => m.first_stat()?,
            };
            let fam = family_for(f, t.domain().name())?;
            let v = is_sufficient(&fam, &t, a.tol.tol)?;
            out.push(Verdict::markov(format!("theta-T({})-{}", t.domain().name(), t.domain().name()), &v));
            Ok(json!({ "statistic": stat_json(&t), "verdict": v }))
        }
        Cmd::CheckConditional(a) => {
            let m = Loaded::new(&a.model, &a.stat.statistic)?;
            let f = m.file.family()?;
            let t = match &a.axis {
                Some(ax) => m.stat_on(ax)?,
                None => m.first_stat()?,
            };
            let x = t.domain().name();
            let y = other_axis(f, x, &a.given)?;
            let v = is_conditionally_sufficient(f, &t, &y, a.tol.tol)?;
            out.push(Verdict::markov(format!("theta-(T({x}),{y})-{x}"), &v));
            Ok(json!({ "statistic": stat_json(&t), "given": y, "verdict": v }))
        }
        Cmd::MinimalStat(a) => {
            let file = ModelFile::load(&a.model.model)?;
            let f = file.family()?;
            let fam = match &a.axis {
                Some(ax) => family_for(f, ax)?,
                None => f.clone(),
            };
            let t = minimal_sufficient(&fam);
            let v = is_sufficient(&fam, &t, a.tol.tol)?;
            out.push(Verdict::markov("minimal statistic is sufficient", &v));
            Ok(json!({ "statistic": stat_json(&t), "verdict": v }))
        }
        Cmd::MinimalConditionalStat(a) => {
            let file = ModelFile::load(&a.model.model)?;
            let f = file.family()?;
            let x = match &a.axis {
                Some(x) => x.clone(),
                None => f.obs_axes()[0].name().to_string(),
            };
            let y = other_axis(f, &x, &a.given)?;
            let t = minimal_conditional_sufficient(f, &x, &y)?;
            let v = is_conditionally_sufficient(f, &t, &y, a.tol.tol)?;
            out.push(Verdict::markov("minimal conditional statistic is conditionally sufficient", &v));
            Ok(json!({ "statistic": stat_json(&t), "given": y, "verdict": v }))
        }
        Cmd::CheckMarkov(a) => {
            let file = ModelFile::load(&a.model.model)?;
            let j = file.full_joint();
            fn refs(v: &[String]) -> Vec<&str> {
                v.iter().map(String::as_str).collect()
            }
            let v = check_markov(&j, &refs(&a.a), &refs(&a.b), &refs(&a.c), a.tol.tol)?;
            let name = format!("({})-({})-({})", a.a.join(","), a.b.join(","), a.c.join(","));
            out.push(Verdict::markov(name, &v));
            Ok(json!({ "verdict": v }))
        }
        Cmd::HciVerify(a) => {
            let m = Loaded::new(&a.model, &a.stat.statistic)?;
            let h = m.file.hci()?;
            let (joint, cond) = verify_hci(h, a.tol.tol)?;
            out.push(Verdict::markov("theta-W-(X,Y)", &joint));
            out.push(Verdict::markov("X-W-Y", &cond));
            let obs = h.family().obs_alphabet();
            let lemma = match m.stat_on(obs.name()) {
                Ok(t) => Some(report_value(&lemma1_check(h, &t, a.tol.tol)?, out)),
                Err(_) => None,
            };
            Ok(json!({ "theta_w_obs": joint, "x_w_y": cond, "lemma1": lemma }))
        }
        Cmd::Theorem1(a) => {
            let m = Loaded::new(&a.model, &a.stat.statistic)?;
            let h = m.file.hci()?;
            let axes = h.family().obs_axes();
            if axes.len() != 2 {
                return Err(Error::DomainMismatch("theorem1 needs exactly two observation axes".into()));
            }
            let tw = m.stat_on(h.w().name()).unwrap_or_else(|_| Statistic::identity(h.w().clone()));
            let tx = m.stat_on(axes[0].name())?;
            let ty = m.stat_on(axes[1].name())?;
            let r = theorem1_check(h, &tw, &tx, &ty, a.tol.tol)?;
            Ok(report_value(&r, out))
        }
        Cmd::Theorem2(a) => {
            let m = Loaded::new(&a.model, &a.stat.statistic)?;
            let f = m.file.family()?;
            let axes = f.obs_axes();
            if axes.len() != 2 {
                return Err(Error::DomainMismatch("theorem2 needs exactly two observation axes".into()));
            }
            let tx = m.stat_on(axes[0].name())?;
            let ty = m.stat_on(axes[1].name())?;
            let r = theorem2_check(f, &tx, &ty, a.tol.tol)?;
            out.push(Verdict::markov(format!("(a) {}", r.global.conclusion.name), &r.global.conclusion.verdict));
            out.push(Verdict {
                detail: serde_json::to_value(&r.factorization.witness).unwrap_or(Value::Null),
                ..Verdict::at_most("(b) factorization", r.factorization.max_rel_dev, r.factorization.tolerance)
            });
            out.push(Verdict::flag("(a) and (b) agree", r.agree));
            Ok(serde_json::to_value(&r).unwrap_or(Value::Null))
        }
        Cmd::AkFrontier(a) => {
            let file = ModelFile::load(&a.model.model)?;
            let sm = file.source_pair()?;
            let opts = FrontierOptions::new(a.search.ucard.unwrap_or(sm.y().size() + 2), a.search.budget, a.search.seed);
            let f = ak_frontier(&sm, &opts)?;
            out.push(Verdict::at_most("stored rates match their channels", achievability_gap(&sm, &f), 1e-9));
            let corner = corner_point(&sm);
            let h_x_given_y = sm.joint().entropy(&[sm.x().name(), sm.y().name()])? - sm.joint().entropy(&[sm.y().name()])?;
            let below = f
                .points
                .iter()
                .filter(|p| p.r1_bits <= h_x_given_y + 1e-6)
                .map(|p| corner - p.r2_bits)
                .fold(0.0, f64::max);
            out.push(Verdict::at_most("no point beats the corner at R1 = H(X|Y)", below, 1e-6));
            out.csv(&a.out.out, "frontier.csv", frontier_rows(&f))?;
            Ok(json!({
                "u_card": f.u_card,
                "deterministic_maps_enumerated": f.deterministic_maps_enumerated,
                "h_x_given_y_bits": h_x_given_y,
                "corner_point_bits": corner,
                "points": frontier_rows(&f).iter().map(|r| [r.r1_bits, r.r2_bits]).collect::<Vec<_>>(),
            }))
        }
        Cmd::CornerPoint(a) => {
            let file = ModelFile::load(&a.model.model)?;
            let sm = file.source_pair()?;
            let phi = crate::source_coding::frontier::minimal_sufficient_of_y(&sm);
            let value = corner_point(&sm);
            let (x, y) = (sm.x().name(), sm.y().name());
            let j = phi.attach(sm.joint(), y, "Phi(Y)")?;
            let v = check_markov(&j, &[x], &["Phi(Y)"], &[y], a.tol.tol)?;
            out.push(Verdict::markov("X-Phi(Y)-Y", &v));
            Ok(json!({ "corner_point_bits": value, "phi": stat_json(&phi) }))
        }
        Cmd::Theorem6(a) => {
            let m = Loaded::new(&a.model, &a.stat.statistic)?;
            let sm = m.file.source_pair()?;
            let t = m.stat_on(sm.y().name())?;
            let opts = FrontierOptions::new(a.search.ucard.unwrap_or(sm.y().size() + 2), a.search.budget, a.search.seed);
            let r = theorem6_compare(&sm, &t, &opts, a.tol.tol)?;
            out.push(Verdict::markov("X-T(Y)-Y", &r.precondition));
            out.push(Verdict::at_most("reduced points lift exactly", r.lift_gap_bits, 1e-9));
            out.push(Verdict::at_most("reduced frontier inside full region", r.reduced_outside_full_bits, 1e-9));
            out.push(Verdict::at_most("frontier gap", r.gap_bits, a.gap_tol));
            out.csv(&a.out.out, "frontier_full.csv", frontier_rows(&r.full))?;
            out.csv(&a.out.out, "frontier_reduced.csv", frontier_rows(&r.reduced))?;
            Ok(json!({
                "gap_bits": r.gap_bits,
                "full_outside_reduced_bits": r.full_outside_reduced_bits,
                "reduced_outside_full_bits": r.reduced_outside_full_bits,
                "lift_gap_bits": r.lift_gap_bits,
                "full_points": r.full.points.len(),
                "reduced_points": r.reduced.points.len(),
                "reduced_u_card": r.reduced.u_card,
            }))
        }
        Cmd::RdCurve(a) => {
            let file = ModelFile::load(&a.model.model)?;
            let sm = file.source_remote()?;
            let grid = parse_grid(&a.rd.dgrid)?;
            let c = conditional_remote_rd(&sm, &grid, a.rd.solver_tol)?;
            out.push(Verdict::at_most("convex in D", convexity_violation(&c), 1e-3));
            out.csv(&a.out.out, "rd_curve.csv", rd_rows(&c))?;
            Ok(serde_json::to_value(&c).unwrap_or(Value::Null))
        }
        Cmd::RdEquality(a) => {
            let m = Loaded::new(&a.model, &a.stat.statistic)?;
            let sm = m.file.source_remote()?;
            let t = m.stat_on(sm.x().name())?;
            let grid = parse_grid(&a.rd.dgrid)?;
            let r = rd_equality_check(&sm, &t, &grid, a.rd.solver_tol, a.tol.tol)?;
            out.push(Verdict::markov("Z-(T(X),Y)-X", &r.precondition));
            out.push(Verdict::at_most("max |R - R'|", r.max_abs_diff_bits, a.gap_tol));
            out.csv(&a.out.out, "rd_full.csv", rd_rows(&r.full))?;
            out.csv(&a.out.out, "rd_reduced.csv", rd_rows(&r.reduced))?;
            Ok(json!({
                "max_abs_diff_bits": r.max_abs_diff_bits,
                "d_min": r.full.d_min,
                "d_max": r.full.d_max,
                "full": rd_rows(&r.full).iter().map(|p| [p.d, p.r_bits]).collect::<Vec<_>>(),
                "reduced": rd_rows(&r.reduced).iter().map(|p| [p.d, p.r_bits]).collect::<Vec<_>>(),
            }))
        }
        Cmd::SimGaussian(a) => {
            let cfg = GaussianHciConfig { n: a.n, rho: a.rho, prior_mean: a.prior_mean, prior_var: a.prior_var, seed: a.seed };
            if a.trials == 0 {
                return Err(Error::InvalidConfig("trials must be at least 1".into()));
            }
            let rows = gaussian_trials(&cfg, a.trials)?;
            let s = summarize_gaussian(&rows);
            out.push(Verdict::at_most("posterior means agree", s.max_abs_mean_gap, a.tol));
            let diff = s.mean_diff.abs();
            out.push(Verdict::at_most("MSE gap within 3 standard errors", diff, 3.0 * s.diff_std_err));
            out.csv(&a.out.out, "gaussian_trials.csv", &rows)?;
            let pass = out.verdicts.iter().all(|v| v.pass);
            Ok(json!({ "check": "gaussian_full_vs_reduced", "max_abs_gap": s.max_abs_mean_gap, "pass": pass, "summary": s }))
        }
        Cmd::SimQam(a) => {
            let mut cfg = QamConfig::qam4(a.k, a.sigma2, a.seed);
            cfg.fading_var = a.fading_var;
            if let Some(p) = &a.constellation {
                cfg.constellation = serde_json::from_str::<Vec<ConstellationPoint>>(&read_text(p)?)
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
            let thresholds = match &a.thresholds {
                Some(p) => parse_numbers(&read_text(p)?)?,
                None => default_thresholds(),
            };
            if a.trials == 0 {
                return Err(Error::InvalidConfig("trials must be at least 1".into()));
            }
            let rows = qam_trials(&cfg, a.trials)?;
            let s = summarize_qam(&rows, &thresholds);
            out.push(Verdict::at_most("LR from magnitudes matches full data", s.max_lr_rel_gap, a.tol));
            out.push(Verdict::flag("ROC tables identical", s.identical));
            out.csv(&a.out.out, "qam_trials.csv", &rows)?;
            out.csv(&a.out.out, "qam_roc.csv", &s.rows)?;
            let pass = out.verdicts.iter().all(|v| v.pass);
            Ok(json!({ "check": "qam_full_vs_magnitude", "max_abs_gap": s.max_lr_rel_gap, "pass": pass, "summary": s }))
        }
        Cmd::ExampleTriangle(a) => {
            let thetas = parse_numbers(&a.thetas)?;
            let cfg = TriangleConfig { n: a.n, theta_values: thetas, seed: a.seed };
            let r = triangle_ratio_check(&cfg, a.trials)?;
            out.push(Verdict::at_most("ratio classes match max x", r.x_side.mismatches as f64, 0.0));
            out.push(Verdict::at_most("ratio classes match min y", r.y_side.mismatches as f64, 0.0));
            let fam = discretized_triangle_family();
            let t = minimal_conditional_sufficient(&fam, "X", "Y")?;
            let max_stat = Statistic::identity(fam.obs_axes()[0].clone());
            out.push(Verdict::flag("discretized minimal statistic is max x", t == max_stat));
            let v = is_conditionally_sufficient(&fam, &t, "Y", a.tol.tol)?;
            out.push(Verdict::markov("theta-(T(X),Y)-X on the grid", &v));
            let pass = out.verdicts.iter().all(|v| v.pass);
            Ok(json!({
                "check": "triangle_ratio",
                "max_abs_gap": (r.x_side.mismatches + r.y_side.mismatches) as f64,
                "pass": pass,
                "probes": r,
                "discretized": { "statistic": stat_json(&t), "verdict": v },
            }))
        }
        Cmd::Selftest(a) => selftest(a.tol.tol, out),
    }
}

fn selftest(tol: f64, out: &mut Output) -> Result<Value> {
    let fb = families::fam_bin();
    let x = fb.obs_axes()[0].clone();
    let count = families::count_statistic(&x);
    let parity = families::parity_statistic(&x);
    out.push(Verdict::markov("FAM-BIN count sufficient", &is_sufficient(&fb, &count, tol)?));
    out.push(Verdict::above("FAM-BIN parity not sufficient", is_sufficient(&fb, &parity, tol)?.cmi_bits, 0.05));
    let minimal = minimal_sufficient(&fb);
    out.push(Verdict::flag("FAM-BIN minimal statistic is the count", minimal == count));
    let mut coarsest = true;
    for s in all_statistics(&x) {
        if is_sufficient(&fb, &s, tol)?.holds {
            coarsest &= minimal.is_coarsening_of(&s)?;
        }
    }
    out.push(Verdict::flag("FAM-BIN minimal statistic coarsens every sufficient one", coarsest));

    let dep = families::fam_dep(1);
    let (hv, _) = verify_hci(&dep, tol)?;
    out.push(Verdict::markov("FAM-DEP theta-W-(X,Y)", &hv));
    let j = dep.family().joint();
    let fails = check_markov(&j, &["theta"], &["X"], &["Y"], tol)?;
    out.push(Verdict::above("FAM-DEP theta-X-Y fails", fails.cmi_bits, 1e-3));

    let dep2 = families::fam_dep(2);
    let xa = dep2.family().obs_axes()[0].clone();
    let ya = dep2.family().obs_axes()[1].clone();
    let tw = Statistic::identity(dep2.w().clone());
    let t1 = theorem1_check(&dep2, &tw, &families::count_statistic(&xa), &families::count_statistic(&ya), tol)?;
    out.push(Verdict::flag("FAM-DEP theorem1 premises", t1.premises_hold()));
    out.push(Verdict::markov("FAM-DEP theorem1 conclusion", &t1.conclusion.verdict));
    let t1p = theorem1_check(&dep2, &tw, &families::parity_statistic(&xa), &families::count_statistic(&ya), tol)?;
    out.push(Verdict::above("FAM-DEP parity breaks the conclusion", t1p.conclusion.verdict.cmi_bits, 1e-3));

    let corner = corner_point(&families::ab_pair());
    out.push(Verdict::at_most("corner point of Y=(A,B), X=A is 1 bit", (corner - 1.0).abs(), 1e-9));
    let rd = conditional_remote_rd(&families::bernoulli_remote(), &[0.1], 1e-10)?;
    let exact = 1.0 - crate::model::binary_entropy(0.1);
    out.push(Verdict::at_most("binary Hamming R(0.1)", (rd.points[0].rate_bits - exact).abs(), 0.005));
    Ok(json!({ "suites": ["FAM-BIN", "FAM-DEP", "corner", "rate-distortion"] }))
}
