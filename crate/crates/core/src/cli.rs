//! Command-line front end. `run_cli` parses arguments, runs one subcommand
//! and returns the process exit code: 0 on success, 1 when `verify-sc`
//! reports FAIL, 2 on configuration errors and 3 when a budget or step cap
//! was hit.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytics::{
    density_exact, density_mc, slice_density_exact, slice_density_mc, DensityEstimate, DensityMode,
};
use crate::error::{Error, Result};
use crate::harness::{
    answer_label, bench_avg, generic_density_experiment, parse_universe, write_outputs, ExperimentConfig,
};
use crate::membership::{
    membership_trace, parse_subgroup, schreier_walk, spectral_radius_estimate, stallings_core, GraphSpec,
    SchreierVertex, WalkMethod,
};
use crate::pipeline::{build_pipeline, parse_sl2_mode, PipelineOptions, SolverChoice};
use crate::presentation::{verify_metric_condition, Presentation, DEFAULT_LAMBDA};
use crate::solver::{run, ComplexityBound, Status, DEFAULT_STEP_CAP};
use crate::word::Alphabet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Exact enumeration budget for the `density` subcommand.
const DENSITY_BUDGET: u64 = 1 << 24;

#[derive(Debug, Parser)]
#[command(name = "wordcase", version, about = "Word problem solvers and average-case measurement harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one word through a pipeline and print the answer and step count.
    Solve(SolveArgs),
    /// Average-time profile, uniform bound and per-measure integral estimates.
    BenchAvg(ExperimentArgs),
    /// Undecided fractions of a pipeline's filter with an exponential fit.
    BenchGeneric(ExperimentArgs),
    /// Density of a pipeline's word problem (or of its filter's decided set).
    Density(DensityArgs),
    /// Return probabilities of the simple random walk on a graph.
    Walk(WalkArgs),
    /// Decide membership in a finitely generated subgroup of a free group.
    Membership(MembershipArgs),
    /// Check the metric small cancellation condition of a presentation.
    VerifySc(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// surface | free[:g] | braid:N | product:z|free|surface | membership:FILE
    #[arg(long, default_value = "free")]
    pub pipeline: String,
    /// SL2 evaluation for braid filters: exact | modp | modp:P
    #[arg(long, default_value = "modp")]
    pub sl2: String,
    /// Pad the total solver to at least this cost: linear[:C] | quadratic[:C] | subexp[:C].
    #[arg(long)]
    pub forced_total: Option<String>,
    /// Generator names for membership pipelines.
    #[arg(long, value_delimiter = ',', default_value = "a,b")]
    pub generators: Vec<String>,
}

impl PipelineArgs {
    fn options(&self) -> Result<PipelineOptions> {
        Ok(PipelineOptions {
            sl2: parse_sl2_mode(&self.sl2)?,
            forced_total: self.forced_total.as_deref().map(ComplexityBound::parse).transpose()?,
            generators: self.generators.clone(),
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Generator names separated by spaces (`a b' c`), or braid integers (`1 -2`).
    #[arg(long, allow_hyphen_values = true)]
    pub word: String,
    /// combined | total | filter
    #[arg(long, default_value = "combined")]
    pub solver: SolverChoice,
    /// Steps allowed before giving up.
    #[arg(long, env = "WORDCASE_STEP_CAP", default_value_t = DEFAULT_STEP_CAP)]
    pub step_cap: u64,
}

/// Flags for experiments; each one overrides the config file.
#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// surface | free[:g] | braid:N | product:z|free|surface | membership:FILE
    #[arg(long)]
    pub pipeline: Option<String>,
    /// Measure spec, repeatable: cauchy | geom:R | uniform:A:B | point:N, optional `@reduced`.
    #[arg(long = "measure")]
    pub measures: Vec<String>,
    /// Comma-separated, non-decreasing word lengths.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
    /// Samples per length when a slice is not enumerated.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Base seed; row i uses seed ^ i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Normalizing bound f₁: linear[:C] | quadratic[:C] | subexp[:C].
    #[arg(long)]
    pub f1: Option<String>,
    /// Output stem; `<stem>.csv` and `<stem>.json` are written.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Slices with at most this many words are enumerated.
    #[arg(long)]
    pub cutoff: Option<u64>,
    /// all | reduced
    #[arg(long)]
    pub universe: Option<String>,
    /// Machine to measure: combined | total | filter
    #[arg(long)]
    pub solver: Option<SolverChoice>,
    /// Pad the total solver to at least this cost: linear[:C] | quadratic[:C] | subexp[:C].
    #[arg(long)]
    pub forced_total: Option<String>,
    /// SL2 evaluation for braid filters: exact | modp | modp:P
    #[arg(long)]
    pub sl2: Option<String>,
    /// Generator names for membership pipelines, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub generators: Option<Vec<String>>,
    /// Steps allowed per run (also WORDCASE_STEP_CAP).
    #[arg(long)]
    pub step_cap: Option<u64>,
}

impl ExperimentArgs {
    /// Config file (or defaults), then environment, then flags.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        c.apply_env()?;
        if let Some(v) = &self.pipeline {
            c.pipeline = v.clone();
        }
        if !self.measures.is_empty() {
            c.measures = self.measures.clone();
        }
        if let Some(v) = &self.lengths {
            c.lengths = v.clone();
        }
        if let Some(v) = self.samples {
            c.samples = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.f1 {
            c.f1 = Some(v.clone());
        }
        if let Some(v) = &self.output {
            c.output = Some(v.clone());
        }
        if let Some(v) = self.cutoff {
            c.cutoff = v;
        }
        if let Some(v) = &self.universe {
            c.universe = v.clone();
        }
        if let Some(v) = self.solver {
            c.solver = v;
        }
        if let Some(v) = &self.forced_total {
            c.forced_total = Some(v.clone());
        }
        if let Some(v) = &self.sl2 {
            c.sl2 = v.clone();
        }
        if let Some(v) = &self.generators {
            c.generators = v.clone();
        }
        if let Some(v) = self.step_cap {
            c.step_cap = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DensitySet {
    /// Words equal to the identity.
    WordProblem,
    /// Words on which the filter reaches a decision.
    FilterDecided,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Set whose density is measured.
    #[arg(long, value_enum, default_value = "word-problem")]
    pub set: DensitySet,
    /// Ball radius, or slice length with `--slice`.
    #[arg(long)]
    pub n: usize,
    /// Restrict to words of length exactly n.
    #[arg(long)]
    pub slice: bool,
    /// Sample instead of enumerating.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Seed for sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// all | reduced
    #[arg(long, default_value = "all")]
    pub universe: String,
    /// Steps allowed per word.
    #[arg(long, env = "WORDCASE_STEP_CAP", default_value_t = DEFAULT_STEP_CAP)]
    pub step_cap: u64,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// free:G | z | membership:FILE (Schreier graph of the subgroup)
    #[arg(long, default_value = "free:2")]
    pub graph: String,
    /// Largest even time 2n.
    #[arg(long)]
    pub steps: usize,
    /// exact | mc
    #[arg(long, default_value = "exact")]
    pub method: String,
    /// Walks simulated by `mc`.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Seed for sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generator names of the ambient free group for `membership:FILE`.
    #[arg(long, value_delimiter = ',', default_value = "a,b")]
    pub generators: Vec<String>,
    /// Output stem; `<stem>.csv` and `<stem>.json` are written.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MembershipArgs {
    /// Subgroup file: one generator word per line, `#` comments allowed.
    #[arg(long)]
    pub subgroup: PathBuf,
    /// Word to test, repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub word: Vec<String>,
    /// Generator names of the ambient free group.
    #[arg(long, value_delimiter = ',', default_value = "a,b")]
    pub generators: Vec<String>,
    /// Print the folded core graph.
    #[arg(long)]
    pub core: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// First line: generator names; each further line: a relator.
    #[arg(long)]
    pub presentation: PathBuf,
    /// Passes when the longest piece is shorter than lambda times the shortest relator.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::StepCapExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Solve(a) => solve(a, out),
        Command::BenchAvg(a) => cmd_bench_avg(a, out),
        Command::BenchGeneric(a) => cmd_bench_generic(a, out),
        Command::Density(a) => cmd_density(a, out),
        Command::Walk(a) => cmd_walk(a, out),
        Command::Membership(a) => cmd_membership(a, out),
        Command::VerifySc(a) => cmd_verify(a, out),
    }
}

fn solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let p = build_pipeline(&a.pipeline.pipeline, &a.pipeline.options()?)?;
    let w = p.parse_word(&a.word)?;
    let r = p.solve(&w, a.solver, a.step_cap)?;
    writeln!(out, "answer: {}", answer_label(r.answer()))?;
    writeln!(out, "T: {}", r.steps)?;
    Ok(EXIT_OK)
}

fn cap_code(cap_hits: u64, err_note: &mut dyn Write) -> Result<i32> {
    if cap_hits > 0 {
        writeln!(err_note, "warning: {cap_hits} runs hit the step cap")?;
        return Ok(EXIT_BUDGET);
    }
    Ok(EXIT_OK)
}

fn cmd_bench_avg(a: &ExperimentArgs, out: &mut dyn Write) -> Result<i32> {
    let config = a.resolve()?;
    let report = bench_avg(&config)?;
    match &config.output {
        Some(path) => write_outputs(path, |buf| report.table.write_csv(buf), &report)?,
        None => report.table.write_csv(&mut *out)?,
    }
    writeln!(out, "uniform bound: {:.6}", report.uniform_bound)?;
    for m in &report.measures {
        writeln!(
            out,
            "{}: sum over profiled lengths {:.6} ± {:.6}, integral {:.6} ± {:.6} (N={}), growth from N/2 {:.2}%{}",
            m.measure,
            m.family_sum.value,
            m.family_sum.ci_half,
            m.integral.at_truncation.value,
            m.integral.at_truncation.ci_half,
            m.integral.at_truncation.truncation,
            100.0 * m.integral.growth,
            if m.integral.diverging { ", diverging" } else { "" }
        )?;
    }
    writeln!(out, "contract violations: {}", report.contract_violations())?;
    cap_code(report.cap_hits(), out)
}

fn cmd_bench_generic(a: &ExperimentArgs, out: &mut dyn Write) -> Result<i32> {
    let config = a.resolve()?;
    let p = config.build_pipeline()?;
    let s = config.settings(&p)?;
    let report = generic_density_experiment(&p, &config.lengths, &s)?;
    match &config.output {
        Some(path) => write_outputs(path, |buf| report.write_csv(buf), &report)?,
        None => report.write_csv(&mut *out)?,
    }
    match (&report.fit, &report.fit_error) {
        (Some(f), _) => writeln!(
            out,
            "fit: u_n ~ {:.4} * {:.4}^n, R^2 = {:.4}{}",
            f.c,
            f.sigma,
            f.r_squared,
            if f.is_exponential() { "" } else { " (not exponential)" }
        )?,
        (None, Some(e)) => writeln!(out, "fit: none ({e})")?,
        (None, None) => {}
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DensityJson {
    n: usize,
    value: f64,
    exact: Option<String>,
    lower: f64,
    upper: f64,
}

fn cmd_density(a: &DensityArgs, out: &mut dyn Write) -> Result<i32> {
    let p = build_pipeline(&a.pipeline.pipeline, &a.pipeline.options()?)?;
    let universe = parse_universe(&a.universe)?;
    let caps = AtomicU64::new(0);
    let pred = |w: &crate::word::Word| {
        let factory = match a.set {
            DensitySet::WordProblem => &p.total,
            DensitySet::FilterDecided => &p.filter,
        };
        match run(factory.as_ref(), w, a.step_cap) {
            Ok(r) => match a.set {
                DensitySet::WordProblem => r.answer() == Some(crate::solver::Answer::InLanguage),
                DensitySet::FilterDecided => matches!(r.status, Status::Decided(_)),
            },
            Err(_) => {
                caps.fetch_add(1, Ordering::Relaxed);
                false
            }
        }
    };
    let est: DensityEstimate = match (a.samples, a.slice) {
        (None, false) => density_exact(&pred, &p.alphabet, universe, a.n, DENSITY_BUDGET)?,
        (None, true) => slice_density_exact(&pred, &p.alphabet, universe, a.n, DENSITY_BUDGET)?,
        (Some(s), false) => density_mc(&pred, &p.alphabet, universe, a.n, s, a.seed)?,
        (Some(s), true) => slice_density_mc(&pred, &p.alphabet, universe, a.n, s, a.seed)?,
    };
    writeln!(out, "{est}")?;
    let (lower, upper) = match &est.mode {
        DensityMode::Exact { .. } => (est.value, est.value),
        DensityMode::MonteCarlo { lower, upper, .. } => (*lower, *upper),
    };
    let json =
        DensityJson { n: est.n, value: est.value, exact: est.exact_ratio().map(|r| r.to_string()), lower, upper };
    writeln!(out, "{}", serde_json::to_string(&json).map_err(|e| Error::Io(e.to_string()))?)?;
    let hits = caps.load(Ordering::Relaxed);
    if hits > 0 {
        return Err(Error::StepCapExceeded { cap: a.step_cap });
    }
    Ok(EXIT_OK)
}

fn load_subgroup(path: &Path, generators: &[String]) -> Result<(Alphabet, crate::membership::LabeledGraph)> {
    let alphabet = Alphabet::new(generators)?;
    let text = std::fs::read_to_string(path)?;
    let gens = parse_subgroup(&text, &alphabet)?;
    Ok((alphabet.clone(), stallings_core(&alphabet, &gens)?))
}

#[derive(Serialize)]
struct WalkJson {
    graph: String,
    probabilities: Vec<f64>,
    exact: Option<Vec<String>>,
    tail_ratio: f64,
    rho: f64,
}

fn cmd_walk(a: &WalkArgs, out: &mut dyn Write) -> Result<i32> {
    let graph = match a.graph.split_once(':') {
        None if a.graph == "z" => GraphSpec::IntegerLine,
        Some(("free", g)) => GraphSpec::FreeCayley(g.parse().map_err(|_| Error::Parse(format!("rank `{g}`")))?),
        Some(("membership", file)) => GraphSpec::Schreier(load_subgroup(Path::new(file), &a.generators)?.1),
        _ => return Err(Error::Parse(format!("unknown graph `{}`", a.graph))),
    };
    let method = match a.method.as_str() {
        "exact" => WalkMethod::ExactDp,
        "mc" => WalkMethod::MonteCarlo { trials: a.trials, seed: a.seed },
        m => return Err(Error::Parse(format!("unknown walk method `{m}`"))),
    };
    if a.steps < 2 || !a.steps.is_multiple_of(2) {
        return Err(Error::InvalidParameter("steps must be even and at least 2".into()));
    }
    let est = spectral_radius_estimate(&graph, a.steps / 2, method)?;
    let mut table = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut table);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["t", "p", "exact"]).map_err(io)?;
        for (i, p) in est.probabilities.iter().enumerate() {
            let exact = est.exact.as_ref().map_or(String::new(), |e| e[i].to_string());
            w.write_record([(2 * i).to_string(), p.to_string(), exact]).map_err(io)?;
        }
        w.flush()?;
    }
    let json = WalkJson {
        graph: a.graph.clone(),
        probabilities: est.probabilities.clone(),
        exact: est.exact.as_ref().map(|e| e.iter().map(|r| r.to_string()).collect()),
        tail_ratio: est.tail_ratio,
        rho: est.rho,
    };
    match &a.output {
        Some(path) => write_outputs(
            path,
            |buf| {
                buf.extend_from_slice(&table);
                Ok(())
            },
            &json,
        )?,
        None => out.write_all(&table)?,
    }
    writeln!(out, "p_{}/p_{} = {:.6}, rho ~ {:.6}", a.steps, a.steps - 2, est.tail_ratio, est.rho)?;
    Ok(EXIT_OK)
}

fn cmd_membership(a: &MembershipArgs, out: &mut dyn Write) -> Result<i32> {
    let (alphabet, core) = load_subgroup(&a.subgroup, &a.generators)?;
    if a.core {
        writeln!(out, "core: {} vertices, base {}", core.vertex_count(), core.base())?;
        for (u, l, v) in core.edges() {
            writeln!(out, "  {u} -{}-> {v}", alphabet.names()[l as usize])?;
        }
    }
    for text in &a.word {
        let w = alphabet.parse_word(text)?;
        let answer = membership_trace(&core, &w);
        let (end, walk) = schreier_walk(&core, &w);
        debug_assert_eq!(answer, walk);
        let end = match end {
            SchreierVertex::Core(v) => format!("core vertex {v}"),
            SchreierVertex::Tree { anchor, path } => {
                format!("tree vertex {} letters off core vertex {anchor}", path.len())
            }
        };
        writeln!(out, "{text}: {} (coset ends at {end})", answer_label(Some(answer)))?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let p = Presentation::parse(&std::fs::read_to_string(&a.presentation)?)?;
    if !(a.lambda > 0.0 && a.lambda < 1.0) {
        return Err(Error::InvalidParameter("lambda must lie in (0, 1)".into()));
    }
    let r = verify_metric_condition(&p, a.lambda);
    writeln!(out, "max piece: {}", r.max_piece)?;
    writeln!(out, "min relator: {}", r.min_relator)?;
    writeln!(out, "{}", if r.passes { "PASS" } else { "FAIL" })?;
    Ok(if r.passes { EXIT_OK } else { EXIT_FAIL })
}
