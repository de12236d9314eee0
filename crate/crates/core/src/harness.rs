//! Experiment orchestration: per-length time profiles, the uniform bound
//! over length-invariant measures, integral estimates, the Cauchy
//! average-case check and generic-density experiments.
//!
//! Every experiment runs rows in parallel with per-row seeds `seed ^ row`
//! and merges in row order, so output depends only on the configuration.
//! When the combined machine is measured, each word is also run through the
//! total and filter machines alone to check the combination's step bound.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{exp_fit, wilson_interval, ExpFit, Z99};
use crate::braid::Sl2Mode;
use crate::error::{Error, Result};
use crate::measures::{LengthInvariantMeasure, CAUCHY_NORMALIZER};
use crate::pipeline::{build_pipeline, parse_sl2_mode, Pipeline, PipelineOptions, SolverChoice};
use crate::solver::{run, Answer, ComplexityBound, Status, DEFAULT_STEP_CAP};
use crate::word::{enumerate_words, sample_word, seeded_rng, slice_count, Universe, Word};

/// Slices with at most this many words are enumerated rather than sampled.
pub const DEFAULT_CUTOFF: u64 = 1 << 16;
pub const ENV_CUTOFF: &str = "WORDCASE_CUTOFF";
pub const ENV_STEP_CAP: &str = "WORDCASE_STEP_CAP";
/// Relative growth of an integral estimate from `N/2` to `N` that is read as
/// divergence.
pub const DIVERGENCE_GROWTH: f64 = 0.20;
/// Relative increment from `N/2` to `N` below which Cauchy partial sums are
/// read as converged.
pub const CAUCHY_INCREMENT: f64 = 0.05;
pub const CSV_COLUMNS: [&str; 7] = ["n", "samples", "mean_T", "ci_half", "max_T", "undecided_frac", "ratio"];

/// Flat experiment configuration; every key is optional in the JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pipeline: String,
    pub measures: Vec<String>,
    pub lengths: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
    pub f1: Option<String>,
    pub output: Option<PathBuf>,
    pub cutoff: u64,
    /// `all` or `reduced`.
    pub universe: String,
    pub solver: SolverChoice,
    pub forced_total: Option<String>,
    /// `exact`, `modp` or `modp:P`.
    pub sl2: String,
    pub generators: Vec<String>,
    pub step_cap: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pipeline: "free".into(),
            measures: Vec::new(),
            lengths: vec![8, 16, 32, 64],
            samples: 1000,
            seed: 0,
            f1: None,
            output: None,
            cutoff: DEFAULT_CUTOFF,
            universe: "all".into(),
            solver: SolverChoice::Combined,
            forced_total: None,
            sl2: "modp".into(),
            generators: vec!["a".into(), "b".into()],
            step_cap: DEFAULT_STEP_CAP,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Applies `WORDCASE_CUTOFF` and `WORDCASE_STEP_CAP` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        let read = |key: &str| -> Result<Option<u64>> {
            match std::env::var(key) {
                Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Parse(format!("{key}={v} is not an integer"))),
                Err(_) => Ok(None),
            }
        };
        if let Some(c) = read(ENV_CUTOFF)? {
            self.cutoff = c;
        }
        if let Some(c) = read(ENV_STEP_CAP)? {
            self.step_cap = c;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if self.lengths.is_empty() {
            return Err(Error::InvalidParameter("lengths must be nonempty".into()));
        }
        if self.lengths.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::InvalidParameter("lengths must be non-decreasing".into()));
        }
        if self.step_cap == 0 {
            return Err(Error::InvalidParameter("step cap must be positive".into()));
        }
        self.universe()?;
        self.sl2_mode()?;
        Ok(())
    }

    pub fn universe(&self) -> Result<Universe> {
        parse_universe(&self.universe)
    }

    pub fn sl2_mode(&self) -> Result<Sl2Mode> {
        parse_sl2_mode(&self.sl2)
    }

    pub fn pipeline_options(&self) -> Result<PipelineOptions> {
        Ok(PipelineOptions {
            sl2: self.sl2_mode()?,
            forced_total: self.forced_total.as_deref().map(ComplexityBound::parse).transpose()?,
            generators: self.generators.clone(),
        })
    }

    pub fn build_pipeline(&self) -> Result<Pipeline> {
        build_pipeline(&self.pipeline, &self.pipeline_options()?)
    }

    pub fn bound(&self, p: &Pipeline) -> Result<ComplexityBound> {
        match &self.f1 {
            Some(s) => ComplexityBound::parse(s),
            None => Ok(p.default_bound(self.solver)),
        }
    }

    pub fn parsed_measures(&self, p: &Pipeline) -> Result<Vec<LengthInvariantMeasure>> {
        self.measures.iter().map(|m| LengthInvariantMeasure::parse(m, &p.alphabet)).collect()
    }

    pub fn settings(&self, p: &Pipeline) -> Result<RunSettings> {
        Ok(RunSettings {
            choice: self.solver,
            bound: self.bound(p)?,
            samples: self.samples,
            seed: self.seed,
            cutoff: self.cutoff,
            step_cap: self.step_cap,
            universe: self.universe()?,
        })
    }
}

pub fn parse_universe(s: &str) -> Result<Universe> {
    match s {
        "all" => Ok(Universe::AllWords),
        "reduced" => Ok(Universe::ReducedWords),
        _ => Err(Error::Parse(format!("unknown universe `{s}` (all | reduced)"))),
    }
}

/// Parameters shared by all experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub choice: SolverChoice,
    pub bound: ComplexityBound,
    pub samples: u64,
    pub seed: u64,
    pub cutoff: u64,
    pub step_cap: u64,
    pub universe: Universe,
}

impl RunSettings {
    pub fn new(choice: SolverChoice, bound: ComplexityBound) -> Self {
        RunSettings {
            choice,
            bound,
            samples: 1000,
            seed: 0,
            cutoff: DEFAULT_CUTOFF,
            step_cap: DEFAULT_STEP_CAP,
            universe: Universe::AllWords,
        }
    }

    pub fn samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn cutoff(mut self, cutoff: u64) -> Self {
        self.cutoff = cutoff;
        self
    }
}

// ---------------------------------------------------------------------------
// Per-word evaluation

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    runs: u64,
    sum: f64,
    sum_sq: f64,
    max: u64,
    undecided: u64,
    cap_hits: u64,
    violations: u64,
}

impl Tally {
    fn add(&mut self, o: &Outcome, weight: f64) {
        if o.cap_hit {
            self.cap_hits += 1;
            return;
        }
        self.runs += 1;
        let x = o.steps as f64 * weight;
        self.sum += x;
        self.sum_sq += x * x;
        self.max = self.max.max(o.steps);
        self.undecided += o.undecided as u64;
        self.violations += o.violation as u64;
    }

    fn mean(&self) -> f64 {
        if self.runs == 0 {
            f64::NAN
        } else {
            self.sum / self.runs as f64
        }
    }

    /// Standard error of the mean.
    fn std_err(&self) -> f64 {
        if self.runs < 2 {
            return 0.0;
        }
        let m = self.runs as f64;
        let var = ((self.sum_sq - self.sum * self.sum / m) / (m - 1.0)).max(0.0);
        (var / m).sqrt()
    }
}

#[derive(Clone, Copy, Debug)]
struct Outcome {
    steps: u64,
    undecided: bool,
    violation: bool,
    cap_hit: bool,
}

/// Runs the chosen machine, the filter, and for combined runs the total, and
/// checks `T_comb ≤ 2·min(T_total, T_filter) + 2` when the filter decides.
fn evaluate(p: &Pipeline, choice: SolverChoice, w: &Word, cap: u64) -> Outcome {
    let capped = Outcome { steps: 0, undecided: false, violation: false, cap_hit: true };
    let Ok(filter) = run(p.filter.as_ref(), w, cap) else { return capped };
    let undecided = filter.status == Status::UndecidedFinal;
    let chosen = match choice {
        SolverChoice::Filter => filter,
        SolverChoice::Total => match run(p.total.as_ref(), w, cap) {
            Ok(r) => r,
            Err(_) => return capped,
        },
        SolverChoice::Combined => match run(p.combined.as_ref(), w, cap) {
            Ok(r) => r,
            Err(_) => return capped,
        },
    };
    let mut violation = false;
    if choice == SolverChoice::Combined {
        match run(p.total.as_ref(), w, cap) {
            Ok(total) => {
                if filter.decided() && chosen.steps > 2 * total.steps.min(filter.steps) + 2 {
                    violation = true;
                }
                if chosen.answer() != total.answer() {
                    violation = true;
                }
                if filter.decided() && filter.answer() != total.answer() {
                    violation = true;
                }
            }
            Err(_) => {
                if filter.decided() && chosen.steps > 2 * filter.steps + 2 {
                    violation = true;
                }
            }
        }
    }
    Outcome { steps: chosen.steps, undecided, violation, cap_hit: false }
}

/// Enumerates the slice when it has at most `cutoff` words, otherwise draws
/// `samples` uniform words with the given seed. Returns the tally and
/// whether it was exact.
fn slice_tally(p: &Pipeline, s: &RunSettings, n: usize, seed: u64) -> Result<(Tally, bool)> {
    let mut t = Tally::default();
    let size = slice_count(p.alphabet.size(), s.universe, n);
    if size <= BigUint::from(s.cutoff) {
        for w in enumerate_words(&p.alphabet, s.universe, n, s.cutoff)? {
            t.add(&evaluate(p, s.choice, &w, s.step_cap), 1.0);
        }
        Ok((t, true))
    } else {
        let mut rng = seeded_rng(seed);
        for _ in 0..s.samples {
            let w = sample_word(&p.alphabet, s.universe, n, &mut rng);
            t.add(&evaluate(p, s.choice, &w, s.step_cap), 1.0);
        }
        Ok((t, false))
    }
}

// ---------------------------------------------------------------------------
// Profiles

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: usize,
    pub samples: u64,
    #[serde(rename = "mean_T")]
    pub mean_t: f64,
    pub ci_half: f64,
    #[serde(rename = "max_T")]
    pub max_t: u64,
    pub undecided_frac: f64,
    pub ratio: f64,
    pub exact: bool,
    pub f1: u64,
    pub cap_hits: u64,
    pub contract_violations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub pipeline: String,
    pub machine: String,
    pub bound: String,
    pub seed: u64,
    pub version: String,
    pub config: Option<ExperimentConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ProfileRow>,
    pub metadata: TableMetadata,
}

impl ResultTable {
    pub fn contract_violations(&self) -> u64 {
        self.rows.iter().map(|r| r.contract_violations).sum()
    }

    pub fn cap_hits(&self) -> u64 {
        self.rows.iter().map(|r| r.cap_hits).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.samples.to_string(),
                r.mean_t.to_string(),
                r.ci_half.to_string(),
                r.max_t.to_string(),
                r.undecided_frac.to_string(),
                r.ratio.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

/// `Eₙ[T]`, `max T`, filter undecided fraction and `Eₙ[T]/f₁(n)` for each
/// length.
pub fn profile_pipeline(p: &Pipeline, lengths: &[usize], s: &RunSettings) -> Result<ResultTable> {
    let rows = lengths
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let (t, exact) = slice_tally(p, s, n, s.seed ^ i as u64)?;
            let f1 = s.bound.eval(n);
            let mean = t.mean();
            Ok(ProfileRow {
                n,
                samples: t.runs + t.cap_hits,
                mean_t: mean,
                ci_half: if exact { 0.0 } else { Z99 * t.std_err() },
                max_t: t.max,
                undecided_frac: if t.runs == 0 { 0.0 } else { t.undecided as f64 / t.runs as f64 },
                ratio: mean / f1 as f64,
                exact,
                f1,
                cap_hits: t.cap_hits,
                contract_violations: t.violations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResultTable {
        rows,
        metadata: TableMetadata {
            pipeline: p.name.clone(),
            machine: p.machine(s.choice).describe(),
            bound: s.bound.to_string(),
            seed: s.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: None,
        },
    })
}

pub fn avg_time_profile(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let p = config.build_pipeline()?;
    let mut t = profile_pipeline(&p, &config.lengths, &config.settings(&p)?)?;
    t.metadata.config = Some(config.clone());
    Ok(t)
}

/// `sup_n Eₙ[T]/f₁(n)` over the table. For a length-invariant measure with
/// length law `d`, `Σₙ d(n)·Eₙ[T]/f₁(n)` over the same lengths cannot exceed
/// it, so it bounds the whole family at the measured lengths.
pub fn uniform_bound_metric(table: &ResultTable) -> Result<f64> {
    if table.rows.is_empty() {
        return Err(Error::InvalidParameter("empty table".into()));
    }
    Ok(table.rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FamilySum {
    pub value: f64,
    pub ci_half: f64,
}

/// `Σₙ d(n)·Eₙ[T]/f₁(n)` over the table's lengths.
pub fn weighted_family_sum(table: &ResultTable, measure: &LengthInvariantMeasure) -> FamilySum {
    let mut value = 0.0;
    let mut var = 0.0;
    for r in &table.rows {
        let d = measure.lengths().weight(r.n);
        value += d * r.ratio;
        var += (d * r.ci_half / Z99 / r.f1 as f64).powi(2);
    }
    FamilySum { value, ci_half: Z99 * var.sqrt() }
}

// ---------------------------------------------------------------------------
// Integral estimates

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialSum {
    pub truncation: usize,
    pub value: f64,
    pub ci_half: f64,
    /// Exactly enumerated part.
    pub head: f64,
    pub head_lengths: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub measure: String,
    pub at_truncation: PartialSum,
    pub at_half: PartialSum,
    pub growth: f64,
    pub diverging: bool,
    pub contract_violations: u64,
    pub cap_hits: u64,
}

/// Exact mean over the slice, or `None` if it exceeds the cutoff.
fn exact_mean(p: &Pipeline, s: &RunSettings, n: usize) -> Result<Option<Tally>> {
    if slice_count(p.alphabet.size(), s.universe, n) > BigUint::from(s.cutoff) {
        return Ok(None);
    }
    Ok(Some(slice_tally(p, s, n, 0)?.0))
}

fn partial_sum(
    p: &Pipeline,
    measure: &LengthInvariantMeasure,
    s: &RunSettings,
    truncation: usize,
    seed: u64,
    head_cache: &mut Vec<Tally>,
    totals: &mut Tally,
) -> Result<PartialSum> {
    let d = |n: usize| measure.lengths().weight(n);
    let f = |n: usize| s.bound.eval(n) as f64;
    let mut head = 0.0;
    let mut h = 0;
    while h <= truncation {
        if h >= head_cache.len() {
            match exact_mean(p, s, h)? {
                Some(t) => head_cache.push(t),
                None => break,
            }
        }
        head += d(h) * head_cache[h].mean() / f(h);
        h += 1;
    }
    let tail_lengths: Vec<usize> = (h..=truncation).collect();
    let tail_mass: f64 = tail_lengths.iter().map(|&n| d(n)).sum();
    let (mut value, mut ci_half) = (head, 0.0);
    if tail_mass > 0.0 {
        let index = WeightedIndex::new(tail_lengths.iter().map(|&n| d(n)))
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut rng = seeded_rng(seed);
        let mut t = Tally::default();
        for _ in 0..s.samples {
            let n = tail_lengths[index.sample(&mut rng)];
            let w = sample_word(&p.alphabet, measure.universe(), n, &mut rng);
            let o = evaluate(p, s.choice, &w, s.step_cap);
            t.add(&o, 1.0 / f(n));
            totals.violations += o.violation as u64;
            totals.cap_hits += o.cap_hit as u64;
        }
        value += tail_mass * t.mean();
        ci_half = Z99 * tail_mass * t.std_err();
    }
    Ok(PartialSum { truncation, value, ci_half, head, head_lengths: h })
}

/// Estimates `Σ_{|w| ≤ N} T(w)/f₁(|w|)·μ(w)`: lengths whose slice fits the
/// cutoff are enumerated, the rest sampled from `μ` restricted to them. The
/// same sum at `N/2` is compared with the one at `N`; relative growth above
/// 20% is flagged as divergence.
pub fn integral_estimate(
    p: &Pipeline,
    measure: &LengthInvariantMeasure,
    s: &RunSettings,
    truncation: usize,
) -> Result<IntegralEstimate> {
    if truncation < 2 {
        return Err(Error::InvalidParameter("truncation must be at least 2".into()));
    }
    let s = RunSettings { universe: measure.universe(), ..s.clone() };
    let mut cache = Vec::new();
    let mut totals = Tally::default();
    let full = partial_sum(p, measure, &s, truncation, s.seed, &mut cache, &mut totals)?;
    let half = partial_sum(p, measure, &s, truncation / 2, s.seed ^ 0x9e37_79b9, &mut cache, &mut totals)?;
    totals.violations += cache.iter().map(|t| t.violations).sum::<u64>();
    totals.cap_hits += cache.iter().map(|t| t.cap_hits).sum::<u64>();
    let growth = (full.value - half.value) / half.value;
    Ok(IntegralEstimate {
        measure: measure.to_string(),
        at_truncation: full,
        at_half: half,
        growth,
        diverging: growth > DIVERGENCE_GROWTH,
        contract_violations: totals.violations,
        cap_hits: totals.cap_hits,
    })
}

// ---------------------------------------------------------------------------
// Cauchy average-case check

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyReport {
    pub degree: u32,
    pub epsilon: f64,
    /// `(N', Σ_{n ≤ N'} d(n)·Eₙ[T]/n^{m-1+ε})` at powers of two and `N`.
    pub partial_sums: Vec<(usize, f64)>,
    /// `(S_N - S_{N/2}) / S_N`.
    pub relative_increment: f64,
    pub converged: bool,
    pub contract_violations: u64,
    pub profile: ResultTable,
}

/// Partial sums of `Σ d(n)·Eₙ[T]/n^{m-1+ε}` with the untruncated Cauchy law
/// `d(n) = (6/π²)/n²`, from a profile over every length `1..=N`.
pub fn cauchy_average_check(
    p: &Pipeline,
    degree: u32,
    epsilon: f64,
    horizon: usize,
    s: &RunSettings,
) -> Result<CauchyReport> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    if horizon < 2 {
        return Err(Error::InvalidParameter("horizon must be at least 2".into()));
    }
    let lengths: Vec<usize> = (1..=horizon).collect();
    let profile = profile_pipeline(p, &lengths, s)?;
    let exponent = degree as f64 - 1.0 + epsilon;
    let mut acc = 0.0;
    let mut sums = Vec::with_capacity(horizon);
    for r in &profile.rows {
        let n = r.n as f64;
        acc += CAUCHY_NORMALIZER / (n * n) * r.mean_t / n.powf(exponent);
        sums.push(acc);
    }
    let at = |n: usize| sums[n - 1];
    let mut checkpoints: Vec<usize> =
        std::iter::successors(Some(1usize), |&x| Some(x * 2)).take_while(|&x| x < horizon).collect();
    checkpoints.push(horizon);
    let relative_increment = (at(horizon) - at(horizon / 2)) / at(horizon);
    Ok(CauchyReport {
        degree,
        epsilon,
        partial_sums: checkpoints.iter().map(|&n| (n, at(n))).collect(),
        relative_increment,
        converged: relative_increment < CAUCHY_INCREMENT,
        contract_violations: profile.contract_violations(),
        profile,
    })
}

// ---------------------------------------------------------------------------
// Generic-case density

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericRow {
    pub n: usize,
    pub samples: u64,
    pub undecided: u64,
    pub undecided_frac: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericReport {
    pub pipeline: String,
    pub rows: Vec<GenericRow>,
    pub fit: Option<ExpFit>,
    /// Why no fit was produced, if so.
    pub fit_error: Option<String>,
}

impl GenericReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["n", "samples", "undecided_frac", "lower", "upper", "exact"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.samples.to_string(),
                r.undecided_frac.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                r.exact.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fraction `uₙ` of length-`n` words on which the filter ends undecided,
/// with 99% Wilson intervals, and an exponential fit of `uₙ`.
pub fn generic_density_experiment(p: &Pipeline, lengths: &[usize], s: &RunSettings) -> Result<GenericReport> {
    let rows = lengths
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let s = RunSettings { choice: SolverChoice::Filter, ..s.clone() };
            let (t, exact) = slice_tally(p, &s, n, s.seed ^ i as u64)?;
            let (lower, upper) = if exact {
                let u = t.undecided as f64 / t.runs as f64;
                (u, u)
            } else {
                wilson_interval(t.undecided, t.runs, Z99)
            };
            Ok(GenericRow {
                n,
                samples: t.runs,
                undecided: t.undecided,
                undecided_frac: t.undecided as f64 / t.runs.max(1) as f64,
                lower,
                upper,
                exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let seq: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.undecided_frac)).collect();
    let (fit, fit_error) = match exp_fit(&seq) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(GenericReport { pipeline: p.name.clone(), rows, fit, fit_error })
}

// ---------------------------------------------------------------------------
// Average-time bench

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureSummary {
    pub measure: String,
    pub family_sum: FamilySum,
    pub below_uniform_bound: bool,
    pub integral: IntegralEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub table: ResultTable,
    pub uniform_bound: f64,
    pub measures: Vec<MeasureSummary>,
}

impl BenchReport {
    pub fn contract_violations(&self) -> u64 {
        self.table.contract_violations() + self.measures.iter().map(|m| m.integral.contract_violations).sum::<u64>()
    }

    pub fn cap_hits(&self) -> u64 {
        self.table.cap_hits() + self.measures.iter().map(|m| m.integral.cap_hits).sum::<u64>()
    }
}

/// Profile plus, for each configured measure, the weighted family sum and a
/// direct integral estimate truncated at the largest profiled length.
pub fn bench_avg(config: &ExperimentConfig) -> Result<BenchReport> {
    config.validate()?;
    if config.measures.is_empty() {
        return Err(Error::InvalidParameter("at least one measure spec is required".into()));
    }
    let p = config.build_pipeline()?;
    let measures = config.parsed_measures(&p)?;
    let s = config.settings(&p)?;
    let mut table = profile_pipeline(&p, &config.lengths, &s)?;
    table.metadata.config = Some(config.clone());
    let uniform_bound = uniform_bound_metric(&table)?;
    let horizon = *config.lengths.last().expect("validated nonempty");
    let measures = measures
        .iter()
        .map(|m| {
            let family_sum = weighted_family_sum(&table, m);
            Ok(MeasureSummary {
                measure: m.to_string(),
                family_sum,
                below_uniform_bound: family_sum.value <= uniform_bound + 1e-12,
                integral: integral_estimate(&p, m, &s, horizon.max(2))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport { table, uniform_bound, measures })
}

/// Writes `<stem>.csv` (the fixed columns) and `<stem>.json` (everything).
pub fn write_outputs<T: Serialize>(
    path: &Path,
    csv_writer: impl FnOnce(&mut Vec<u8>) -> Result<()>,
    json: &T,
) -> Result<()> {
    let csv_path = path.with_extension("csv");
    let json_path = path.with_extension("json");
    let mut buf = Vec::new();
    csv_writer(&mut buf)?;
    std::fs::write(&csv_path, buf)?;
    let text = serde_json::to_string_pretty(json).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&json_path, text)?;
    Ok(())
}

/// Answer of a run as a short label.
pub fn answer_label(a: Option<Answer>) -> &'static str {
    match a {
        Some(Answer::InLanguage) => "InLanguage",
        Some(Answer::NotInLanguage) => "NotInLanguage",
        None => "Undecided",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{free_group_solver, with_forced_cost};
    use crate::word::Alphabet;
    use std::sync::Arc;

    fn free() -> Pipeline {
        build_pipeline("free", &PipelineOptions::default()).unwrap()
    }

    #[test]
    fn free_solver_ratio_is_one() {
        let s = RunSettings::new(SolverChoice::Total, ComplexityBound::Linear(1.0)).samples(200).seed(3);
        let t = profile_pipeline(&free(), &[1, 2, 5, 9, 20], &s).unwrap();
        for r in &t.rows {
            assert_eq!((r.mean_t, r.ratio, r.max_t as usize), (r.n as f64, 1.0, r.n));
        }
        assert_eq!(uniform_bound_metric(&t).unwrap(), 1.0);
        assert!(t.rows[0].exact && !t.rows[4].exact);
    }

    #[test]
    fn forced_total_with_deciding_filter_has_ratio_two() {
        let a = Alphabet::letters(2);
        let total = with_forced_cost(free_group_solver(&a), ComplexityBound::Quadratic(1.0));
        let p = Pipeline::custom("forced", a.clone(), total, free_group_solver(&a));
        let s = RunSettings::new(SolverChoice::Combined, ComplexityBound::Linear(1.0)).samples(100);
        let t = profile_pipeline(&p, &[4, 16, 64, 256], &s).unwrap();
        for r in &t.rows {
            assert_eq!(r.mean_t, (2 * r.n - 1) as f64);
            assert_eq!(r.contract_violations, 0);
            assert_eq!(r.undecided_frac, 0.0);
        }
        assert!((t.rows[3].ratio - 2.0).abs() < 0.01);
    }

    #[test]
    fn family_sums_are_bounded() {
        let a = Alphabet::letters(2);
        let total = with_forced_cost(free_group_solver(&a), ComplexityBound::Quadratic(1.0));
        let p = Pipeline::custom("forced", a.clone(), total, free_group_solver(&a));
        let s = RunSettings::new(SolverChoice::Combined, ComplexityBound::Linear(1.0)).samples(20);
        let t = profile_pipeline(&p, &(0..=64).collect::<Vec<_>>(), &s).unwrap();
        let sup = uniform_bound_metric(&t).unwrap();
        for spec in ["cauchy", "geom:0.9", "uniform:1:64", "point:10"] {
            let m = LengthInvariantMeasure::parse(spec, &a).unwrap();
            assert!(weighted_family_sum(&t, &m).value <= sup + 1e-12, "{spec}");
        }
    }

    #[test]
    fn csv_is_deterministic() {
        let cfg = ExperimentConfig {
            pipeline: "surface".into(),
            lengths: vec![2, 8, 8, 30],
            samples: 50,
            seed: 11,
            ..Default::default()
        };
        let a = avg_time_profile(&cfg).unwrap().to_csv_string().unwrap();
        let b = avg_time_profile(&cfg).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("n,samples,mean_T,ci_half,max_T,undecided_frac,ratio\n"));
        assert_eq!(a.lines().count(), 5);
    }

    #[test]
    fn config_validation() {
        let bad = ExperimentConfig { samples: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { lengths: vec![4, 2], ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"pipeline": "surface", "bogus": 1}"#).is_err());
        let c =
            ExperimentConfig::from_json(r#"{"pipeline": "braid:4", "lengths": [4, 8], "solver": "total"}"#).unwrap();
        assert_eq!((c.solver, c.samples), (SolverChoice::Total, 1000));
        assert!(bench_avg(&ExperimentConfig::default()).is_err());
    }

    #[test]
    fn integral_of_linear_time_is_one() {
        let p = free();
        let s = RunSettings::new(SolverChoice::Total, ComplexityBound::Linear(1.0)).samples(500);
        let m = LengthInvariantMeasure::parse("cauchy", &p.alphabet).unwrap();
        let e = integral_estimate(&p, &m, &s, 256).unwrap();
        let mass: f64 = (1..=256).map(|n| m.lengths().weight(n)).sum();
        assert!((e.at_truncation.value - mass).abs() < 1e-9, "{e:?}");
        assert!(!e.diverging);
    }

    #[test]
    fn cauchy_partial_sums_match_closed_form() {
        // T = n^m exactly: the summand is (6/π²) n^{-1-ε}
        let a = Alphabet::letters(2);
        let total = with_forced_cost(free_group_solver(&a), ComplexityBound::Quadratic(1.0));
        let p = Pipeline::custom("forced", a.clone(), Arc::clone(&total), total);
        let s = RunSettings::new(SolverChoice::Total, ComplexityBound::Linear(1.0)).samples(5);
        let r = cauchy_average_check(&p, 2, 0.5, 64, &s).unwrap();
        let want: f64 = (1..=64).map(|n| CAUCHY_NORMALIZER * (n as f64).powf(-1.5)).sum();
        let got = r.partial_sums.last().unwrap().1;
        assert!((got - want).abs() < 1e-9 * want);
        assert!(r.partial_sums.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn generic_experiment_basics() {
        let s = RunSettings::new(SolverChoice::Filter, ComplexityBound::Linear(1.0)).samples(100);
        let r = generic_density_experiment(&free(), &[2, 4, 8, 16], &s).unwrap();
        assert!(r.rows.iter().all(|r| r.undecided_frac == 0.0));
        assert!(r.fit.is_none() && r.fit_error.is_some());
        let surface = build_pipeline("surface", &PipelineOptions::default()).unwrap();
        let r = generic_density_experiment(&surface, &[4], &s).unwrap();
        assert_eq!((r.rows[0].undecided, r.rows[0].samples, r.rows[0].exact), (668, 4096, true));
    }

    #[test]
    fn env_overrides() {
        let mut c = ExperimentConfig::default();
        std::env::set_var(ENV_CUTOFF, "17");
        std::env::set_var(ENV_STEP_CAP, "99");
        c.apply_env().unwrap();
        std::env::remove_var(ENV_CUTOFF);
        std::env::remove_var(ENV_STEP_CAP);
        assert_eq!((c.cutoff, c.step_cap), (17, 99));
    }
}
