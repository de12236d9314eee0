//! Named solver pipelines: a total solver, a partial filter and their
//! parallel combination over one alphabet.
//!
//! | name               | group                               |
//! |--------------------|-------------------------------------|
//! | `free`, `free:g`   | free group of rank `g` (default 2)  |
//! | `surface`          | genus-2 surface group               |
//! | `braid:n`          | braid group `B_n`                   |
//! | `product:G`        | `G × F(a,b)` for `G` = `z`, `free`, `surface` |
//! | `membership:FILE`  | subgroup of `F(a,b)` listed in FILE |

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::braid::{braid_pipeline, Sl2Mode, DEFAULT_PRIME};
use crate::error::{Error, Result};
use crate::membership::{membership_pipeline, parse_subgroup};
use crate::presentation::{dehn_solver, Presentation, DEFAULT_LAMBDA};
use crate::solver::{
    free_group_solver, parallel_combine, product_pipeline, quotient_filter_checked, run, with_forced_cost,
    ComplexityBound, Factory, Homomorphism, RunRecord,
};
use crate::word::{Alphabet, Word};

/// Which machine of a pipeline to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    #[default]
    Combined,
    Total,
    Filter,
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "combined" => Ok(SolverChoice::Combined),
            "total" => Ok(SolverChoice::Total),
            "filter" => Ok(SolverChoice::Filter),
            _ => Err(Error::Parse(format!("unknown solver `{s}` (combined | total | filter)"))),
        }
    }
}

/// Options that change how a named pipeline is assembled.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub sl2: Sl2Mode,
    /// Pads the total solver to at least this cost before combining.
    pub forced_total: Option<ComplexityBound>,
    /// Ambient free generators for `membership:` pipelines.
    pub generators: Vec<String>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            sl2: Sl2Mode::ModP(DEFAULT_PRIME),
            forced_total: None,
            generators: vec!["a".into(), "b".into()],
        }
    }
}

/// Parses `exact`, `modp` or `modp:P`.
pub fn parse_sl2_mode(s: &str) -> Result<Sl2Mode> {
    match s.split_once(':') {
        None if s == "exact" => Ok(Sl2Mode::Exact),
        None if s == "modp" => Ok(Sl2Mode::ModP(DEFAULT_PRIME)),
        Some(("modp", p)) => p.parse().map(Sl2Mode::ModP).map_err(|_| Error::Parse(format!("bad prime `{p}`"))),
        _ => Err(Error::Parse(format!("unknown SL2 mode `{s}` (exact | modp[:P])"))),
    }
}

#[derive(Clone)]
pub struct Pipeline {
    pub name: String,
    pub alphabet: Alphabet,
    pub total: Factory,
    pub filter: Factory,
    pub combined: Factory,
    /// Pipelines whose words are braids read `1 2 -1` input.
    pub braid_strands: Option<usize>,
    garside: bool,
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pipeline").field("name", &self.name).field("alphabet", &self.alphabet).finish()
    }
}

impl Pipeline {
    fn assemble(name: &str, alphabet: Alphabet, total: Factory, filter: Factory, opts: &PipelineOptions) -> Self {
        let total = match &opts.forced_total {
            Some(b) => with_forced_cost(total, b.clone()),
            None => total,
        };
        let combined = parallel_combine(Arc::clone(&total), Arc::clone(&filter));
        Pipeline { name: name.to_string(), alphabet, total, filter, combined, braid_strands: None, garside: false }
    }

    /// A pipeline from explicit parts, combined as given.
    pub fn custom(name: &str, alphabet: Alphabet, total: Factory, filter: Factory) -> Self {
        Self::assemble(name, alphabet, total, filter, &PipelineOptions::default())
    }

    pub fn machine(&self, choice: SolverChoice) -> &Factory {
        match choice {
            SolverChoice::Combined => &self.combined,
            SolverChoice::Total => &self.total,
            SolverChoice::Filter => &self.filter,
        }
    }

    /// Linear, except quadratic for the Garside solver on its own.
    pub fn default_bound(&self, choice: SolverChoice) -> ComplexityBound {
        if self.garside && choice == SolverChoice::Total {
            ComplexityBound::Quadratic(1.0)
        } else {
            ComplexityBound::Linear(1.0)
        }
    }

    /// Reads a word in the pipeline's format: braid integers for braid
    /// pipelines, generator names otherwise.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        match self.braid_strands {
            Some(n) if looks_numeric(text) => Ok(crate::braid::BraidWord::parse(text, n)?.to_word()),
            _ => self.alphabet.parse_word(text),
        }
    }

    pub fn solve(&self, w: &Word, choice: SolverChoice, cap: u64) -> Result<RunRecord> {
        self.alphabet.check(w)?;
        run(self.machine(choice).as_ref(), w, cap)
    }
}

fn looks_numeric(text: &str) -> bool {
    let t = text.trim();
    !t.is_empty() && t.split_whitespace().all(|tok| tok.parse::<i32>().is_ok())
}

/// Genus-2 surface group with the Dehn total solver and the filter that
/// maps onto `F(a, c)` by killing `b` and `d`.
pub fn surface_parts() -> Result<(Alphabet, Factory, Factory)> {
    let p = Presentation::surface_genus2();
    let total = dehn_solver(&p, DEFAULT_LAMBDA)?;
    let free = Alphabet::new(&["a", "c"])?;
    let phi = Homomorphism::parse(p.alphabet(), &free, &["a", "ε", "c", "ε"])?;
    let filter = quotient_filter_checked(phi, free_group_solver(&free), p.relators())?;
    Ok((p.alphabet().clone(), total, filter))
}

pub fn build_pipeline(spec: &str, opts: &PipelineOptions) -> Result<Pipeline> {
    let spec = spec.trim();
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let rank = |a: Option<&str>, default: usize| -> Result<usize> {
        match a {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| Error::Parse(format!("bad number in pipeline `{spec}`"))),
        }
    };
    match head {
        "free" => {
            let g = rank(arg, 2)?;
            if g == 0 {
                return Err(Error::InvalidParameter("free group needs a generator".into()));
            }
            let alphabet = if g <= 26 { Alphabet::letters(g) } else { Alphabet::numbered("x", g) };
            let total = free_group_solver(&alphabet);
            // the free solver always decides, so it doubles as its own filter
            let filter = free_group_solver(&alphabet);
            Ok(Pipeline::assemble(spec, alphabet, total, filter, opts))
        }
        "surface" => {
            let (alphabet, total, filter) = surface_parts()?;
            Ok(Pipeline::assemble(spec, alphabet, total, filter, opts))
        }
        "braid" => {
            let n = rank(arg, 4)?;
            let b = braid_pipeline(n, opts.sl2)?;
            let mut p = Pipeline::assemble(spec, b.alphabet, b.total, b.filter, opts);
            p.braid_strands = Some(n);
            p.garside = true;
            Ok(p)
        }
        "product" => {
            let (g_alphabet, g_solver) = match arg {
                Some("z") => {
                    let a = Alphabet::new(&["t"])?;
                    let s = free_group_solver(&a);
                    (a, s)
                }
                Some("free") => {
                    let a = Alphabet::new(&["x", "y"])?;
                    let s = free_group_solver(&a);
                    (a, s)
                }
                Some("surface") => {
                    let (a, total, _) = surface_parts()?;
                    (a, total)
                }
                _ => return Err(Error::Parse(format!("unknown product factor in `{spec}` (z | free | surface)"))),
            };
            let prod = product_pipeline(g_solver, &g_alphabet)?;
            Ok(Pipeline::assemble(spec, prod.alphabet, prod.total, prod.filter, opts))
        }
        "membership" => {
            let path = arg.ok_or_else(|| Error::Parse("membership pipeline needs a subgroup file".into()))?;
            let alphabet = Alphabet::new(&opts.generators)?;
            let text = std::fs::read_to_string(Path::new(path))?;
            let gens = parse_subgroup(&text, &alphabet)?;
            let m = membership_pipeline(&alphabet, &gens)?;
            Ok(Pipeline::assemble(spec, alphabet, m.total, m.filter, opts))
        }
        _ => Err(Error::Parse(format!("unknown pipeline `{spec}`"))),
    }
}
