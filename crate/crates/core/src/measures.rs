//! Length-invariant probability measures on words.
//!
//! A length-invariant measure factors as a length distribution `d(n)` times
//! the uniform distribution on the length-`n` slice of the universe, so every
//! measure here is a [`LengthDistribution`] paired with an alphabet and a
//! [`Universe`].

use std::f64::consts::PI;
use std::fmt;

use num_traits::ToPrimitive;
use rand::Rng;

use crate::error::{Error, Result};
use crate::word::{sample_word, slice_count, Alphabet, Universe, Word};

/// Default truncation horizon for the series-valued kinds.
pub const DEFAULT_HORIZON: usize = 4096;

/// `6 / π²`, the normalizer of `Σ 1/n²`.
pub const CAUCHY_NORMALIZER: f64 = 6.0 / (PI * PI);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LengthKind {
    /// `d(n) ∝ 1/n²` for `n ≥ 1`, `d(0) = 0`.
    Cauchy,
    /// `d(n) = (1 - r) rⁿ`.
    Geometric(f64),
    /// Uniform on `a..=b`.
    UniformRange(usize, usize),
    PointMass(usize),
}

impl LengthKind {
    /// Unnormalized-free weight of the untruncated distribution.
    pub fn limit_weight(self, n: usize) -> f64 {
        match self {
            LengthKind::Cauchy if n == 0 => 0.0,
            LengthKind::Cauchy => CAUCHY_NORMALIZER / (n as f64 * n as f64),
            LengthKind::Geometric(r) => (1.0 - r) * r.powi(n as i32),
            LengthKind::UniformRange(a, b) if (a..=b).contains(&n) => 1.0 / (b - a + 1) as f64,
            LengthKind::UniformRange(..) => 0.0,
            LengthKind::PointMass(m) => (m == n) as u8 as f64,
        }
    }
}

impl fmt::Display for LengthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthKind::Cauchy => write!(f, "cauchy"),
            LengthKind::Geometric(r) => write!(f, "geom:{r}"),
            LengthKind::UniformRange(a, b) => write!(f, "uniform:{a}:{b}"),
            LengthKind::PointMass(n) => write!(f, "point:{n}"),
        }
    }
}

/// A normalized table `d(0..=horizon)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthDistribution {
    kind: LengthKind,
    table: Vec<f64>,
    cdf: Vec<f64>,
    /// Mass of the untruncated distribution lost to truncation.
    truncation_loss: f64,
}

impl LengthDistribution {
    pub fn new(kind: LengthKind, horizon: usize) -> Result<Self> {
        let table: Vec<f64> = match kind {
            LengthKind::Geometric(r) if !(r > 0.0 && r < 1.0) => {
                return Err(Error::InvalidParameter(format!("geometric ratio {r} not in (0,1)")))
            }
            LengthKind::UniformRange(a, b) if a > b => {
                return Err(Error::InvalidParameter(format!("uniform range {a} > {b}")))
            }
            LengthKind::UniformRange(_, b) if horizon < b => {
                return Err(Error::InvalidParameter(format!("horizon {horizon} below range end {b}")))
            }
            LengthKind::UniformRange(_, b) => (0..=b).map(|n| kind.limit_weight(n)).collect(),
            LengthKind::PointMass(m) => (0..=m).map(|n| kind.limit_weight(n)).collect(),
            LengthKind::Cauchy if horizon == 0 => {
                return Err(Error::InvalidParameter("cauchy needs horizon ≥ 1".into()))
            }
            _ => (0..=horizon).map(|n| kind.limit_weight(n)).collect(),
        };
        let raw: f64 = table.iter().sum();
        let table: Vec<f64> = table.iter().map(|d| d / raw).collect();
        Ok(Self::from_table(kind, table, (1.0 - raw).max(0.0)))
    }

    fn from_table(kind: LengthKind, table: Vec<f64>, truncation_loss: f64) -> Self {
        let mut acc = 0.0;
        let cdf = table
            .iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect();
        LengthDistribution { kind, table, cdf, truncation_loss }
    }

    pub fn cauchy(horizon: usize) -> Result<Self> {
        Self::new(LengthKind::Cauchy, horizon)
    }

    pub fn geometric(r: f64, horizon: usize) -> Result<Self> {
        Self::new(LengthKind::Geometric(r), horizon)
    }

    pub fn uniform(a: usize, b: usize) -> Result<Self> {
        Self::new(LengthKind::UniformRange(a, b), b)
    }

    pub fn point(n: usize) -> Self {
        Self::new(LengthKind::PointMass(n), n).expect("point mass is always valid")
    }

    pub fn kind(&self) -> LengthKind {
        self.kind
    }

    /// `d(n)`; zero beyond the horizon.
    pub fn weight(&self, n: usize) -> f64 {
        self.table.get(n).copied().unwrap_or(0.0)
    }

    pub fn horizon(&self) -> usize {
        self.table.len() - 1
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Untruncated mass lost before renormalization.
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    /// `Σ_{m > n} d(m)`.
    pub fn tail_beyond(&self, n: usize) -> f64 {
        self.table.iter().skip(n + 1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.table.iter().enumerate().map(|(n, d)| n as f64 * d).sum()
    }

    /// Restricts to lengths `≤ n` and renormalizes.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let table: Vec<f64> = self.table.iter().take(n + 1).copied().collect();
        let kept: f64 = table.iter().sum();
        if kept <= 0.0 {
            return Err(Error::InvalidParameter(format!("no mass at lengths ≤ {n}")));
        }
        let loss = self.truncation_loss + (1.0 - kept) * (1.0 - self.truncation_loss);
        Ok(Self::from_table(self.kind, table.iter().map(|d| d / kept).collect(), loss))
    }

    /// Sets `d(0) = p0` and rescales the remaining lengths to total `1 - p0`.
    pub fn with_empty_weight(&self, p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidParameter(format!("empty-word weight {p0} not in [0,1]")));
        }
        let rest: f64 = self.table.iter().skip(1).sum();
        if rest <= 0.0 && p0 < 1.0 {
            return Err(Error::InvalidParameter("no mass outside length 0 to rescale".into()));
        }
        let mut table = vec![p0];
        table.extend(self.table.iter().skip(1).map(|d| if rest > 0.0 { d * (1.0 - p0) / rest } else { 0.0 }));
        Ok(Self::from_table(self.kind, table, self.truncation_loss))
    }

    pub fn sample_length<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen::<f64>() * self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c <= u);
        // skip zero-weight lengths that share a cdf value
        let i = i.min(self.table.len() - 1);
        if self.table[i] > 0.0 {
            i
        } else {
            (i..self.table.len()).find(|&j| self.table[j] > 0.0).unwrap_or(i)
        }
    }
}

/// Length distribution plus alphabet and universe.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthInvariantMeasure {
    alphabet: Alphabet,
    universe: Universe,
    lengths: LengthDistribution,
}

impl LengthInvariantMeasure {
    pub fn new(alphabet: Alphabet, universe: Universe, lengths: LengthDistribution) -> Self {
        LengthInvariantMeasure { alphabet, universe, lengths }
    }

    /// Parses `cauchy`, `geom:0.9`, `uniform:1:256`, `point:128`, each with an
    /// optional `@reduced` suffix. Series kinds accept a trailing `:N` horizon
    /// (`cauchy:256`, `geom:0.9:512`).
    pub fn parse(spec: &str, alphabet: &Alphabet) -> Result<Self> {
        let (body, universe) = match spec.trim().strip_suffix("@reduced") {
            Some(b) => (b, Universe::ReducedWords),
            None => (spec.trim(), Universe::AllWords),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let num = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse(format!("bad integer `{s}` in measure `{spec}`")))
        };
        let lengths = match parts.as_slice() {
            ["cauchy"] => LengthDistribution::cauchy(DEFAULT_HORIZON)?,
            ["cauchy", n] => LengthDistribution::cauchy(num(n)?)?,
            ["geom", r] | ["geom", r, _] => {
                let r: f64 = r.parse().map_err(|_| Error::Parse(format!("bad ratio in `{spec}`")))?;
                let horizon = if parts.len() == 3 { num(parts[2])? } else { DEFAULT_HORIZON };
                LengthDistribution::geometric(r, horizon)?
            }
            ["uniform", a, b] => LengthDistribution::uniform(num(a)?, num(b)?)?,
            ["point", n] => LengthDistribution::point(num(n)?),
            _ => return Err(Error::Parse(format!("unknown measure spec `{spec}`"))),
        };
        Ok(Self::new(alphabet.clone(), universe, lengths))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn lengths(&self) -> &LengthDistribution {
        &self.lengths
    }

    /// Number of words in the universe of length `n`, as a float.
    pub fn slice_size(&self, n: usize) -> f64 {
        slice_count(self.alphabet.size(), self.universe, n).to_f64().unwrap_or(f64::INFINITY)
    }

    /// `μ(w) = d(|w|) / |slice(|w|)|`.
    pub fn mass(&self, w: &Word) -> Result<f64> {
        self.alphabet.check(w)?;
        if !self.universe.admits(w) {
            return Err(Error::NotReduced);
        }
        Ok(self.lengths.weight(w.len()) / self.slice_size(w.len()))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Word {
        let n = self.lengths.sample_length(rng);
        sample_word(&self.alphabet, self.universe, n, rng)
    }

    pub fn truncated(&self, n: usize) -> Result<Self> {
        Ok(Self::new(self.alphabet.clone(), self.universe, self.lengths.truncated(n)?))
    }
}

impl fmt::Display for LengthInvariantMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lengths.kind())?;
        if self.universe == Universe::ReducedWords {
            write!(f, "@reduced")?;
        }
        Ok(())
    }
}
