//! Densities of word sets, exponential-decay fits, and exact walk counts.

use std::fmt;

use serde::Serialize;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::word::{
    ball_count, enumerate_words, free_reduce, sample_word, seeded_rng, slice_count, Alphabet, Universe, Word,
};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Fits with `R²` below this are reported as not exponential.
pub const EXPONENTIAL_R2: f64 = 0.95;

pub type Predicate<'a> = &'a (dyn Fn(&Word) -> bool + Sync);

#[derive(Clone, Debug, PartialEq)]
pub enum DensityMode {
    Exact { numerator: BigUint, denominator: BigUint },
    MonteCarlo { samples: u64, lower: f64, upper: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    pub n: usize,
    pub value: f64,
    pub mode: DensityMode,
}

impl DensityEstimate {
    pub fn half_width(&self) -> f64 {
        match &self.mode {
            DensityMode::Exact { .. } => 0.0,
            DensityMode::MonteCarlo { lower, upper, .. } => (upper - lower) / 2.0,
        }
    }

    /// Whether `x` lies in the interval (or equals the exact value).
    pub fn covers(&self, x: f64) -> bool {
        match &self.mode {
            DensityMode::Exact { .. } => (self.value - x).abs() <= 1e-12,
            DensityMode::MonteCarlo { lower, upper, .. } => *lower - 1e-12 <= x && x <= *upper + 1e-12,
        }
    }

    pub fn exact_ratio(&self) -> Option<BigRational> {
        match &self.mode {
            DensityMode::Exact { numerator, denominator } => {
                Some(BigRational::new(numerator.clone().into(), denominator.clone().into()))
            }
            _ => None,
        }
    }
}

impl fmt::Display for DensityEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.mode {
            DensityMode::Exact { numerator, denominator } => {
                write!(f, "rho_{} = {numerator}/{denominator} ({:.6})", self.n, self.value)
            }
            DensityMode::MonteCarlo { samples, lower, upper } => {
                write!(f, "rho_{} ~ {:.6} [{lower:.6}, {upper:.6}] ({samples} samples)", self.n, self.value)
            }
        }
    }
}

/// Wilson score interval for `hits` out of `n` at normal quantile `z`.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn count_slice(pred: Predicate, alphabet: &Alphabet, universe: Universe, m: usize, budget: u64) -> Result<BigUint> {
    let hits = enumerate_words(alphabet, universe, m, budget)?.filter(|w| pred(w)).count();
    Ok(BigUint::from(hits))
}

/// `ρₙ(S) = |S ∩ Bₙ| / |Bₙ|` by enumeration of the ball.
pub fn density_exact(
    pred: Predicate,
    alphabet: &Alphabet,
    universe: Universe,
    n: usize,
    budget: u64,
) -> Result<DensityEstimate> {
    let denominator = ball_count(alphabet, universe, n);
    if denominator > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { requested: denominator.to_string(), limit: budget });
    }
    let mut numerator = BigUint::zero();
    for m in 0..=n {
        numerator += count_slice(pred, alphabet, universe, m, budget)?;
    }
    let value = ratio_f64(&numerator, &denominator);
    Ok(DensityEstimate { n, value, mode: DensityMode::Exact { numerator, denominator } })
}

/// Exact density of `S` within the length-`n` slice.
pub fn slice_density_exact(
    pred: Predicate,
    alphabet: &Alphabet,
    universe: Universe,
    n: usize,
    budget: u64,
) -> Result<DensityEstimate> {
    let numerator = count_slice(pred, alphabet, universe, n, budget)?;
    let denominator = slice_count(alphabet.size(), universe, n);
    let value = ratio_f64(&numerator, &denominator);
    Ok(DensityEstimate { n, value, mode: DensityMode::Exact { numerator, denominator } })
}

fn ratio_f64(a: &BigUint, b: &BigUint) -> f64 {
    BigRational::new(a.clone().into(), b.clone().into()).to_f64().unwrap_or(f64::NAN)
}

/// Estimate for one slice with a 99% Wilson interval.
pub fn slice_density_mc(
    pred: Predicate,
    alphabet: &Alphabet,
    universe: Universe,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<DensityEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let hits = (0..samples).filter(|_| pred(&sample_word(alphabet, universe, n, &mut rng))).count() as u64;
    let (lower, upper) = wilson_interval(hits, samples, Z99);
    Ok(DensityEstimate {
        n,
        value: hits as f64 / samples as f64,
        mode: DensityMode::MonteCarlo { samples, lower, upper },
    })
}

/// Ball estimate stratified by length: stratum `m` gets samples in
/// proportion to `|S_m| / |B_n|` (at least one), uses seed `seed ^ m`, and
/// the ball interval is the weighted sum of the stratum intervals. Strata no
/// larger than their allocation are enumerated instead.
pub fn density_mc(
    pred: Predicate,
    alphabet: &Alphabet,
    universe: Universe,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<DensityEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let ball = ball_count(alphabet, universe, n);
    let weights: Vec<f64> = (0..=n).map(|m| ratio_f64(&slice_count(alphabet.size(), universe, m), &ball)).collect();
    let strata: Vec<DensityEstimate> = (0..=n)
        .into_par_iter()
        .map(|m| {
            let s = ((samples as f64 * weights[m]).round() as u64).max(1);
            if slice_count(alphabet.size(), universe, m) <= BigUint::from(s) {
                return slice_density_exact(pred, alphabet, universe, m, s);
            }
            slice_density_mc(pred, alphabet, universe, m, s, seed ^ m as u64)
        })
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    let (mut lower, mut upper) = (0.0, 0.0);
    let mut used = 0;
    for (w, e) in weights.iter().zip(&strata) {
        value += w * e.value;
        match &e.mode {
            DensityMode::Exact { denominator, .. } => {
                lower += w * e.value;
                upper += w * e.value;
                used += denominator.to_u64().unwrap_or(u64::MAX);
            }
            DensityMode::MonteCarlo { samples, lower: l, upper: u } => {
                lower += w * l;
                upper += w * u;
                used += samples;
            }
        }
    }
    Ok(DensityEstimate {
        n,
        value: value.clamp(0.0, 1.0),
        mode: DensityMode::MonteCarlo { samples: used, lower: lower.clamp(0.0, 1.0), upper: upper.clamp(0.0, 1.0) },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpFit {
    pub sigma: f64,
    pub c: f64,
    pub r_squared: f64,
    /// Points with positive residual that entered the fit.
    pub points: Vec<(usize, f64)>,
}

impl ExpFit {
    pub fn is_exponential(&self) -> bool {
        self.r_squared >= EXPONENTIAL_R2
    }
}

/// Least squares of `ln aₙ` against `n`, giving `aₙ ≈ C σⁿ`. Nonpositive
/// values are dropped.
pub fn exp_fit(sequence: &[(usize, f64)]) -> Result<ExpFit> {
    let points: Vec<(usize, f64)> = sequence.iter().copied().filter(|&(_, a)| a > 0.0 && a.is_finite()).collect();
    if points.len() < 3 {
        return Err(Error::TooFewResiduals(points.len()));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, a)| a.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("exp_fit needs at least two distinct lengths".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot <= f64::EPSILON * m { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ExpFit { sigma: slope.exp(), c: intercept.exp(), r_squared, points })
}

/// Number of words of length `n` over `F_g` that represent the identity,
/// from the first-return decomposition: a trivial word is a sequence of
/// excursions `x · E · x⁻¹`, where `E` stays in the subtree below `x`.
pub fn cogrowth_count(g: usize, n: usize) -> BigUint {
    if n % 2 == 1 {
        return BigUint::zero();
    }
    let half = n / 2;
    let k = BigUint::from(2 * g);
    let km1 = BigUint::from(2 * g - 1);
    // e[m]: closed walks of length 2m from a vertex confined to the subtree
    // below it, which has 2g-1 children at every level
    let mut e = vec![BigUint::one()];
    for m in 1..=half {
        let s = (1..=m).fold(BigUint::zero(), |acc, j| acc + &e[j - 1] * &e[m - j]);
        e.push(&km1 * s);
    }
    let mut c = vec![BigUint::one()];
    for m in 1..=half {
        let s = (1..=m).fold(BigUint::zero(), |acc, j| acc + &k * &e[j - 1] * &c[m - j]);
        c.push(s);
    }
    c.swap_remove(half)
}

/// Brute-force count of trivial words of length `n` over `F_g`.
pub fn cogrowth_brute_force(g: usize, n: usize, budget: u64) -> Result<BigUint> {
    let a = Alphabet::numbered("x", g);
    let hits = enumerate_words(&a, Universe::AllWords, n, budget)?.filter(|w| free_reduce(w).is_empty()).count();
    Ok(BigUint::from(hits))
}

/// Exact return probability after `steps` steps of the simple random walk
/// on the `d`-regular tree, via the distance-from-root chain.
pub fn return_probability_dp(d: usize, steps: usize) -> Result<BigRational> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("tree degree must be at least 2, got {d}")));
    }
    // walk counts by distance
    let mut cur = vec![BigUint::zero(); steps + 2];
    cur[0] = BigUint::one();
    let dd = BigUint::from(d);
    let dm1 = BigUint::from(d - 1);
    for _ in 0..steps {
        let mut next = vec![BigUint::zero(); steps + 2];
        for m in 0..=steps {
            if cur[m].is_zero() {
                continue;
            }
            if m == 0 {
                next[1] += &cur[0] * &dd;
            } else {
                next[m - 1] += &cur[m];
                next[m + 1] += &cur[m] * &dm1;
            }
        }
        cur = next;
    }
    Ok(BigRational::new(cur[0].clone().into(), num_traits::pow(dd, steps).into()))
}
