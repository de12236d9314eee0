//! Braid groups: words, the Garside normal form (a quadratic total solver),
//! a generic filter chain, and the Artin action used as ground truth.
//!
//! The filter chain for `B_n` is: reject when the induced permutation is not
//! the identity; otherwise forget all strands but the first three, evaluate
//! the resulting `B_3` braid in `SL(2, Z)` (or `SL(2, Z/p)`), and reject when
//! the matrix is not the identity. The kernel of `B_3 → SL(2, Z)` is the
//! centre generated by `Δ⁴`, so the chain can stay undecided on nontrivial
//! braids but never rejects a trivial one.
//!
//! Permutations are stored as `perm[start] = end`: the strand starting at
//! position `k` ends at position `perm[k]`. Products read left to right.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::solver::{parallel_combine, Answer, Factory, MachineFactory, Replay, Role, Status, StepMachine};
use crate::word::{Alphabet, Letter, Word};

/// Default modulus for the fast filter mode, `2³¹ − 1`.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// `σᵢ^{±1}` letters on `n` strands, written as signed 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<i32>) -> Result<Self> {
        if strands < 2 {
            return Err(Error::InvalidParameter("braids need at least 2 strands".into()));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize >= strands) {
            return Err(Error::UnknownLetter(format!("σ{bad} on {strands} strands")));
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn identity(strands: usize) -> Self {
        BraidWord { strands, letters: Vec::new() }
    }

    /// Whitespace-separated nonzero integers, e.g. `1 2 -1`.
    pub fn parse(text: &str, strands: usize) -> Result<Self> {
        let letters = text
            .split_whitespace()
            .map(|t| t.parse::<i32>().map_err(|_| Error::Parse(format!("bad braid letter `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(strands, letters)
    }

    /// Reads a word over [`braid_alphabet`]: generator `i` is `σ_{i+1}`.
    pub fn from_word(w: &Word, strands: usize) -> Result<Self> {
        let letters = w.iter().map(|l| (l.gen() as i32 + 1) * l.sign()).collect();
        Self::new(strands, letters)
    }

    pub fn to_word(&self) -> Word {
        self.letters.iter().map(|&l| Letter::new(l.unsigned_abs() - 1, l < 0)).collect()
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &BraidWord) -> BraidWord {
        assert_eq!(self.strands, other.strands);
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        BraidWord { strands: self.strands, letters }
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord { strands: self.strands, letters: self.letters.iter().rev().map(|l| -l).collect() }
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.letters.iter().map(i32::to_string).collect();
        write!(f, "{}", s.join(" "))
    }
}

/// Generators `s1 .. s{n-1}` for braid words in the general word format.
pub fn braid_alphabet(strands: usize) -> Alphabet {
    Alphabet::numbered("s", strands - 1)
}

// ---------------------------------------------------------------------------
// Permutations

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<u8>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u8).collect())
    }

    /// Half twist: reverses all positions.
    pub fn delta(n: usize) -> Self {
        Permutation((0..n as u8).rev().collect())
    }

    pub fn images(&self) -> &[u8] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| p as usize == i)
    }

    pub fn is_delta(&self) -> bool {
        let n = self.0.len();
        self.0.iter().enumerate().all(|(i, &p)| p as usize == n - 1 - i)
    }

    fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p as usize] = i as u8;
        }
        Permutation(inv)
    }

    /// `self · σᵢ` (0-based `i`): swap end positions `i, i+1`.
    fn then_swap(&mut self, i: usize) {
        for p in self.0.iter_mut() {
            if *p as usize == i {
                *p += 1;
            } else if *p as usize == i + 1 {
                *p -= 1;
            }
        }
    }

    /// `σᵢ⁻¹ · self`: swap start positions `i, i+1`.
    fn strip_front(&mut self, i: usize) {
        self.0.swap(i, i + 1);
    }

    /// Generators that left-divide the permutation braid: strands starting
    /// at `i, i+1` cross.
    fn starting_set(&self) -> u64 {
        (0..self.0.len() - 1).filter(|&i| self.0[i] > self.0[i + 1]).fold(0, |m, i| m | 1 << i)
    }

    /// Generators that right-divide: strands ending at `i, i+1` cross.
    fn finishing_set(&self) -> u64 {
        let inv = self.inverse();
        (0..inv.0.len() - 1).filter(|&i| inv.0[i] > inv.0[i + 1]).fold(0, |m, i| m | 1 << i)
    }

    /// Conjugation by `Δ`, which sends `σᵢ` to `σ_{n-i}`.
    fn flip(&self) -> Permutation {
        let n = self.0.len() as u8;
        Permutation((0..n).map(|k| n - 1 - self.0[(n - 1 - k) as usize]).collect())
    }

    /// Permutation braid of `Δσᵢ⁻¹` (0-based `i`).
    fn delta_over(n: usize, i: usize) -> Permutation {
        let mut p = Permutation::delta(n);
        for x in p.0.iter_mut() {
            if *x as usize == i {
                *x += 1;
            } else if *x as usize == i + 1 {
                *x -= 1;
            }
        }
        p
    }

    fn single(n: usize, i: usize) -> Permutation {
        let mut p = Permutation::identity(n);
        p.then_swap(i);
        p
    }

    /// Disjoint cycles of length ≥ 2, 1-based.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for s in 0..self.0.len() {
            if seen[s] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut k = s;
            while !seen[k] {
                seen[k] = true;
                cyc.push(k + 1);
                k = self.0[k] as usize;
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }
}

/// Image of the braid in the symmetric group.
pub fn permutation_of(b: &BraidWord) -> Permutation {
    let mut p = Permutation::identity(b.strands);
    for &l in &b.letters {
        p.then_swap(l.unsigned_abs() as usize - 1);
    }
    p
}

// ---------------------------------------------------------------------------
// Artin action

/// Images of the free generators `x₁..x_n` under the automorphism induced by
/// `b`; `σᵢ` sends `xᵢ ↦ xᵢ xᵢ₊₁ xᵢ⁻¹`, `xᵢ₊₁ ↦ xᵢ`. The braid is trivial iff
/// every `x_j` is fixed.
pub fn artin_action(b: &BraidWord) -> Vec<Word> {
    let n = b.strands;
    let mut images: Vec<Vec<Letter>> = (0..n as u32).map(|j| vec![Letter::pos(j)]).collect();
    let inv = |w: &[Letter]| -> Vec<Letter> { w.iter().rev().map(|l| l.inverse()).collect() };
    let cat = |parts: &[&[Letter]]| -> Vec<Letter> {
        let mut s = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
        for p in parts {
            for &l in *p {
                crate::word::push_reduced(&mut s, l);
            }
        }
        s
    };
    for &l in &b.letters {
        let i = l.unsigned_abs() as usize - 1;
        let (xi, xj) = (images[i].clone(), images[i + 1].clone());
        if l > 0 {
            images[i] = cat(&[&xi, &xj, &inv(&xi)]);
            images[i + 1] = xi;
        } else {
            images[i + 1] = cat(&[&inv(&xj), &xi, &xj]);
            images[i] = xj;
        }
    }
    images.into_iter().map(Word::from_letters).collect()
}

pub fn artin_is_trivial(b: &BraidWord) -> bool {
    artin_action(b).iter().enumerate().all(|(j, w)| w.len() == 1 && w.letters()[0] == Letter::pos(j as u32))
}

// ---------------------------------------------------------------------------
// Garside normal form

/// `Δ^inf · A₁ ⋯ A_ℓ` with left-weighted permutation-braid factors, none of
/// them `Δ` or trivial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GarsideNormalForm {
    pub strands: usize,
    pub inf: i64,
    pub factors: Vec<Permutation>,
}

impl GarsideNormalForm {
    pub fn is_trivial(&self) -> bool {
        self.inf == 0 && self.factors.is_empty()
    }

    /// Every adjacent pair `(A, B)` satisfies `S(B) ⊆ F(A)`.
    pub fn is_left_weighted(&self) -> bool {
        self.factors.windows(2).all(|p| p[1].starting_set() & !p[0].finishing_set() == 0)
    }

    fn from_positive(strands: usize, inf: i64) -> Self {
        GarsideNormalForm { strands, inf, factors: Vec::new() }
    }

    /// Right-multiplies by a simple element and restores left-weightedness
    /// with one right-to-left pass; returns the units spent.
    fn push_simple(&mut self, b: Permutation) -> u64 {
        let mut cost = 1;
        if b.is_identity() {
            return cost;
        }
        self.factors.push(b);
        let mut j = self.factors.len() - 1;
        while j > 0 {
            cost += 1;
            let (left, right) = self.factors.split_at_mut(j);
            let moved = left_weight(&mut left[j - 1], &mut right[0]);
            cost += moved;
            if moved == 0 {
                break;
            }
            j -= 1;
        }
        let deltas = self.factors.iter().take_while(|f| f.is_delta()).count();
        if deltas > 0 {
            self.factors.drain(..deltas);
            self.inf += deltas as i64;
            cost += deltas as u64;
        }
        while self.factors.last().is_some_and(Permutation::is_identity) {
            self.factors.pop();
        }
        cost
    }
}

/// Slides generators from the front of `b` to the back of `a` until
/// `S(b) ⊆ F(a)`; returns the number of generators moved.
fn left_weight(a: &mut Permutation, b: &mut Permutation) -> u64 {
    let mut moved = 0;
    loop {
        let free = b.starting_set() & !a.finishing_set();
        if free == 0 {
            return moved;
        }
        let i = free.trailing_zeros() as usize;
        a.then_swap(i);
        b.strip_front(i);
        moved += 1;
    }
}

/// Normal form and the number of accounted units (factor updates).
pub fn garside_with_cost(b: &BraidWord) -> (GarsideNormalForm, u64) {
    let n = b.strands;
    // σᵢ⁻¹ = Δ⁻¹ · (Δσᵢ⁻¹); moving every Δ⁻¹ to the front flips each simple
    // factor once per inverse letter to its right.
    let negatives = b.letters.iter().filter(|&&l| l < 0).count();
    let mut nf = GarsideNormalForm::from_positive(n, -(negatives as i64));
    let mut after = negatives;
    let mut cost = 1;
    for &l in &b.letters {
        let i = l.unsigned_abs() as usize - 1;
        let simple = if l > 0 {
            Permutation::single(n, i)
        } else {
            after -= 1;
            Permutation::delta_over(n, i)
        };
        let simple = if after % 2 == 1 { simple.flip() } else { simple };
        cost += nf.push_simple(simple);
    }
    (nf, cost)
}

pub fn garside_normal_form(b: &BraidWord) -> GarsideNormalForm {
    garside_with_cost(b).0
}

pub fn is_trivial_braid(b: &BraidWord) -> bool {
    garside_normal_form(b).is_trivial()
}

// ---------------------------------------------------------------------------
// Strand forgetting and SL(2) evaluation

/// Deletes every strand not in `keep` (1-based starting positions) from a
/// pure braid, giving a braid on `keep.len()` strands.
pub fn forget_strands(b: &BraidWord, keep: &[usize]) -> Result<BraidWord> {
    if !permutation_of(b).is_identity() {
        return Err(Error::NotPure);
    }
    if keep.len() < 2 || keep.iter().any(|&k| k == 0 || k > b.strands) {
        return Err(Error::InvalidParameter(format!("cannot keep strands {keep:?} of {}", b.strands)));
    }
    let kept: Vec<bool> = (1..=b.strands).map(|s| keep.contains(&s)).collect();
    // strand id at each position
    let mut at: Vec<usize> = (0..b.strands).collect();
    let mut out = Vec::new();
    for &l in &b.letters {
        let i = l.unsigned_abs() as usize - 1;
        if kept[at[i]] && kept[at[i + 1]] {
            let r = at[..=i].iter().filter(|&&s| kept[s]).count() as i32;
            out.push(r * l.signum());
        }
        at.swap(i, i + 1);
    }
    BraidWord::new(keep.len(), out)
}

/// 2×2 integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix2(pub [BigInt; 4]);

impl IntMatrix2 {
    pub fn identity() -> Self {
        IntMatrix2([BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()])
    }

    pub fn from_i64(m: [i64; 4]) -> Self {
        IntMatrix2(m.map(BigInt::from))
    }

    pub fn det(&self) -> BigInt {
        let [a, b, c, d] = &self.0;
        a * d - b * c
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    fn max_bits(&self) -> u64 {
        self.0.iter().map(|x| x.bits()).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sl2Mode {
    Exact,
    ModP(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sl2Value {
    Exact(IntMatrix2),
    ModP { entries: [u64; 4], p: u64 },
}

impl Sl2Value {
    pub fn is_identity(&self) -> bool {
        match self {
            Sl2Value::Exact(m) => m.is_identity(),
            Sl2Value::ModP { entries, .. } => *entries == [1, 0, 0, 1],
        }
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Evaluates a 3-strand braid under `σ₁ ↦ [[1,1],[0,1]]`,
/// `σ₂ ↦ [[1,0],[-1,1]]`. Returns the value and its cost: one unit per
/// letter mod p, and one unit per 64-bit limb of the largest entry per
/// letter in exact mode.
pub fn sl2_eval_with_cost(b: &BraidWord, mode: Sl2Mode) -> Result<(Sl2Value, u64)> {
    if b.strands != 3 {
        return Err(Error::InvalidParameter(format!("SL(2) evaluation needs 3 strands, got {}", b.strands)));
    }
    match mode {
        Sl2Mode::Exact => {
            let mut m = IntMatrix2::identity();
            let mut cost = 0u64;
            for &l in &b.letters {
                let [a, bb, c, d] = &mut m.0;
                match l {
                    1 => {
                        *bb += &*a;
                        *d += &*c;
                    }
                    -1 => {
                        *bb -= &*a;
                        *d -= &*c;
                    }
                    2 => {
                        *a -= &*bb;
                        *c -= &*d;
                    }
                    _ => {
                        *a += &*bb;
                        *c += &*d;
                    }
                }
                cost += m.max_bits().div_ceil(64).max(1);
            }
            Ok((Sl2Value::Exact(m), cost.max(1)))
        }
        Sl2Mode::ModP(p) => {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            let [mut a, mut bb, mut c, mut d] = [1u64, 0, 0, 1];
            let add = |x: u64, y: u64| ((x as u128 + y as u128) % p as u128) as u64;
            let sub = |x: u64, y: u64| ((x as u128 + p as u128 - y as u128) % p as u128) as u64;
            for &l in &b.letters {
                match l {
                    1 => {
                        bb = add(bb, a);
                        d = add(d, c);
                    }
                    -1 => {
                        bb = sub(bb, a);
                        d = sub(d, c);
                    }
                    2 => {
                        a = sub(a, bb);
                        c = sub(c, d);
                    }
                    _ => {
                        a = add(a, bb);
                        c = add(c, d);
                    }
                }
            }
            Ok((Sl2Value::ModP { entries: [a, bb, c, d], p }, (b.len() as u64).max(1)))
        }
    }
}

pub fn sl2_eval(b: &BraidWord, mode: Sl2Mode) -> Result<Sl2Value> {
    Ok(sl2_eval_with_cost(b, mode)?.0)
}

// ---------------------------------------------------------------------------
// Solvers and the pipeline

/// Garside-based total solver over [`braid_alphabet`].
pub struct GarsideSolver {
    strands: usize,
}

impl MachineFactory for GarsideSolver {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        let n = self.strands;
        let w = w.clone();
        Box::new(Replay::new(move || match BraidWord::from_word(&w, n) {
            Ok(b) => {
                let (nf, cost) = garside_with_cost(&b);
                let a = if nf.is_trivial() { Answer::InLanguage } else { Answer::NotInLanguage };
                (Status::Decided(a), cost)
            }
            // letters outside B_n are not words of this group
            Err(_) => (Status::Decided(Answer::NotInLanguage), 1),
        }))
    }

    fn role(&self) -> Role {
        Role::Total
    }

    fn describe(&self) -> String {
        format!("Garside normal form in B{}", self.strands)
    }
}

/// Outcome of the filter chain and where it stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterStage {
    Permutation,
    Sl2,
    Undecided,
}

/// Runs the filter chain, returning the stage that decided and the cost:
/// `|w|` for the permutation pass, `|w|` for forgetting, then the SL(2) cost.
pub fn braid_filter_with_cost(b: &BraidWord, mode: Sl2Mode) -> Result<(FilterStage, u64)> {
    let scan = (b.len() as u64).max(1);
    if !permutation_of(b).is_identity() {
        return Ok((FilterStage::Permutation, scan));
    }
    let b3 = forget_strands(b, &[1, 2, 3])?;
    let (v, c) = sl2_eval_with_cost(&b3, mode)?;
    let cost = scan + b.len() as u64 + c;
    Ok((if v.is_identity() { FilterStage::Undecided } else { FilterStage::Sl2 }, cost))
}

pub struct BraidFilter {
    strands: usize,
    mode: Sl2Mode,
}

impl MachineFactory for BraidFilter {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        let (n, mode) = (self.strands, self.mode);
        let w = w.clone();
        Box::new(Replay::new(move || {
            match BraidWord::from_word(&w, n).and_then(|b| braid_filter_with_cost(&b, mode)) {
                Ok((FilterStage::Undecided, c)) => (Status::UndecidedFinal, c),
                Ok((_, c)) => (Status::Decided(Answer::NotInLanguage), c),
                Err(_) => (Status::UndecidedFinal, 1),
            }
        }))
    }

    fn role(&self) -> Role {
        Role::Partial
    }

    fn describe(&self) -> String {
        let mode = match self.mode {
            Sl2Mode::Exact => "exact".to_string(),
            Sl2Mode::ModP(p) => format!("mod {p}"),
        };
        format!("B{} filter (permutation, forget to B3, SL2 {mode})", self.strands)
    }
}

pub struct BraidPipeline {
    pub strands: usize,
    pub alphabet: Alphabet,
    pub total: Factory,
    pub filter: Factory,
    pub combined: Factory,
}

/// Total, filter and combined solvers for `B_n`, `n ≥ 3`.
pub fn braid_pipeline(strands: usize, mode: Sl2Mode) -> Result<BraidPipeline> {
    if strands < 3 {
        return Err(Error::InvalidParameter("the braid pipeline needs n ≥ 3".into()));
    }
    if let Sl2Mode::ModP(p) = mode {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
    }
    let total: Factory = Arc::new(GarsideSolver { strands });
    let filter: Factory = Arc::new(BraidFilter { strands, mode });
    let combined = parallel_combine(Arc::clone(&total), Arc::clone(&filter));
    Ok(BraidPipeline { strands, alphabet: braid_alphabet(strands), total, filter, combined })
}
