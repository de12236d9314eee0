//! Alphabets, words over generators and their inverses, free reduction,
//! exhaustive enumeration of length slices and uniform sampling.
//!
//! Letters are numbered by a dense code `2 * generator + inverse`, so an
//! alphabet with `g` generators has `k = 2g` letters and the formal inverse of
//! code `c` is `c ^ 1`. Enumeration order is lexicographic in these codes.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default cap on the number of words a single enumeration may produce.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 28;

/// A generator or the formal inverse of one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    gen: u32,
    inverse: bool,
}

impl Letter {
    pub const fn new(gen: u32, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub const fn pos(gen: u32) -> Self {
        Letter::new(gen, false)
    }

    pub const fn neg(gen: u32) -> Self {
        Letter::new(gen, true)
    }

    pub const fn gen(self) -> u32 {
        self.gen
    }

    pub const fn is_inverse(self) -> bool {
        self.inverse
    }

    /// +1 for a generator, -1 for an inverse.
    pub const fn sign(self) -> i32 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub const fn inverse(self) -> Self {
        Letter::new(self.gen, !self.inverse)
    }

    pub const fn code(self) -> usize {
        2 * self.gen as usize + self.inverse as usize
    }

    pub const fn from_code(code: usize) -> Self {
        Letter::new((code / 2) as u32, code % 2 == 1)
    }
}

/// A finite sequence of letters. The empty word represents the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn from_codes(codes: &[usize]) -> Self {
        Word(codes.iter().map(|&c| Letter::from_code(c)).collect())
    }

    /// Builds a word from signed 1-based generator indices: `2` is the second
    /// generator, `-1` the inverse of the first. Zero is rejected.
    pub fn from_signed(indices: &[i32]) -> Result<Self> {
        indices
            .iter()
            .map(|&i| match i {
                0 => Err(Error::Parse("zero is not a letter".into())),
                i if i > 0 => Ok(Letter::pos(i as u32 - 1)),
                i => Ok(Letter::neg((-i) as u32 - 1)),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Letter> {
        self.0.iter()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The formal inverse: letters reversed and each one inverted.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Cyclic rotation moving the first `k` letters to the end.
    pub fn rotate(&self, k: usize) -> Word {
        if self.is_empty() {
            return Word::empty();
        }
        let mut v = self.0.clone();
        v.rotate_left(k % self.len());
        Word(v)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != p[1].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&a), Some(&b)) if self.len() > 1 => a != b.inverse(),
                _ => true,
            }
    }

    pub fn reduced(&self) -> Word {
        free_reduce(self)
    }

    /// Highest generator index plus one, i.e. the smallest alphabet the word fits in.
    pub fn max_generator(&self) -> Option<u32> {
        self.0.iter().map(|l| l.gen).max()
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Letter;
    type IntoIter = std::slice::Iter<'a, Letter>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Pushes `l` onto a freely reduced stack, cancelling against the top.
#[inline]
pub fn push_reduced(stack: &mut Vec<Letter>, l: Letter) {
    if stack.last() == Some(&l.inverse()) {
        stack.pop();
    } else {
        stack.push(l);
    }
}

/// The unique freely reduced word equal to `w` in the free group.
pub fn free_reduce(w: &Word) -> Word {
    let mut stack = Vec::with_capacity(w.len());
    for &l in w {
        push_reduced(&mut stack, l);
    }
    Word(stack)
}

/// Which words count as inputs: every word over `X`, or freely reduced ones only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Universe {
    #[default]
    AllWords,
    ReducedWords,
}

impl Universe {
    pub fn admits(self, w: &Word) -> bool {
        match self {
            Universe::AllWords => true,
            Universe::ReducedWords => w.is_reduced(),
        }
    }
}

/// Ordered list of generator names. `k = 2 * generators()` letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(Error::InvalidParameter("alphabet needs at least one generator".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains(char::is_whitespace) || n.contains('\'') {
                return Err(Error::InvalidParameter(format!("bad generator name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidParameter(format!("duplicate generator `{n}`")));
            }
        }
        Ok(Alphabet { names })
    }

    /// Generators named `prefix1 .. prefix{g}`.
    pub fn numbered(prefix: &str, g: usize) -> Self {
        let names: Vec<String> = (1..=g).map(|i| format!("{prefix}{i}")).collect();
        Alphabet::new(&names).expect("numbered names are distinct")
    }

    /// `a, b, c, ...` for up to 26 generators.
    pub fn letters(g: usize) -> Self {
        assert!((1..=26).contains(&g));
        let names: Vec<String> = (0..g).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        Alphabet::new(&names).expect("distinct")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn generators(&self) -> usize {
        self.names.len()
    }

    /// Number of letters `k = |X| = 2g`.
    pub fn size(&self) -> usize {
        2 * self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn all_letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.size()).map(Letter::from_code)
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.iter().all(|l| (l.gen() as usize) < self.names.len())
    }

    pub fn check(&self, w: &Word) -> Result<()> {
        match w.iter().find(|l| l.gen() as usize >= self.names.len()) {
            Some(l) => Err(Error::UnknownLetter(format!("generator #{}", l.gen()))),
            None => Ok(()),
        }
    }

    fn single_char(&self) -> bool {
        self.names.iter().all(|n| n.chars().count() == 1 && n.chars().all(|c| c.is_lowercase()))
    }

    /// Parses the whitespace-separated token format (`a b' a`). When every
    /// generator is a single lowercase letter a token may also be written
    /// compactly with uppercase for inverses (`abA`). `""`, `1` and `ε` are
    /// the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut out = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" || tok == "ε" {
                continue;
            }
            if let Some(i) = self.index_of(tok) {
                out.push(Letter::pos(i));
                continue;
            }
            if let Some(base) = tok.strip_suffix('\'') {
                if let Some(i) = self.index_of(base) {
                    out.push(Letter::neg(i));
                    continue;
                }
            }
            if self.single_char() && tok.chars().all(|c| c.is_alphabetic()) {
                for c in tok.chars() {
                    let lower = c.to_lowercase().to_string();
                    let i = self.index_of(&lower).ok_or_else(|| Error::UnknownLetter(c.to_string()))?;
                    out.push(Letter::new(i, c.is_uppercase()));
                }
                continue;
            }
            return Err(Error::UnknownLetter(tok.to_string()));
        }
        Ok(Word(out))
    }

    pub fn format(&self, w: &Word) -> String {
        if w.is_empty() {
            return "ε".to_string();
        }
        w.iter()
            .map(|l| {
                let name = self.names.get(l.gen() as usize).map(String::as_str).unwrap_or("?");
                if l.is_inverse() {
                    format!("{name}'")
                } else {
                    name.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.names.join(" "))
    }
}

/// Number of words of length exactly `n` in the universe over `k` letters.
pub fn slice_count(k: usize, universe: Universe, n: usize) -> BigUint {
    let k = BigUint::from(k);
    match (universe, n) {
        (_, 0) => BigUint::one(),
        (Universe::AllWords, n) => num_traits::pow(k, n),
        (Universe::ReducedWords, n) => {
            let km1 = &k - 1u32;
            k * num_traits::pow(km1, n - 1)
        }
    }
}

/// `|B_n|`, the number of words of length at most `n`.
pub fn ball_count(alphabet: &Alphabet, universe: Universe, n: usize) -> BigUint {
    (0..=n).fold(BigUint::zero(), |acc, m| acc + slice_count(alphabet.size(), universe, m))
}

/// Closed form of the all-words ball, `(k^{n+1} - 1) / (k - 1)`.
pub fn ball_count_closed_form(k: usize, n: usize) -> BigUint {
    let k = BigUint::from(k);
    (num_traits::pow(k.clone(), n + 1) - 1u32) / (k - 1u32)
}

/// Enumerates every word of length exactly `n` in the universe, in
/// lexicographic order of letter codes. Refuses if the slice exceeds `budget`.
pub fn enumerate_words(alphabet: &Alphabet, universe: Universe, n: usize, budget: u64) -> Result<WordEnumerator> {
    let count = slice_count(alphabet.size(), universe, n);
    if count > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { requested: count.to_string(), limit: budget });
    }
    Ok(WordEnumerator::new(alphabet.size(), universe, n))
}

/// Odometer over the length-`n` slice.
#[derive(Clone, Debug)]
pub struct WordEnumerator {
    k: usize,
    reduced: bool,
    digits: Vec<usize>,
    done: bool,
}

impl WordEnumerator {
    fn new(k: usize, universe: Universe, n: usize) -> Self {
        let reduced = universe == Universe::ReducedWords;
        let mut e = WordEnumerator { k, reduced, digits: vec![0; n], done: false };
        e.fill_from(0);
        e
    }

    fn forbidden(&self, i: usize) -> Option<usize> {
        (self.reduced && i > 0).then(|| self.digits[i - 1] ^ 1)
    }

    fn fill_from(&mut self, start: usize) {
        for i in start..self.digits.len() {
            self.digits[i] = if self.forbidden(i) == Some(0) { 1 } else { 0 };
        }
    }

    fn advance(&mut self) {
        let mut i = self.digits.len();
        while i > 0 {
            i -= 1;
            let bad = self.forbidden(i);
            let mut next = self.digits[i] + 1;
            if Some(next) == bad {
                next += 1;
            }
            if next < self.k {
                self.digits[i] = next;
                self.fill_from(i + 1);
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for WordEnumerator {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let w = Word::from_codes(&self.digits);
        self.advance();
        Some(w)
    }
}

/// Deterministic RNG used everywhere a seed is taken.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the length-`n` slice of the universe. Reduced words
/// use a free first letter followed by letters avoiding the previous inverse.
pub fn sample_word<R: Rng + ?Sized>(alphabet: &Alphabet, universe: Universe, n: usize, rng: &mut R) -> Word {
    let k = alphabet.size();
    let mut codes = Vec::with_capacity(n);
    for i in 0..n {
        let c = match universe {
            Universe::ReducedWords if i > 0 => {
                let bad = codes[i - 1] ^ 1;
                let r = rng.gen_range(0..k - 1);
                if r >= bad {
                    r + 1
                } else {
                    r
                }
            }
            _ => rng.gen_range(0..k),
        };
        codes.push(c);
    }
    Word::from_codes(&codes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Alphabet {
        Alphabet::letters(2)
    }

    /// Repeated adjacent-pair deletion, independent of the stack routine.
    fn cancel_until_stable(w: &Word) -> Word {
        let mut v = w.letters().to_vec();
        loop {
            let pos = v.windows(2).position(|p| p[0] == p[1].inverse());
            match pos {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return Word::from_letters(v),
            }
        }
    }

    #[test]
    fn free_reduce_examples() {
        let a = f2();
        let r = |s: &str| a.format(&free_reduce(&a.parse_word(s).unwrap()));
        assert_eq!(r("a a'"), "ε");
        assert_eq!(r("a b b' a"), "a a");
        assert_eq!(r("b a' a b' b a"), "b a");
        assert_eq!(
            free_reduce(&a.parse_word("b a' a b' b a").unwrap()),
            cancel_until_stable(&a.parse_word("b a' a b' b a").unwrap())
        );
    }

    #[test]
    fn reduction_properties_exhaustive() {
        let a = f2();
        for n in 0..=8 {
            for w in enumerate_words(&a, Universe::AllWords, n, DEFAULT_ENUMERATION_BUDGET).unwrap() {
                let r = free_reduce(&w);
                assert_eq!(r, cancel_until_stable(&w));
                assert_eq!(free_reduce(&r), r);
                assert!(r.len() <= w.len() && (w.len() - r.len()).is_multiple_of(2));
                assert!(free_reduce(&w.concat(&w.inverse())).is_empty());
            }
        }
    }

    #[test]
    fn ball_counts() {
        let a = f2();
        assert_eq!(ball_count(&a, Universe::AllWords, 4), BigUint::from(341u32));
        assert_eq!(ball_count(&a, Universe::AllWords, 0), BigUint::from(1u32));
        assert_eq!(ball_count(&a, Universe::ReducedWords, 2), BigUint::from(17u32));
        for n in 0..=8 {
            assert_eq!(ball_count(&a, Universe::AllWords, n), ball_count_closed_form(4, n));
            let enumerated: usize = (0..=n)
                .map(|m| enumerate_words(&a, Universe::AllWords, m, DEFAULT_ENUMERATION_BUDGET).unwrap().count())
                .sum();
            assert_eq!(ball_count(&a, Universe::AllWords, n), BigUint::from(enumerated));
        }
    }

    #[test]
    fn enumeration_counts_and_reducedness() {
        let a = f2();
        let count = |u, n| enumerate_words(&a, u, n, DEFAULT_ENUMERATION_BUDGET).unwrap().count();
        assert_eq!(count(Universe::AllWords, 1), 4);
        assert_eq!(count(Universe::AllWords, 4), 256);
        assert_eq!(count(Universe::ReducedWords, 2), 12);
        assert_eq!(count(Universe::AllWords, 0), 1);
        for n in 0..=7 {
            let words: Vec<Word> =
                enumerate_words(&a, Universe::ReducedWords, n, DEFAULT_ENUMERATION_BUDGET).unwrap().collect();
            assert_eq!(BigUint::from(words.len()), slice_count(4, Universe::ReducedWords, n));
            assert!(words.iter().all(|w| free_reduce(w) == *w));
            assert!(words.windows(2).all(|p| p[0] < p[1]), "strictly increasing, hence distinct");
        }
    }

    #[test]
    fn enumeration_budget_refuses() {
        let a = f2();
        let err = enumerate_words(&a, Universe::AllWords, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { limit: 1000, .. }));
    }

    #[test]
    fn sampling_basics() {
        let a = f2();
        let mut rng = seeded_rng(7);
        assert!(sample_word(&a, Universe::AllWords, 0, &mut rng).is_empty());
        for _ in 0..1000 {
            let w = sample_word(&a, Universe::ReducedWords, 12, &mut rng);
            assert_eq!(w.len(), 12);
            assert!(w.is_reduced());
        }
        let w1 = sample_word(&a, Universe::AllWords, 30, &mut seeded_rng(3));
        let w2 = sample_word(&a, Universe::AllWords, 30, &mut seeded_rng(3));
        assert_eq!(w1, w2);
    }

    #[test]
    fn parse_and_format() {
        let a = f2();
        assert_eq!(a.parse_word("abA").unwrap(), a.parse_word("a b a'").unwrap());
        assert_eq!(a.format(&a.parse_word("a b' a").unwrap()), "a b' a");
        assert!(a.parse_word("").unwrap().is_empty());
        assert!(a.parse_word("z").is_err());
        let s = Alphabet::numbered("s", 3);
        assert_eq!(s.parse_word("s1 s3'").unwrap(), Word::from_signed(&[1, -3]).unwrap());
        assert!(s.parse_word("s1s2").is_err());
        assert!(Alphabet::new(&["a", "a"]).is_err());
    }
}
