//! Finite presentations, symmetrized relator sets, the metric small
//! cancellation check and Dehn's algorithm.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::solver::{Answer, Factory, MachineFactory, Replay, Role, Status, StepMachine};
use crate::word::{push_reduced, Alphabet, Letter, Word};

/// Default metric small cancellation parameter.
pub const DEFAULT_LAMBDA: f64 = 1.0 / 6.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    alphabet: Alphabet,
    relators: Vec<Word>,
}

impl Presentation {
    /// Relators must be nonempty and cyclically reduced.
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self> {
        for r in &relators {
            alphabet.check(r)?;
            if r.is_empty() {
                return Err(Error::InvalidParameter("empty relator".into()));
            }
            if !r.is_cyclically_reduced() {
                return Err(Error::InvalidParameter(format!(
                    "relator `{}` is not cyclically reduced",
                    alphabet.format(r)
                )));
            }
        }
        Ok(Presentation { alphabet, relators })
    }

    /// First non-blank line: generator names. Each further line: one relator.
    /// Lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty presentation".into()))?;
        let names: Vec<&str> = header.split_whitespace().collect();
        let alphabet = Alphabet::new(&names)?;
        let relators = lines.map(|l| alphabet.parse_word(l)).collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, relators)
    }

    /// `⟨a, b, c, d | [a,b][c,d]⟩`.
    pub fn surface_genus2() -> Self {
        Self::parse("a b c d\na b a' b' c d c' d'").expect("static presentation")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.alphabet)?;
        for r in &self.relators {
            writeln!(f, "{}", self.alphabet.format(r))?;
        }
        Ok(())
    }
}

/// One element of the symmetrized set, with the rotation it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetrizedEntry {
    pub word: Word,
    pub relator: usize,
    pub rotation: usize,
    pub inverted: bool,
}

/// All cyclic rotations of all relators and of their inverses. Rotations
/// that coincide as words (proper powers) are kept as separate entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizedSet {
    entries: Vec<SymmetrizedEntry>,
}

impl SymmetrizedSet {
    pub fn entries(&self) -> &[SymmetrizedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn symmetrize(p: &Presentation) -> SymmetrizedSet {
    let mut entries = Vec::new();
    for (ri, r) in p.relators.iter().enumerate() {
        for rot in 0..r.len() {
            let w = r.rotate(rot);
            entries.push(SymmetrizedEntry { word: w.inverse(), relator: ri, rotation: rot, inverted: true });
            entries.push(SymmetrizedEntry { word: w, relator: ri, rotation: rot, inverted: false });
        }
    }
    // positive rotations first, then inverses, each in rotation order
    entries.sort_by_key(|e| (e.relator, e.inverted, e.rotation));
    SymmetrizedSet { entries }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub passes: bool,
    pub max_piece: usize,
    pub min_relator: usize,
}

fn common_prefix(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Longest piece: the longest word that is a prefix of two entries with
/// distinct origins. When two entries are equal as words the common prefix
/// is capped one short of the whole entry. Passes iff
/// `max_piece < λ · min_relator`.
pub fn verify_metric_condition(p: &Presentation, lambda: f64) -> MetricReport {
    let sym = symmetrize(p);
    let e = sym.entries();
    let mut max_piece = 0;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            let (a, b) = (e[i].word.letters(), e[j].word.letters());
            let mut l = common_prefix(a, b);
            if a == b {
                l = l.saturating_sub(1);
            }
            max_piece = max_piece.max(l);
        }
    }
    let min_relator = p.relators.iter().map(Word::len).min().unwrap_or(0);
    let passes = p.relators.is_empty() || (max_piece as f64) < lambda * min_relator as f64;
    MetricReport { passes, max_piece, min_relator }
}

/// Lookup from every over-half prefix of a symmetrized entry to the
/// complement that replaces it.
#[derive(Debug)]
struct DehnTables {
    alphabet: Alphabet,
    /// prefix → inverse of the remaining suffix
    replacements: HashMap<Vec<Letter>, Vec<Letter>>,
    max_len: usize,
}

impl DehnTables {
    fn new(p: &Presentation) -> Self {
        let mut replacements = HashMap::new();
        let mut max_len = 0;
        for e in symmetrize(p).entries() {
            let r = e.word.letters();
            max_len = max_len.max(r.len());
            for l in (r.len() / 2 + 1)..=r.len() {
                let complement: Vec<Letter> = r[l..].iter().rev().map(|x| x.inverse()).collect();
                replacements.entry(r[..l].to_vec()).or_insert(complement);
            }
        }
        DehnTables { alphabet: p.alphabet.clone(), replacements, max_len }
    }

    /// Returns the answer and the number of letters scanned.
    fn decide(&self, w: &Word) -> (Answer, u64) {
        let mut input: VecDeque<Letter> = w.letters().iter().copied().collect();
        let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
        let mut scanned = 0u64;
        while let Some(x) = input.pop_front() {
            scanned += 1;
            let before = stack.len();
            push_reduced(&mut stack, x);
            if stack.len() < before {
                continue;
            }
            let top = stack.len();
            for l in (1..=self.max_len.min(top)).rev() {
                if let Some(rep) = self.replacements.get(&stack[top - l..]) {
                    let old_len = top + input.len();
                    stack.truncate(top - l);
                    for &y in rep.iter().rev() {
                        input.push_front(y);
                    }
                    assert!(stack.len() + input.len() < old_len, "Dehn replacement must shorten the word");
                    break;
                }
            }
        }
        let answer = if stack.is_empty() { Answer::InLanguage } else { Answer::NotInLanguage };
        (answer, scanned)
    }
}

/// Linear-time total solver for a presentation satisfying the metric
/// condition. Cost is the number of letters scanned, including letters
/// re-inserted by replacements.
pub struct DehnSolver {
    tables: Arc<DehnTables>,
}

/// Refuses presentations that fail the condition at `lambda` (strictly).
pub fn dehn_solver(p: &Presentation, lambda: f64) -> Result<Factory> {
    let report = verify_metric_condition(p, lambda);
    if !report.passes {
        return Err(Error::SmallCancellation { max_piece: report.max_piece, min_relator: report.min_relator });
    }
    Ok(Arc::new(DehnSolver { tables: Arc::new(DehnTables::new(p)) }))
}

impl MachineFactory for DehnSolver {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        let tables = Arc::clone(&self.tables);
        let w = w.clone();
        Box::new(Replay::new(move || {
            let (a, cost) = tables.decide(&w);
            (Status::Decided(a), cost)
        }))
    }

    fn role(&self) -> Role {
        Role::Total
    }

    fn describe(&self) -> String {
        format!("Dehn's algorithm over {}", self.tables.alphabet)
    }
}
