//! Step machines: resumable decision procedures with unit-step accounting.
//!
//! Every solver in the crate is a [`MachineFactory`] that spawns a fresh
//! [`StepMachine`] per input word. A machine advances one accounted unit per
//! [`StepMachine::step`]; the number of steps until it leaves
//! [`Status::Running`] is the running time `T(w)`. Total machines always end
//! in [`Status::Decided`]; partial machines may end in
//! [`Status::UndecidedFinal`], and any decision they do reach is correct.
//!
//! Combinators in this module:
//! * [`ParallelCombine`] interleaves a partial and a total machine one step
//!   at a time (partial first) and returns the first decision.
//! * [`QuotientFilter`] maps a word through a [`Homomorphism`] and runs a
//!   total solver for the quotient, answering only "not in the language".
//! * [`ForcedCost`] pads a machine to a declared [`ComplexityBound`].
//! * [`ProductTotal`] and [`product_pipeline`] solve `G × F(a,b)`.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::word::{push_reduced, Alphabet, Letter, Word};

/// Hard step cap applied by [`run`] unless overridden.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    /// `w = 1` for word problems, member for membership problems.
    InLanguage,
    NotInLanguage,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::InLanguage => write!(f, "InLanguage"),
            Answer::NotInLanguage => write!(f, "NotInLanguage"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Running,
    Decided(Answer),
    UndecidedFinal,
}

impl Status {
    pub fn is_running(self) -> bool {
        self == Status::Running
    }

    pub fn answer(self) -> Option<Answer> {
        match self {
            Status::Decided(a) => Some(a),
            _ => None,
        }
    }
}

/// Whether a factory's machines always decide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Total,
    Partial,
}

/// A single-use, deterministic, resumable computation over one input word.
pub trait StepMachine: Send {
    /// Advances one unit. A no-op once the machine has stopped.
    fn step(&mut self) -> Status;

    fn status(&self) -> Status;

    /// Units consumed so far.
    fn steps(&self) -> u64;

    /// Advances up to `max` units, stopping early on a final status, and
    /// returns the number of units consumed. Implementations may override
    /// this to skip padding in O(1).
    fn advance(&mut self, max: u64) -> u64 {
        let mut taken = 0;
        while taken < max && self.status().is_running() {
            self.step();
            taken += 1;
        }
        taken
    }
}

/// Spawns machines for one language. Factories are immutable and shareable.
pub trait MachineFactory: Send + Sync {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine>;

    fn role(&self) -> Role;

    fn describe(&self) -> String;
}

pub type Factory = Arc<dyn MachineFactory>;

/// Result of running a machine to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunRecord {
    /// Final status; never `Running`.
    pub status: Status,
    /// Number of steps, `T(w) ≥ 1`.
    pub steps: u64,
}

impl RunRecord {
    pub fn answer(&self) -> Option<Answer> {
        self.status.answer()
    }

    pub fn decided(&self) -> bool {
        matches!(self.status, Status::Decided(_))
    }
}

/// Runs a fresh machine on `w` until it stops. Exceeding `cap` steps is an
/// error rather than a guess.
pub fn run(factory: &dyn MachineFactory, w: &Word, cap: u64) -> Result<RunRecord> {
    let mut m = factory.spawn(w);
    m.advance(cap);
    match m.status() {
        Status::Running => Err(Error::StepCapExceeded { cap }),
        status => Ok(RunRecord { status, steps: m.steps() }),
    }
}

/// Machine whose work is performed by a closure on the first step; the
/// closure reports the final status and the unit count its algorithm
/// accumulated, and the machine then spends exactly that many steps.
pub struct Replay {
    job: Option<Box<dyn FnOnce() -> (Status, u64) + Send>>,
    outcome: Status,
    cost: u64,
    taken: u64,
}

impl Replay {
    pub fn new(job: impl FnOnce() -> (Status, u64) + Send + 'static) -> Self {
        Replay { job: Some(Box::new(job)), outcome: Status::Running, cost: 1, taken: 0 }
    }

    fn force(&mut self) {
        if let Some(job) = self.job.take() {
            let (outcome, cost) = job();
            debug_assert!(!outcome.is_running());
            self.outcome = outcome;
            self.cost = cost.max(1);
        }
    }
}

impl StepMachine for Replay {
    fn step(&mut self) -> Status {
        self.advance(1);
        self.status()
    }

    fn status(&self) -> Status {
        if self.job.is_none() && self.taken >= self.cost {
            self.outcome
        } else {
            Status::Running
        }
    }

    fn steps(&self) -> u64 {
        self.taken
    }

    fn advance(&mut self, max: u64) -> u64 {
        if max == 0 || !self.status().is_running() {
            return 0;
        }
        self.force();
        let t = max.min(self.cost - self.taken);
        self.taken += t;
        t
    }
}

// ---------------------------------------------------------------------------
// Free group

/// Linear-time word problem for the free group on an alphabet: one letter is
/// pushed onto a cancellation stack per step, so `T(w) = max(1, |w|)`.
#[derive(Clone, Debug)]
pub struct FreeGroupSolver {
    alphabet: Alphabet,
}

pub fn free_group_solver(alphabet: &Alphabet) -> Factory {
    Arc::new(FreeGroupSolver { alphabet: alphabet.clone() })
}

impl MachineFactory for FreeGroupSolver {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        Box::new(FreeGroupMachine {
            input: w.letters().to_vec(),
            pos: 0,
            stack: Vec::new(),
            steps: 0,
            status: Status::Running,
        })
    }

    fn role(&self) -> Role {
        Role::Total
    }

    fn describe(&self) -> String {
        format!("free group on {}", self.alphabet)
    }
}

struct FreeGroupMachine {
    input: Vec<Letter>,
    pos: usize,
    stack: Vec<Letter>,
    steps: u64,
    status: Status,
}

impl StepMachine for FreeGroupMachine {
    fn step(&mut self) -> Status {
        if !self.status.is_running() {
            return self.status;
        }
        self.steps += 1;
        if let Some(&l) = self.input.get(self.pos) {
            push_reduced(&mut self.stack, l);
            self.pos += 1;
        }
        if self.pos >= self.input.len() {
            self.status =
                Status::Decided(if self.stack.is_empty() { Answer::InLanguage } else { Answer::NotInLanguage });
        }
        self.status
    }

    fn status(&self) -> Status {
        self.status
    }

    fn steps(&self) -> u64 {
        self.steps
    }
}

// ---------------------------------------------------------------------------
// Complexity bounds and forced cost

/// A proper complexity function. Every variant is clamped to `f(n) ≥ max(n, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ComplexityBound {
    Linear(f64),
    Quadratic(f64),
    /// `c · 2^⌈√n⌉`
    SubExpRoot(f64),
    /// `table[n]`, extended by its last entry.
    Custom(Vec<u64>),
}

fn ceil_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

impl ComplexityBound {
    pub fn custom(table: Vec<u64>) -> Result<Self> {
        if table.is_empty() || table.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::InvalidParameter("custom bound must be a nonempty non-decreasing table".into()));
        }
        Ok(ComplexityBound::Custom(table))
    }

    /// `linear`, `quadratic`, `subexp`, optionally `:c` (`linear:2`).
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, c) = match spec.split_once(':') {
            Some((k, c)) => (k, c.parse::<f64>().map_err(|_| Error::Parse(format!("bad constant in `{spec}`")))?),
            None => (spec, 1.0),
        };
        if c.is_nan() || c <= 0.0 {
            return Err(Error::InvalidParameter(format!("constant must be positive in `{spec}`")));
        }
        match kind {
            "linear" => Ok(ComplexityBound::Linear(c)),
            "quadratic" => Ok(ComplexityBound::Quadratic(c)),
            "subexp" => Ok(ComplexityBound::SubExpRoot(c)),
            _ => Err(Error::Parse(format!("unknown bound `{spec}`"))),
        }
    }

    pub fn eval(&self, n: usize) -> u64 {
        let nf = n as f64;
        let raw = match self {
            ComplexityBound::Linear(c) => (c * nf).ceil(),
            ComplexityBound::Quadratic(c) => (c * nf * nf).ceil(),
            ComplexityBound::SubExpRoot(c) => (c * 2f64.powi(ceil_sqrt(n as u64) as i32)).ceil(),
            ComplexityBound::Custom(t) => t[n.min(t.len() - 1)] as f64,
        };
        let raw = if raw >= u64::MAX as f64 { u64::MAX } else { raw as u64 };
        raw.max(n as u64).max(1)
    }
}

impl fmt::Display for ComplexityBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexityBound::Linear(c) => write!(f, "linear:{c}"),
            ComplexityBound::Quadratic(c) => write!(f, "quadratic:{c}"),
            ComplexityBound::SubExpRoot(c) => write!(f, "subexp:{c}"),
            ComplexityBound::Custom(t) => write!(f, "custom[{}]", t.len()),
        }
    }
}

/// Runs `inner` and pads it to exactly `max(f(|w|), T_inner)` steps.
pub struct ForcedCost {
    inner: Factory,
    bound: ComplexityBound,
}

pub fn with_forced_cost(inner: Factory, bound: ComplexityBound) -> Factory {
    Arc::new(ForcedCost { inner, bound })
}

impl MachineFactory for ForcedCost {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        Box::new(ForcedMachine { inner: self.inner.spawn(w), target: self.bound.eval(w.len()), steps: 0 })
    }

    fn role(&self) -> Role {
        self.inner.role()
    }

    fn describe(&self) -> String {
        format!("{} forced to {}", self.inner.describe(), self.bound)
    }
}

struct ForcedMachine {
    inner: Box<dyn StepMachine>,
    target: u64,
    steps: u64,
}

impl StepMachine for ForcedMachine {
    fn step(&mut self) -> Status {
        self.advance(1);
        self.status()
    }

    fn status(&self) -> Status {
        match self.inner.status() {
            Status::Running => Status::Running,
            s if self.steps >= self.target => s,
            _ => Status::Running,
        }
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn advance(&mut self, max: u64) -> u64 {
        let mut taken = 0;
        if self.inner.status().is_running() {
            taken = self.inner.advance(max);
            self.steps += taken;
        }
        if !self.inner.status().is_running() {
            let pad = self.target.saturating_sub(self.steps).min(max - taken);
            self.steps += pad;
            taken += pad;
        }
        taken
    }
}

// ---------------------------------------------------------------------------
// Parallel combination

/// Deterministic round-robin of a partial and a total machine, partial first.
///
/// If the partial decides after `p` of its steps the combination stops after
/// at most `2p - 1` steps; if the total decides after `t` steps first it
/// stops after `2t`. Once the partial is `UndecidedFinal` the total runs alone.
pub struct ParallelCombine {
    total: Factory,
    partial: Factory,
}

pub fn parallel_combine(total: Factory, partial: Factory) -> Factory {
    Arc::new(ParallelCombine { total, partial })
}

impl MachineFactory for ParallelCombine {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        Box::new(CombinedMachine {
            partial: self.partial.spawn(w),
            total: self.total.spawn(w),
            partial_turn: true,
            steps: 0,
            status: Status::Running,
        })
    }

    fn role(&self) -> Role {
        self.total.role()
    }

    fn describe(&self) -> String {
        format!("({}) ∥ ({})", self.partial.describe(), self.total.describe())
    }
}

struct CombinedMachine {
    partial: Box<dyn StepMachine>,
    total: Box<dyn StepMachine>,
    partial_turn: bool,
    steps: u64,
    status: Status,
}

impl StepMachine for CombinedMachine {
    fn step(&mut self) -> Status {
        if !self.status.is_running() {
            return self.status;
        }
        self.steps += 1;
        let partial_alive = self.partial.status().is_running();
        let s = if self.partial_turn && partial_alive { self.partial.step() } else { self.total.step() };
        self.partial_turn = !self.partial_turn;
        match s {
            Status::Decided(a) => self.status = Status::Decided(a),
            Status::UndecidedFinal if !self.total.status().is_running() => {
                // a total machine gave up; surface it rather than loop
                self.status = Status::UndecidedFinal;
            }
            _ => {}
        }
        self.status
    }

    fn status(&self) -> Status {
        self.status
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn advance(&mut self, max: u64) -> u64 {
        let mut taken = 0;
        while taken < max && self.status.is_running() {
            if !self.partial.status().is_running() {
                let t = self.total.advance(max - taken);
                taken += t;
                self.steps += t;
                self.status = self.total.status();
                break;
            }
            self.step();
            taken += 1;
        }
        taken
    }
}

// ---------------------------------------------------------------------------
// Homomorphisms and the quotient filter

/// A map from source generators to target words, extended to words.
#[derive(Clone, Debug, PartialEq)]
pub struct Homomorphism {
    source: Alphabet,
    target: Alphabet,
    images: Vec<Word>,
}

impl Homomorphism {
    pub fn new(source: Alphabet, target: Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != source.generators() {
            return Err(Error::InvalidParameter(format!(
                "{} images for {} generators",
                images.len(),
                source.generators()
            )));
        }
        for im in &images {
            target.check(im)?;
        }
        Ok(Homomorphism { source, target, images })
    }

    /// Images written in the target's word format, one per source generator.
    pub fn parse(source: &Alphabet, target: &Alphabet, images: &[&str]) -> Result<Self> {
        let images = images.iter().map(|s| target.parse_word(s)).collect::<Result<Vec<_>>>()?;
        Self::new(source.clone(), target.clone(), images)
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        let images = (0..alphabet.generators() as u32).map(|i| Word::from_letters(vec![Letter::pos(i)])).collect();
        Homomorphism { source: alphabet.clone(), target: alphabet.clone(), images }
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    fn push_image(&self, stack: &mut Vec<Letter>, l: Letter) {
        let im = &self.images[l.gen() as usize];
        if l.is_inverse() {
            for &x in im.letters().iter().rev() {
                push_reduced(stack, x.inverse());
            }
        } else {
            for &x in im.letters() {
                push_reduced(stack, x);
            }
        }
    }

    /// Image of `w`, freely reduced.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        self.source.check(w)?;
        let mut stack = Vec::with_capacity(w.len());
        for &l in w {
            self.push_image(&mut stack, l);
        }
        Ok(Word::from_letters(stack))
    }

    /// Checks that every relator maps to the identity according to a total
    /// solver for the target group.
    pub fn check_relators(&self, relators: &[Word], target_solver: &dyn MachineFactory) -> Result<()> {
        for r in relators {
            let im = self.apply(r)?;
            if run(target_solver, &im, DEFAULT_STEP_CAP)?.answer() != Some(Answer::InLanguage) {
                return Err(Error::NotAHomomorphism(self.source.format(r)));
            }
        }
        Ok(())
    }
}

/// Partial solver: map the word into a quotient and run the quotient's total
/// solver. A nontrivial image certifies "not in the language"; a trivial one
/// leaves the question open. Mapping costs one step per input letter.
pub struct QuotientFilter {
    phi: Arc<Homomorphism>,
    target: Factory,
}

pub fn quotient_filter(phi: Homomorphism, target: Factory) -> Factory {
    Arc::new(QuotientFilter { phi: Arc::new(phi), target })
}

/// As [`quotient_filter`], first checking the map on the source relators.
pub fn quotient_filter_checked(phi: Homomorphism, target: Factory, relators: &[Word]) -> Result<Factory> {
    phi.check_relators(relators, target.as_ref())?;
    Ok(quotient_filter(phi, target))
}

impl MachineFactory for QuotientFilter {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        Box::new(QuotientMachine {
            phi: Arc::clone(&self.phi),
            target: Arc::clone(&self.target),
            input: w.letters().to_vec(),
            pos: 0,
            image: Vec::new(),
            inner: None,
            steps: 0,
            status: Status::Running,
        })
    }

    fn role(&self) -> Role {
        Role::Partial
    }

    fn describe(&self) -> String {
        format!("quotient filter onto {} via {}", self.phi.target, self.target.describe())
    }
}

struct QuotientMachine {
    phi: Arc<Homomorphism>,
    target: Factory,
    input: Vec<Letter>,
    pos: usize,
    image: Vec<Letter>,
    inner: Option<Box<dyn StepMachine>>,
    steps: u64,
    status: Status,
}

impl QuotientMachine {
    fn translate(&mut self, s: Status) {
        self.status = match s {
            Status::Running => Status::Running,
            Status::Decided(Answer::NotInLanguage) => Status::Decided(Answer::NotInLanguage),
            _ => Status::UndecidedFinal,
        };
    }
}

impl StepMachine for QuotientMachine {
    fn step(&mut self) -> Status {
        self.advance(1);
        self.status
    }

    fn status(&self) -> Status {
        self.status
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn advance(&mut self, max: u64) -> u64 {
        let mut taken = 0;
        while taken < max && self.status.is_running() {
            if self.pos < self.input.len() {
                let l = self.input[self.pos];
                if l.gen() as usize >= self.phi.source.generators() {
                    // letters outside the source alphabet cannot be mapped
                    self.status = Status::UndecidedFinal;
                } else {
                    self.phi.push_image(&mut self.image, l);
                }
                self.pos += 1;
                taken += 1;
                continue;
            }
            if self.inner.is_none() {
                let image = Word::from_letters(std::mem::take(&mut self.image));
                self.inner = Some(self.target.spawn(&image));
            }
            let inner = self.inner.as_mut().expect("spawned above");
            let t = inner.advance(max - taken);
            taken += t;
            let s = inner.status();
            self.translate(s);
        }
        self.steps += taken;
        taken
    }
}

// ---------------------------------------------------------------------------
// Sequential conjunction and the direct product pipeline

/// Runs a list of (solver, word) stages in order; the input is in the
/// language iff every stage accepts. Stops at the first rejection.
struct ConjunctionMachine {
    stages: VecDeque<(Factory, Word)>,
    current: Option<Box<dyn StepMachine>>,
    steps: u64,
    status: Status,
}

impl StepMachine for ConjunctionMachine {
    fn step(&mut self) -> Status {
        self.advance(1);
        self.status
    }

    fn status(&self) -> Status {
        self.status
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn advance(&mut self, max: u64) -> u64 {
        let mut taken = 0;
        while taken < max && self.status.is_running() {
            if self.current.is_none() {
                match self.stages.pop_front() {
                    Some((f, w)) => self.current = Some(f.spawn(&w)),
                    None => {
                        self.status = Status::Decided(Answer::InLanguage);
                        break;
                    }
                }
            }
            let m = self.current.as_mut().expect("stage present");
            taken += m.advance(max - taken);
            match m.status() {
                Status::Running => {}
                Status::Decided(Answer::InLanguage) => {
                    self.current = None;
                    if self.stages.is_empty() {
                        self.status = Status::Decided(Answer::InLanguage);
                    }
                }
                Status::Decided(Answer::NotInLanguage) => self.status = Status::Decided(Answer::NotInLanguage),
                Status::UndecidedFinal => self.status = Status::UndecidedFinal,
            }
        }
        self.steps += taken;
        taken
    }
}

/// Total solver for `G × F(a,b)`: the `G` solver on the `G`-projection, then
/// the free solver on the `F`-projection.
pub struct ProductTotal {
    g_solver: Factory,
    f_solver: Factory,
    g_gens: u32,
}

impl ProductTotal {
    fn project(&self, w: &Word) -> (Word, Word) {
        let (g, f): (Vec<Letter>, Vec<Letter>) = w.iter().partition(|l| l.gen() < self.g_gens);
        let f = f.into_iter().map(|l| Letter::new(l.gen() - self.g_gens, l.is_inverse())).collect();
        (Word::from_letters(g), Word::from_letters(f))
    }
}

impl MachineFactory for ProductTotal {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        let (g, f) = self.project(w);
        let stages = VecDeque::from(vec![(Arc::clone(&self.g_solver), g), (Arc::clone(&self.f_solver), f)]);
        Box::new(ConjunctionMachine { stages, current: None, steps: 0, status: Status::Running })
    }

    fn role(&self) -> Role {
        Role::Total
    }

    fn describe(&self) -> String {
        format!("({}) × F2", self.g_solver.describe())
    }
}

/// Solvers for `G × F(a,b)` over the disjoint union of generators.
pub struct ProductSolvers {
    pub alphabet: Alphabet,
    pub total: Factory,
    pub filter: Factory,
}

/// Builds the total solver and the `F`-projection quotient filter for
/// `G × F(a,b)`. The free factor's generators are named `a`, `b` unless
/// those names are taken by `G`, in which case `fa`, `fb` are used.
pub fn product_pipeline(solver_g: Factory, alphabet_g: &Alphabet) -> Result<ProductSolvers> {
    let taken = alphabet_g.index_of("a").is_some() || alphabet_g.index_of("b").is_some();
    let (fa, fb) = if taken { ("fa", "fb") } else { ("a", "b") };
    let mut names: Vec<String> = alphabet_g.names().to_vec();
    names.push(fa.into());
    names.push(fb.into());
    let alphabet = Alphabet::new(&names)?;
    let free = Alphabet::new(&[fa, fb])?;
    let f_solver = free_group_solver(&free);
    let g = alphabet_g.generators();
    let images = (0..names.len())
        .map(|i| if i < g { Word::empty() } else { Word::from_letters(vec![Letter::pos((i - g) as u32)]) })
        .collect();
    let projection = Homomorphism::new(alphabet.clone(), free, images)?;
    let total = Arc::new(ProductTotal { g_solver: solver_g, f_solver: Arc::clone(&f_solver), g_gens: g as u32 });
    Ok(ProductSolvers { alphabet, total, filter: quotient_filter(projection, f_solver) })
}
