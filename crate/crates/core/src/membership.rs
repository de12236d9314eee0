//! Subgroup membership in free groups.
//!
//! A finitely generated subgroup `H ≤ F(A)` is represented by its folded core
//! graph. Outside the core, the Schreier coset graph of `H` is a forest of
//! regular trees hanging off the core, so a walk only needs to remember where
//! it left the core and the reduced path travelled since.

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::solver::{parallel_combine, Answer, Factory, MachineFactory, Replay, Role, Status, StepMachine};
use crate::word::{free_reduce, seeded_rng, Alphabet, Letter, Word};

/// Edge-labeled graph with a basepoint. `adj[v][code]` is the endpoint of the
/// edge leaving `v` with letter `code` (inverse letters traverse edges
/// backwards).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    generators: usize,
    base: usize,
    adj: Vec<Vec<Option<u32>>>,
}

impl LabeledGraph {
    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Edges `(source, generator, target)`, each listed once.
    pub fn edges(&self) -> Vec<(usize, u32, usize)> {
        let mut out = Vec::new();
        for (v, row) in self.adj.iter().enumerate() {
            for g in 0..self.generators {
                if let Some(t) = row[2 * g] {
                    out.push((v, g as u32, t as usize));
                }
            }
        }
        out
    }

    pub fn neighbor(&self, v: usize, l: Letter) -> Option<usize> {
        self.adj[v][l.code()].map(|t| t as usize)
    }

    /// At most one edge per letter at each vertex, consistent in both
    /// directions.
    pub fn is_folded(&self) -> bool {
        self.adj.iter().enumerate().all(|(v, row)| {
            row.iter().enumerate().all(|(c, t)| t.is_none_or(|t| self.adj[t as usize][c ^ 1] == Some(v as u32)))
        })
    }

    /// Breadth-first relabeling from the basepoint, visiting letters in code
    /// order. Two folded graphs are isomorphic as based labeled graphs iff
    /// their canonical forms are equal.
    pub fn canonical_form(&self) -> Vec<Vec<Option<u32>>> {
        let mut label = vec![u32::MAX; self.adj.len()];
        let mut order = Vec::with_capacity(self.adj.len());
        let mut queue = VecDeque::from([self.base]);
        label[self.base] = 0;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for t in self.adj[v].iter().flatten() {
                let t = *t as usize;
                if label[t] == u32::MAX {
                    label[t] = order.len() as u32 + queue.len() as u32;
                    queue.push_back(t);
                }
            }
        }
        order.iter().map(|&v| self.adj[v].iter().map(|t| t.map(|t| label[t as usize])).collect()).collect()
    }
}

/// Order in which pending folds are processed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldOrder {
    Stack,
    Shuffled(u64),
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }
}

/// Stallings core graph of `⟨generators⟩ ≤ F(A)`, folded with the default
/// order.
pub fn stallings_core(alphabet: &Alphabet, generators: &[Word]) -> Result<LabeledGraph> {
    stallings_core_with_order(alphabet, generators, FoldOrder::Stack)
}

pub fn stallings_core_with_order(alphabet: &Alphabet, generators: &[Word], order: FoldOrder) -> Result<LabeledGraph> {
    let k = alphabet.size();
    // wedge of loops: adjacency lists may hold several targets per letter
    let mut adj: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); k]];
    let add_edge = |adj: &mut Vec<Vec<Vec<usize>>>, u: usize, l: Letter, v: usize| {
        adj[u][l.code()].push(v);
        adj[v][l.code() ^ 1].push(u);
    };
    for g in generators {
        alphabet.check(g)?;
        let g = free_reduce(g);
        let n = g.len();
        let mut prev = 0;
        for (i, &l) in g.iter().enumerate() {
            let next = if i + 1 == n {
                0
            } else {
                adj.push(vec![Vec::new(); k]);
                adj.len() - 1
            };
            add_edge(&mut adj, prev, l, next);
            prev = next;
        }
    }
    let mut uf = UnionFind { parent: (0..adj.len()).collect() };
    let mut pending: Vec<usize> = (0..adj.len()).collect();
    let mut rng = match order {
        FoldOrder::Stack => None,
        FoldOrder::Shuffled(seed) => {
            let mut r = seeded_rng(seed);
            pending.shuffle(&mut r);
            Some(r)
        }
    };
    while !pending.is_empty() {
        let idx = match rng.as_mut() {
            Some(r) => r.gen_range(0..pending.len()),
            None => pending.len() - 1,
        };
        let v = uf.find(pending.swap_remove(idx));
        for c in 0..k {
            let mut targets: Vec<usize> = adj[v][c].iter().map(|&t| uf.find(t)).collect();
            targets.sort_unstable();
            targets.dedup();
            if let Some(r) = rng.as_mut() {
                targets.shuffle(r);
            }
            if targets.len() <= 1 {
                adj[v][c] = targets;
                continue;
            }
            let keep = targets[0];
            for &other in &targets[1..] {
                uf.parent[other] = keep;
                let moved = std::mem::take(&mut adj[other]);
                for (cc, list) in moved.into_iter().enumerate() {
                    adj[keep][cc].extend(list);
                }
            }
            pending.push(keep);
            // v may itself have been merged away; revisit its root
            pending.push(uf.find(v));
            break;
        }
    }
    let mut index = vec![usize::MAX; adj.len()];
    let mut count = 0;
    for (v, slot) in index.iter_mut().enumerate() {
        if uf.find(v) == v {
            *slot = count;
            count += 1;
        }
    }
    let mut out = vec![vec![None; k]; count];
    for v in 0..adj.len() {
        if index[v] == usize::MAX {
            continue;
        }
        for c in 0..k {
            if let Some(&t) = adj[v][c].first() {
                out[index[v]][c] = Some(index[uf.find(t)] as u32);
            }
        }
    }
    let base = index[uf.find(0)];
    let g = LabeledGraph { generators: alphabet.generators(), base, adj: out };
    debug_assert!(g.is_folded());
    Ok(g)
}

/// Reads one generator word per line; blank lines and `#` comments are
/// skipped.
pub fn parse_subgroup(text: &str, alphabet: &Alphabet) -> Result<Vec<Word>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| alphabet.parse_word(l))
        .collect()
}

/// Freely reduces `w` and reads it from the basepoint.
pub fn membership_trace(core: &LabeledGraph, w: &Word) -> Answer {
    let mut v = core.base;
    for &l in free_reduce(w).iter() {
        match core.neighbor(v, l) {
            Some(t) => v = t,
            None => return Answer::NotInLanguage,
        }
    }
    if v == core.base {
        Answer::InLanguage
    } else {
        Answer::NotInLanguage
    }
}

/// Vertex of the Schreier coset graph: a core vertex, or a tree vertex given
/// by the core vertex where the walk left the core and the reduced path
/// travelled outside it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SchreierVertex {
    Core(usize),
    Tree { anchor: usize, path: Vec<Letter> },
}

impl SchreierVertex {
    pub fn step(self, core: &LabeledGraph, l: Letter) -> SchreierVertex {
        match self {
            SchreierVertex::Core(v) => match core.neighbor(v, l) {
                Some(t) => SchreierVertex::Core(t),
                None => SchreierVertex::Tree { anchor: v, path: vec![l] },
            },
            SchreierVertex::Tree { anchor, mut path } => {
                if path.last() == Some(&l.inverse()) {
                    path.pop();
                    if path.is_empty() {
                        return SchreierVertex::Core(anchor);
                    }
                } else {
                    path.push(l);
                }
                SchreierVertex::Tree { anchor, path }
            }
        }
    }
}

/// Walks `w` letter by letter through the Schreier graph without reducing
/// it first.
pub fn schreier_walk(core: &LabeledGraph, w: &Word) -> (SchreierVertex, Answer) {
    let end = w.iter().fold(SchreierVertex::Core(core.base), |v, &l| v.step(core, l));
    let a = if end == SchreierVertex::Core(core.base) { Answer::InLanguage } else { Answer::NotInLanguage };
    (end, a)
}

struct MembershipSolver {
    core: Arc<LabeledGraph>,
    role: Role,
}

impl MachineFactory for MembershipSolver {
    fn spawn(&self, w: &Word) -> Box<dyn StepMachine> {
        let core = Arc::clone(&self.core);
        let w = w.clone();
        let role = self.role;
        Box::new(Replay::new(move || {
            let a = match role {
                Role::Total => membership_trace(&core, &w),
                Role::Partial => schreier_walk(&core, &w).1,
            };
            (Status::Decided(a), (w.len() as u64).max(1))
        }))
    }

    fn role(&self) -> Role {
        self.role
    }

    fn describe(&self) -> String {
        let how = match self.role {
            Role::Total => "Stallings trace",
            Role::Partial => "Schreier walk",
        };
        format!("subgroup membership ({how}, core with {} vertices)", self.core.vertex_count())
    }
}

pub struct MembershipPipeline {
    pub alphabet: Alphabet,
    pub core: Arc<LabeledGraph>,
    pub total: Factory,
    pub filter: Factory,
    pub combined: Factory,
}

pub fn membership_pipeline(alphabet: &Alphabet, generators: &[Word]) -> Result<MembershipPipeline> {
    let core = Arc::new(stallings_core(alphabet, generators)?);
    let total: Factory = Arc::new(MembershipSolver { core: Arc::clone(&core), role: Role::Total });
    let filter: Factory = Arc::new(MembershipSolver { core: Arc::clone(&core), role: Role::Partial });
    let combined = parallel_combine(Arc::clone(&total), Arc::clone(&filter));
    Ok(MembershipPipeline { alphabet: alphabet.clone(), core, total, filter, combined })
}

// ---------------------------------------------------------------------------
// Return probabilities

/// Graphs whose simple random walk can be analysed.
#[derive(Clone, Debug)]
pub enum GraphSpec {
    /// Cayley graph of the free group of the given rank.
    FreeCayley(usize),
    /// Cayley graph of ℤ.
    IntegerLine,
    Schreier(LabeledGraph),
}

impl GraphSpec {
    fn core(&self) -> LabeledGraph {
        match self {
            GraphSpec::FreeCayley(g) => LabeledGraph { generators: *g, base: 0, adj: vec![vec![None; 2 * g]] },
            GraphSpec::IntegerLine => LabeledGraph { generators: 1, base: 0, adj: vec![vec![None; 2]] },
            GraphSpec::Schreier(c) => c.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkMethod {
    ExactDp,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct SpectralEstimate {
    /// `p_{2t}` for `t = 0..=n`.
    pub probabilities: Vec<f64>,
    /// Exact values when computed by dynamic programming.
    pub exact: Option<Vec<BigRational>>,
    /// `p_{2n} / p_{2n-2}`, which tends to `ρ²`.
    pub tail_ratio: f64,
    /// `√tail_ratio`.
    pub rho: f64,
}

/// Return probabilities of the simple random walk from the basepoint at even
/// times `0, 2, …, 2n`.
pub fn spectral_radius_estimate(graph: &GraphSpec, n: usize, method: WalkMethod) -> Result<SpectralEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one even time step".into()));
    }
    let core = graph.core();
    let (probabilities, exact) = match method {
        WalkMethod::ExactDp => {
            let exact = schreier_return_dp(&core, 2 * n);
            (exact.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect(), Some(exact))
        }
        WalkMethod::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be positive".into()));
            }
            (schreier_return_mc(&core, 2 * n, trials, seed), None)
        }
    };
    let tail_ratio = if probabilities[n - 1] > 0.0 { probabilities[n] / probabilities[n - 1] } else { f64::NAN };
    Ok(SpectralEstimate { probabilities, exact, tail_ratio, rho: tail_ratio.sqrt() })
}

/// Exact walk counts over compressed states: core vertices, and tree
/// vertices identified by (anchor, exit letter, depth).
fn schreier_return_dp(core: &LabeledGraph, steps: usize) -> Vec<BigRational> {
    let k = 2 * core.generators;
    let vcount = core.vertex_count();
    let depth = steps + 1;
    let tree = |v: usize, c: usize, d: usize| vcount + (v * k + c) * depth + (d - 1);
    let size = vcount + vcount * k * depth;
    let mut cur = vec![BigUint::zero(); size];
    cur[core.base] = BigUint::one();
    let mut out = vec![BigRational::one()];
    let mut denom = BigUint::one();
    for t in 1..=steps {
        let mut next = vec![BigUint::zero(); size];
        for v in 0..vcount {
            if !cur[v].is_zero() {
                for c in 0..k {
                    match core.adj[v][c] {
                        Some(u) => next[u as usize] += &cur[v],
                        None => next[tree(v, c, 1)] += &cur[v],
                    }
                }
            }
            for c in 0..k {
                if core.adj[v][c].is_some() {
                    continue;
                }
                for d in 1..depth.min(t + 1) {
                    let s = &cur[tree(v, c, d)];
                    if s.is_zero() {
                        continue;
                    }
                    if d == 1 {
                        next[v] += s;
                    } else {
                        next[tree(v, c, d - 1)] += s;
                    }
                    if d < steps {
                        next[tree(v, c, d + 1)] += s * BigUint::from(k - 1);
                    }
                }
            }
        }
        cur = next;
        denom *= BigUint::from(k);
        if t % 2 == 0 {
            out.push(BigRational::new(cur[core.base].clone().into(), denom.clone().into()));
        }
    }
    out
}

fn schreier_return_mc(core: &LabeledGraph, steps: usize, trials: u64, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    let k = 2 * core.generators;
    let mut hits = vec![0u64; steps / 2 + 1];
    for _ in 0..trials {
        let mut v = SchreierVertex::Core(core.base);
        hits[0] += 1;
        for t in 1..=steps {
            v = v.step(core, Letter::from_code(rng.gen_range(0..k)));
            if t % 2 == 0 && v == SchreierVertex::Core(core.base) {
                hits[t / 2] += 1;
            }
        }
    }
    hits.into_iter().map(|h| h as f64 / trials as f64).collect()
}
