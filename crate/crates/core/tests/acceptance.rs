//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each. Criteria listed in `UNATTAINABLE` are expected to
//! fail for mathematical reasons; the process exits nonzero on any other
//! failure, or if one of those unexpectedly passes.

use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

use wordcase::analytics::{cogrowth_brute_force, cogrowth_count, density_exact, return_probability_dp};
use wordcase::braid::{artin_is_trivial, BraidWord};
use wordcase::harness::{
    cauchy_average_check, generic_density_experiment, integral_estimate, profile_pipeline, uniform_bound_metric,
    weighted_family_sum, RunSettings,
};
use wordcase::measures::LengthInvariantMeasure;
use wordcase::membership::{
    membership_trace, schreier_walk, stallings_core, stallings_core_with_order, FoldOrder, LabeledGraph,
};
use wordcase::pipeline::{build_pipeline, Pipeline, PipelineOptions, SolverChoice};
use wordcase::presentation::{dehn_solver, verify_metric_condition, Presentation, DEFAULT_LAMBDA};
use wordcase::solver::{run, Answer, ComplexityBound, Factory, DEFAULT_STEP_CAP};
use wordcase::word::{enumerate_words, free_reduce, sample_word, seeded_rng, Alphabet, Universe, Word};

/// Criteria that cannot hold as stated; see the notes printed with them.
const UNATTAINABLE: [u32; 2] = [3, 7];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Contract checks shared by every criterion that runs combined machines.
#[derive(Default)]
struct Contract {
    checked: u64,
    violations: u64,
}

impl Contract {
    fn check(&mut self, p: &Pipeline, w: &Word) -> Option<Answer> {
        let comb = run(p.combined.as_ref(), w, DEFAULT_STEP_CAP).expect("combined within cap");
        let total = run(p.total.as_ref(), w, DEFAULT_STEP_CAP).expect("total within cap");
        let filter = run(p.filter.as_ref(), w, DEFAULT_STEP_CAP).expect("filter within cap");
        self.checked += 1;
        let bad_time = filter.decided() && comb.steps > 2 * total.steps.min(filter.steps) + 2;
        if bad_time || comb.answer() != total.answer() {
            self.violations += 1;
        }
        comb.answer()
    }
}

fn random_braid<R: Rng>(n: usize, len: usize, rng: &mut R) -> BraidWord {
    let letters = (0..len)
        .map(|_| {
            let i = rng.gen_range(1..n as i32);
            if rng.gen_bool(0.5) {
                i
            } else {
                -i
            }
        })
        .collect();
    BraidWord::new(n, letters).unwrap()
}

fn braid_pipe(n: usize) -> Pipeline {
    build_pipeline(&format!("braid:{n}"), &PipelineOptions::default()).unwrap()
}

fn criterion_1(contract: &mut Contract) -> Verdict {
    let start = Instant::now();
    let b3 = braid_pipe(3);
    let mut mismatches = 0;
    let mut b3_words = 0;
    for len in 0..=6 {
        for w in enumerate_words(&b3.alphabet, Universe::AllWords, len, 1 << 20).unwrap() {
            b3_words += 1;
            let b = BraidWord::from_word(&w, 3).unwrap();
            let want = if artin_is_trivial(&b) { Answer::InLanguage } else { Answer::NotInLanguage };
            if contract.check(&b3, &w) != Some(want) {
                mismatches += 1;
            }
        }
    }
    let b4 = braid_pipe(4);
    let mut rng = seeded_rng(1);
    for _ in 0..10_000 {
        let len = rng.gen_range(0..=20);
        let b = random_braid(4, len, &mut rng);
        let want = if artin_is_trivial(&b) { Answer::InLanguage } else { Answer::NotInLanguage };
        if contract.check(&b4, &b.to_word()) != Some(want) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        mismatches == 0 && elapsed < Duration::from_secs(120),
        format!("{b3_words} B3 words (all of length ≤ 6) + 10^4 random B4 words: {mismatches} mismatches vs Artin action, {elapsed:.1?}"),
    )
}

fn criterion_2() -> Verdict {
    let f2 = Alphabet::letters(2);
    let trivial = |w: &Word| free_reduce(w).is_empty();
    let rho = density_exact(&trivial, &f2, Universe::AllWords, 4, 1 << 20).unwrap().exact_ratio().unwrap();
    let q = |a: u64, b: u64| BigRational::new(a.into(), b.into());
    let cog: Vec<BigUint> = [0, 2, 4].iter().map(|&n| cogrowth_count(2, n)).collect();
    let brute = |n: usize| {
        BigRational::new(cogrowth_brute_force(2, n, 1 << 20).unwrap().into(), BigUint::from(4u32).pow(n as u32).into())
    };
    let p2 = return_probability_dp(4, 2).unwrap();
    let p4 = return_probability_dp(4, 4).unwrap();
    let pass = rho == q(33, 341)
        && cog == [1u32, 4, 28].map(BigUint::from)
        && p2 == q(1, 4)
        && p4 == q(7, 64)
        && p2 == brute(2)
        && p4 == brute(4);
    verdict(
        pass,
        format!(
            "rho_4 = {rho}, cogrowth = {:?}, p2 = {p2}, p4 = {p4}",
            cog.iter().map(|c| c.to_string()).collect::<Vec<_>>()
        ),
    )
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let ratio =
        |d: usize| (return_probability_dp(d, 24).unwrap() / return_probability_dp(d, 22).unwrap()).to_f64().unwrap();
    let (f2, z) = (ratio(4), ratio(2));
    let elapsed = start.elapsed();
    let pass = (0.70..=0.80).contains(&f2) && z > 0.90 && elapsed < Duration::from_secs(1);
    let mut detail =
        format!("F2 p24/p22 = {f2:.4} (need [0.70, 0.80]), Z p24/p22 = {z:.4} (need > 0.90), {elapsed:.1?}");
    if !pass {
        if let Some(t) = (2..=60).find(|&t| ratio_at(4, 2 * t) >= 0.70) {
            detail
                .push_str(&format!("; the exact ratio approaches 3/4 slowly and first reaches 0.70 at 2n = {}", 2 * t));
        }
    }
    verdict(pass, detail)
}

fn ratio_at(d: usize, steps: usize) -> f64 {
    (return_probability_dp(d, steps).unwrap() / return_probability_dp(d, steps - 2).unwrap()).to_f64().unwrap()
}

fn prop_pipeline() -> Pipeline {
    let opts = PipelineOptions { forced_total: Some(ComplexityBound::Quadratic(1.0)), ..Default::default() };
    build_pipeline("surface", &opts).unwrap()
}

fn criterion_5(contract: &mut Contract) -> Verdict {
    let start = Instant::now();
    let p = prop_pipeline();
    let lengths = [32, 64, 128, 256];
    let s = RunSettings::new(SolverChoice::Combined, ComplexityBound::Linear(1.0)).samples(1000);
    let comb = profile_pipeline(&p, &lengths, &s).unwrap();
    let s_total = RunSettings { choice: SolverChoice::Total, ..s.clone() };
    let total = profile_pipeline(&p, &lengths, &s_total).unwrap();
    contract.checked += comb.rows.iter().map(|r| r.samples).sum::<u64>();
    contract.violations += comb.contract_violations();
    let ratios: Vec<f64> = comb.rows.iter().map(|r| r.ratio).collect();
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
    let growth = total.rows[3].ratio / total.rows[0].ratio;
    let elapsed = start.elapsed();
    verdict(
        spread <= 1.5 && growth >= 4.0 && elapsed < Duration::from_secs(300),
        format!("combined ratios {ratios:.3?} (max/min {spread:.3}), forced-total ratio growth 32→256 = {growth:.2}x, {elapsed:.1?}"),
    )
}

fn criterion_6(contract: &mut Contract) -> Verdict {
    let p = prop_pipeline();
    let lengths: Vec<usize> = (0..=256).collect();
    let s = RunSettings::new(SolverChoice::Combined, ComplexityBound::Linear(1.0)).samples(1000);
    let table = profile_pipeline(&p, &lengths, &s).unwrap();
    contract.checked += table.rows.iter().map(|r| r.samples).sum::<u64>();
    contract.violations += table.contract_violations();
    let sup = uniform_bound_metric(&table).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in ["cauchy", "geom:0.9", "uniform:1:256"] {
        let m = LengthInvariantMeasure::parse(spec, &p.alphabet).unwrap();
        let fam = weighted_family_sum(&table, &m);
        let est = integral_estimate(&p, &m, &s.clone().samples(10_000), 256).unwrap();
        contract.violations += est.contract_violations;
        let direct = &est.at_truncation;
        let tol = (fam.ci_half.powi(2) + direct.ci_half.powi(2)).sqrt();
        let ok = fam.value <= sup && (fam.value - direct.value).abs() <= tol;
        pass &= ok;
        parts.push(format!(
            "{spec}: sum {:.4} ± {:.4}, direct {:.4} ± {:.4}",
            fam.value, fam.ci_half, direct.value, direct.ci_half
        ));
    }
    verdict(pass, format!("sup = {sup:.4}; {}", parts.join("; ")))
}

fn criterion_7() -> Verdict {
    let opts = PipelineOptions { forced_total: Some(ComplexityBound::Quadratic(1.0)), ..Default::default() };
    let p = build_pipeline("free", &opts).unwrap();
    let m = LengthInvariantMeasure::parse("cauchy", &p.alphabet).unwrap();
    let s = RunSettings::new(SolverChoice::Total, ComplexityBound::Linear(1.0)).samples(10_000);
    let est = integral_estimate(&p, &m, &s, 256).unwrap();
    let h = |n: usize| (1..=n).map(|k| 1.0 / k as f64).sum::<f64>();
    let analytic = h(256) / h(128) - 1.0;
    verdict(
        est.diverging,
        format!(
            "S_128 = {:.4}, S_256 = {:.4}, growth {:.1}% (flag needs > 20%; harmonic value H_256/H_128 - 1 = {:.1}%)",
            est.at_half.value,
            est.at_truncation.value,
            100.0 * est.growth,
            100.0 * analytic
        ),
    )
}

fn random_relator_product<R: Rng>(p: &Presentation, rng: &mut R) -> Word {
    let mut w = Word::empty();
    for _ in 0..rng.gen_range(1..=4) {
        let r = &p.relators()[rng.gen_range(0..p.relators().len())];
        let r = if rng.gen_bool(0.5) { r.clone() } else { r.inverse() };
        let c = sample_word(p.alphabet(), Universe::AllWords, rng.gen_range(0..=8), rng);
        w = w.concat(&c).concat(&r).concat(&c.inverse());
    }
    w
}

fn criterion_8(contract: &mut Contract) -> Verdict {
    let surface = Presentation::surface_genus2();
    let g2 = verify_metric_condition(&surface, DEFAULT_LAMBDA);
    let abab = verify_metric_condition(&Presentation::parse("a b\na b a b").unwrap(), DEFAULT_LAMBDA);
    let dehn: Factory = dehn_solver(&surface, DEFAULT_LAMBDA).unwrap();
    let p = build_pipeline("surface", &PipelineOptions::default()).unwrap();
    let mut rng = seeded_rng(8);
    let mut accepted = 0;
    for _ in 0..1000 {
        let w = random_relator_product(&surface, &mut rng);
        if run(dehn.as_ref(), &w, DEFAULT_STEP_CAP).unwrap().answer() == Some(Answer::InLanguage) {
            accepted += 1;
        }
        contract.check(&p, &w);
    }
    let mut contradictions = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(0..=40);
        let w = sample_word(&p.alphabet, Universe::AllWords, n, &mut rng);
        let f = run(p.filter.as_ref(), &w, DEFAULT_STEP_CAP).unwrap();
        let d = run(dehn.as_ref(), &w, DEFAULT_STEP_CAP).unwrap();
        if f.decided() && f.answer() != d.answer() {
            contradictions += 1;
        }
        contract.check(&p, &w);
    }
    let pass = g2.passes
        && g2.max_piece == 1
        && !abab.passes
        && abab.max_piece >= 2
        && accepted == 1000
        && contradictions == 0;
    verdict(
        pass,
        format!(
            "genus 2: passes={} max piece {}; abab: passes={} max piece {}; Dehn accepted {accepted}/1000 relator products; {contradictions} filter contradictions on 10^4 words",
            g2.passes, g2.max_piece, abab.passes, abab.max_piece
        ),
    )
}

fn criterion_9() -> Verdict {
    let a = Alphabet::letters(2);
    let gens: Vec<Word> = ["a a", "a b"].iter().map(|s| a.parse_word(s).unwrap()).collect();
    let core = stallings_core(&a, &gens).unwrap();
    let mut disagreements = 0;
    for n in 0..=8 {
        for w in enumerate_words(&a, Universe::AllWords, n, 1 << 20).unwrap() {
            if membership_trace(&core, &w) != schreier_walk(&core, &w).1 {
                disagreements += 1;
            }
        }
    }
    let mut rng = seeded_rng(9);
    let mut accepted = 0;
    for _ in 0..1000 {
        let mut w = Word::empty();
        for _ in 0..rng.gen_range(0..=8) {
            let g = &gens[rng.gen_range(0..2)];
            w = w.concat(&if rng.gen_bool(0.5) { g.clone() } else { g.inverse() });
        }
        if membership_trace(&core, &w) == Answer::InLanguage && schreier_walk(&core, &w).1 == Answer::InLanguage {
            accepted += 1;
        }
    }
    let rejects = ["b", "b a", "a"].iter().all(|s| {
        let w = a.parse_word(s).unwrap();
        membership_trace(&core, &w) == Answer::NotInLanguage && schreier_walk(&core, &w).1 == Answer::NotInLanguage
    });
    let mut confluent = 0;
    for i in 0..100u64 {
        let count = rng.gen_range(1..=4);
        let tuple: Vec<Word> = (0..count)
            .map(|_| {
                let n = rng.gen_range(1..=6);
                sample_word(&a, Universe::ReducedWords, n, &mut rng)
            })
            .collect();
        let x: LabeledGraph = stallings_core_with_order(&a, &tuple, FoldOrder::Stack).unwrap();
        let y = stallings_core_with_order(&a, &tuple, FoldOrder::Shuffled(i)).unwrap();
        confluent += (x.canonical_form() == y.canonical_form()) as u32;
    }
    verdict(
        disagreements == 0 && accepted == 1000 && rejects && confluent == 100,
        format!("{disagreements} trace/walk disagreements on words of length ≤ 8; {accepted}/1000 products accepted; b, ba, a rejected: {rejects}; confluence {confluent}/100"),
    )
}

fn criterion_10() -> Verdict {
    let p = build_pipeline("braid:4", &PipelineOptions::default()).unwrap();
    let s = RunSettings::new(SolverChoice::Filter, ComplexityBound::Linear(1.0)).samples(1000);
    // decay window: lengths where the expected undecided count at 10^3
    // samples is at least 5; tail: lengths ≥ 64
    let decay = generic_density_experiment(&p, &[4, 8, 12, 16, 20, 24], &s).unwrap();
    let tail = generic_density_experiment(&p, &[64, 96, 128], &s).unwrap();
    let tail_ok = tail.rows.iter().all(|r| r.undecided_frac <= 0.05);
    let fit_ok = decay.fit.as_ref().is_some_and(|f| f.sigma < 1.0 && f.r_squared >= 0.9);
    let surface = build_pipeline("surface", &PipelineOptions::default()).unwrap();
    let u4 = generic_density_experiment(&surface, &[4], &s).unwrap().rows[0].clone();
    // oracle: the filter is undecided iff deleting b, d leaves a trivial word
    let oracle = enumerate_words(&surface.alphabet, Universe::AllWords, 4, 1 << 20)
        .unwrap()
        .filter(|w| {
            let kept: Vec<_> = w.iter().copied().filter(|l| l.gen() % 2 == 0).collect();
            free_reduce(&Word::from_letters(kept)).is_empty()
        })
        .count() as u64;
    let u4_ok = u4.exact && u4.undecided == oracle && u4.samples == 4096;
    let fit = decay.fit.as_ref().map_or("none".to_string(), |f| format!("sigma {:.4}, R² {:.4}", f.sigma, f.r_squared));
    verdict(
        tail_ok && fit_ok && u4_ok,
        format!(
            "u_n (n=4..24) = {:.4?}; u_n (n=64,96,128) = {:.4?}; fit {fit}; surface u_4 = {}/{} (oracle {oracle})",
            decay.rows.iter().map(|r| r.undecided_frac).collect::<Vec<_>>(),
            tail.rows.iter().map(|r| r.undecided_frac).collect::<Vec<_>>(),
            u4.undecided,
            u4.samples
        ),
    )
}

fn criterion_11(contract: &mut Contract) -> Verdict {
    let p = build_pipeline("surface", &PipelineOptions::default()).unwrap();
    let s = RunSettings::new(SolverChoice::Combined, ComplexityBound::Linear(1.0)).samples(1000);
    let r = cauchy_average_check(&p, 1, 0.5, 256, &s).unwrap();
    contract.checked += r.profile.rows.iter().map(|r| r.samples).sum::<u64>();
    contract.violations += r.contract_violations;
    let at = |n: usize| r.partial_sums.iter().find(|x| x.0 == n).unwrap().1;
    verdict(
        r.converged,
        format!(
            "S_128 = {:.5}, S_256 = {:.5}, increment {:.2}% (need < 5%)",
            at(128),
            at(256),
            100.0 * r.relative_increment
        ),
    )
}

fn main() {
    let mut out = std::io::stdout();
    let mut contract = Contract::default();
    let mut results: Vec<(u32, Verdict)> = Vec::new();
    let mut report = |id: u32, v: Verdict, out: &mut std::io::Stdout| {
        let tag = match (v.pass, UNATTAINABLE.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (documented as unattainable)",
            (false, false) => "FAIL",
        };
        writeln!(out, "criterion {id:>2}: {tag}: {}", v.detail).unwrap();
        out.flush().unwrap();
        results.push((id, v));
    };
    report(1, criterion_1(&mut contract), &mut out);
    report(2, criterion_2(), &mut out);
    report(3, criterion_3(), &mut out);
    report(5, criterion_5(&mut contract), &mut out);
    report(6, criterion_6(&mut contract), &mut out);
    report(7, criterion_7(), &mut out);
    report(8, criterion_8(&mut contract), &mut out);
    report(9, criterion_9(), &mut out);
    report(10, criterion_10(), &mut out);
    report(11, criterion_11(&mut contract), &mut out);
    let c4 = verdict(
        contract.violations == 0,
        format!(
            "{} combined runs checked against T ≤ 2·min(T_total, T_filter) + 2, {} violations",
            contract.checked, contract.violations
        ),
    );
    report(4, c4, &mut out);
    let unexpected: Vec<u32> =
        results.iter().filter(|(id, v)| v.pass == UNATTAINABLE.contains(id)).map(|(id, _)| *id).collect();
    if unexpected.is_empty() {
        writeln!(out, "acceptance: all criteria behave as documented").unwrap();
    } else {
        writeln!(out, "acceptance: unexpected outcome for criteria {unexpected:?}").unwrap();
        std::process::exit(1);
    }
}
