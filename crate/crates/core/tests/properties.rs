//! Property tests for the invariants of each module, on random inputs.

use std::sync::Arc;

use proptest::prelude::*;

use wordcase::analytics::{density_exact, exp_fit};
use wordcase::braid::{
    forget_strands, garside_normal_form, permutation_of, sl2_eval, BraidWord, Sl2Mode, Sl2Value, DEFAULT_PRIME,
};
use wordcase::measures::LengthInvariantMeasure;
use wordcase::membership::{membership_trace, schreier_walk, stallings_core};
use wordcase::pipeline::{build_pipeline, PipelineOptions};
use wordcase::presentation::{dehn_solver, Presentation, DEFAULT_LAMBDA};
use wordcase::solver::{
    free_group_solver, parallel_combine, quotient_filter, run, Answer, Homomorphism, DEFAULT_STEP_CAP,
};
use wordcase::word::{enumerate_words, free_reduce, Alphabet, Letter, Universe, Word};

fn word(g: u32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..g, any::<bool>()), 0..=max_len).prop_map(|v| {
        Word::from_letters(v.into_iter().map(|(i, inv)| if inv { Letter::neg(i) } else { Letter::pos(i) }).collect())
    })
}

fn braid(n: usize, max_len: usize) -> impl Strategy<Value = BraidWord> {
    prop::collection::vec((1..n as i32, any::<bool>()), 0..=max_len)
        .prop_map(move |v| BraidWord::new(n, v.into_iter().map(|(i, neg)| if neg { -i } else { i }).collect()).unwrap())
}

/// Conjugates of squared generators are pure, and so are their products.
fn pure_braid(n: usize) -> impl Strategy<Value = BraidWord> {
    prop::collection::vec((braid(n, 6), 1..n as i32, any::<bool>()), 0..=4).prop_map(move |parts| {
        parts.into_iter().fold(BraidWord::identity(n), |acc, (c, i, neg)| {
            let s = if neg { -i } else { i };
            let sq = BraidWord::new(n, vec![s, s]).unwrap();
            acc.concat(&c.concat(&sq).concat(&c.inverse()))
        })
    })
}

/// One rewrite by a defining relation at a chosen position.
fn rewrite(b: &BraidWord, pos: usize, choice: u8, gen: i32) -> BraidWord {
    let n = b.strands();
    let mut l = b.letters().to_vec();
    let pos = pos % (l.len() + 1);
    match choice % 3 {
        // insert a free cancellation
        0 => {
            l.splice(pos..pos, [gen, -gen]);
        }
        // braid relation on any matching window
        1 => {
            if let Some(i) = (0..l.len().saturating_sub(2)).find(|&i| {
                let (a, b, c) = (l[i], l[i + 1], l[i + 2]);
                a == c && a.signum() == b.signum() && (a.abs() - b.abs()).abs() == 1
            }) {
                let (a, b) = (l[i], l[i + 1]);
                l.splice(i..i + 3, [b, a, b]);
            } else {
                l.splice(pos..pos, [gen, -gen]);
            }
        }
        // far commutation on any matching pair
        _ => {
            if let Some(i) = (0..l.len().saturating_sub(1)).find(|&i| (l[i].abs() - l[i + 1].abs()).abs() >= 2) {
                l.swap(i, i + 1);
            } else {
                l.splice(pos..pos, [-gen, gen]);
            }
        }
    }
    BraidWord::new(n, l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_is_idempotent_and_inverses_cancel(w in word(3, 40)) {
        let r = free_reduce(&w);
        prop_assert_eq!(free_reduce(&r), r.clone());
        prop_assert!(r.is_reduced());
        prop_assert!(free_reduce(&w.concat(&w.inverse())).is_empty());
    }

    #[test]
    fn homomorphism_law(u in word(4, 20), v in word(4, 20)) {
        let src = Alphabet::letters(4);
        let dst = Alphabet::letters(2);
        let phi = Homomorphism::parse(&src, &dst, &["a b", "b'", "a a b'", "ε"]).unwrap();
        let lhs = phi.apply(&u.concat(&v)).unwrap();
        let rhs = free_reduce(&phi.apply(&u).unwrap().concat(&phi.apply(&v).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn surface_combinator_contract_and_filter_soundness(w in word(4, 24)) {
        let p = build_pipeline("surface", &PipelineOptions::default()).unwrap();
        let total = run(p.total.as_ref(), &w, DEFAULT_STEP_CAP).unwrap();
        let filter = run(p.filter.as_ref(), &w, DEFAULT_STEP_CAP).unwrap();
        let comb = run(p.combined.as_ref(), &w, DEFAULT_STEP_CAP).unwrap();
        prop_assert_eq!(comb.answer(), total.answer());
        if filter.decided() {
            prop_assert!(comb.steps <= 2 * total.steps.min(filter.steps) + 2);
            prop_assert_eq!(filter.answer(), Some(Answer::NotInLanguage));
            prop_assert_eq!(total.answer(), Some(Answer::NotInLanguage));
        }
    }

    #[test]
    fn free_pipeline_combination(w in word(2, 30)) {
        let a = Alphabet::letters(2);
        let total = free_group_solver(&a);
        let filter = quotient_filter(Homomorphism::identity(&a), free_group_solver(&a));
        let comb = parallel_combine(Arc::clone(&total), filter);
        let t = run(total.as_ref(), &w, DEFAULT_STEP_CAP).unwrap();
        let c = run(comb.as_ref(), &w, DEFAULT_STEP_CAP).unwrap();
        prop_assert_eq!(c.answer(), t.answer());
        prop_assert!(c.steps <= 2 * t.steps + 2);
    }

    #[test]
    fn dehn_accepts_relator_conjugates(parts in prop::collection::vec((word(4, 6), 0usize..8, any::<bool>()), 1..=4)) {
        let surface = Presentation::surface_genus2();
        let r = &surface.relators()[0];
        let w = parts.iter().fold(Word::empty(), |acc, (c, rot, inv)| {
            let x = r.rotate(*rot);
            let x = if *inv { x.inverse() } else { x };
            acc.concat(c).concat(&x).concat(&c.inverse())
        });
        let dehn = dehn_solver(&surface, DEFAULT_LAMBDA).unwrap();
        prop_assert_eq!(run(dehn.as_ref(), &w, DEFAULT_STEP_CAP).unwrap().answer(), Some(Answer::InLanguage));
    }

    #[test]
    fn normal_form_survives_relation_rewrites(
        b in braid(4, 16),
        steps in prop::collection::vec((0usize..40, any::<u8>(), 1i32..4), 1..6),
    ) {
        let nf = garside_normal_form(&b);
        let mut c = b.clone();
        for (pos, choice, g) in steps {
            c = rewrite(&c, pos, choice, g);
        }
        prop_assert_eq!(garside_normal_form(&c), nf);
    }

    #[test]
    fn forgetting_is_a_homomorphism(u in pure_braid(4), v in pure_braid(4)) {
        prop_assert!(permutation_of(&u).is_identity());
        let keep = [1, 2, 3];
        let whole = forget_strands(&u.concat(&v), &keep).unwrap();
        let parts = forget_strands(&u, &keep).unwrap().concat(&forget_strands(&v, &keep).unwrap());
        prop_assert_eq!(garside_normal_form(&whole), garside_normal_form(&parts));
    }

    #[test]
    fn sl2_determinant_is_one(b in braid(3, 30)) {
        match sl2_eval(&b, Sl2Mode::Exact).unwrap() {
            Sl2Value::Exact(m) => prop_assert_eq!(m.det(), 1.into()),
            _ => prop_assert!(false),
        }
        match sl2_eval(&b, Sl2Mode::ModP(DEFAULT_PRIME)).unwrap() {
            Sl2Value::ModP { entries: [a, b, c, d], p } => prop_assert_eq!((a as u128 * d as u128 + (p - b) as u128 * c as u128) % p as u128, 1),
            _ => prop_assert!(false),
        }
    }

    #[test]
    fn subgroup_products_are_members(
        gens in prop::collection::vec(word(2, 5).prop_filter("nontrivial", |w| !free_reduce(w).is_empty()), 1..=3),
        picks in prop::collection::vec((0usize..3, any::<bool>()), 0..=6),
        probe in word(2, 10),
    ) {
        let a = Alphabet::letters(2);
        let core = stallings_core(&a, &gens).unwrap();
        let w = picks.iter().fold(Word::empty(), |acc, &(i, inv)| {
            let g = &gens[i % gens.len()];
            acc.concat(&if inv { g.inverse() } else { g.clone() })
        });
        prop_assert_eq!(membership_trace(&core, &w), Answer::InLanguage);
        prop_assert_eq!(schreier_walk(&core, &w).1, Answer::InLanguage);
        prop_assert_eq!(membership_trace(&core, &probe), schreier_walk(&core, &probe).1);
    }

    #[test]
    fn measures_are_length_invariant(spec in prop::sample::select(vec!["cauchy", "geom:0.9", "uniform:1:256", "point:5", "cauchy@reduced"]), u in word(2, 8), seed in any::<u64>()) {
        let a = Alphabet::letters(2);
        let m = LengthInvariantMeasure::parse(spec, &a).unwrap();
        let u = if m.universe() == Universe::ReducedWords { free_reduce(&u) } else { u };
        let mut rng = wordcase::word::seeded_rng(seed);
        let v = wordcase::word::sample_word(&a, m.universe(), u.len(), &mut rng);
        prop_assert_eq!(m.mass(&u).unwrap(), m.mass(&v).unwrap());
    }

    #[test]
    fn exp_fit_recovers_geometric_decay(c in 0.01f64..10.0, sigma in 0.1f64..0.99, start in 1usize..10) {
        let seq: Vec<(usize, f64)> = (start..start + 8).map(|n| (n, c * sigma.powi(n as i32))).collect();
        let f = exp_fit(&seq).unwrap();
        prop_assert!((f.sigma - sigma).abs() < 1e-6);
        prop_assert!((f.c - c).abs() < 1e-6 * c.max(1.0));
        prop_assert!(f.r_squared > 1.0 - 1e-9);
    }
}

#[test]
fn density_is_monotone_in_the_predicate() {
    let a = Alphabet::letters(2);
    let trivial = |w: &Word| free_reduce(w).is_empty();
    let even = |w: &Word| w.len().is_multiple_of(2);
    let short = |w: &Word| free_reduce(w).len() <= 2;
    type Pred<'a> = &'a (dyn Fn(&Word) -> bool + Sync);
    let subsets: [(Pred, Pred); 2] = [(&trivial, &even), (&trivial, &short)];
    for n in 0..=7 {
        for (small, large) in subsets {
            let s = density_exact(small, &a, Universe::AllWords, n, 1 << 20).unwrap();
            let l = density_exact(large, &a, Universe::AllWords, n, 1 << 20).unwrap();
            assert!(s.exact_ratio().unwrap() <= l.exact_ratio().unwrap());
        }
    }
}

#[test]
fn reduced_enumeration_emits_reduced_words() {
    let a = Alphabet::letters(2);
    for n in 0..=8 {
        assert!(enumerate_words(&a, Universe::ReducedWords, n, 1 << 20).unwrap().all(|w| free_reduce(&w) == w));
    }
}
