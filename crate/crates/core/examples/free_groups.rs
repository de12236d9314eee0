//! Free group solver, homomorphisms, a quotient filter and the race between
//! a slow total solver and a fast partial filter.
//!
//! cargo run --example free_groups

use std::sync::Arc;

use wordcase::harness::answer_label;
use wordcase::solver::{
    free_group_solver, parallel_combine, product_pipeline, quotient_filter, run, with_forced_cost, ComplexityBound,
    Homomorphism, DEFAULT_STEP_CAP,
};
use wordcase::word::{free_reduce, sample_word, seeded_rng, Alphabet, Universe};

fn main() -> wordcase::Result<()> {
    let f2 = Alphabet::letters(2);
    let w = f2.parse_word("a b b' a' b")?;
    println!("{} reduces to {}", f2.format(&w), f2.format(&free_reduce(&w)));

    let solver = free_group_solver(&f2);
    let r = run(solver.as_ref(), &w, DEFAULT_STEP_CAP)?;
    println!("free solver: {} in {} steps", answer_label(r.answer()), r.steps);

    // F(a, b, c) → F(a, b), c ↦ a b
    let f3 = Alphabet::letters(3);
    let phi = Homomorphism::parse(&f3, &f2, &["a", "b", "a b"])?;
    let u = f3.parse_word("c b' a'")?;
    println!("phi({}) = {}", f3.format(&u), f2.format(&phi.apply(&u)?));

    // a quadratic total raced against the identity quotient filter
    let slow = with_forced_cost(free_group_solver(&f2), ComplexityBound::Quadratic(1.0));
    let filter = quotient_filter(Homomorphism::identity(&f2), free_group_solver(&f2));
    let combined = parallel_combine(Arc::clone(&slow), Arc::clone(&filter));
    let mut rng = seeded_rng(1);
    println!("{:>4} {:>8} {:>8} {:>8}", "n", "T_total", "T_filter", "T_comb");
    for n in [8, 32, 128] {
        let w = sample_word(&f2, Universe::AllWords, n, &mut rng);
        let steps = |f: &wordcase::solver::Factory| run(f.as_ref(), &w, DEFAULT_STEP_CAP).map(|r| r.steps);
        println!("{n:>4} {:>8} {:>8} {:>8}", steps(&slow)?, steps(&filter)?, steps(&combined)?);
    }

    // ℤ × F(a, b): the projection onto the free factor is a filter
    let z = Alphabet::new(&["t"])?;
    let product = product_pipeline(free_group_solver(&z), &z)?;
    let x = product.alphabet.parse_word("t a t' a'")?;
    let y = product.alphabet.parse_word("t a t' b")?;
    for w in [x, y] {
        let total = run(product.total.as_ref(), &w, DEFAULT_STEP_CAP)?;
        let filter = run(product.filter.as_ref(), &w, DEFAULT_STEP_CAP)?;
        println!(
            "{}: total {}, filter {}",
            product.alphabet.format(&w),
            answer_label(total.answer()),
            answer_label(filter.answer())
        );
    }
    Ok(())
}
