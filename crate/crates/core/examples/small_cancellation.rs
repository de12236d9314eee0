//! Metric small cancellation and Dehn's algorithm.
//!
//! cargo run --example small_cancellation

use wordcase::harness::answer_label;
use wordcase::presentation::{dehn_solver, symmetrize, verify_metric_condition, Presentation, DEFAULT_LAMBDA};
use wordcase::solver::{run, DEFAULT_STEP_CAP};

fn main() -> wordcase::Result<()> {
    let surface = Presentation::surface_genus2();
    println!("symmetrized relators: {}", symmetrize(&surface).len());
    for (name, p) in [("genus 2", surface.clone()), ("abab", Presentation::parse("a b\na b a b")?)] {
        let r = verify_metric_condition(&p, DEFAULT_LAMBDA);
        println!("{name}: max piece {}, shortest relator {}, passes: {}", r.max_piece, r.min_relator, r.passes);
    }

    let dehn = dehn_solver(&surface, DEFAULT_LAMBDA)?;
    let a = surface.alphabet();
    for text in ["a b a' b' c d c' d'", "b' c d c' d' a b a'", "a b a' b'", "c a b a' b' c d c' d' c'"] {
        let w = a.parse_word(text)?;
        let r = run(dehn.as_ref(), &w, DEFAULT_STEP_CAP)?;
        println!("{text:>28}: {} in {} steps", answer_label(r.answer()), r.steps);
    }
    Ok(())
}
