//! Braid groups: Garside normal forms, the Artin action, strand forgetting
//! and the SL(2, ℤ) filter.
//!
//! cargo run --example braids

use wordcase::braid::{
    artin_is_trivial, braid_filter_with_cost, forget_strands, garside_normal_form, permutation_of, sl2_eval, BraidWord,
    Sl2Mode, DEFAULT_PRIME,
};
use wordcase::harness::answer_label;
use wordcase::pipeline::{build_pipeline, PipelineOptions, SolverChoice};
use wordcase::solver::DEFAULT_STEP_CAP;

fn main() -> wordcase::Result<()> {
    // σ₁σ₂σ₁ σ₂⁻¹σ₁⁻¹σ₂⁻¹ is a braid relation
    for text in ["1 2 1 -2 -1 -2", "1 2 -1 -2", "1 3 -1 -3", "1 1 2 2"] {
        let b = BraidWord::parse(text, 4)?;
        let nf = garside_normal_form(&b);
        let perms: Vec<_> = nf.factors.iter().map(|f| f.cycles()).collect();
        println!(
            "{text:>16}: inf {}, factors {perms:?}, trivial {}, permutation cycles {:?}",
            nf.inf,
            artin_is_trivial(&b),
            permutation_of(&b).cycles()
        );
    }

    let pure = BraidWord::parse("2 1 1 2", 4)?;
    let b3 = forget_strands(&pure, &[1, 2, 3])?;
    println!("forget strand 4 of {pure}: {b3}");
    println!("SL2 image (exact): {:?}", sl2_eval(&b3, Sl2Mode::Exact)?);
    println!("SL2 image (mod p): {:?}", sl2_eval(&b3, Sl2Mode::ModP(DEFAULT_PRIME))?);
    println!("filter stage: {:?}", braid_filter_with_cost(&pure, Sl2Mode::ModP(DEFAULT_PRIME))?);

    let p = build_pipeline("braid:4", &PipelineOptions::default())?;
    for text in ["1 2 -1 -2", "2 1 1 2 -2 -1 -1 -2"] {
        let w = p.parse_word(text)?;
        for choice in [SolverChoice::Total, SolverChoice::Filter, SolverChoice::Combined] {
            let r = p.solve(&w, choice, DEFAULT_STEP_CAP)?;
            println!("{text:>20} {choice:?}: {} in {} steps", answer_label(r.answer()), r.steps);
        }
    }
    Ok(())
}
