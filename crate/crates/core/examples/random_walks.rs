//! Return probabilities of simple random walks: exact cogrowth counts,
//! the distance-chain recursion and Schreier graphs.
//!
//! cargo run --example random_walks

use wordcase::analytics::{cogrowth_count, return_probability_dp};
use wordcase::membership::{spectral_radius_estimate, stallings_core, GraphSpec, WalkMethod};
use wordcase::word::Alphabet;

fn main() -> wordcase::Result<()> {
    let counts: Vec<String> = (0..=8).step_by(2).map(|n| cogrowth_count(2, n).to_string()).collect();
    println!("words of length 0, 2, …, 8 trivial in F2: {}", counts.join(", "));
    println!("p_2 = {}, p_4 = {}", return_probability_dp(4, 2)?, return_probability_dp(4, 4)?);

    let a = Alphabet::letters(2);
    let h = stallings_core(&a, &[a.parse_word("a a")?, a.parse_word("a b")?])?;
    let graphs = [
        ("F2 Cayley graph", GraphSpec::FreeCayley(2)),
        ("integer line", GraphSpec::IntegerLine),
        ("Schreier graph of <aa, ab>", GraphSpec::Schreier(h)),
    ];
    for (name, g) in graphs {
        let exact = spectral_radius_estimate(&g, 12, WalkMethod::ExactDp)?;
        let mc = spectral_radius_estimate(&g, 12, WalkMethod::MonteCarlo { trials: 200_000, seed: 3 })?;
        println!(
            "{name:>28}: p_24/p_22 = {:.4} (sampled {:.4}), p_24 = {:.3e}",
            exact.tail_ratio, mc.tail_ratio, exact.probabilities[12]
        );
    }
    Ok(())
}
