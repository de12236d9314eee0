//! Length-invariant measures: masses, truncation, sampling.
//!
//! cargo run --example measures

use wordcase::measures::LengthInvariantMeasure;
use wordcase::word::{seeded_rng, Alphabet};

fn main() -> wordcase::Result<()> {
    let a = Alphabet::letters(2);
    let w = a.parse_word("a b a'")?;
    for spec in ["cauchy", "geom:0.9", "uniform:1:256", "point:3", "cauchy@reduced"] {
        let m = LengthInvariantMeasure::parse(spec, &a)?;
        let d = m.lengths();
        println!(
            "{spec:>15}: d(3) = {:.5}, mu(aba') = {:.3e}, mean length {:.2}, mass lost to truncation {:.2e}",
            d.weight(3),
            m.mass(&w)?,
            d.mean(),
            d.truncation_loss()
        );
    }

    let m = LengthInvariantMeasure::parse("geom:0.8", &a)?;
    let mut rng = seeded_rng(42);
    let samples: Vec<String> = (0..6).map(|_| a.format(&m.sample(&mut rng))).collect();
    println!("geom:0.8 samples: {samples:?}");
    Ok(())
}
