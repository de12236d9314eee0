//! Membership in finitely generated subgroups of free groups through
//! Stallings folding and Schreier coset walks.
//!
//! cargo run --example subgroup_membership

use wordcase::harness::answer_label;
use wordcase::membership::{membership_trace, schreier_walk, stallings_core, SchreierVertex};
use wordcase::word::{Alphabet, Word};

fn main() -> wordcase::Result<()> {
    let a = Alphabet::letters(2);
    let gens = vec![a.parse_word("a a")?, a.parse_word("a b")?];
    let core = stallings_core(&a, &gens)?;
    println!("core of <aa, ab>: {} vertices", core.vertex_count());
    for (u, l, v) in core.edges() {
        println!("  {u} --{}--> {v}", a.names()[l as usize]);
    }
    for text in ["a a", "a b b' a'", "b a", "b", "a", "b' a' a a"] {
        let w = a.parse_word(text)?;
        let (end, walk) = schreier_walk(&core, &w);
        let end = match end {
            SchreierVertex::Core(v) => format!("core vertex {v}"),
            SchreierVertex::Tree { anchor, path } => {
                format!("{} beyond core vertex {anchor}", a.format(&Word::from_letters(path)))
            }
        };
        let trace = answer_label(Some(membership_trace(&core, &w)));
        println!("{text:>12}: trace {trace}, walk {}, coset ends at {end}", answer_label(Some(walk)));
    }
    Ok(())
}
