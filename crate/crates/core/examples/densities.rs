//! Asymptotic densities: exact ball counts, stratified sampling, and the
//! decay of a filter's undecided set.
//!
//! cargo run --release --example densities

use wordcase::analytics::{density_exact, density_mc, exp_fit};
use wordcase::harness::{generic_density_experiment, RunSettings};
use wordcase::pipeline::{build_pipeline, PipelineOptions, SolverChoice};
use wordcase::solver::ComplexityBound;
use wordcase::word::{free_reduce, Alphabet, Universe, Word};

fn main() -> wordcase::Result<()> {
    let a = Alphabet::letters(2);
    let trivial = |w: &Word| free_reduce(w).is_empty();
    for n in [2, 4, 6] {
        println!("{}", density_exact(&trivial, &a, Universe::AllWords, n, 1 << 20)?);
    }
    println!("{}", density_mc(&trivial, &a, Universe::AllWords, 16, 100_000, 5)?);

    let seq: Vec<(usize, f64)> = (1..=10).map(|n| (n, 3.0 * 0.5f64.powi(n as i32))).collect();
    let fit = exp_fit(&seq)?;
    println!("fit of 3·0.5^n: sigma {:.6}, C {:.6}, R² {:.6}", fit.sigma, fit.c, fit.r_squared);

    let s = RunSettings::new(SolverChoice::Filter, ComplexityBound::Linear(1.0)).samples(1000);
    for spec in ["surface", "braid:4"] {
        let p = build_pipeline(spec, &PipelineOptions::default())?;
        let report = generic_density_experiment(&p, &[4, 8, 12, 16, 20, 24], &s)?;
        let u: Vec<String> = report.rows.iter().map(|r| format!("{:.4}", r.undecided_frac)).collect();
        let fit = report.fit.map(|f| format!("sigma {:.3}, R² {:.3}", f.sigma, f.r_squared));
        println!("{spec}: u_n = [{}], fit {}", u.join(", "), fit.unwrap_or_else(|| "none".into()));
    }
    Ok(())
}
