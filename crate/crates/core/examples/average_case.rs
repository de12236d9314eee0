//! Average-case time over length-invariant measures: per-length profiles,
//! the uniform bound, integral estimates and the Cauchy check.
//!
//! cargo run --release --example average_case

use wordcase::harness::{
    bench_avg, cauchy_average_check, integral_estimate, profile_pipeline, ExperimentConfig, RunSettings,
};
use wordcase::measures::LengthInvariantMeasure;
use wordcase::pipeline::{build_pipeline, PipelineOptions, SolverChoice};
use wordcase::solver::ComplexityBound;

fn main() -> wordcase::Result<()> {
    // a quadratic total solver raced against a linear filter
    let opts = PipelineOptions { forced_total: Some(ComplexityBound::Quadratic(1.0)), ..Default::default() };
    let p = build_pipeline("surface", &opts)?;
    let lengths = [32, 64, 128, 256];
    let s = RunSettings::new(SolverChoice::Combined, ComplexityBound::Linear(1.0)).samples(500);
    for choice in [SolverChoice::Combined, SolverChoice::Total] {
        let table = profile_pipeline(&p, &lengths, &RunSettings { choice, ..s.clone() })?;
        let ratios: Vec<String> = table.rows.iter().map(|r| format!("{:.2}", r.ratio)).collect();
        println!("{choice:?}: E_n[T]/n at {lengths:?} = [{}]", ratios.join(", "));
    }

    let cauchy = LengthInvariantMeasure::parse("cauchy", &p.alphabet)?;
    let est = integral_estimate(&p, &cauchy, &s, 256)?;
    println!(
        "Cauchy integral: {:.4} ± {:.4} at N=256, {:.4} at N=128, diverging: {}",
        est.at_truncation.value, est.at_truncation.ci_half, est.at_half.value, est.diverging
    );

    let linear = build_pipeline("surface", &PipelineOptions::default())?;
    let report = cauchy_average_check(&linear, 1, 0.5, 128, &s.clone().samples(200))?;
    println!("Cauchy check: partial sums {:?}, converged: {}", report.partial_sums, report.converged);

    let config = ExperimentConfig {
        pipeline: "braid:4".into(),
        measures: vec!["cauchy".into(), "geom:0.9".into(), "uniform:1:64".into()],
        lengths: (0..=64).collect(),
        samples: 200,
        ..Default::default()
    };
    let bench = bench_avg(&config)?;
    println!("braid:4 uniform bound {:.3}", bench.uniform_bound);
    for m in &bench.measures {
        println!("  {}: {:.3} ≤ bound: {}", m.measure, m.family_sum.value, m.below_uniform_bound);
    }
    Ok(())
}
