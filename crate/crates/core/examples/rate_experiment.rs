//! Δ_n(b_n) over a grid of n for a threshold autoregression, with the
//! rate normalisations and trend checks.

use oscillab::experiments::{run_rate_experiment, BandwidthRule, ExperimentConfig};
use oscillab::innovations::InnovationDistribution as D;
use oscillab::process::ProcessModel;

fn main() -> oscillab::Result<()> {
    let m = ProcessModel::tar(0.5, -0.3, D::standard_gaussian())?;
    let grid = (10..=16).map(|k| 1usize << k).collect();
    let cfg = ExperimentConfig::new(m, grid, BandwidthRule::PowerLaw { eta: 0.5 }, 10, 1)?;
    let r = run_rate_experiment(&cfg)?;
    for c in &r.regime {
        println!("regime {}: {}", c.name, c.passed);
    }
    println!("{:>8} {:>10} {:>10} {:>12} {:>12} {:>12}", "n", "b", "median Δ", "/√(b ln n)", "/√(b ln 1/b)", "/(b ι(n))");
    for a in &r.aggregates {
        println!(
            "{:>8} {:>10.5} {:>10.5} {:>12.4} {:>12.4} {:>12.4}",
            a.n, a.b, a.median_delta, a.median_ratio_sqrt, a.median_ratio_stute, a.median_ratio_iota
        );
    }
    for c in &r.checks {
        println!("{:?}  {}  {:.4}  ({})", c.outcome, c.name, c.value, c.detail);
    }
    for n in &r.notes {
        println!("note: {n}");
    }
    Ok(())
}
