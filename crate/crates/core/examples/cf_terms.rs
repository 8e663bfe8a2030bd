//! Per-lag characteristic-function terms and the moment bound that
//! dominates them.

use oscillab::dependence::{bound_chain_check, cf_term_series};
use oscillab::innovations::{cf_integrability, InnovationDistribution as D};
use oscillab::process::ProcessModel;
use oscillab::quadrature::QuadratureSpec;

fn main() -> oscillab::Result<()> {
    let q = QuadratureSpec::default();
    let g = D::standard_gaussian();
    println!("∫|φ|²(1+t²)|t|² dt = {:.8}", cf_integrability(&g, 2.0, &q)?.value);

    let m = ProcessModel::tar(0.5, -0.3, g)?;
    let c = cf_term_series(&m, 12, 2.0, &q, 2000, 5)?;
    for k in 0..c.lags.len() {
        println!(
            "k = {:>2}  term {:.3e}  bound {:.3e}  partial sum {:.5}",
            c.lags[k], c.terms[k], c.bounds[k], c.partial_sums[k]
        );
    }
    println!("verdict {:?}, violations {:?}", c.tail.verdict, c.violations());

    let chord = bound_chain_check(3.0, 0.2);
    println!("\n|e^{{3i}} − e^{{0.2i}}| = {:.6} ≤ {:.6}", chord.lhs, chord.rhs);

    // uniform innovations have a slowly decaying cf; the integral diverges
    let u = ProcessModel::linear(vec![1.0, 0.5], D::uniform(0.0, 1.0)?)?;
    if let Err(e) = cf_term_series(&u, 4, 2.0, &q, 100, 5) {
        println!("uniform: {e}");
    }
    Ok(())
}
