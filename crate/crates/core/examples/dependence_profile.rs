//! Coupling estimates of the physical dependence measure and its
//! summability verdict.

use oscillab::dependence::{eps_diff_norm, estimate_pdm, pdm_summability};
use oscillab::innovations::InnovationDistribution as D;
use oscillab::process::ProcessModel;

fn main() -> oscillab::Result<()> {
    let g = D::standard_gaussian();

    // linear: δ_α(k) = |a_k|·‖ε − ε'‖_α
    let coeffs = vec![1.0, 0.5, 0.25, 0.125];
    let lin = ProcessModel::linear(coeffs.clone(), g)?;
    let norm = eps_diff_norm(&g, 2.0);
    for (k, a) in coeffs.iter().enumerate() {
        let e = estimate_pdm(&lin, k, 2.0, 10_000, 3)?;
        println!("linear k = {k}: {:.5} ± {:.5}  (exact {:.5})", e.estimate, e.stderr, a * norm);
    }

    for m in [ProcessModel::tar(0.5, -0.5, g)?, ProcessModel::tar(0.95, 0.9, g)?] {
        let p = pdm_summability(&m, 2.0, 16, 5000, 4)?;
        println!("\n{}", m.label());
        for (k, (d, s)) in p.lags.iter().zip(p.pdm.iter().zip(&p.partial_sums)).step_by(4) {
            println!("  k = {k:>2}  pdm {d:.3e}  partial sum {s:.4}");
        }
        let fit = p.decay_fit.unwrap();
        println!("  log-pdm slope {:.4} (ln ρ = {:.4}), verdict {:?}", fit.slope, m.rho().unwrap().ln(), p.tail.verdict);
    }
    Ok(())
}
