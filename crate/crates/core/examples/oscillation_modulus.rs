//! Exact Δ_n(b) against a fine-grid evaluation, and its three parts.

use oscillab::innovations::ContinuousLaw;
use oscillab::oscillation::{oscillation_modulus, oscillation_modulus_bruteforce, oscillation_modulus_parts, SortedSample};
use oscillab::process::ProcessModel;
use oscillab::innovations::InnovationDistribution as D;
use oscillab::rng::substream;

fn main() -> oscillab::Result<()> {
    let law = ContinuousLaw::Gaussian { mean: 0.0, sd: 1.0 };
    let m = ProcessModel::iid(D::standard_gaussian())?;
    let s = SortedSample::new(m.simulate_path(500, &mut substream(7, &[])))?;
    let step = 1e-4;
    for b in [0.001, 0.01, 0.1, 0.5] {
        let exact = oscillation_modulus(&s, b, &law)?;
        let grid = oscillation_modulus_bruteforce(&s, b, &law, step, -8.0, 8.0)?;
        let p = oscillation_modulus_parts(&s, b, &law)?;
        println!(
            "b = {b:<6} Δ = {exact:.6}  grid {grid:.6}  (bound on gap {:.1e})  parts: up {:.4} gap {:.4} window {:.4}",
            2.0 * 500f64.sqrt() * law.density_sup() * step,
            p.upward,
            p.short_gap,
            p.window
        );
    }

    // two points of U(0,1): the answer is 1/√2
    let two = SortedSample::new(vec![0.25, 0.75])?;
    println!("\nn = 2: Δ(0.25) = {}", oscillation_modulus(&two, 0.25, &ContinuousLaw::Uniform { lo: 0.0, hi: 1.0 })?);
    Ok(())
}
