//! G_n = G_n° + G_n*: the martingale part, the smooth part and the bound
//! Δ_n ≤ Δ_n° + b·sup|g_n*|.

use oscillab::decomposition::{decompose, default_grid, martingale_modulus, smooth_part_modulus_bound};
use oscillab::innovations::InnovationDistribution as D;
use oscillab::oscillation::{iota, oscillation_modulus, SortedSample};
use oscillab::process::ProcessModel;
use oscillab::rng::substream;

fn main() -> oscillab::Result<()> {
    let m = ProcessModel::linear_geometric(0.5, 40, D::standard_gaussian())?;
    let marginal = m.marginal()?;
    for k in [10, 12, 14, 16] {
        let n = 1usize << k;
        let b = (n as f64).powf(-0.5);
        let path = m.simulate_path_with_states(n, &mut substream(6, &[k]));
        let delta = oscillation_modulus(&SortedSample::new(path.x.clone())?, b, marginal.as_ref())?;
        let circ = martingale_modulus(&path, &m, b)?;
        let d = decompose(&path, &m, &default_grid(&m, &path.y)?)?;
        let smooth = smooth_part_modulus_bound(&d, b)?;
        println!(
            "n = {n:>6}  Δ = {delta:.4}  Δ° = {:.4} (±{:.0e})  Δ* = {:.4} ≤ {:.4}  sup|g*|/ι(n) = {:.4}  residual {:.0e}",
            circ.delta,
            circ.error_bound,
            smooth.lhs,
            smooth.rhs,
            d.sup_gstar_deriv / iota(n as f64),
            d.identity_residual()
        );
    }
    Ok(())
}
