//! Stationary paths from the built-in models, and a coupled pair.

use oscillab::innovations::InnovationDistribution as D;
use oscillab::process::{ProcessModel, RecursiveMap};
use oscillab::rng::substream;
use oscillab::stats::{lag1_autocorrelation, mean, variance};

fn main() -> oscillab::Result<()> {
    let g = D::standard_gaussian();
    let models = [
        ProcessModel::iid(D::uniform(0.0, 1.0)?)?,
        ProcessModel::linear_geometric(0.5, 40, g)?,
        ProcessModel::tar(0.5, -0.3, g)?,
        ProcessModel::recursive(RecursiveMap::Tanh { gain: 0.8 }, 0.8, g)?,
        ProcessModel::linear(vec![1.0, 0.5], D::stable(1.5, 1.0)?)?,
    ];
    for (i, m) in models.iter().enumerate() {
        let x = m.simulate_path(10_000, &mut substream(1, &[i as u64]));
        println!(
            "{:<40} mean {:+.4}  var {:.4}  lag-1 acf {:+.4}",
            m.label(),
            mean(&x),
            variance(&x),
            lag1_autocorrelation(&x)
        );
    }

    // same innovations except ε_0
    let c = models[2].simulate_coupled(8, &mut substream(2, &[]));
    println!("\nε_0 = {:.4}, ε'_0 = {:.4}", c.eps0, c.eps0_star);
    for k in 0..=8 {
        println!("k = {k}  X = {:+.6}  X* = {:+.6}", c.x[k], c.x_star[k]);
    }
    Ok(())
}
