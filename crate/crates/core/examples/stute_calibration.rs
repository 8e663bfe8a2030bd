//! Iid uniform samples: Δ_n(b_n)/√(b_n ln(1/b_n)) drifts towards √2.

use oscillab::experiments::{run_stute_calibration, BandwidthRule, ExperimentConfig};
use oscillab::innovations::InnovationDistribution as D;
use oscillab::process::ProcessModel;

fn main() -> oscillab::Result<()> {
    let m = ProcessModel::iid(D::uniform(0.0, 1.0)?)?;
    let cfg = ExperimentConfig::new(m, vec![1 << 10, 1 << 18], BandwidthRule::PowerLaw { eta: 0.5 }, 20, 0)?;
    let r = run_stute_calibration(&cfg)?;
    for a in &r.aggregates {
        println!("n = {:>7}  median ratio {:.4}  IQR {:.4}", a.n, a.median_ratio_stute, a.iqr_ratio_stute);
    }
    println!("√2 = {:.4}", 2f64.sqrt());
    for c in &r.checks {
        println!("{:?}  {}  {:.4}", c.outcome, c.name, c.value);
    }
    Ok(())
}
