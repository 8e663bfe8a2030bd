//! Integrability of |φ|² weights, Parseval and density bounds for the
//! innovation families.

use oscillab::innovations::{cf_integrability, parseval_check, InnovationDistribution as D};
use oscillab::quadrature::{Finiteness, QuadratureSpec};

fn main() -> oscillab::Result<()> {
    let q = QuadratureSpec::default();
    for d in [D::standard_gaussian(), D::cauchy(0.0, 1.0)?, D::uniform(-1.0, 1.0)?, D::stable(1.2, 1.0)?] {
        println!("{d:?}  sup f = {:.5}  tail index {}", d.density_sup(), d.tail_index());
        for alpha in [0.5, 1.0, 2.0] {
            let r = cf_integrability(&d, alpha, &q)?;
            let v = match r.verdict {
                Finiteness::Finite => format!("{:.10}", r.value),
                Finiteness::Diverges => "diverges".into(),
            };
            println!("  α = {alpha}: {v}");
        }
        match parseval_check(&d, &q) {
            Ok(p) => println!("  ∫|φ|² = {:.10}  2π∫f² = {:.10}", p.lhs, p.rhs),
            Err(e) => println!("  parseval: {e}"),
        }
    }
    Ok(())
}
