use oscillab::cdf::Cdf;
use oscillab::dependence::{bound_chain_check, min_power_check};
use oscillab::innovations::{ContinuousLaw, InnovationDistribution};
use oscillab::oscillation::{oscillation_modulus, SortedSample};
use proptest::prelude::*;

fn sample_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1..200)
}

fn law_strategy() -> impl Strategy<Value = ContinuousLaw> {
    prop_oneof![
        (-1.0f64..1.0, 0.2f64..3.0).prop_map(|(mean, sd)| ContinuousLaw::Gaussian { mean, sd }),
        (-1.0f64..1.0, 0.2f64..3.0).prop_map(|(loc, scale)| ContinuousLaw::Cauchy { loc, scale }),
        (-4.0f64..0.0, 0.5f64..5.0).prop_map(|(lo, w)| ContinuousLaw::Uniform { lo, hi: lo + w }),
    ]
}

/// `F((x − shift)/scale)`
struct Affine<L> {
    law: L,
    shift: f64,
    scale: f64,
}

impl<L: Cdf> Cdf for Affine<L> {
    fn cdf(&self, x: f64) -> f64 {
        self.law.cdf((x - self.shift) / self.scale)
    }
    fn max_increment(&self, lo: f64, hi: f64, width: f64) -> f64 {
        self.law
            .max_increment((lo - self.shift) / self.scale, (hi - self.shift) / self.scale, width / self.scale)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn modulus_is_monotone_in_b(x in sample_strategy(), law in law_strategy(), b in 1e-4f64..2.0, f in 1.0f64..4.0) {
        let s = SortedSample::new(x).unwrap();
        let small = oscillation_modulus(&s, b, &law).unwrap();
        let large = oscillation_modulus(&s, b * f, &law).unwrap();
        prop_assert!(small <= large + 1e-12);
    }

    #[test]
    fn modulus_bounds(mut x in sample_strategy(), law in law_strategy(), b in 1e-6f64..2.0, dup in 0usize..5) {
        for i in 0..dup.min(x.len() - 1) {
            x[i + 1] = x[0];
        }
        let s = SortedSample::new(x).unwrap();
        let n = s.n() as f64;
        let d = oscillation_modulus(&s, b, &law).unwrap();
        let jump = n.sqrt() * s.max_multiplicity() as f64 / n;
        prop_assert!(d >= jump - 1e-12, "Δ = {d} below jump {jump}");
        prop_assert!(d <= 2.0 * n.sqrt() + 1e-12);
    }

    #[test]
    fn modulus_is_affine_equivariant(x in sample_strategy(), law in law_strategy(), b in 1e-3f64..1.0,
                                     shift in -5.0f64..5.0, scale in 0.1f64..10.0) {
        let s = SortedSample::new(x.clone()).unwrap();
        let t = SortedSample::new(x.iter().map(|v| shift + scale * v).collect()).unwrap();
        let d = oscillation_modulus(&s, b, &law).unwrap();
        let e = oscillation_modulus(&t, b * scale, &Affine { law, shift, scale }).unwrap();
        prop_assert!((d - e).abs() <= 1e-9 * (1.0 + d), "{d} vs {e}");
    }

    #[test]
    fn chord_bound(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        let c = bound_chain_check(a, b);
        prop_assert!(c.holds(), "{c:?}");
    }

    #[test]
    fn min_power_bound(u in 0.0f64..100.0, alpha in 1e-3f64..=2.0) {
        let (l, r) = min_power_check(u, alpha);
        prop_assert!(l <= r * (1.0 + 1e-15) + 1e-300);
    }

    #[test]
    fn characteristic_functions_are_hermitian(t in -50.0f64..50.0, alpha in 0.1f64..=2.0) {
        for d in [
            InnovationDistribution::gaussian(0.4, 1.3).unwrap(),
            InnovationDistribution::uniform(-1.0, 2.5).unwrap(),
            InnovationDistribution::cauchy(-0.3, 0.6).unwrap(),
            InnovationDistribution::stable(alpha, 1.2).unwrap(),
        ] {
            let (p, m) = (d.cf(t), d.cf(-t));
            prop_assert!(p.norm() <= 1.0 + 1e-15);
            prop_assert!((p - m.conj()).norm() <= 1e-15);
        }
    }
}
