use oscillab::innovations::{ContinuousLaw, InnovationDistribution};
use oscillab::oscillation::{oscillation_modulus, oscillation_modulus_bruteforce, SortedSample};
use oscillab::rng::substream;
use rand::Rng;

fn law_of(i: u64) -> ContinuousLaw {
    match i % 3 {
        0 => ContinuousLaw::Uniform { lo: 0.0, hi: 1.0 },
        1 => ContinuousLaw::Gaussian { mean: 0.3, sd: 1.2 },
        _ => ContinuousLaw::Cauchy { loc: 0.0, scale: 0.7 },
    }
}

#[test]
fn exact_modulus_dominates_grid_oracle() {
    let mut worst: f64 = 0.0;
    for inst in 0..120u64 {
        let mut rng = substream(77, &[inst]);
        let law = law_of(inst);
        let n = rng.random_range(1..=300usize);
        // sample from a possibly different law so that G_n has real structure
        let src = match rng.random_range(0..3) {
            0 => InnovationDistribution::uniform(-0.2, 0.9).unwrap(),
            1 => InnovationDistribution::gaussian(0.0, 0.8).unwrap(),
            _ => InnovationDistribution::cauchy(0.2, 1.0).unwrap(),
        };
        let mut x: Vec<f64> = src.sample_n(n, &mut rng).into_iter().map(|v| v.clamp(-20.0, 20.0)).collect();
        if inst % 7 == 0 {
            // duplicate atoms
            for i in 0..n / 3 {
                x[i] = x[n - 1 - i];
            }
        }
        let s = SortedSample::new(x).unwrap();
        let b = 10f64.powf(rng.random_range(-3.0..0.0));
        let exact = oscillation_modulus(&s, b, &law).unwrap();
        let step = 1e-4 * law.scale();
        // every window-mass maximiser and every atom lies in [-25, 25]
        let (lo, hi) = (-25.0, 25.0);
        let brute = oscillation_modulus_bruteforce(&s, b, &law, step, lo, hi).unwrap();
        let slack = 2.0 * (n as f64).sqrt() * law.density_sup() * step + 1e-12;
        assert!(exact >= brute - 1e-12, "inst {inst}: exact {exact} < brute {brute}");
        assert!(exact - brute <= slack, "inst {inst}: gap {} > {slack} (n={n}, b={b})", exact - brute);
        assert!(exact <= 2.0 * (n as f64).sqrt());
        worst = worst.max((exact - brute) / slack);
    }
    eprintln!("worst gap / slack = {worst}");
}
