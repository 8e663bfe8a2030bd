//! The state mixture `F_n*(x) = (1/n) Σ F_step(x − Y_i)` and its density.
//!
//! For smooth step laws the states are grouped into bins of width
//! `δ = BIN_WIDTH·scale`, centred at the bin mean `ȳ`, and each bin is
//! summed through a third-order Taylor expansion in `d = Y − ȳ`:
//! `Σ F(u − d) ≈ c F(u) − s₁ f(u) + s₂ f′(u)/2 − s₃ f″(u)/6`, `u = x − ȳ`,
//! with `s_p = Σ d^p`. The remainder per state is at most
//! `sup|f‴|·(δ/2)⁴/24`. The density uses the derivative of the same
//! expression, so the two are exactly consistent.
//!
//! For uniform step laws `F_n*` is piecewise linear and is evaluated exactly
//! from sorted states and prefix sums.

use crate::innovations::ContinuousLaw;

/// Bin width in units of the step law's scale.
pub const BIN_WIDTH: f64 = 0.01;

#[derive(Debug, Clone)]
struct Bin {
    center: f64,
    c: f64,
    s1: f64,
    s2: f64,
    s3: f64,
}

#[derive(Debug, Clone)]
enum Repr {
    Binned(Vec<Bin>),
    /// Sorted states and prefix sums `P[k] = Σ_{i<k} Y_(i)`.
    Uniform { states: Vec<f64>, prefix: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct StateMixture {
    law: ContinuousLaw,
    n: usize,
    min_state: f64,
    max_state: f64,
    repr: Repr,
    remainder: f64,
}

impl StateMixture {
    pub fn new(states: &[f64], law: ContinuousLaw) -> Self {
        assert!(!states.is_empty());
        let mut sorted = states.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let n = sorted.len();
        let (min_state, max_state) = (sorted[0], sorted[n - 1]);
        if let ContinuousLaw::Uniform { .. } = law {
            let mut prefix = Vec::with_capacity(n + 1);
            prefix.push(0.0);
            for &y in &sorted {
                prefix.push(prefix.last().unwrap() + y);
            }
            return Self {
                law,
                n,
                min_state,
                max_state,
                repr: Repr::Uniform { states: sorted, prefix },
                remainder: 0.0,
            };
        }
        let delta = BIN_WIDTH * law.scale();
        let mut bins = Vec::new();
        let mut start = 0;
        while start < n {
            let edge = sorted[start] + delta;
            let end = start + sorted[start..].partition_point(|&y| y < edge);
            let group = &sorted[start..end];
            let c = group.len() as f64;
            let center = group.iter().sum::<f64>() / c;
            let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
            for &y in group {
                let d = y - center;
                s1 += d;
                s2 += d * d;
                s3 += d * d * d;
            }
            bins.push(Bin { center, c, s1, s2, s3 });
            start = end;
        }
        let remainder = sup_abs_third_derivative(&law) * (delta).powi(4) / 24.0;
        Self {
            law,
            n,
            min_state,
            max_state,
            repr: Repr::Binned(bins),
            remainder,
        }
    }

    pub fn law(&self) -> &ContinuousLaw {
        &self.law
    }

    pub fn state_range(&self) -> (f64, f64) {
        (self.min_state, self.max_state)
    }

    /// Bound on `|F̂_n* − F_n*|` from the Taylor remainder.
    pub fn cdf_error_bound(&self) -> f64 {
        self.remainder
    }

    pub fn bins(&self) -> usize {
        match &self.repr {
            Repr::Binned(b) => b.len(),
            Repr::Uniform { states, .. } => states.len(),
        }
    }

    /// `(F_n*(x), f_n*(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.n as f64;
        match &self.repr {
            Repr::Binned(bins) => {
                let (mut cdf, mut pdf) = (0.0, 0.0);
                for b in bins {
                    let u = x - b.center;
                    let f = self.law.pdf(u);
                    let big_f = self.law.cdf(u);
                    if b.s2 == 0.0 {
                        cdf += b.c * big_f;
                        pdf += b.c * f;
                        continue;
                    }
                    let (d1, d2, d3) = self.law.pdf_derivatives(u).unwrap();
                    cdf += b.c * big_f - b.s1 * f + 0.5 * b.s2 * d1 - b.s3 / 6.0 * d2;
                    pdf += b.c * f - b.s1 * d1 + 0.5 * b.s2 * d2 - b.s3 / 6.0 * d3;
                }
                (cdf / n, pdf / n)
            }
            Repr::Uniform { states, prefix } => {
                let ContinuousLaw::Uniform { lo, hi } = self.law else {
                    unreachable!()
                };
                let w = hi - lo;
                // Y ≤ x − hi: F = 1; x − hi < Y < x − lo: F = (x − lo − Y)/w
                let full = states.partition_point(|&y| y <= x - hi);
                let part_end = states.partition_point(|&y| y < x - lo);
                let k = (part_end - full) as f64;
                let sum = prefix[part_end] - prefix[full];
                let cdf = (full as f64 + ((x - lo) * k - sum) / w) / n;
                (cdf.clamp(0.0, 1.0), k / (n * w))
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    /// Breakpoints of the piecewise-linear mixture (uniform step laws).
    pub fn breakpoints(&self) -> Option<Vec<f64>> {
        match (&self.repr, self.law) {
            (Repr::Uniform { states, .. }, ContinuousLaw::Uniform { lo, hi }) => {
                let mut k: Vec<f64> = states.iter().flat_map(|&y| [y + lo, y + hi]).collect();
                k.sort_unstable_by(f64::total_cmp);
                k.dedup();
                Some(k)
            }
            _ => None,
        }
    }
}

/// `sup |f‴|`, by a fine scan in standardized units.
fn sup_abs_third_derivative(law: &ContinuousLaw) -> f64 {
    let (m, s) = (law.mode(), law.scale());
    (0..=20_000)
        .map(|i| {
            let z = -10.0 + 1e-3 * i as f64;
            law.pdf_derivatives(m + s * z).map_or(0.0, |d| d.2.abs())
        })
        .fold(0.0, f64::max)
        * 1.01
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    fn direct(states: &[f64], law: &ContinuousLaw, x: f64) -> (f64, f64) {
        let n = states.len() as f64;
        (
            states.iter().map(|y| law.cdf(x - y)).sum::<f64>() / n,
            states.iter().map(|y| law.pdf(x - y)).sum::<f64>() / n,
        )
    }

    #[test]
    fn binned_mixture_matches_direct_sum() {
        let mut rng = substream(3, &[0]);
        let states: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        for law in [
            ContinuousLaw::Gaussian { mean: 0.0, sd: 1.0 },
            ContinuousLaw::Cauchy { loc: 0.0, scale: 0.5 },
        ] {
            let m = StateMixture::new(&states, law);
            assert!(m.bins() < 1000);
            for i in 0..50 {
                let x = -5.0 + 0.2 * i as f64;
                let (c, p) = m.eval(x);
                let (dc, dp) = direct(&states, &law, x);
                assert!((c - dc).abs() <= m.cdf_error_bound() + 1e-14, "{law:?} at {x}");
                assert!((p - dp).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn uniform_mixture_is_exact() {
        let mut rng = substream(4, &[0]);
        let states: Vec<f64> = (0..500).map(|_| rng.random::<f64>() * 3.0).collect();
        let law = ContinuousLaw::Uniform { lo: -0.5, hi: 0.5 };
        let m = StateMixture::new(&states, law);
        for i in 0..100 {
            let x = -1.0 + 0.05 * i as f64;
            let (c, p) = m.eval(x);
            let (dc, dp) = direct(&states, &law, x);
            assert!((c - dc).abs() < 1e-12);
            assert!((p - dp).abs() < 1e-12 || i == 0);
        }
        assert_eq!(m.breakpoints().unwrap().len(), 1000);
    }

    #[test]
    fn single_state_is_exact() {
        let law = ContinuousLaw::Gaussian { mean: 0.0, sd: 1.0 };
        let m = StateMixture::new(&[0.0; 5], law);
        for x in [-1.0, 0.3, 2.0] {
            assert!((m.cdf(x) - law.cdf(x)).abs() < 1e-16);
        }
    }
}
