//! Continuous distribution functions as seen by the oscillation-modulus
//! algorithm.
//!
//! Besides point evaluation, the algorithm needs the largest window mass
//! `sup_{x ∈ [lo, hi]} F(x + w) − F(x)` over an interval; every
//! implementation answers that query exactly (closed forms, piecewise-linear
//! knots) or to a stated absolute tolerance from above (Hermite splines).

use crate::innovations::ContinuousLaw;

pub trait Cdf: Sync {
    fn cdf(&self, x: f64) -> f64;

    /// Evaluate at non-decreasing points.
    fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.cdf(x)).collect()
    }

    /// `sup_{x ∈ [lo, hi]} F(x + width) − F(x)`; `lo` may be `−∞` and `hi` `+∞`.
    fn max_increment(&self, lo: f64, hi: f64, width: f64) -> f64;
}

impl Cdf for ContinuousLaw {
    fn cdf(&self, x: f64) -> f64 {
        ContinuousLaw::cdf(self, x)
    }

    fn max_increment(&self, lo: f64, hi: f64, width: f64) -> f64 {
        let x = self.window_mass_argmax(width).clamp(lo, hi);
        if x.is_infinite() {
            return 0.0;
        }
        ContinuousLaw::cdf(self, x + width) - ContinuousLaw::cdf(self, x)
    }
}

impl<T: Cdf + ?Sized> Cdf for &T {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        (**self).cdf_sorted(xs)
    }
    fn max_increment(&self, lo: f64, hi: f64, width: f64) -> f64 {
        (**self).max_increment(lo, hi, width)
    }
}

#[derive(Debug, Clone)]
enum Levels {
    /// Level `j` is `j / (len − 1)`: the interpolated empirical CDF of a sample.
    Empirical,
    Explicit(Vec<f64>),
}

/// Continuous piecewise-linear CDF through knots `(x_j, p_j)`, constant
/// outside the knot range. Used for Monte Carlo reference marginals (knots
/// at the sorted reference sample) and for exact mixtures of uniform laws.
#[derive(Debug, Clone)]
pub struct PiecewiseLinearCdf {
    xs: Vec<f64>,
    levels: Levels,
}

impl PiecewiseLinearCdf {
    /// Interpolated EDF of a sorted sample: level `j/(M−1)` at the `j`-th
    /// order statistic. Differs from the step EDF by at most `1/(M−1)`.
    pub fn from_sorted_sample(sorted: Vec<f64>) -> Self {
        assert!(sorted.len() >= 2, "reference sample needs at least two points");
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        Self {
            xs: sorted,
            levels: Levels::Empirical,
        }
    }

    pub fn from_knots(xs: Vec<f64>, ps: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ps.len());
        assert!(!xs.is_empty());
        Self {
            xs,
            levels: Levels::Explicit(ps),
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn level(&self, j: usize) -> f64 {
        match &self.levels {
            Levels::Empirical => j as f64 / (self.xs.len() - 1) as f64,
            Levels::Explicit(p) => p[j],
        }
    }

    /// Value given `j = #{knots ≤ x}`.
    fn eval_at(&self, x: f64, j: usize) -> f64 {
        let m = self.xs.len();
        if j == 0 {
            self.level(0)
        } else if j == m {
            self.level(m - 1)
        } else {
            let (x0, x1) = (self.xs[j - 1], self.xs[j]);
            let (p0, p1) = (self.level(j - 1), self.level(j));
            p0 + (p1 - p0) * (x - x0) / (x1 - x0)
        }
    }

    fn rank(&self, x: f64) -> usize {
        self.xs.partition_point(|&v| v <= x)
    }
}

impl Cdf for PiecewiseLinearCdf {
    fn cdf(&self, x: f64) -> f64 {
        self.eval_at(x, self.rank(x))
    }

    /// Galloping search from the previous position, so a sorted batch costs
    /// `O(k log(M/k))` rather than `O(k log M)` with cache misses.
    fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        let m = self.xs.len();
        let mut j = 0usize;
        xs.iter()
            .map(|&x| {
                let mut step = 1usize;
                let mut hi = j;
                while hi < m && self.xs[hi] <= x {
                    j = hi + 1;
                    hi = j + step;
                    step *= 2;
                }
                let hi = hi.min(m);
                j += self.xs[j..hi].partition_point(|&v| v <= x);
                self.eval_at(x, j)
            })
            .collect()
    }

    fn max_increment(&self, lo: f64, hi: f64, width: f64) -> f64 {
        let first = self.xs[0];
        let last = *self.xs.last().unwrap();
        // h(x) = F(x + w) − F(x) vanishes unless [x, x + w] meets the knot range.
        let lo = lo.max(first - width);
        let hi = hi.min(last);
        if lo > hi {
            return 0.0;
        }
        let h = |x: f64| self.cdf(x + width) - self.cdf(x);
        // h is linear between consecutive points of {knots} ∪ {knots − w}.
        let mut best = h(lo).max(h(hi));
        let a = self.xs.partition_point(|&v| v <= lo);
        let b = self.xs.partition_point(|&v| v < hi);
        for &k in &self.xs[a..b] {
            best = best.max(h(k));
        }
        let a = self.xs.partition_point(|&v| v <= lo + width);
        let b = self.xs.partition_point(|&v| v < hi + width);
        for &k in &self.xs[a..b] {
            let x = k - width;
            if x > lo && x < hi {
                best = best.max(h(x));
            }
        }
        best
    }
}

/// C¹ cubic Hermite interpolant of a smooth CDF from values and derivatives
/// on a uniform grid; constant outside the grid.
#[derive(Debug, Clone)]
pub struct HermiteCdf {
    x0: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvature_bound: f64,
    edge_slope: f64,
    tolerance: f64,
}

impl HermiteCdf {
    /// `values[i]` and `slopes[i]` are `F` and `F'` at `x0 + i·step`.
    /// `tolerance` is the absolute accuracy of [`Cdf::max_increment`].
    pub fn new(x0: f64, step: f64, values: Vec<f64>, slopes: Vec<f64>, tolerance: f64) -> Self {
        assert!(values.len() >= 2 && values.len() == slopes.len());
        assert!(step > 0.0);
        // S'' is linear on each piece, so its extremes sit at piece ends.
        let mut curvature_bound: f64 = 0.0;
        for i in 0..values.len() - 1 {
            let (p0, p1, m0, m1) = (values[i], values[i + 1], slopes[i], slopes[i + 1]);
            let d = (p1 - p0) / step;
            let s_left = (6.0 * d - 4.0 * m0 - 2.0 * m1) / step;
            let s_right = (-6.0 * d + 2.0 * m0 + 4.0 * m1) / step;
            curvature_bound = curvature_bound.max(s_left.abs()).max(s_right.abs());
        }
        let edge_slope = slopes[0].abs() + slopes.last().unwrap().abs();
        Self {
            x0,
            step,
            values,
            slopes,
            curvature_bound,
            edge_slope,
            tolerance,
        }
    }

    pub fn upper(&self) -> f64 {
        self.x0 + self.step * (self.values.len() - 1) as f64
    }
}

impl Cdf for HermiteCdf {
    fn cdf(&self, x: f64) -> f64 {
        let m = self.values.len();
        let u = (x - self.x0) / self.step;
        if u <= 0.0 {
            return self.values[0];
        }
        if u >= (m - 1) as f64 {
            return self.values[m - 1];
        }
        let i = (u.floor() as usize).min(m - 2);
        let t = u - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i]
            + h10 * self.step * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.step * self.slopes[i + 1]
    }

    /// Branch and bound: on an interval of length `ℓ`, `h = F(·+w) − F` lies
    /// below the larger endpoint value plus `2K ℓ²/8 + J ℓ/2`, where `K`
    /// bounds `|S''|` and `J` the slope jumps at the grid edges. Returns an
    /// upper bound within `tolerance` of the true supremum.
    fn max_increment(&self, lo: f64, hi: f64, width: f64) -> f64 {
        let lo = lo.max(self.x0 - width);
        let hi = hi.min(self.upper());
        if lo > hi {
            return 0.0;
        }
        let h = |x: f64| self.cdf(x + width) - self.cdf(x);
        let bound = |l: f64, r: f64| {
            let len = r - l;
            2.0 * self.curvature_bound * len * len / 8.0 + self.edge_slope * len / 2.0
        };
        let (hl, hr) = (h(lo), h(hi));
        let mut best = hl.max(hr);
        let mut upper = best;
        let mut stack = vec![(lo, hi, hl, hr)];
        while let Some((l, r, hl, hr)) = stack.pop() {
            let ub = hl.max(hr) + bound(l, r);
            if ub <= best + self.tolerance {
                upper = upper.max(ub.min(best + self.tolerance));
                continue;
            }
            let mid = 0.5 * (l + r);
            if mid <= l || mid >= r {
                upper = upper.max(ub);
                continue;
            }
            let hm = h(mid);
            best = best.max(hm);
            stack.push((l, mid, hl, hm));
            stack.push((mid, r, hm, hr));
        }
        upper.max(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn brute_max(f: &impl Cdf, lo: f64, hi: f64, w: f64) -> f64 {
        (0..=200_000)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / 200_000.0;
                f.cdf(x + w) - f.cdf(x)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn closed_form_window_mass_matches_scan() {
        let laws = [
            ContinuousLaw::Gaussian { mean: 0.2, sd: 1.5 },
            ContinuousLaw::Cauchy { loc: -1.0, scale: 0.5 },
            ContinuousLaw::Uniform { lo: 0.0, hi: 1.0 },
        ];
        for law in laws {
            for (lo, hi, w) in [(-3.0, 3.0, 0.4), (0.5, 2.0, 0.1), (-4.0, -2.0, 1.5), (-1.0, 1.0, 2.5)] {
                let exact = law.max_increment(lo, hi, w);
                let scan = brute_max(&law, lo, hi, w);
                assert!(exact >= scan - 1e-14);
                assert!(exact - scan < 1e-9, "{law:?} {lo} {hi} {w}: {exact} vs {scan}");
            }
        }
        let g = ContinuousLaw::Gaussian { mean: 0.0, sd: 1.0 };
        assert_eq!(g.max_increment(f64::NEG_INFINITY, f64::NEG_INFINITY, 1.0), 0.0);
        assert_relative_eq!(
            g.max_increment(f64::NEG_INFINITY, f64::INFINITY, 1.0),
            g.cdf(0.5) - g.cdf(-0.5)
        );
    }

    #[test]
    fn piecewise_linear_interpolates_sample() {
        let f = PiecewiseLinearCdf::from_sorted_sample(vec![0.0, 1.0, 3.0]);
        assert_eq!(f.cdf(-1.0), 0.0);
        assert_eq!(f.cdf(0.5), 0.25);
        assert_eq!(f.cdf(2.0), 0.75);
        assert_eq!(f.cdf(9.0), 1.0);
        let xs = [-2.0, 0.0, 0.1, 0.1, 2.9, 3.0, 4.0];
        let batch = f.cdf_sorted(&xs);
        for (x, v) in xs.iter().zip(batch) {
            assert_eq!(v, f.cdf(*x));
        }
    }

    #[test]
    fn piecewise_linear_window_mass_matches_scan() {
        let knots: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let mut knots = knots;
        knots.sort_by(f64::total_cmp);
        let f = PiecewiseLinearCdf::from_sorted_sample(knots);
        for (lo, hi, w) in [(-4.0, 4.0, 0.3), (-1.0, 0.5, 0.05), (2.0, 5.0, 1.0)] {
            let exact = f.max_increment(lo, hi, w);
            let scan = brute_max(&f, lo, hi, w);
            assert!(exact >= scan - 1e-14);
            assert!(exact - scan < 1e-4);
        }
    }

    #[test]
    fn hermite_reproduces_gaussian_and_bounds_window_mass() {
        let law = ContinuousLaw::Gaussian { mean: 0.0, sd: 1.0 };
        let step = 0.01;
        let n = 1201;
        let x0 = -6.0;
        let xs: Vec<f64> = (0..n).map(|i| x0 + step * i as f64).collect();
        let h = HermiteCdf::new(
            x0,
            step,
            xs.iter().map(|&x| law.cdf(x)).collect(),
            xs.iter().map(|&x| law.pdf(x)).collect(),
            1e-13,
        );
        for i in 0..1000 {
            let x = -5.9 + 0.0117 * i as f64;
            assert!((h.cdf(x) - law.cdf(x)).abs() < 1e-10);
        }
        for (lo, hi, w) in [(-3.0, 3.0, 0.4), (1.0, 1.5, 0.2)] {
            let ub = h.max_increment(lo, hi, w);
            let scan = brute_max(&h, lo, hi, w);
            assert!(ub >= scan - 1e-15);
            assert!(ub - scan < 1e-9);
        }
    }
}
