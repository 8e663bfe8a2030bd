//! The split `G_n = G_n° + G_n*` with `G_n° = √n(F_n − F_n*)`,
//! `G_n* = √n(F_n* − F)` and `F_n*(x) = (1/n) Σ F_step(x − Y_{i−1})`, plus
//! the derivative `g_n* = dG_n*/dx` and the Kolmogorov-type inequality check.

use serde::Serialize;

use crate::cdf::{HermiteCdf, PiecewiseLinearCdf};
use crate::error::{Error, Result};
use crate::innovations::ContinuousLaw;
use crate::mixture::StateMixture;
use crate::oscillation::{oscillation_modulus, SortedSample};
use crate::process::{PathWithStates, ProcessModel};

/// Grid points spanning the central quantile range of the marginal.
pub const GRID_POINTS: usize = 2048;
pub const GRID_TAIL: f64 = 1e-4;
/// Knot spacing of the interpolant of `F_n*`, in step-law scale units.
pub const HERMITE_STEP: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub n: usize,
    pub grid: Vec<f64>,
    pub g_n: Vec<f64>,
    pub g_circ: Vec<f64>,
    pub g_star: Vec<f64>,
    pub g_star_deriv: Vec<f64>,
    pub sup_gstar_deriv: f64,
}

fn closed_marginal(model: &ProcessModel) -> Result<ContinuousLaw> {
    model.marginal()?.closed().copied().ok_or_else(|| {
        Error::capability(format!(
            "decomposition needs a closed-form marginal density; {} has only a Monte Carlo reference",
            model.label()
        ))
    })
}

/// `GRID_POINTS` equispaced points on `[q(1e−4), q(1 − 1e−4)]`, plus the
/// conditional modes `Y_{i−1} + mode` when there are no more of them than
/// grid points.
pub fn default_grid(model: &ProcessModel, states: &[f64]) -> Result<Vec<f64>> {
    let law = closed_marginal(model)?;
    let (lo, hi) = (law.quantile(GRID_TAIL), law.quantile(1.0 - GRID_TAIL));
    let mut grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    if states.len() <= GRID_POINTS && !model.is_iid() {
        let mode = model.step_law()?.mode();
        grid.extend(states.iter().map(|y| y + mode));
    }
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

pub fn decompose(path: &PathWithStates, model: &ProcessModel, grid: &[f64]) -> Result<Decomposition> {
    let marginal = closed_marginal(model)?;
    let step = model.step_law()?;
    let n = path.x.len();
    if n == 0 || path.y.len() != n {
        return Err(Error::Contract("path must carry one state per observation".into()));
    }
    let sample = SortedSample::new(path.x.clone())?;
    let sq = (n as f64).sqrt();
    let mixture = (!model.is_iid()).then(|| StateMixture::new(&path.y, step));
    let mut d = Decomposition {
        n,
        grid: grid.to_vec(),
        g_n: Vec::with_capacity(grid.len()),
        g_circ: Vec::with_capacity(grid.len()),
        g_star: Vec::with_capacity(grid.len()),
        g_star_deriv: Vec::with_capacity(grid.len()),
        sup_gstar_deriv: 0.0,
    };
    for &x in grid {
        let fnx = sample.edf(x);
        let fx = marginal.cdf(x);
        // iid: F_n* = F exactly
        let (fstar, dstar) = match &mixture {
            Some(m) => m.eval(x),
            None => (fx, marginal.pdf(x)),
        };
        d.g_n.push(sq * (fnx - fx));
        d.g_circ.push(sq * (fnx - fstar));
        d.g_star.push(sq * (fstar - fx));
        let g = sq * (dstar - marginal.pdf(x));
        d.sup_gstar_deriv = d.sup_gstar_deriv.max(g.abs());
        d.g_star_deriv.push(g);
    }
    Ok(d)
}

impl Decomposition {
    /// `max |G_n − G_n° − G_n*|` over the grid.
    pub fn identity_residual(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| (self.g_n[i] - self.g_circ[i] - self.g_star[i]).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothPartBound {
    /// `sup |G_n*(x) − G_n*(y)|` over grid pairs with `|x − y| ≤ b`
    pub lhs: f64,
    /// `b · sup |g_n*|`
    pub rhs: f64,
}

pub fn smooth_part_modulus_bound(d: &Decomposition, b: f64) -> Result<SmoothPartBound> {
    if !(b > 0.0) {
        return Err(Error::config("b", format!("bandwidth must be positive, got {b}")));
    }
    let g = &d.g_star;
    let x = &d.grid;
    let mut lhs: f64 = 0.0;
    let mut maxq = std::collections::VecDeque::new();
    let mut minq = std::collections::VecDeque::new();
    for j in 0..x.len() {
        while maxq.back().is_some_and(|&i: &usize| g[i] <= g[j]) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&i: &usize| g[i] >= g[j]) {
            minq.pop_back();
        }
        minq.push_back(j);
        while x[j] - x[*maxq.front().unwrap()] > b {
            maxq.pop_front();
        }
        while x[j] - x[*minq.front().unwrap()] > b {
            minq.pop_front();
        }
        lhs = lhs
            .max(g[*maxq.front().unwrap()] - g[j])
            .max(g[j] - g[*minq.front().unwrap()]);
    }
    Ok(SmoothPartBound {
        lhs,
        rhs: b * d.sup_gstar_deriv,
    })
}

/// `Δ_n°(b)`, the modulus of the martingale part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingaleModulus {
    pub delta: f64,
    /// Bound on the error from approximating `F_n*`.
    pub error_bound: f64,
}

/// Exact modulus of `√n(F_n − F_n*)` up to the stated error bound. `F_n*`
/// is interpolated exactly (uniform steps) or by a cubic Hermite spline of
/// the binned mixture (Gaussian steps); heavy-tailed steps are refused
/// because the interpolant would need an unbounded knot range.
pub fn martingale_modulus(path: &PathWithStates, model: &ProcessModel, b: f64) -> Result<MartingaleModulus> {
    let sample = SortedSample::new(path.x.clone())?;
    let n = sample.n() as f64;
    if model.is_iid() {
        let law = closed_marginal(model)?;
        return Ok(MartingaleModulus {
            delta: oscillation_modulus(&sample, b, &law)?,
            error_bound: 0.0,
        });
    }
    let step = model.step_law()?;
    let mixture = StateMixture::new(&path.y, step);
    match step {
        ContinuousLaw::Uniform { .. } => {
            let knots = mixture.breakpoints().unwrap();
            let levels = knots.iter().map(|&k| mixture.cdf(k)).collect();
            let f = PiecewiseLinearCdf::from_knots(knots, levels);
            Ok(MartingaleModulus {
                delta: oscillation_modulus(&sample, b, &f)?,
                error_bound: 1e-12 * n.sqrt(),
            })
        }
        ContinuousLaw::Gaussian { sd, .. } => {
            let (ylo, yhi) = mixture.state_range();
            let pad = 9.0 * sd + b;
            let lo = sample.min().min(ylo) - pad;
            let hi = sample.max().max(yhi) + pad;
            let h = HERMITE_STEP * sd;
            let knots = ((hi - lo) / h).ceil() as usize + 1;
            let (mut values, mut slopes) = (Vec::with_capacity(knots), Vec::with_capacity(knots));
            for i in 0..knots {
                let (c, p) = mixture.eval(lo + h * i as f64);
                values.push(c);
                slopes.push(p);
            }
            let tol = 1e-13;
            let f = HermiteCdf::new(lo, h, values, slopes, tol);
            // |f‴| of a Gaussian is at most 0.5513/σ⁴; outside the knot range
            // the mixture has mass below Φ(−9).
            let interp = h.powi(4) / 384.0 * 0.5514 / sd.powi(4);
            let err_f = interp + mixture.cdf_error_bound() + 1e-18;
            Ok(MartingaleModulus {
                delta: oscillation_modulus(&sample, b, &f)?,
                error_bound: n.sqrt() * (4.0 * err_f + tol),
            })
        }
        ContinuousLaw::Cauchy { .. } => Err(Error::capability(
            "martingale-part modulus needs a light-tailed step law (Gaussian or uniform)",
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KolmogorovCheck {
    pub sup_sq: f64,
    /// `λ∫H² + λ^{−1}∫H′²`
    pub bound: f64,
    pub sup_fourth: f64,
    /// `∫H² · ∫H′²`
    pub taikov_bound: f64,
    pub int_h_sq: f64,
    pub int_hprime_sq: f64,
}

impl KolmogorovCheck {
    pub fn holds(&self) -> bool {
        self.sup_sq <= self.bound && self.sup_fourth <= self.taikov_bound
    }
}

/// Kolmogorov-type and Taĭkov inequalities for sampled `H`, `H′` on a
/// uniform grid of spacing `dx`, integrals by the trapezoid rule.
pub fn kolmogorov_check(h: &[f64], hprime: &[f64], dx: f64, lambda: f64) -> Result<KolmogorovCheck> {
    if !(lambda > 0.0) {
        return Err(Error::config("lambda", format!("must be positive, got {lambda}")));
    }
    if h.len() != hprime.len() || h.len() < 2 {
        return Err(Error::config("h", "need matching samples of H and H′ (at least two)"));
    }
    let trap = |v: &[f64]| {
        let s: f64 = v.iter().map(|x| x * x).sum();
        dx * (s - 0.5 * (v[0] * v[0] + v[v.len() - 1] * v[v.len() - 1]))
    };
    let int_h_sq = trap(h);
    let int_hprime_sq = trap(hprime);
    let sup_sq = h.iter().map(|x| x * x).fold(0.0, f64::max);
    Ok(KolmogorovCheck {
        sup_sq,
        bound: lambda * int_h_sq + int_hprime_sq / lambda,
        sup_fourth: sup_sq * sup_sq,
        taikov_bound: int_h_sq * int_hprime_sq,
        int_h_sq,
        int_hprime_sq,
    })
}
