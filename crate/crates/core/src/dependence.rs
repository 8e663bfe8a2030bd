//! Physical dependence measures `‖X_k − X_k*‖_α`, the one-step
//! characteristic-function distances, and summability diagnostics.
//!
//! Replicate `r` of every estimator here draws its coupled pair from
//! `substream(seed, [COUPLED, r])`, so results do not depend on the number
//! of worker threads.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::innovations::{cf_integrability, InnovationDistribution};
use crate::process::{CoupledPaths, ProcessModel};
use crate::quadrature::{auto_cutoff, gauss_legendre_composite, Finiteness, QuadratureSpec};
use crate::rng::{substream, tags};
use crate::stats::{self, LineFit};

/// Draws used by the Monte Carlo oracle for `‖ε_0 − ε′_0‖_α`.
pub const EPS_DIFF_DRAWS: usize = 1_000_000;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::config("alpha", format!("must lie in (0, 2], got {alpha}")));
    }
    Ok(())
}

fn check_reps(reps: usize, min: usize) -> Result<()> {
    if reps < min {
        return Err(Error::config("replicates", format!("need at least {min}, got {reps}")));
    }
    Ok(())
}

/// `R` coupled pairs up to horizon `k_max`, in replicate order.
pub fn coupled_replicates(model: &ProcessModel, k_max: usize, reps: usize, seed: u64) -> Vec<CoupledPaths> {
    (0..reps)
        .into_par_iter()
        .map(|r| model.simulate_coupled(k_max, &mut substream(seed, &[tags::COUPLED, r as u64])))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdmEstimate {
    pub lag: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// False when `E|X_k − X_k*|^α` may be infinite (α at or above the
    /// innovation tail index).
    pub reliable: bool,
}

/// `(mean |d|^α)^{1/α}` with a delta-method standard error.
fn pdm_from_diffs(lag: usize, diffs: &[f64], alpha: f64, reliable: bool) -> PdmEstimate {
    let v: Vec<f64> = diffs.iter().map(|d| d.abs().powf(alpha)).collect();
    let mu = stats::mean(&v);
    let (estimate, stderr) = if mu > 0.0 {
        let se_mu = (stats::variance(&v) / v.len() as f64).sqrt();
        (mu.powf(1.0 / alpha), mu.powf(1.0 / alpha - 1.0) * se_mu / alpha)
    } else {
        (0.0, 0.0)
    };
    PdmEstimate {
        lag,
        estimate,
        stderr,
        reliable,
    }
}

fn moment_reliable(model: &ProcessModel, alpha: f64) -> bool {
    model.is_iid() || alpha < model.innovation().tail_index()
}

pub fn estimate_pdm(model: &ProcessModel, k: usize, alpha: f64, reps: usize, seed: u64) -> Result<PdmEstimate> {
    check_alpha(alpha)?;
    check_reps(reps, 100)?;
    let pairs = coupled_replicates(model, k, reps, seed);
    let diffs: Vec<f64> = pairs.iter().map(|c| c.x[k] - c.x_star[k]).collect();
    Ok(pdm_from_diffs(k, &diffs, alpha, moment_reliable(model, alpha)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Summable,
    NotSummable,
    Inconclusive,
}

/// Tail decay fit on the last `⌈K/2⌉` terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    /// log term vs lag
    pub geometric: Option<LineFit>,
    /// log term vs log lag
    pub power: Option<LineFit>,
    pub verdict: Verdict,
}

/// Geometric fit wins when its `R²` is at least the power fit's; the winner
/// must reach `R² ≥ 0.8`. Geometric decay is summable when the slope is
/// negative, power decay when the exponent is below −1. A tail of exact
/// zeros is summable.
pub fn tail_fit(terms: &[f64]) -> TailFit {
    let k = terms.len();
    let start = k - k.div_ceil(2);
    let tail: Vec<(f64, f64)> = (start..k).map(|i| (i as f64, terms[i])).collect();
    if tail.iter().all(|&(_, v)| v == 0.0) {
        return TailFit {
            geometric: None,
            power: None,
            verdict: Verdict::Summable,
        };
    }
    let pos: Vec<(f64, f64)> = tail.iter().copied().filter(|&(i, v)| v > 0.0 && i > 0.0).collect();
    if pos.len() < 3 || pos.len() < tail.len() {
        return TailFit {
            geometric: None,
            power: None,
            verdict: Verdict::Inconclusive,
        };
    }
    let ks: Vec<f64> = pos.iter().map(|p| p.0).collect();
    let logk: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let logv: Vec<f64> = pos.iter().map(|p| p.1.ln()).collect();
    let geometric = stats::ols(&ks, &logv);
    let power = stats::ols(&logk, &logv);
    let verdict = if geometric.r_squared >= power.r_squared {
        if geometric.r_squared < 0.8 {
            Verdict::Inconclusive
        } else if geometric.slope < 0.0 {
            Verdict::Summable
        } else {
            Verdict::NotSummable
        }
    } else if power.r_squared < 0.8 {
        Verdict::Inconclusive
    } else if power.slope < -1.0 {
        Verdict::Summable
    } else {
        Verdict::NotSummable
    };
    TailFit {
        geometric: Some(geometric),
        power: Some(power),
        verdict,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceProfile {
    pub alpha: f64,
    pub replicates: usize,
    pub lags: Vec<usize>,
    pub pdm: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `pdm^{α/2}`
    pub pdm_pow: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Per-lag CF terms, when computed.
    pub cf_terms: Option<Vec<f64>>,
    /// `log pdm` against lag over lags ≥ 1 with positive estimates.
    pub decay_fit: Option<LineFit>,
    pub tail: TailFit,
    pub reliable: bool,
}

fn cumulative(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |s, x| {
            *s += x;
            Some(*s)
        })
        .collect()
}

pub fn pdm_summability(model: &ProcessModel, alpha: f64, k_max: usize, reps: usize, seed: u64) -> Result<DependenceProfile> {
    check_alpha(alpha)?;
    check_reps(reps, 100)?;
    if k_max < 4 {
        return Err(Error::config("max_lag", format!("need at least 4 lags, got {k_max}")));
    }
    let pairs = coupled_replicates(model, k_max, reps, seed);
    let reliable = moment_reliable(model, alpha);
    let est: Vec<PdmEstimate> = (0..=k_max)
        .map(|k| {
            let d: Vec<f64> = pairs.iter().map(|c| c.x[k] - c.x_star[k]).collect();
            pdm_from_diffs(k, &d, alpha, reliable)
        })
        .collect();
    let pdm: Vec<f64> = est.iter().map(|e| e.estimate).collect();
    let pdm_pow: Vec<f64> = pdm.iter().map(|p| p.powf(alpha / 2.0)).collect();
    let fit_pts: Vec<(f64, f64)> = (1..=k_max)
        .filter(|&k| pdm[k] > 0.0)
        .map(|k| (k as f64, pdm[k].ln()))
        .collect();
    let decay_fit = (fit_pts.len() >= 2).then(|| {
        let (x, y): (Vec<f64>, Vec<f64>) = fit_pts.into_iter().unzip();
        stats::ols(&x, &y)
    });
    Ok(DependenceProfile {
        alpha,
        replicates: reps,
        lags: (0..=k_max).collect(),
        stderr: est.iter().map(|e| e.stderr).collect(),
        partial_sums: cumulative(&pdm_pow),
        tail: tail_fit(&pdm_pow),
        pdm,
        pdm_pow,
        cf_terms: None,
        decay_fit,
        reliable,
    })
}

/// `E|ε_0 − ε′_0|^α` in closed form where one exists.
pub fn eps_diff_moment_closed(dist: &InnovationDistribution, alpha: f64) -> Option<f64> {
    match *dist {
        InnovationDistribution::Gaussian { sd, .. } => {
            // ε − ε′ ~ N(0, 2σ²); E|Z|^α = 2^{α/2} Γ((α+1)/2)/√π
            let s = 2f64.sqrt() * sd;
            Some(s.powf(alpha) * 2f64.powf(alpha / 2.0) * gamma((alpha + 1.0) / 2.0) / PI.sqrt())
        }
        InnovationDistribution::Cauchy { scale, .. } if alpha < 1.0 => {
            // ε − ε′ ~ Cauchy(0, 2γ); E|C|^α = (2γ)^α / cos(πα/2)
            Some((2.0 * scale).powf(alpha) / (PI * alpha / 2.0).cos())
        }
        _ => None,
    }
}

/// Monte Carlo `‖ε_0 − ε′_0‖_α` from [`EPS_DIFF_DRAWS`] pairs, cached per
/// (law, α).
pub fn eps_diff_norm_mc(dist: &InnovationDistribution, alpha: f64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<String, f64>>> = OnceLock::new();
    let key = format!("{dist:?}/{alpha:?}");
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return *v;
    }
    let mut rng = substream(0, &[tags::EPS_DIFF_ORACLE]);
    let mut s = 0.0;
    for _ in 0..EPS_DIFF_DRAWS {
        let d = dist.sample(&mut rng) - dist.sample(&mut rng);
        s += d.abs().powf(alpha);
    }
    let v = (s / EPS_DIFF_DRAWS as f64).powf(1.0 / alpha);
    cache.lock().unwrap().insert(key, v);
    v
}

/// `‖ε_0 − ε′_0‖_α`, closed form when available, else the cached oracle.
pub fn eps_diff_norm(dist: &InnovationDistribution, alpha: f64) -> f64 {
    match eps_diff_moment_closed(dist, alpha) {
        Some(m) => m.powf(1.0 / alpha),
        None => eps_diff_norm_mc(dist, alpha),
    }
}

/// `|e^{iu} − 1|² = 4 sin²(u/2)`, accurate for small `u`.
#[inline]
fn chord_sq(u: f64) -> f64 {
    let s = (0.5 * u).sin();
    4.0 * s * s
}

/// `‖φ_1(θ | ξ_{k−1}) − φ_1(θ | ξ*_{k−1})‖`, estimated as
/// `|φ_step(θ)| · (mean_r |e^{iθY} − e^{iθY*}|²)^{1/2}` over coupled states.
pub fn cf_distance_onestep(model: &ProcessModel, k: usize, theta: f64, reps: usize, seed: u64) -> Result<f64> {
    check_reps(reps, 1)?;
    let step = model.step_distribution()?;
    let pairs = coupled_replicates(model, k, reps, seed);
    let ms = pairs
        .iter()
        .map(|c| chord_sq(theta * (c.y[k] - c.y_star[k])))
        .sum::<f64>()
        / reps as f64;
    Ok(step.cf(theta).norm() * ms.sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct CfTermSeries {
    pub alpha: f64,
    pub replicates: usize,
    pub lags: Vec<usize>,
    /// `[∫(1+θ²) ‖φ_1(θ|ξ_k) − φ_1(θ|ξ_k*)‖² dθ]^{1/2}`
    pub terms: Vec<f64>,
    /// `2 [∫(1+θ²)|φ(θ)|²|θ|^α dθ · E|Y_k − Y_k*|^α]^{1/2}` on the same nodes
    pub bounds: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub tail: TailFit,
    /// Cutoff `T` of the θ-integral.
    pub cutoff: f64,
    /// `∫|φ|²(1+θ²)|θ|^α` over the real line.
    pub integrability: f64,
}

impl CfTermSeries {
    /// Lags whose term exceeds the moment bound.
    pub fn violations(&self) -> Vec<usize> {
        self.lags
            .iter()
            .copied()
            .filter(|&k| self.terms[k] > self.bounds[k])
            .collect()
    }
}

/// Per-lag CF terms for lags `0..=k_max`, with the moment bound
/// `|e^{iu} − 1|² ≤ 4|u|^α` integrated on the same positive-weight nodes so
/// that `term ≤ bound` holds exactly, lag by lag.
pub fn cf_term_series(
    model: &ProcessModel,
    k_max: usize,
    alpha: f64,
    quad: &QuadratureSpec,
    reps: usize,
    seed: u64,
) -> Result<CfTermSeries> {
    check_alpha(alpha)?;
    check_reps(reps, 100)?;
    let step = model.step_distribution()?;
    let integ = cf_integrability(&step, alpha, quad)?;
    if integ.verdict == Finiteness::Diverges {
        return Err(Error::capability(format!(
            "∫|φ(θ)|²(1+θ²)|θ|^{alpha} dθ diverges for step law {step:?} \
             (integrand not decaying up to θ = {}); the characteristic-function condition cannot hold",
            integ.cutoff
        )));
    }
    let envelope = |t: f64| step.cf(t).norm_sqr() * (1.0 + t * t) * t.abs().powf(alpha).max(4.0);
    let cutoff = match quad.cutoff {
        Some(t) => t,
        None => auto_cutoff(&envelope, quad).0,
    };
    let panels = ((cutoff / 0.05).ceil() as usize).max(16);
    let (nodes, weights) = gauss_legendre_composite(0.0, cutoff, panels);
    // even integrands: ∫_{−T}^{T} = 2∫_0^T
    let base: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&t, &w)| 2.0 * w * (1.0 + t * t) * step.cf(t).norm_sqr())
        .collect();
    let bound_integral: f64 = nodes.iter().zip(&base).map(|(&t, &b)| b * t.powf(alpha)).sum();

    let pairs = coupled_replicates(model, k_max + 1, reps, seed);
    let per_lag: Vec<(f64, f64)> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            // ξ_k enters step k + 1
            let deltas: Vec<f64> = pairs.iter().map(|c| c.y[k + 1] - c.y_star[k + 1]).collect();
            let mut integral = 0.0;
            for (&t, &b) in nodes.iter().zip(&base) {
                let m: f64 = deltas.iter().map(|&d| chord_sq(t * d)).sum::<f64>() / reps as f64;
                integral += b * m;
            }
            let moment = deltas.iter().map(|d| d.abs().powf(alpha)).sum::<f64>() / reps as f64;
            (integral.sqrt(), 2.0 * (bound_integral * moment).sqrt())
        })
        .collect();
    let terms: Vec<f64> = per_lag.iter().map(|p| p.0).collect();
    let bounds: Vec<f64> = per_lag.iter().map(|p| p.1).collect();
    Ok(CfTermSeries {
        alpha,
        replicates: reps,
        lags: (0..=k_max).collect(),
        partial_sums: cumulative(&terms),
        tail: tail_fit(&terms),
        terms,
        bounds,
        cutoff,
        integrability: integ.value,
    })
}

/// `|e^{ia} − e^{ib}| ≤ min(2, |a − b|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundChain {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundChain {
    /// Holds up to rounding in forming `e^{ia}` and `e^{ib}`.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 4.0 * f64::EPSILON
    }
}

pub fn bound_chain_check(a: f64, b: f64) -> BoundChain {
    BoundChain {
        lhs: (Complex64::cis(a) - Complex64::cis(b)).norm(),
        rhs: (a - b).abs().min(2.0),
    }
}

/// `(min(1, u)², u^α)`; the first never exceeds the second for `u ≥ 0`, `α ≤ 2`.
pub fn min_power_check(u: f64, alpha: f64) -> (f64, f64) {
    (u.min(1.0).powi(2), u.powf(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss() -> InnovationDistribution {
        InnovationDistribution::standard_gaussian()
    }

    #[test]
    fn linear_pdm_identity() {
        let m = ProcessModel::linear(vec![1.0, 0.5, 0.25, 0.125], gauss()).unwrap();
        let e = estimate_pdm(&m, 3, 2.0, 10_000, 1).unwrap();
        let target = 0.125 * 2f64.sqrt();
        assert!((e.estimate - target).abs() < 3.0 * e.stderr, "{e:?}");
        assert!(e.stderr < 0.003);
    }

    #[test]
    fn iid_pdm_vanishes() {
        let m = ProcessModel::iid(gauss()).unwrap();
        let p = pdm_summability(&m, 2.0, 6, 200, 2).unwrap();
        assert!(p.pdm[0] > 0.0);
        assert!(p.pdm[1..].iter().all(|&v| v == 0.0));
        assert_eq!(p.partial_sums[6], p.pdm_pow[0]);
        assert_eq!(p.tail.verdict, Verdict::Summable);
    }

    #[test]
    fn geometric_linear_partial_sums() {
        let m = ProcessModel::linear_geometric(0.5, 30, gauss()).unwrap();
        let p = pdm_summability(&m, 2.0, 29, 4000, 3).unwrap();
        // Σ 0.5^k √2 · (sample ‖ε−ε′‖₂ / √2) over k < 30
        assert!((p.partial_sums[29] - 2.0 * 2f64.sqrt()).abs() < 0.1, "{}", p.partial_sums[29]);
        assert_eq!(p.tail.verdict, Verdict::Summable);
        assert!(p.partial_sums.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eps_diff_oracle_matches_closed_forms() {
        let c = InnovationDistribution::cauchy(0.0, 1.0).unwrap();
        let closed = eps_diff_moment_closed(&c, 0.5).unwrap().powf(2.0);
        let mc = eps_diff_norm_mc(&c, 0.5);
        assert!((mc - closed).abs() / closed < 0.01, "{mc} vs {closed}");
        assert_relative_eq!(eps_diff_norm(&gauss(), 2.0), 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(eps_diff_norm_mc(&gauss(), 2.0), 2f64.sqrt(), max_relative = 5e-3);
    }

    #[test]
    fn cf_distance_examples() {
        let m = ProcessModel::linear(vec![0.8, 0.6], gauss()).unwrap();
        assert_eq!(cf_distance_onestep(&m, 1, 0.0, 100, 4).unwrap(), 0.0);
        let v = cf_distance_onestep(&m, 1, 1.0, 20_000, 4).unwrap();
        // |φ(0.8)|·√(2 − 2e^{−0.36})
        let exact = (-0.32f64).exp() * (2.0 - 2.0 * (-0.36f64).exp()).sqrt();
        assert!((v - exact).abs() < 0.01, "{v} vs {exact}");
        let m = ProcessModel::linear(vec![1.0, 0.8], gauss()).unwrap();
        let v = cf_distance_onestep(&m, 1, 1.0, 20_000, 4).unwrap();
        assert!((v - 0.589_79).abs() < 0.01, "{v}");
        let iid = ProcessModel::iid(gauss()).unwrap();
        assert_eq!(cf_distance_onestep(&iid, 3, 2.0, 100, 4).unwrap(), 0.0);
    }

    #[test]
    fn cf_terms_respect_the_moment_bound() {
        let q = QuadratureSpec::default();
        for m in [
            ProcessModel::linear_geometric(0.5, 20, gauss()).unwrap(),
            ProcessModel::tar(0.5, -0.3, gauss()).unwrap(),
        ] {
            for alpha in [1.0, 2.0] {
                let c = cf_term_series(&m, 8, alpha, &q, 500, 5).unwrap();
                assert!(c.violations().is_empty());
            }
        }
        let iid = ProcessModel::iid(gauss()).unwrap();
        let c = cf_term_series(&iid, 4, 2.0, &q, 100, 5).unwrap();
        assert!(c.terms.iter().all(|&t| t == 0.0));
        let u = ProcessModel::iid(InnovationDistribution::uniform(0.0, 1.0).unwrap()).unwrap();
        assert!(matches!(cf_term_series(&u, 4, 2.0, &q, 100, 5), Err(Error::Capability(_))));
    }

    #[test]
    fn bound_chain_examples() {
        let c = bound_chain_check(PI, 0.0);
        assert_relative_eq!(c.lhs, 2.0, epsilon = 1e-15);
        assert_eq!(c.rhs, 2.0);
        assert!(c.holds());
        assert_eq!(bound_chain_check(1.0, 1.0).lhs, 0.0);
        let c = bound_chain_check(0.1, 0.0);
        assert_relative_eq!(c.lhs, 2.0 * 0.05f64.sin(), epsilon = 1e-15);
        assert!(c.lhs <= 0.1);
        let (l, r) = min_power_check(0.5, 1.5);
        assert!(l <= r);
    }
}
