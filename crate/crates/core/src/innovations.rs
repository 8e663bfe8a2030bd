//! Innovation laws: sampling, densities, CDFs, characteristic functions and
//! the characteristic-function integrals used by the dependence conditions.
//!
//! Symmetric α-stable draws use the Chambers–Mallows–Stuck transform: with
//! `V ~ U(−π/2, π/2)` and `W ~ Exp(1)` independent,
//! `X = sin(αV)/cos(V)^{1/α} · (cos((1−α)V)/W)^{(1−α)/α}` has characteristic
//! function `exp(−|t|^α)`. One uniform and one exponential are consumed per
//! draw, in that order.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{self, LineIntegral, QuadratureSpec};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A continuous law with closed-form CDF and density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContinuousLaw {
    Gaussian { mean: f64, sd: f64 },
    Cauchy { loc: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ContinuousLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ContinuousLaw::Gaussian { mean, sd } => 0.5 * erfc(-(x - mean) / (sd * SQRT_2)),
            ContinuousLaw::Cauchy { loc, scale } => 0.5 + ((x - loc) / scale).atan() / PI,
            ContinuousLaw::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ContinuousLaw::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                FRAC_1_SQRT_2PI * (-0.5 * z * z).exp() / sd
            }
            ContinuousLaw::Cauchy { loc, scale } => {
                let z = (x - loc) / scale;
                1.0 / (PI * scale * (1.0 + z * z))
            }
            ContinuousLaw::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    /// `(f′, f″, f‴)` for smooth laws.
    pub fn pdf_derivatives(&self, x: f64) -> Option<(f64, f64, f64)> {
        match *self {
            ContinuousLaw::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                let phi = FRAC_1_SQRT_2PI * (-0.5 * z * z).exp() / sd;
                let s2 = sd * sd;
                Some((
                    -z * phi / sd,
                    (z * z - 1.0) * phi / s2,
                    -(z * z * z - 3.0 * z) * phi / (s2 * sd),
                ))
            }
            ContinuousLaw::Cauchy { loc, scale } => {
                let z = (x - loc) / scale;
                let q = 1.0 + z * z;
                let c = PI * scale;
                Some((
                    -2.0 * z / (c * scale * q * q),
                    (6.0 * z * z - 2.0) / (c * scale * scale * q * q * q),
                    24.0 * z * (1.0 - z * z) / (c * scale.powi(3) * q.powi(4)),
                ))
            }
            ContinuousLaw::Uniform { .. } => None,
        }
    }

    /// `sup_x |f'(x)|` for smooth laws.
    pub fn sup_abs_pdf_derivative(&self) -> Option<f64> {
        match *self {
            ContinuousLaw::Gaussian { sd, .. } => {
                Some(FRAC_1_SQRT_2PI * (-0.5f64).exp() / (sd * sd))
            }
            ContinuousLaw::Cauchy { scale, .. } => {
                // attained at z = 1/sqrt(3): 2z/(1+z^2)^2 = 3*sqrt(3)/8
                Some(3.0 * 3f64.sqrt() / (8.0 * PI * scale * scale))
            }
            ContinuousLaw::Uniform { .. } => None,
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            ContinuousLaw::Gaussian { mean, sd } => mean - sd * SQRT_2 * erfc_inv(2.0 * p),
            ContinuousLaw::Cauchy { loc, scale } => loc + scale * (PI * (p - 0.5)).tan(),
            ContinuousLaw::Uniform { lo, hi } => lo + p * (hi - lo),
        }
    }

    pub fn density_sup(&self) -> f64 {
        match *self {
            ContinuousLaw::Gaussian { sd, .. } => FRAC_1_SQRT_2PI / sd,
            ContinuousLaw::Cauchy { scale, .. } => 1.0 / (PI * scale),
            ContinuousLaw::Uniform { lo, hi } => 1.0 / (hi - lo),
        }
    }

    /// A maximiser of the window mass `F(x + w) − F(x)` over `x`. The window
    /// mass is quasi-concave for every law here, so its supremum over an
    /// interval is attained at the clamp of this point.
    pub fn window_mass_argmax(&self, w: f64) -> f64 {
        match *self {
            ContinuousLaw::Gaussian { mean, .. } => mean - 0.5 * w,
            ContinuousLaw::Cauchy { loc, .. } => loc - 0.5 * w,
            ContinuousLaw::Uniform { lo, hi } => 0.5 * (lo + hi - w),
        }
    }

    /// Mode of the density (any point of the plateau for the uniform law).
    pub fn mode(&self) -> f64 {
        match *self {
            ContinuousLaw::Gaussian { mean, .. } => mean,
            ContinuousLaw::Cauchy { loc, .. } => loc,
            ContinuousLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            ContinuousLaw::Gaussian { sd, .. } => sd,
            ContinuousLaw::Cauchy { scale, .. } => scale,
            ContinuousLaw::Uniform { lo, hi } => hi - lo,
        }
    }
}

fn default_one() -> f64 {
    1.0
}

/// An iid innovation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnovationDistribution {
    Gaussian {
        #[serde(default)]
        mean: f64,
        #[serde(default = "default_one")]
        sd: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Cauchy {
        #[serde(default)]
        loc: f64,
        #[serde(default = "default_one")]
        scale: f64,
    },
    /// Symmetric α-stable law with characteristic function `exp(−(scale·|t|)^α)`.
    #[serde(rename = "stable", alias = "symmetric_alpha_stable")]
    SymmetricStable {
        alpha: f64,
        #[serde(default = "default_one")]
        scale: f64,
    },
}

impl InnovationDistribution {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        Self::Gaussian { mean, sd }.validated()
    }
    pub fn standard_gaussian() -> Self {
        Self::Gaussian { mean: 0.0, sd: 1.0 }
    }
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::Uniform { lo, hi }.validated()
    }
    pub fn cauchy(loc: f64, scale: f64) -> Result<Self> {
        Self::Cauchy { loc, scale }.validated()
    }
    pub fn stable(alpha: f64, scale: f64) -> Result<Self> {
        Self::SymmetricStable { alpha, scale }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be finite, got {v}")))
            }
        };
        match self {
            Self::Gaussian { mean, sd } => {
                finite("mean", mean)?;
                finite("sd", sd)?;
                if sd <= 0.0 {
                    return Err(Error::config("sd", format!("must be positive, got {sd}")));
                }
            }
            Self::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if lo >= hi {
                    return Err(Error::config("hi", format!("must exceed lo ({lo}), got {hi}")));
                }
            }
            Self::Cauchy { loc, scale } => {
                finite("loc", loc)?;
                finite("scale", scale)?;
                if scale <= 0.0 {
                    return Err(Error::config("scale", format!("must be positive, got {scale}")));
                }
            }
            Self::SymmetricStable { alpha, scale } => {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return Err(Error::config("alpha", format!("must lie in (0, 2], got {alpha}")));
                }
                finite("scale", scale)?;
                if scale <= 0.0 {
                    return Err(Error::config("scale", format!("must be positive, got {scale}")));
                }
            }
        }
        Ok(self)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Self::Cauchy { loc, scale } => loc + scale * (PI * (rng.random::<f64>() - 0.5)).tan(),
            Self::SymmetricStable { alpha, scale } => {
                let v = PI * (rng.random::<f64>() - 0.5);
                let w: f64 = rng.sample(Exp1);
                scale * chambers_mallows_stuck(alpha, v, w)
            }
        }
    }

    /// `n` iid draws.
    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// Characteristic function `E exp(i t ε)`.
    pub fn cf(&self, t: f64) -> Complex64 {
        match *self {
            Self::Gaussian { mean, sd } => {
                Complex64::from_polar((-0.5 * sd * sd * t * t).exp(), mean * t)
            }
            Self::Cauchy { loc, scale } => Complex64::from_polar((-scale * t.abs()).exp(), loc * t),
            Self::Uniform { lo, hi } => {
                let half = 0.5 * (hi - lo) * t;
                let modulus = if half == 0.0 { 1.0 } else { half.sin() / half };
                Complex64::from_polar(1.0, 0.5 * (lo + hi) * t) * modulus
            }
            Self::SymmetricStable { alpha, scale } => {
                Complex64::new((-(scale * t.abs()).powf(alpha)).exp(), 0.0)
            }
        }
    }

    /// The closed-form law, when one exists (α-stable only for α ∈ {1, 2}).
    pub fn closed_law(&self) -> Option<ContinuousLaw> {
        match *self {
            Self::Gaussian { mean, sd } => Some(ContinuousLaw::Gaussian { mean, sd }),
            Self::Uniform { lo, hi } => Some(ContinuousLaw::Uniform { lo, hi }),
            Self::Cauchy { loc, scale } => Some(ContinuousLaw::Cauchy { loc, scale }),
            Self::SymmetricStable { alpha: 2.0, scale } => {
                Some(ContinuousLaw::Gaussian {
                    mean: 0.0,
                    sd: SQRT_2 * scale,
                })
            }
            Self::SymmetricStable { alpha: 1.0, scale } => {
                Some(ContinuousLaw::Cauchy { loc: 0.0, scale })
            }
            Self::SymmetricStable { .. } => None,
        }
    }

    pub fn has_closed_density(&self) -> bool {
        self.closed_law().is_some()
    }

    pub fn pdf(&self, x: f64) -> Option<f64> {
        self.closed_law().map(|l| l.pdf(x))
    }

    pub fn cdf(&self, x: f64) -> Option<f64> {
        self.closed_law().map(|l| l.cdf(x))
    }

    /// `sup_x f(x)`, finite for every supported kind.
    pub fn density_sup(&self) -> f64 {
        match *self {
            Self::SymmetricStable { alpha, scale } => gamma(1.0 + 1.0 / alpha) / (PI * scale),
            _ => self.closed_law().expect("closed law").density_sup(),
        }
    }

    /// Moments `E|ε|^p` are finite exactly for `p` below this index.
    pub fn tail_index(&self) -> f64 {
        match *self {
            Self::Cauchy { .. } => 1.0,
            Self::SymmetricStable { alpha, .. } if alpha < 2.0 => alpha,
            _ => f64::INFINITY,
        }
    }

    /// Law of `c·ε`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::config("coeffs", format!("scale factor must be non-zero, got {c}")));
        }
        Ok(match *self {
            Self::Gaussian { mean, sd } => Self::Gaussian {
                mean: c * mean,
                sd: c.abs() * sd,
            },
            Self::Cauchy { loc, scale } => Self::Cauchy {
                loc: c * loc,
                scale: c.abs() * scale,
            },
            Self::Uniform { lo, hi } => {
                let (a, b) = (c * lo, c * hi);
                Self::Uniform {
                    lo: a.min(b),
                    hi: a.max(b),
                }
            }
            Self::SymmetricStable { alpha, scale } => Self::SymmetricStable {
                alpha,
                scale: c.abs() * scale,
            },
        })
    }

    /// Law of `Σ a_i ε_i` for iid `ε_i`, when it stays in the family.
    pub fn combination(&self, sums: &CoefficientSums) -> Option<Self> {
        match *self {
            Self::Gaussian { mean, sd } => Some(Self::Gaussian {
                mean: mean * sums.sum,
                sd: sd * sums.sum_sq.sqrt(),
            }),
            Self::Cauchy { loc, scale } => Some(Self::Cauchy {
                loc: loc * sums.sum,
                scale: scale * sums.sum_abs,
            }),
            Self::SymmetricStable { alpha, scale } => Some(Self::SymmetricStable {
                alpha,
                scale: scale * sums.sum_abs_pow(alpha).powf(1.0 / alpha),
            }),
            Self::Uniform { .. } => sums.single.and_then(|c| self.scaled(c).ok()),
        }
    }
}

fn chambers_mallows_stuck(alpha: f64, v: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        return v.tan();
    }
    let cos_v = v.cos();
    (alpha * v).sin() / cos_v.powf(1.0 / alpha)
        * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Coefficient functionals needed to identify the law of `Σ a_i ε_i`.
#[derive(Debug, Clone)]
pub struct CoefficientSums {
    pub sum: f64,
    pub sum_abs: f64,
    pub sum_sq: f64,
    /// The only non-zero coefficient, if there is exactly one.
    pub single: Option<f64>,
    kind: SumsKind,
}

#[derive(Debug, Clone)]
enum SumsKind {
    Finite(Vec<f64>),
    Geometric(f64),
}

impl CoefficientSums {
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        let nonzero: Vec<f64> = coeffs.iter().copied().filter(|c| *c != 0.0).collect();
        Self {
            sum: coeffs.iter().sum(),
            sum_abs: coeffs.iter().map(|c| c.abs()).sum(),
            sum_sq: coeffs.iter().map(|c| c * c).sum(),
            single: (nonzero.len() == 1).then(|| nonzero[0]),
            kind: SumsKind::Finite(coeffs.to_vec()),
        }
    }

    /// Coefficients `c^k`, `k ≥ 0`, with `|c| < 1`.
    pub fn geometric(c: f64) -> Self {
        Self {
            sum: 1.0 / (1.0 - c),
            sum_abs: 1.0 / (1.0 - c.abs()),
            sum_sq: 1.0 / (1.0 - c * c),
            single: (c == 0.0).then_some(1.0),
            kind: SumsKind::Geometric(c),
        }
    }

    pub fn sum_abs_pow(&self, p: f64) -> f64 {
        match &self.kind {
            SumsKind::Finite(c) => c.iter().map(|a| a.abs().powf(p)).sum(),
            SumsKind::Geometric(c) => 1.0 / (1.0 - c.abs().powf(p)),
        }
    }
}

/// `∫ |φ(t)|² (1 + t²) |t|^α dt` with a finiteness verdict.
pub fn cf_integrability(
    dist: &InnovationDistribution,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<LineIntegral> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::config("alpha", format!("must lie in (0, 2], got {alpha}")));
    }
    let integrand = |t: f64| dist.cf(t).norm_sqr() * (1.0 + t * t) * t.abs().powf(alpha);
    Ok(quadrature::integrate_even(&integrand, quad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalCheck {
    /// `∫ |φ(t)|² dt`
    pub lhs: f64,
    /// `2π ∫ f(x)² dx`
    pub rhs: f64,
    pub rel_gap: f64,
}

/// Compare `∫|φ|²` with `2π∫f²`, each computed by its own quadrature.
pub fn parseval_check(dist: &InnovationDistribution, quad: &QuadratureSpec) -> Result<ParsevalCheck> {
    let law = dist.closed_law().ok_or_else(|| {
        Error::capability(format!("Parseval check needs a closed-form density, not {dist:?}"))
    })?;
    let lhs = quadrature::integrate_even(&|t: f64| dist.cf(t).norm_sqr(), quad).value;
    let f2 = |x: f64| law.pdf(x).powi(2);
    let l2 = match law {
        ContinuousLaw::Uniform { lo, hi } => quadrature::integrate(&f2, lo, hi, quad).value,
        _ => quadrature::integrate_real_line(&f2, quad).value,
    };
    let rhs = 2.0 * PI * l2;
    Ok(ParsevalCheck {
        lhs,
        rhs,
        rel_gap: (lhs - rhs).abs() / rhs.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Finiteness;
    use crate::rng::substream;
    use crate::stats;
    use approx::assert_relative_eq;

    fn kinds() -> Vec<InnovationDistribution> {
        vec![
            InnovationDistribution::gaussian(0.3, 1.7).unwrap(),
            InnovationDistribution::uniform(-1.0, 2.0).unwrap(),
            InnovationDistribution::cauchy(0.5, 0.8).unwrap(),
            InnovationDistribution::stable(1.5, 1.0).unwrap(),
            InnovationDistribution::stable(0.7, 2.0).unwrap(),
        ]
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            InnovationDistribution::gaussian(0.0, 0.0),
            Err(Error::Config { ref key, .. }) if key == "sd"
        ));
        assert!(InnovationDistribution::uniform(1.0, 1.0).is_err());
        assert!(InnovationDistribution::cauchy(0.0, -1.0).is_err());
        assert!(InnovationDistribution::stable(2.5, 1.0).is_err());
        assert!(InnovationDistribution::stable(0.0, 1.0).is_err());
    }

    #[test]
    fn cf_closed_forms() {
        for d in kinds() {
            assert_eq!(d.cf(0.0), Complex64::new(1.0, 0.0));
        }
        let g = InnovationDistribution::standard_gaussian();
        assert_relative_eq!(g.cf(1.0).re, (-0.5f64).exp(), epsilon = 1e-15);
        let s = InnovationDistribution::stable(1.5, 1.0).unwrap();
        assert_relative_eq!(s.cf(2.0).re, 0.059_106, epsilon = 1e-6);
    }

    #[test]
    fn cf_is_hermitian_and_bounded() {
        for d in kinds() {
            for i in 0..1000 {
                let t = -50.0 + 0.1 * i as f64;
                let (a, b) = (d.cf(t), d.cf(-t));
                assert!(a.norm() <= 1.0 + 1e-15);
                assert!((a - b.conj()).norm() < 1e-15, "{d:?} at {t}");
            }
        }
    }

    #[test]
    fn stable_two_matches_gaussian_cf() {
        let s = InnovationDistribution::stable(2.0, 1.3).unwrap();
        let g = InnovationDistribution::gaussian(0.0, SQRT_2 * 1.3).unwrap();
        for i in 0..1000 {
            let t = -10.0 + 0.02 * i as f64;
            assert!((s.cf(t) - g.cf(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn density_derivatives_match_finite_differences() {
        let laws = [
            ContinuousLaw::Gaussian { mean: 0.4, sd: 1.3 },
            ContinuousLaw::Cauchy { loc: -0.2, scale: 0.6 },
        ];
        let h = 1e-5;
        for law in laws {
            for i in 0..40 {
                let x = -3.0 + 0.15 * i as f64;
                let (d1, d2, d3) = law.pdf_derivatives(x).unwrap();
                let fd = |g: &dyn Fn(f64) -> f64| (g(x + h) - g(x - h)) / (2.0 * h);
                assert!((fd(&|t| law.pdf(t)) - d1).abs() < 1e-7);
                assert!((fd(&|t| law.pdf_derivatives(t).unwrap().0) - d2).abs() < 1e-6);
                assert!((fd(&|t| law.pdf_derivatives(t).unwrap().1) - d3).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn density_sup_dominates_density() {
        for d in kinds() {
            let sup = d.density_sup();
            if let Some(law) = d.closed_law() {
                for i in 0..=4000 {
                    let x = -20.0 + 0.01 * i as f64;
                    assert!(law.pdf(x) <= sup * (1.0 + 1e-12));
                }
            }
        }
        // standard Cauchy through the stable route
        let s = InnovationDistribution::stable(1.0, 1.0).unwrap();
        assert_relative_eq!(s.density_sup(), 1.0 / PI, epsilon = 1e-12);
        let s = InnovationDistribution::stable(2.0, 1.0).unwrap();
        assert_relative_eq!(s.density_sup(), 1.0 / (2.0 * PI.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn gaussian_sample_mean_within_clt_band() {
        let d = InnovationDistribution::standard_gaussian();
        let x = d.sample_n(100_000, &mut substream(1, &[0]));
        assert!(stats::mean(&x).abs() < 4.0 / 100_000f64.sqrt());
    }

    #[test]
    fn cauchy_sample_median_near_location() {
        let d = InnovationDistribution::cauchy(0.0, 1.0).unwrap();
        let x = d.sample_n(100_000, &mut substream(2, &[0]));
        assert!(stats::median(&x).abs() < 0.02);
    }

    #[test]
    fn samples_pass_ks_against_their_cdf() {
        let n = 100_000;
        let crit = stats::ks_critical(1e-3) / (n as f64).sqrt();
        let cases = [
            (InnovationDistribution::standard_gaussian(), None),
            (InnovationDistribution::uniform(0.0, 1.0).unwrap(), None),
            (InnovationDistribution::cauchy(1.0, 2.0).unwrap(), None),
            // alpha = 2 stable is N(0, 2 scale^2)
            (
                InnovationDistribution::stable(2.0, 1.0).unwrap(),
                Some(ContinuousLaw::Gaussian { mean: 0.0, sd: SQRT_2 }),
            ),
            (
                InnovationDistribution::stable(1.0, 1.0).unwrap(),
                Some(ContinuousLaw::Cauchy { loc: 0.0, scale: 1.0 }),
            ),
        ];
        for (i, (d, target)) in cases.into_iter().enumerate() {
            let law = target.unwrap_or_else(|| d.closed_law().unwrap());
            let x = d.sample_n(n, &mut substream(3, &[i as u64]));
            let ks = stats::ks_distance(&x, |v| law.cdf(v));
            assert!(ks < crit, "{d:?}: D = {ks}, critical {crit}");
        }
    }

    #[test]
    fn sampling_is_bit_reproducible() {
        let d = InnovationDistribution::stable(1.3, 1.0).unwrap();
        let a = d.sample_n(64, &mut substream(9, &[1]));
        let b = d.sample_n(64, &mut substream(9, &[1]));
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn cf_integrability_closed_forms() {
        let q = QuadratureSpec::default();
        // 2∫ e^{-2t}(t + t^3) dt = 2(1/4 + 6/16)
        let c = cf_integrability(&InnovationDistribution::cauchy(0.0, 1.0).unwrap(), 1.0, &q).unwrap();
        assert_relative_eq!(c.value, 1.25, max_relative = 1e-9);
        assert_eq!(c.verdict, Finiteness::Finite);
        let s = cf_integrability(&InnovationDistribution::stable(1.0, 1.0).unwrap(), 1.0, &q).unwrap();
        assert_relative_eq!(s.value, 1.25, max_relative = 1e-9);
        // ∫ e^{-t^2}(1+t^2)t^2 dt = sqrt(pi)/2 + 3 sqrt(pi)/4
        let g = cf_integrability(&InnovationDistribution::standard_gaussian(), 2.0, &q).unwrap();
        assert_relative_eq!(g.value, 1.25 * PI.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn cf_integrability_uniform_diverges() {
        let q = QuadratureSpec::default();
        let u = cf_integrability(&InnovationDistribution::uniform(0.0, 1.0).unwrap(), 2.0, &q).unwrap();
        assert_eq!(u.verdict, Finiteness::Diverges);
        assert!(cf_integrability(&InnovationDistribution::standard_gaussian(), 0.0, &q).is_err());
    }

    #[test]
    fn cf_integral_partial_sums_monotone_in_cutoff() {
        let d = InnovationDistribution::stable(0.8, 1.0).unwrap();
        let mut last = 0.0;
        for t in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
            let q = QuadratureSpec {
                cutoff: Some(t),
                ..QuadratureSpec::default()
            };
            let v = cf_integrability(&d, 1.5, &q).unwrap().value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn parseval_gaussian_cauchy_uniform() {
        let q = QuadratureSpec::default();
        let g = parseval_check(&InnovationDistribution::standard_gaussian(), &q).unwrap();
        assert_relative_eq!(g.lhs, PI.sqrt(), max_relative = 1e-10);
        assert!(g.rel_gap < 1e-8);
        let c = parseval_check(&InnovationDistribution::cauchy(0.0, 1.0).unwrap(), &q).unwrap();
        assert_relative_eq!(c.lhs, 1.0, max_relative = 1e-10);
        assert!(c.rel_gap < 1e-8);
        let u = parseval_check(&InnovationDistribution::uniform(0.0, 1.0).unwrap(), &q).unwrap();
        assert_relative_eq!(u.rhs, 2.0 * PI, max_relative = 1e-12);
        assert!(u.rel_gap < 1e-3, "gap {}", u.rel_gap);
        assert!(parseval_check(&InnovationDistribution::stable(1.5, 1.0).unwrap(), &q).is_err());
    }

    #[test]
    fn combination_laws() {
        let g = InnovationDistribution::standard_gaussian();
        let m = g.combination(&CoefficientSums::from_coeffs(&[0.8, 0.6])).unwrap();
        assert_eq!(m.closed_law().unwrap().cdf(0.0), 0.5);
        if let InnovationDistribution::Gaussian { sd, .. } = m {
            assert_relative_eq!(sd, 1.0, epsilon = 1e-15);
        }
        let c = InnovationDistribution::cauchy(0.0, 1.0).unwrap();
        let m = c.combination(&CoefficientSums::geometric(0.5)).unwrap();
        assert_eq!(m, InnovationDistribution::Cauchy { loc: 0.0, scale: 2.0 });
        let u = InnovationDistribution::uniform(0.0, 1.0).unwrap();
        assert!(u.combination(&CoefficientSums::from_coeffs(&[0.5, 0.5])).is_none());
        assert_eq!(
            u.combination(&CoefficientSums::from_coeffs(&[0.0, -2.0])),
            Some(InnovationDistribution::Uniform { lo: -2.0, hi: 0.0 })
        );
    }

    #[test]
    fn json_shape() {
        let d: InnovationDistribution =
            serde_json::from_str(r#"{"kind":"stable","alpha":1.5}"#).unwrap();
        assert_eq!(d, InnovationDistribution::SymmetricStable { alpha: 1.5, scale: 1.0 });
        assert!(serde_json::from_str::<InnovationDistribution>(r#"{"kind":"gaussian","sigma":1}"#).is_err());
    }
}
