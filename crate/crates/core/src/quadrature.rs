//! Adaptive Gauss–Kronrod quadrature and the cutoff/divergence rules used
//! for characteristic-function integrals over the real line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel on `[a, b]`: `(kronrod, |kronrod − gauss|)`.
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`, starting from panels
/// no wider than `max_panel_width` and bisecting the worst panel until the
/// summed error estimate drops below `max(abs_tol, rel_tol·|value|)`.
pub fn integrate(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        };
    }
    let n0 = (((b - a) / spec.max_panel_width).abs().ceil() as usize).max(1);
    let width = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(n0 * 2);
    let (mut total, mut err) = (0.0, 0.0);
    for i in 0..n0 {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == n0 { b } else { lo + width };
        let (value, error) = gk15(f, lo, hi);
        total += value;
        err += error;
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    let mut splits = 0;
    while err > spec.abs_tol.max(spec.rel_tol * total.abs()) && splits < spec.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        splits += 1;
    }
    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Integral {
        value,
        error,
        panels: heap.len(),
    }
}

/// `∫_{−∞}^{∞} f(x) dx` through the substitution `x = tan u`.
pub fn integrate_real_line(f: &impl Fn(f64) -> f64, spec: &QuadratureSpec) -> Integral {
    let g = |u: f64| {
        let c = u.cos();
        f(u.tan()) / (c * c)
    };
    let half = std::f64::consts::FRAC_PI_2;
    let inner = QuadratureSpec {
        max_panel_width: half / 8.0,
        ..spec.clone()
    };
    let left = integrate(&g, -half, 0.0, &inner);
    let right = integrate(&g, 0.0, half, &inner);
    Integral {
        value: left.value + right.value,
        error: left.error + right.error,
        panels: left.panels + right.panels,
    }
}

/// Settings for integrals of even, non-negative integrands over the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Fixed cutoff `T`; when absent it is chosen by [`auto_cutoff`].
    pub cutoff: Option<f64>,
    /// Largest cutoff tried by the automatic rule.
    pub max_cutoff: f64,
    /// The automatic rule stops once the integrand stays below this beyond `T`.
    pub decay_threshold: f64,
    /// Divergence is declared when the estimated tail mass exceeds this
    /// (relative to `max(1, |value|)`) and the envelope is not decaying.
    pub tail_threshold: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panel_width: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            cutoff: None,
            max_cutoff: 1.0e4,
            decay_threshold: 1.0e-12,
            tail_threshold: 1.0e-6,
            abs_tol: 1.0e-13,
            rel_tol: 1.0e-12,
            max_panel_width: 1.0,
            max_subdivisions: 200_000,
        }
    }
}

const PROBES: usize = 256;

fn envelope(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    (0..=PROBES)
        .map(|i| f(lo + (hi - lo) * i as f64 / PROBES as f64).abs())
        .fold(0.0, f64::max)
}

/// Smallest power-of-two cutoff `T ≤ max_cutoff` beyond which the integrand
/// stays below `decay_threshold` on `[T, 2T]`. Returns `(T, true)` on success
/// and `(max_cutoff, false)` otherwise.
pub fn auto_cutoff(f: &impl Fn(f64) -> f64, spec: &QuadratureSpec) -> (f64, bool) {
    let mut t = 1.0;
    while t <= spec.max_cutoff {
        if envelope(f, t, 2.0 * t) < spec.decay_threshold {
            return (t, true);
        }
        t *= 2.0;
    }
    (spec.max_cutoff, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Finiteness {
    Finite,
    Diverges,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineIntegral {
    pub value: f64,
    pub error: f64,
    pub cutoff: f64,
    pub verdict: Finiteness,
}

/// `∫_{−T}^{T} f` for an even integrand, computed as twice the integral over
/// `[0, T]`, with the cutoff rule and divergence trend test of `spec`.
pub fn integrate_even(f: &impl Fn(f64) -> f64, spec: &QuadratureSpec) -> LineIntegral {
    let (cutoff, decays) = match spec.cutoff {
        Some(t) => (t, false),
        None => auto_cutoff(f, spec),
    };
    let half = integrate(f, 0.0, cutoff, spec);
    let value = 2.0 * half.value;
    let mut verdict = Finiteness::Finite;
    if !decays {
        let hi = envelope(f, 0.5 * cutoff, cutoff);
        let lo = envelope(f, 0.25 * cutoff, 0.5 * cutoff);
        let tail_mass = cutoff * hi;
        if hi >= 0.5 * lo && tail_mass > spec.tail_threshold * value.abs().max(1.0) {
            verdict = Finiteness::Diverges;
        }
    }
    LineIntegral {
        value,
        error: 2.0 * half.error,
        cutoff,
        verdict,
    }
}

/// Composite 7-point Gauss–Legendre rule on `[a, b]`. All weights are
/// positive, so pointwise inequalities between integrands carry over to the
/// discrete sums.
pub fn gauss_legendre_composite(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes = [
        (-XGK[1], WG[0]),
        (-XGK[3], WG[1]),
        (-XGK[5], WG[2]),
        (0.0, WG[3]),
        (XGK[5], WG[2]),
        (XGK[3], WG[1]),
        (XGK[1], WG[0]),
    ];
    let width = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * 7);
    let mut ws = Vec::with_capacity(panels * 7);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * width;
        for (x, w) in nodes {
            xs.push(c + 0.5 * width * x);
            ws.push(0.5 * width * w);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let spec = QuadratureSpec::default();
        let r = integrate(&|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &spec);
        assert_relative_eq!(r.value, 64.0 / 6.0 - 8.0, epsilon = 1e-13);
    }

    #[test]
    fn real_line_gaussian() {
        let r = integrate_real_line(&|x: f64| (-x * x).exp(), &QuadratureSpec::default());
        assert_relative_eq!(r.value, PI.sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn even_integral_detects_growth() {
        let r = integrate_even(&|t: f64| t.sin().powi(2), &QuadratureSpec::default());
        assert_eq!(r.verdict, Finiteness::Diverges);
        let r = integrate_even(&|t: f64| (-t.abs()).exp(), &QuadratureSpec::default());
        assert_eq!(r.verdict, Finiteness::Finite);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_cubic() {
        let (x, w) = gauss_legendre_composite(-1.0, 3.0, 5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(3)).sum();
        assert_relative_eq!(s, 20.0, epsilon = 1e-12);
        assert!(w.iter().all(|&w| w > 0.0));
    }
}
