//! Causal stationary processes `X_k = g(…, ε_{k−1}, ε_k)`.
//!
//! Every supported kind has the additive one-step form
//! `X_k = a_0·ε_k + Y_{k−1}` with `Y_{k−1}` a function of `ε_{≤k−1}`:
//!
//! * `Iid`: `a_0 = 1`, `Y ≡ 0`.
//! * `Linear`: `X_k = Σ_{i<L} a_i ε_{k−i}`, `Y_{k−1} = Σ_{1≤i<L} a_i ε_{k−i}`.
//! * `Recursive` / `ThresholdAr`: `X_k = m(X_{k−1}) + ε_k`, `Y_{k−1} = m(X_{k−1})`.
//!
//! Random draw order. A path of length `n` consumes its tail innovations
//! (the `L − 1` pre-sample draws of a linear filter, or the burn-in draws of
//! a recursion started at 0) and then `ε_1..ε_n`. A coupled pair consumes
//! the tail, then `ε_0`, then `ε′_0`, then `ε_1..ε_{k_max}`.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::cdf::{Cdf, PiecewiseLinearCdf};
use crate::error::{Error, Result};
use crate::innovations::{CoefficientSums, ContinuousLaw, InnovationDistribution};
use crate::rng::{substream, tags};

/// Default size of a Monte Carlo reference marginal.
pub const DEFAULT_REFERENCE_SIZE: usize = 10_000_000;
/// Largest reference sample we are willing to hold (1 GiB of f64).
pub const MAX_REFERENCE_SIZE: usize = 1 << 27;

/// `m` in `X_k = m(X_{k−1}) + ε_k`.
#[derive(Clone)]
pub enum RecursiveMap {
    /// `m(x) = coef·x`
    Ar { coef: f64 },
    /// `m(x) = gain·tanh(x)`
    Tanh { gain: f64 },
    /// `m(x) = gain·sin(x)`
    Sine { gain: f64 },
    /// A user map; its contraction ratio is taken on trust.
    Custom {
        name: String,
        map: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl RecursiveMap {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            RecursiveMap::Ar { coef } => coef * x,
            RecursiveMap::Tanh { gain } => gain * x.tanh(),
            RecursiveMap::Sine { gain } => gain * x.sin(),
            RecursiveMap::Custom { map, .. } => map(x),
        }
    }

    /// `sup |m′|` for the named families.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            RecursiveMap::Ar { coef } => Some(coef.abs()),
            RecursiveMap::Tanh { gain } | RecursiveMap::Sine { gain } => Some(gain.abs()),
            RecursiveMap::Custom { .. } => None,
        }
    }
}

impl fmt::Debug for RecursiveMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecursiveMap::Ar { coef } => write!(f, "Ar({coef})"),
            RecursiveMap::Tanh { gain } => write!(f, "Tanh({gain})"),
            RecursiveMap::Sine { gain } => write!(f, "Sine({gain})"),
            RecursiveMap::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ProcessKind {
    Iid,
    Linear { coeffs: Vec<f64> },
    Recursive { map: RecursiveMap, rho: f64, burn_in: usize },
    ThresholdAr { a: f64, b: f64, burn_in: usize },
}

/// `ceil(60 / ln(1/ρ))`, so that `ρ^B < 10^{−26}`.
pub fn default_burn_in(rho: f64) -> usize {
    if rho <= 0.0 {
        return 1;
    }
    ((60.0 / (1.0 / rho).ln()).ceil() as usize).max(1)
}

#[inline]
fn tar_map(a: f64, b: f64, x: f64) -> f64 {
    a * x.max(0.0) + b * x.min(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarginalSpec {
    ClosedForm(ContinuousLaw),
    MonteCarloReference {
        size: usize,
        seed: u64,
        /// Binary cache file (u64 LE count, then sorted f64 LE values).
        cache: Option<PathBuf>,
    },
}

impl MarginalSpec {
    pub fn is_closed(&self) -> bool {
        matches!(self, MarginalSpec::ClosedForm(_))
    }
}

/// A resolved marginal CDF.
#[derive(Debug, Clone)]
pub enum Marginal {
    Closed(ContinuousLaw),
    Reference(PiecewiseLinearCdf),
}

impl Marginal {
    pub fn closed(&self) -> Option<&ContinuousLaw> {
        match self {
            Marginal::Closed(law) => Some(law),
            Marginal::Reference(_) => None,
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            Marginal::Closed(law) => law.quantile(p),
            Marginal::Reference(r) => crate::stats::quantile_sorted(r.knots(), p),
        }
    }

    /// Reference sample size, when Monte Carlo.
    pub fn reference_size(&self) -> Option<usize> {
        match self {
            Marginal::Closed(_) => None,
            Marginal::Reference(r) => Some(r.len()),
        }
    }
}

impl Cdf for Marginal {
    fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Closed(l) => Cdf::cdf(l, x),
            Marginal::Reference(r) => r.cdf(x),
        }
    }
    fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        match self {
            Marginal::Closed(l) => l.cdf_sorted(xs),
            Marginal::Reference(r) => r.cdf_sorted(xs),
        }
    }
    fn max_increment(&self, lo: f64, hi: f64, width: f64) -> f64 {
        match self {
            Marginal::Closed(l) => l.max_increment(lo, hi, width),
            Marginal::Reference(r) => r.max_increment(lo, hi, width),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProcessModel {
    kind: ProcessKind,
    innovation: InnovationDistribution,
    marginal_spec: MarginalSpec,
    marginal: OnceLock<Arc<Marginal>>,
}

/// A path with its additive decomposition: `x[i] = step_scale·eps[i] + y[i]`
/// bit for bit, where `y[i]` is the state `Y_{i−1}` before step `i`.
#[derive(Debug, Clone, Default)]
pub struct PathWithStates {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub eps: Vec<f64>,
}

/// Two paths `X_0..X_{k_max}` and `X*_0..X*_{k_max}` that share every
/// innovation except `ε_0`.
#[derive(Debug, Clone)]
pub struct CoupledPaths {
    pub k_max: usize,
    pub x: Vec<f64>,
    pub x_star: Vec<f64>,
    /// Innovations `ε_{≤−1}` that fix `ξ_{−1}`, oldest first.
    pub tail: Vec<f64>,
    pub eps0: f64,
    pub eps0_star: f64,
    /// `y[k] = Y_{k−1}`, the state entering step `k`.
    pub y: Vec<f64>,
    pub y_star: Vec<f64>,
}

impl ProcessModel {
    pub fn new(kind: ProcessKind, innovation: InnovationDistribution) -> Result<Self> {
        let innovation = innovation.validated().map_err(|e| e.within("innovation"))?;
        match &kind {
            ProcessKind::Iid => {}
            ProcessKind::Linear { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::config("coeffs", "need at least one coefficient"));
                }
                if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
                    return Err(Error::config(format!("coeffs[{i}]"), "must be finite"));
                }
                if coeffs.iter().all(|&c| c == 0.0) {
                    return Err(Error::config("coeffs", "all coefficients are zero"));
                }
            }
            ProcessKind::Recursive { map, rho, burn_in } => {
                if !(*rho >= 0.0 && *rho < 1.0) {
                    return Err(Error::config("rho", format!("contraction ratio must lie in [0, 1), got {rho}")));
                }
                if let Some(l) = map.lipschitz() {
                    if l > *rho {
                        return Err(Error::config(
                            "rho",
                            format!("declared ratio {rho} is below the map's Lipschitz constant {l}"),
                        ));
                    }
                }
                if *burn_in == 0 {
                    return Err(Error::config("burn_in", "must be at least 1"));
                }
            }
            ProcessKind::ThresholdAr { a, b, burn_in } => {
                if !(a.abs() < 1.0 && b.abs() < 1.0) {
                    return Err(Error::config("a", format!("need max(|a|, |b|) < 1, got a = {a}, b = {b}")));
                }
                if *burn_in == 0 {
                    return Err(Error::config("burn_in", "must be at least 1"));
                }
            }
        }
        let mut model = Self {
            kind,
            innovation,
            marginal_spec: MarginalSpec::ClosedForm(ContinuousLaw::Uniform { lo: 0.0, hi: 1.0 }),
            marginal: OnceLock::new(),
        };
        model.marginal_spec = match model.closed_marginal() {
            Some(law) => MarginalSpec::ClosedForm(law),
            None => MarginalSpec::MonteCarloReference {
                size: DEFAULT_REFERENCE_SIZE,
                seed: 0,
                cache: None,
            },
        };
        Ok(model)
    }

    pub fn iid(innovation: InnovationDistribution) -> Result<Self> {
        Self::new(ProcessKind::Iid, innovation)
    }

    pub fn linear(coeffs: Vec<f64>, innovation: InnovationDistribution) -> Result<Self> {
        Self::new(ProcessKind::Linear { coeffs }, innovation)
    }

    /// Linear filter with `a_k = ratio^k`, `k < len`.
    pub fn linear_geometric(ratio: f64, len: usize, innovation: InnovationDistribution) -> Result<Self> {
        Self::linear((0..len).map(|k| ratio.powi(k as i32)).collect(), innovation)
    }

    /// Threshold AR with the default burn-in.
    pub fn tar(a: f64, b: f64, innovation: InnovationDistribution) -> Result<Self> {
        let burn_in = default_burn_in(a.abs().max(b.abs()));
        Self::new(ProcessKind::ThresholdAr { a, b, burn_in }, innovation)
    }

    /// Recursive model with the default burn-in for `rho`.
    pub fn recursive(map: RecursiveMap, rho: f64, innovation: InnovationDistribution) -> Result<Self> {
        let burn_in = default_burn_in(rho);
        Self::new(ProcessKind::Recursive { map, rho, burn_in }, innovation)
    }

    /// Use a Monte Carlo reference marginal of `size` draws even when a
    /// closed form exists.
    pub fn with_reference(mut self, size: usize, seed: u64, cache: Option<PathBuf>) -> Result<Self> {
        if !(2..=MAX_REFERENCE_SIZE).contains(&size) {
            return Err(Error::config(
                "reference_size",
                format!("must lie in [2, {MAX_REFERENCE_SIZE}], got {size}"),
            ));
        }
        self.marginal_spec = MarginalSpec::MonteCarloReference { size, seed, cache };
        self.marginal = OnceLock::new();
        Ok(self)
    }

    /// Adjust the size and seed of a Monte Carlo marginal; closed forms are kept.
    pub fn with_reference_defaults(self, size: usize, seed: u64) -> Result<Self> {
        match &self.marginal_spec {
            MarginalSpec::ClosedForm(_) => Ok(self),
            MarginalSpec::MonteCarloReference { cache, .. } => {
                let cache = cache.clone();
                self.with_reference(size, seed, cache)
            }
        }
    }

    pub fn kind(&self) -> &ProcessKind {
        &self.kind
    }

    pub fn innovation(&self) -> &InnovationDistribution {
        &self.innovation
    }

    pub fn marginal_spec(&self) -> &MarginalSpec {
        &self.marginal_spec
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.kind, ProcessKind::Iid)
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match &self.kind {
            ProcessKind::Iid => "iid".into(),
            ProcessKind::Linear { coeffs } => format!("linear(L={})", coeffs.len()),
            ProcessKind::Recursive { map, rho, .. } => format!("recursive({map:?},rho={rho})"),
            ProcessKind::ThresholdAr { a, b, .. } => format!("tar(a={a},b={b})"),
        }
    }

    /// Contraction ratio for recursive kinds.
    pub fn rho(&self) -> Option<f64> {
        match &self.kind {
            ProcessKind::Recursive { rho, .. } => Some(*rho),
            ProcessKind::ThresholdAr { a, b, .. } => Some(a.abs().max(b.abs())),
            _ => None,
        }
    }

    /// `a_0` in `X_k = a_0·ε_k + Y_{k−1}`.
    pub fn step_scale(&self) -> f64 {
        match &self.kind {
            ProcessKind::Linear { coeffs } => coeffs[0],
            _ => 1.0,
        }
    }

    /// Number of innovations drawn before `ε_1` (or `ε_0` for coupled paths).
    pub fn tail_len(&self) -> usize {
        match &self.kind {
            ProcessKind::Iid => 0,
            ProcessKind::Linear { coeffs } => coeffs.len() - 1,
            ProcessKind::Recursive { burn_in, .. } | ProcessKind::ThresholdAr { burn_in, .. } => *burn_in,
        }
    }

    /// Law of `a_0·ε`, the one-step conditional law up to the shift `Y`.
    pub fn step_law(&self) -> Result<ContinuousLaw> {
        let a0 = self.step_scale();
        if a0 == 0.0 {
            return Err(Error::capability(
                "a_0 = 0: X_k has no conditional density given the past",
            ));
        }
        let scaled = self.innovation.scaled(a0)?;
        scaled.closed_law().ok_or_else(|| {
            Error::capability(format!(
                "conditional CDF needs a closed-form innovation law, not {:?}",
                self.innovation
            ))
        })
    }

    /// Law of `a_0·ε` as an innovation law (characteristic function available
    /// for every kind).
    pub fn step_distribution(&self) -> Result<InnovationDistribution> {
        self.innovation.scaled(self.step_scale())
    }

    /// `F_1(x | ξ) = F_{a_0 ε}(x − Y)`.
    pub fn conditional_cdf(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.step_law()?.cdf(x - y))
    }

    /// `f_1(x | ξ) = f_{a_0 ε}(x − Y)`.
    pub fn conditional_density(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.step_law()?.pdf(x - y))
    }

    /// `c_0` with `sup_x f_1(x | ξ) ≤ c_0` for every state.
    pub fn conditional_density_bound(&self) -> Result<f64> {
        Ok(self.step_law()?.density_sup())
    }

    fn closed_marginal(&self) -> Option<ContinuousLaw> {
        match &self.kind {
            ProcessKind::Iid => self.innovation.closed_law(),
            ProcessKind::Linear { coeffs } => self
                .innovation
                .combination(&CoefficientSums::from_coeffs(coeffs))
                .and_then(|d| d.closed_law()),
            ProcessKind::Recursive {
                map: RecursiveMap::Ar { coef },
                ..
            } => self
                .innovation
                .combination(&CoefficientSums::geometric(*coef))
                .and_then(|d| d.closed_law()),
            _ => None,
        }
    }

    /// The marginal CDF `F`, building the Monte Carlo reference on first use.
    pub fn marginal(&self) -> Result<Arc<Marginal>> {
        if let Some(m) = self.marginal.get() {
            return Ok(m.clone());
        }
        let built = Arc::new(match &self.marginal_spec {
            MarginalSpec::ClosedForm(law) => Marginal::Closed(*law),
            MarginalSpec::MonteCarloReference { size, seed, cache } => {
                Marginal::Reference(self.reference_marginal(*size, *seed, cache.as_deref())?)
            }
        });
        Ok(self.marginal.get_or_init(|| built).clone())
    }

    pub fn marginal_cdf(&self, x: f64) -> Result<f64> {
        Ok(self.marginal()?.cdf(x))
    }

    fn reference_marginal(&self, size: usize, seed: u64, cache: Option<&Path>) -> Result<PiecewiseLinearCdf> {
        if let Some(path) = cache {
            if path.exists() {
                let values = load_reference(path)?;
                if values.len() == size {
                    return Ok(PiecewiseLinearCdf::from_sorted_sample(values));
                }
            }
        }
        let mut values = Vec::with_capacity(size);
        let mut rng = substream(seed, &[tags::REFERENCE]);
        self.generate(size, &mut rng, |x, _, _| values.push(x));
        values.sort_unstable_by(f64::total_cmp);
        if let Some(path) = cache {
            save_reference(path, &values)?;
        }
        Ok(PiecewiseLinearCdf::from_sorted_sample(values))
    }

    /// Stream `n` stationary values to `sink(x, y, eps)`.
    fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R, mut sink: impl FnMut(f64, f64, f64)) {
        let dist = self.innovation;
        match &self.kind {
            ProcessKind::Iid => {
                for _ in 0..n {
                    let e = dist.sample(rng);
                    sink(e, 0.0, e);
                }
            }
            ProcessKind::Linear { coeffs } => {
                let len = coeffs.len();
                // ring[(t mod len)] holds ε_t; the first len − 1 draws are the tail.
                let mut ring = vec![0.0; len];
                for slot in ring.iter_mut().take(len - 1) {
                    *slot = dist.sample(rng);
                }
                let a0 = coeffs[0];
                for j in 0..n {
                    let t = j + len - 1;
                    let mut y = 0.0;
                    for (i, a) in coeffs.iter().enumerate().skip(1) {
                        y += a * ring[(t - i) % len];
                    }
                    let e = dist.sample(rng);
                    ring[t % len] = e;
                    sink(a0 * e + y, y, e);
                }
            }
            ProcessKind::Recursive { map, burn_in, .. } => {
                let mut x = 0.0;
                for _ in 0..*burn_in {
                    x = map.apply(x) + dist.sample(rng);
                }
                for _ in 0..n {
                    let y = map.apply(x);
                    let e = dist.sample(rng);
                    x = 1.0 * e + y;
                    sink(x, y, e);
                }
            }
            ProcessKind::ThresholdAr { a, b, burn_in } => {
                let mut x = 0.0;
                for _ in 0..*burn_in {
                    x = tar_map(*a, *b, x) + dist.sample(rng);
                }
                for _ in 0..n {
                    let y = tar_map(*a, *b, x);
                    let e = dist.sample(rng);
                    x = 1.0 * e + y;
                    sink(x, y, e);
                }
            }
        }
    }

    /// `X_1..X_n` from the stationary law.
    pub fn simulate_path<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let mut x = Vec::with_capacity(n);
        self.generate(n, rng, |v, _, _| x.push(v));
        x
    }

    /// Same draws as [`Self::simulate_path`], with states and innovations.
    pub fn simulate_path_with_states<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> PathWithStates {
        let mut p = PathWithStates {
            x: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            eps: Vec::with_capacity(n),
        };
        self.generate(n, rng, |x, y, e| {
            p.x.push(x);
            p.y.push(y);
            p.eps.push(e);
        });
        p
    }

    pub fn simulate_coupled<R: Rng + ?Sized>(&self, k_max: usize, rng: &mut R) -> CoupledPaths {
        let dist = self.innovation;
        let tail: Vec<f64> = (0..self.tail_len()).map(|_| dist.sample(rng)).collect();
        let eps0 = dist.sample(rng);
        let eps0_star = dist.sample(rng);
        let rest: Vec<f64> = (0..k_max).map(|_| dist.sample(rng)).collect();
        let steps = k_max + 1;
        let (mut x, mut x_star) = (Vec::with_capacity(steps), Vec::with_capacity(steps));
        let (mut y, mut y_star) = (Vec::with_capacity(steps), Vec::with_capacity(steps));
        let innovation_at = |k: usize, star: bool| {
            if k == 0 {
                if star {
                    eps0_star
                } else {
                    eps0
                }
            } else {
                rest[k - 1]
            }
        };
        match &self.kind {
            ProcessKind::Iid => {
                for k in 0..steps {
                    for (star, xs, ys) in [(false, &mut x, &mut y), (true, &mut x_star, &mut y_star)] {
                        xs.push(innovation_at(k, star));
                        ys.push(0.0);
                    }
                }
            }
            ProcessKind::Linear { coeffs } => {
                let len = coeffs.len();
                let t0 = len - 1;
                for (star, xs, ys) in [(false, &mut x, &mut y), (true, &mut x_star, &mut y_star)] {
                    // ext[t] = ε_{t − t0}
                    let ext: Vec<f64> = tail
                        .iter()
                        .copied()
                        .chain((0..steps).map(|k| innovation_at(k, star)))
                        .collect();
                    for k in 0..steps {
                        let t = t0 + k;
                        let mut s = 0.0;
                        for (i, a) in coeffs.iter().enumerate().skip(1) {
                            s += a * ext[t - i];
                        }
                        xs.push(coeffs[0] * ext[t] + s);
                        ys.push(s);
                    }
                }
            }
            ProcessKind::Recursive { .. } | ProcessKind::ThresholdAr { .. } => {
                let m = |v: f64| match &self.kind {
                    ProcessKind::Recursive { map, .. } => map.apply(v),
                    ProcessKind::ThresholdAr { a, b, .. } => tar_map(*a, *b, v),
                    _ => unreachable!(),
                };
                let mut start = 0.0;
                for &e in &tail {
                    start = m(start) + e;
                }
                for (star, xs, ys) in [(false, &mut x, &mut y), (true, &mut x_star, &mut y_star)] {
                    let mut v = start;
                    for k in 0..steps {
                        let s = m(v);
                        v = 1.0 * innovation_at(k, star) + s;
                        xs.push(v);
                        ys.push(s);
                    }
                }
            }
        }
        CoupledPaths {
            k_max,
            x,
            x_star,
            tail,
            eps0,
            eps0_star,
            y,
            y_star,
        }
    }
}

/// Write sorted reference values: u64 LE count, then f64 LE values.
pub fn save_reference(path: &Path, sorted: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(sorted.len() as u64).to_le_bytes())?;
    for v in sorted {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_reference(path: &Path) -> Result<Vec<f64>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 8];
    r.read_exact(&mut head)?;
    let n = u64::from_le_bytes(head) as usize;
    if n > MAX_REFERENCE_SIZE {
        return Err(Error::Contract(format!("reference cache claims {n} values")));
    }
    let mut bytes = Vec::with_capacity(n * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * 8 {
        return Err(Error::Contract(format!(
            "reference cache holds {} bytes of values, header says {n} values",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if !values.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::Contract("reference cache is not sorted".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use approx::assert_relative_eq;

    fn gauss() -> InnovationDistribution {
        InnovationDistribution::standard_gaussian()
    }

    #[test]
    fn iid_path_is_the_innovations() {
        let u = InnovationDistribution::uniform(0.0, 1.0).unwrap();
        let m = ProcessModel::iid(u).unwrap();
        let x = m.simulate_path(4, &mut substream(5, &[1]));
        let e = u.sample_n(4, &mut substream(5, &[1]));
        assert_eq!(x, e);
    }

    #[test]
    fn degenerate_filter_is_identity() {
        let m = ProcessModel::linear(vec![1.0], gauss()).unwrap();
        let x = m.simulate_path(50, &mut substream(6, &[1]));
        assert_eq!(x, gauss().sample_n(50, &mut substream(6, &[1])));
    }

    #[test]
    fn tar_lag_one_autocorrelation() {
        let m = ProcessModel::tar(0.5, -0.3, gauss()).unwrap();
        let x = m.simulate_path(100_000, &mut substream(7, &[1]));
        let r = stats::lag1_autocorrelation(&x);
        assert!(r > 0.0 && r < 0.6, "lag-1 autocorrelation {r}");
    }

    #[test]
    fn states_reproduce_the_path_bitwise() {
        let models = [
            ProcessModel::linear(vec![0.8, 0.6, -0.3], gauss()).unwrap(),
            ProcessModel::tar(0.5, -0.3, gauss()).unwrap(),
            ProcessModel::recursive(RecursiveMap::Tanh { gain: 0.7 }, 0.7, gauss()).unwrap(),
            ProcessModel::iid(gauss()).unwrap(),
        ];
        for m in models {
            let p = m.simulate_path_with_states(500, &mut substream(8, &[2]));
            let x = m.simulate_path(500, &mut substream(8, &[2]));
            assert_eq!(p.x, x);
            let a0 = m.step_scale();
            for i in 0..500 {
                assert_eq!((a0 * p.eps[i] + p.y[i]).to_bits(), p.x[i].to_bits());
            }
        }
    }

    #[test]
    fn linear_coupling_is_exact() {
        let a = vec![1.0, -0.4, 0.25, 0.125, 0.0, 0.05];
        let m = ProcessModel::linear(a.clone(), gauss()).unwrap();
        for seed in 0..50 {
            let c = m.simulate_coupled(10, &mut substream(seed, &[3]));
            for k in 0..=10 {
                let ak = a.get(k).copied().unwrap_or(0.0);
                let gap = c.x[k] - c.x_star[k] - ak * (c.eps0 - c.eps0_star);
                assert!(gap.abs() < 1e-14, "k = {k}, gap {gap}");
            }
        }
    }

    #[test]
    fn iid_coupling_differs_only_at_zero() {
        let m = ProcessModel::iid(gauss()).unwrap();
        let c = m.simulate_coupled(6, &mut substream(1, &[3]));
        assert_ne!(c.x[0], c.x_star[0]);
        assert_eq!(c.x[1..], c.x_star[1..]);
    }

    #[test]
    fn tar_coupling_contracts() {
        let m = ProcessModel::tar(0.5, -0.5, gauss()).unwrap();
        for seed in 0..200 {
            let c = m.simulate_coupled(20, &mut substream(seed, &[4]));
            let d0 = (c.x[0] - c.x_star[0]).abs();
            for k in 1..=20 {
                let dk = (c.x[k] - c.x_star[k]).abs();
                // each step loses up to an ulp of |X| to cancellation
                assert!(dk <= 0.5f64.powi(k as i32) * d0 + 1e-14 * k as f64, "seed {seed}, k {k}");
            }
        }
    }

    #[test]
    fn coupled_marginals_agree() {
        let m = ProcessModel::tar(0.5, -0.3, gauss()).unwrap();
        let reps = 10_000;
        let (mut a, mut b) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
        for r in 0..reps {
            let c = m.simulate_coupled(3, &mut substream(11, &[r as u64]));
            a.push(c.x[3]);
            b.push(c.x_star[3]);
        }
        let d = stats::ks_two_sample(&a, &b);
        let crit = stats::ks_critical(0.01) * (2.0 / reps as f64).sqrt();
        assert!(d < crit, "D = {d}, critical {crit}");
    }

    #[test]
    fn path_halves_are_stationary() {
        let m = ProcessModel::tar(0.5, -0.3, gauss()).unwrap();
        let x = m.simulate_path(100_000, &mut substream(12, &[1]));
        let d = stats::ks_two_sample(&x[..50_000], &x[50_000..]);
        // dependence inflates the iid band; 0.1% level with margin
        assert!(d < 2.0 * stats::ks_critical(1e-3) * (2.0 / 50_000f64).sqrt());
    }

    #[test]
    fn conditional_laws() {
        let m = ProcessModel::iid(gauss()).unwrap();
        assert_eq!(m.conditional_cdf(0.7, 0.0).unwrap(), gauss().cdf(0.7).unwrap());
        let t = ProcessModel::tar(0.5, -0.3, gauss()).unwrap();
        assert_eq!(t.conditional_cdf(1.0, 1.0).unwrap(), 0.5);
        assert_relative_eq!(t.conditional_density_bound().unwrap(), 0.398_942_280_401_432_7, epsilon = 1e-15);
        for y in [-3.0, 0.0, 2.5] {
            assert_relative_eq!(t.conditional_density(y, y).unwrap(), 0.398_942_280_401_432_7, epsilon = 1e-15);
        }
        let s = ProcessModel::iid(InnovationDistribution::stable(1.5, 1.0).unwrap()).unwrap();
        assert!(matches!(s.conditional_cdf(0.0, 0.0), Err(Error::Capability(_))));
    }

    #[test]
    fn closed_marginals() {
        let m = ProcessModel::linear(vec![0.8, 0.6], gauss()).unwrap();
        match m.marginal_spec() {
            MarginalSpec::ClosedForm(ContinuousLaw::Gaussian { sd, .. }) => {
                assert_relative_eq!(*sd, 1.0, epsilon = 1e-15)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(m.marginal_cdf(0.0).unwrap(), 0.5);
        let u = ProcessModel::iid(InnovationDistribution::uniform(0.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(u.marginal_cdf(0.3).unwrap(), 0.3);
        let c = ProcessModel::linear_geometric(0.5, 20, InnovationDistribution::cauchy(0.0, 1.0).unwrap()).unwrap();
        match c.marginal_spec() {
            MarginalSpec::ClosedForm(ContinuousLaw::Cauchy { scale, .. }) => {
                assert_relative_eq!(*scale, (1.0 - 0.5f64.powi(20)) / 0.5, epsilon = 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.marginal_cdf(0.0).unwrap(), 0.5);
        let t = ProcessModel::tar(0.5, -0.3, gauss()).unwrap();
        assert!(matches!(t.marginal_spec(), MarginalSpec::MonteCarloReference { .. }));
    }

    #[test]
    fn reference_marginal_matches_closed_form() {
        let m = ProcessModel::linear(vec![0.8, 0.6], gauss())
            .unwrap()
            .with_reference(200_000, 3, None)
            .unwrap();
        let f = m.marginal().unwrap();
        let closed = ContinuousLaw::Gaussian { mean: 0.0, sd: 1.0 };
        for x in [-2.0, -0.5, 0.0, 1.3] {
            assert!((f.cdf(x) - closed.cdf(x)).abs() < 5.0 / 200_000f64.sqrt());
        }
    }

    #[test]
    fn reference_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.bin");
        let m = ProcessModel::tar(0.5, -0.3, gauss())
            .unwrap()
            .with_reference(10_000, 9, Some(path.clone()))
            .unwrap();
        let first = m.marginal().unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 8 + 8 * 10_000);
        assert_eq!(u64::from_le_bytes(bytes[..8].try_into().unwrap()), 10_000);
        let again = ProcessModel::tar(0.5, -0.3, gauss())
            .unwrap()
            .with_reference(10_000, 1234, Some(path))
            .unwrap();
        let loaded = again.marginal().unwrap();
        for x in [-1.0, 0.0, 0.4] {
            assert_eq!(first.cdf(x), loaded.cdf(x));
        }
    }

    #[test]
    fn rejects_bad_models() {
        assert!(ProcessModel::tar(1.0, 0.0, gauss()).is_err());
        assert!(ProcessModel::linear(vec![], gauss()).is_err());
        assert!(matches!(
            ProcessModel::recursive(RecursiveMap::Tanh { gain: 0.9 }, 0.5, gauss()),
            Err(Error::Config { ref key, .. }) if key == "rho"
        ));
        assert_eq!(default_burn_in(0.5), 87);
    }
}
