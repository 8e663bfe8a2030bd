//! Empirical distribution functions and the exact oscillation modulus
//! `Δ_n(b) = sup_{|x−y|≤b} |G_n(x) − G_n(y)|`, `G_n = √n(F_n − F)`.
//!
//! Let `z_1 < … < z_m` be the distinct atoms and `S_j = F_n(z_j)`. With
//! `F` continuous and non-decreasing, `G_n` decreases between atoms and
//! jumps up at them, which reduces the supremum to three finite families:
//!
//! * upward differences, `x ↑ z_i`, `y = z_j`, `z_j − z_i < b`:
//!   `(S_j − F(z_j)) − (S_{i−1} − F(z_i))`;
//! * downward differences on a short gap, `x = z_i`, `y ↑ z_j`,
//!   `z_j − z_i ≤ b`: `(F(z_j) − S_{j−1}) − (F(z_i) − S_i)`;
//! * downward differences over a full window `(x, x + b]`. The events
//!   `{z_i} ∪ {z_i − b}` cut the line into segments on which the window
//!   count `C` is constant, and the segment contributes
//!   `sup_x [F(x + b) − F(x)] − C/n` over its closure.
//!
//! The first two are sliding-window extrema (monotone deques, `O(m)`), the
//! third needs the window-mass query of [`Cdf::max_increment`], which is
//! skipped whenever the cheap bound `F(e_{k+1} + b) − F(e_k) − C/n` cannot
//! beat the running maximum.
//!
//! Segments reach to `±∞`: when the sample sits in one tail of `F`, the
//! largest window mass can lie outside `[z_1 − b, z_m + b]`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::cdf::Cdf;
use crate::error::{Error, Result};

/// `ι(n) = (ln n)^{1/2} ln ln n`.
pub fn iota(n: f64) -> f64 {
    n.ln().sqrt() * n.ln().ln()
}

/// Order statistics of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("sample", "sample is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(format!("sample[{i}]"), "values must be finite"));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Distinct atoms with multiplicities.
    pub fn atoms(&self) -> (Vec<f64>, Vec<usize>) {
        let mut z: Vec<f64> = Vec::with_capacity(self.values.len());
        let mut c: Vec<usize> = Vec::with_capacity(self.values.len());
        for &v in &self.values {
            if z.last() == Some(&v) {
                *c.last_mut().unwrap() += 1;
            } else {
                z.push(v);
                c.push(1);
            }
        }
        (z, c)
    }

    pub fn max_multiplicity(&self) -> usize {
        self.atoms().1.into_iter().max().unwrap_or(0)
    }

    /// `F_n(x) = #{X_i ≤ x}/n`.
    pub fn edf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.n() as f64
    }

    /// `F_n(x−) = #{X_i < x}/n`.
    pub fn edf_left(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v < x) as f64 / self.n() as f64
    }
}

/// `F_n(x)`; see [`SortedSample::edf`].
pub fn edf_eval(s: &SortedSample, x: f64) -> f64 {
    s.edf(x)
}

fn check_bandwidth(b: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::config("b", format!("bandwidth must be positive and finite, got {b}")));
    }
    Ok(())
}

fn check_monotone(values: &[f64], what: &str) -> Result<()> {
    for (i, w) in values.windows(2).enumerate() {
        if w[1] < w[0] - 1e-13 {
            return Err(Error::Contract(format!(
                "F is not non-decreasing at {what} {i}: {} then {}",
                w[0], w[1]
            )));
        }
    }
    if let Some(v) = values.iter().find(|v| !(-1e-13..=1.0 + 1e-13).contains(*v)) {
        return Err(Error::Contract(format!("F takes value {v} outside [0, 1]")));
    }
    Ok(())
}

/// Sliding minimum over indices whose key has not left the window.
struct MinDeque {
    q: VecDeque<(usize, f64)>,
}

impl MinDeque {
    fn new() -> Self {
        Self { q: VecDeque::new() }
    }
    fn push(&mut self, i: usize, v: f64) {
        while self.q.back().is_some_and(|&(_, u)| u >= v) {
            self.q.pop_back();
        }
        self.q.push_back((i, v));
    }
    fn evict(&mut self, keep: impl Fn(usize) -> bool) {
        while self.q.front().is_some_and(|&(i, _)| !keep(i)) {
            self.q.pop_front();
        }
    }
    fn min(&self) -> Option<f64> {
        self.q.front().map(|&(_, v)| v)
    }
}

/// The three sub-suprema of `Δ_n(b)/√n`, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusParts {
    pub upward: f64,
    pub short_gap: f64,
    pub window: f64,
    /// Number of window-mass queries that survived pruning.
    pub window_queries: usize,
}

/// Exact `Δ_n(b)` for a continuous non-decreasing `F`.
pub fn oscillation_modulus(s: &SortedSample, b: f64, f: &impl Cdf) -> Result<f64> {
    let parts = oscillation_modulus_parts(s, b, f)?;
    let sup = parts.upward.max(parts.short_gap).max(parts.window).max(0.0);
    Ok((s.n() as f64).sqrt() * sup)
}

pub fn oscillation_modulus_parts(s: &SortedSample, b: f64, f: &impl Cdf) -> Result<ModulusParts> {
    check_bandwidth(b)?;
    let n = s.n() as f64;
    let (z, counts) = s.atoms();
    let m = z.len();
    // cum[r] = number of observations among the first r atoms
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0usize);
    for c in &counts {
        cum.push(cum.last().unwrap() + c);
    }
    let frac = |r: usize| cum[r] as f64 / n;

    let fz = f.cdf_sorted(&z);
    check_monotone(&fz, "atom")?;
    let zm: Vec<f64> = z.iter().map(|v| v - b).collect();
    let zp: Vec<f64> = z.iter().map(|v| v + b).collect();
    let fzm = f.cdf_sorted(&zm);
    let fzp = f.cdf_sorted(&zp);
    check_monotone(&fzm, "shifted atom")?;
    check_monotone(&fzp, "shifted atom")?;

    // Upward: j fixed, i ≤ j with z_j − z_i < b, minimise S_{i−1} − F(z_i).
    let mut upward = f64::NEG_INFINITY;
    let mut dq = MinDeque::new();
    for j in 0..m {
        dq.push(j, frac(j) - fz[j]);
        dq.evict(|i| z[j] - z[i] < b);
        upward = upward.max(frac(j + 1) - fz[j] - dq.min().unwrap());
    }

    // Short gap: i < j with z_j − z_i ≤ b, minimise F(z_i) − S_i.
    let mut short_gap = f64::NEG_INFINITY;
    let mut dq = MinDeque::new();
    for j in 0..m {
        dq.evict(|i| z[j] - z[i] <= b);
        if let Some(lo) = dq.min() {
            short_gap = short_gap.max(fz[j] - frac(j) - lo);
        }
        dq.push(j, fz[j] - frac(j + 1));
    }

    // Windows: merge shifted events (z_j − b) and atom events (z_i); on ties
    // the shifted event goes first, which gives the zero-length segment the
    // larger count.
    #[derive(Clone, Copy)]
    struct Event {
        x: f64,
        // F(x) and F(x + b)
        fx: f64,
        fxb: f64,
    }
    let mut best = upward.max(short_gap).max(0.0);
    let mut window = f64::NEG_INFINITY;
    let mut queries = 0usize;
    let (mut p, mut q) = (0usize, 0usize); // atoms passed, shifted events passed
    let mut prev: Option<Event> = None;
    loop {
        let next = if q < m && (p >= m || zm[q] <= z[p]) {
            let e = Event {
                x: zm[q],
                fx: fzm[q],
                fxb: fz[q],
            };
            q += 1;
            Some((e, true))
        } else if p < m {
            let e = Event {
                x: z[p],
                fx: fz[p],
                fxb: fzp[p],
            };
            p += 1;
            Some((e, false))
        } else {
            None
        };
        // Count on the open segment before `next`: passed shifted events
        // minus passed atoms, excluding the event just consumed.
        let (pp, qq) = match next {
            Some((_, true)) => (p, q - 1),
            Some((_, false)) => (p - 1, q),
            None => (p, q),
        };
        let count = (cum[qq] - cum[pp]) as f64 / n;
        let (lo, hi) = (prev, next.map(|(e, _)| e));
        let (lo_x, lo_fx) = lo.map_or((f64::NEG_INFINITY, 0.0), |e| (e.x, e.fx));
        let hi_x = hi.map_or(f64::INFINITY, |e| e.x);
        let hi_fxb = hi.map_or(1.0, |e| e.fxb);
        let mut seg = f64::NEG_INFINITY;
        if let Some(e) = lo {
            seg = seg.max(e.fxb - e.fx);
        }
        if let Some(e) = hi {
            seg = seg.max(e.fxb - e.fx);
        }
        let upper = hi_fxb - lo_fx;
        if upper - count > best.max(seg - count) {
            queries += 1;
            seg = seg.max(f.max_increment(lo_x, hi_x, b));
        }
        let v = seg - count;
        window = window.max(v);
        best = best.max(v);
        match next {
            Some((e, _)) => prev = Some(e),
            None => break,
        }
    }

    Ok(ModulusParts {
        upward,
        short_gap,
        window,
        window_queries: queries,
    })
}

/// Grid-based lower bound on `Δ_n(b)` over `[lo, hi]`.
///
/// The grid of spacing `grid_step` is augmented with every atom and every
/// atom `± b`; at each point both `G_n(x)` and the left limit `G_n(x−)` are
/// used. A left limit at `x` pairs only with points at distance `< b`.
/// The result misses the exact value by at most `2√n·f_sup·grid_step`.
pub fn oscillation_modulus_bruteforce(
    s: &SortedSample,
    b: f64,
    f: &impl Cdf,
    grid_step: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    check_bandwidth(b)?;
    if !(grid_step > 0.0) {
        return Err(Error::config("grid_step", "must be positive"));
    }
    let n = s.n() as f64;
    let steps = ((hi - lo) / grid_step).ceil() as usize;
    let mut pts: Vec<f64> = (0..=steps).map(|i| lo + grid_step * i as f64).collect();
    for &v in s.values() {
        pts.extend([v, v - b, v + b]);
    }
    pts.sort_unstable_by(f64::total_cmp);
    pts.dedup();
    let fx = f.cdf_sorted(&pts);
    let sq = n.sqrt();
    let right: Vec<f64> = pts.iter().zip(&fx).map(|(&x, &v)| sq * (s.edf(x) - v)).collect();
    let left: Vec<f64> = pts.iter().zip(&fx).map(|(&x, &v)| sq * (s.edf_left(x) - v)).collect();

    let mut best: f64 = 0.0;
    // deques over earlier points: (max, min) of right values within ≤ b,
    // of left values within < b
    let mut rmax: VecDeque<usize> = VecDeque::new();
    let mut rmin: VecDeque<usize> = VecDeque::new();
    let mut lmax: VecDeque<usize> = VecDeque::new();
    let mut lmin: VecDeque<usize> = VecDeque::new();
    for j in 0..pts.len() {
        let (r, l) = (right[j], left[j]);
        best = best.max((r - l).abs());
        for (dq, vals, strict, is_max) in [
            (&mut rmax, &right, false, true),
            (&mut rmin, &right, false, false),
            (&mut lmax, &left, true, true),
            (&mut lmin, &left, true, false),
        ] {
            while let Some(&i) = dq.front() {
                let d = pts[j] - pts[i];
                if d > b || (strict && d >= b) {
                    dq.pop_front();
                } else {
                    break;
                }
            }
            if let Some(&i) = dq.front() {
                let v = vals[i];
                let cand = if is_max { (v - r).max(v - l) } else { (r - v).max(l - v) };
                best = best.max(cand);
            }
        }
        for (dq, vals, is_max) in [(&mut rmax, &right, true), (&mut rmin, &right, false), (&mut lmax, &left, true), (&mut lmin, &left, false)] {
            while let Some(&i) = dq.back() {
                if (is_max && vals[i] <= vals[j]) || (!is_max && vals[i] >= vals[j]) {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(j);
        }
    }
    Ok(best)
}

/// One replicate's modulus and its normalisations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationRecord {
    pub n: usize,
    pub b: f64,
    pub delta: f64,
    /// `√(b ln n)`
    pub rate_sqrt: f64,
    /// `√(b ln(1/b))`
    pub rate_stute: f64,
    /// `b·ι(n)`
    pub rate_iota: f64,
    pub ratio_sqrt: f64,
    pub ratio_stute: f64,
    pub ratio_iota: f64,
}

impl OscillationRecord {
    pub fn new(n: usize, b: f64, delta: f64) -> Self {
        let nf = n as f64;
        let rate_sqrt = (b * nf.ln()).sqrt();
        let rate_stute = (b * (1.0 / b).ln()).sqrt();
        let rate_iota = b * iota(nf);
        Self {
            n,
            b,
            delta,
            rate_sqrt,
            rate_stute,
            rate_iota,
            ratio_sqrt: delta / rate_sqrt,
            ratio_stute: delta / rate_stute,
            ratio_iota: delta / rate_iota,
        }
    }
}
