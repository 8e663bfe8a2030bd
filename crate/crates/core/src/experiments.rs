//! Monte Carlo experiments over an `n`-grid: the rate of `Δ_n(b_n)`, the
//! iid uniform calibration toward `√2`, and the trend of `sup|g_n*|/ι(n)`.
//!
//! Cell `(i, r)` (grid index `i`, replicate `r`) draws its path from
//! `substream(seed, [RATE_CELL, i, r])`. Cells run in parallel and are
//! collected in `(i, r)` order, so output does not depend on thread count.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{decompose, default_grid, martingale_modulus};
use crate::error::{Error, Result};
use crate::innovations::{ContinuousLaw, InnovationDistribution};
use crate::oscillation::{iota, oscillation_modulus, OscillationRecord, SortedSample};
use crate::process::{ProcessModel, DEFAULT_REFERENCE_SIZE, MAX_REFERENCE_SIZE};
use crate::rng::{substream, tags};
use crate::stats::{self, LineFit};

/// Slack on `b·sup|g_n*|` in the decomposition bound.
pub const SMOOTH_BOUND_SLACK: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum BandwidthRule {
    /// `b_n = n^{−eta}`
    PowerLaw { eta: f64 },
    /// One bandwidth per grid entry.
    Explicit { values: Vec<f64> },
    /// `b_n = 1/ln n`; results are informational only.
    InverseLog,
}

impl BandwidthRule {
    pub fn bandwidths(&self, n_grid: &[usize]) -> Result<Vec<f64>> {
        let b: Vec<f64> = match self {
            Self::PowerLaw { eta } => {
                if !(*eta > 0.0 && *eta < 1.0) {
                    return Err(Error::config("bandwidth.eta", format!("must lie in (0, 1), got {eta}")));
                }
                n_grid.iter().map(|&n| (n as f64).powf(-eta)).collect()
            }
            Self::Explicit { values } => {
                if values.len() != n_grid.len() {
                    return Err(Error::config(
                        "bandwidth.values",
                        format!("need one bandwidth per grid entry ({}), got {}", n_grid.len(), values.len()),
                    ));
                }
                values.clone()
            }
            Self::InverseLog => n_grid.iter().map(|&n| 1.0 / (n as f64).ln()).collect(),
        };
        if let Some(v) = b.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::config("bandwidth", format!("bandwidths must lie in (0, 1), got {v}")));
        }
        Ok(b)
    }

    pub fn informational(&self) -> bool {
        matches!(self, Self::InverseLog)
    }
}

/// Which optional computations a rate experiment performs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentChecks {
    /// `Δ_n°`, `b_n·sup|g_n*|` and the bound `Δ_n ≤ Δ_n° + b_n·sup|g_n*|`.
    pub decomposition: bool,
    /// Trend of `sup|g_n*|/ι(n)`.
    pub gstar_trend: bool,
    /// Largest allowed ratio of max to first median `Δ/√(b ln n)`.
    pub ratio_factor: f64,
    /// Allowed distance of the rate slope from 1.
    pub slope_tolerance: f64,
    /// Largest allowed slope of `log median sup|g*|/ι(n)` against `log n`.
    pub gstar_slope_max: f64,
    /// Band for the final median ratio in the calibration experiment.
    pub stute_band: (f64, f64),
    /// Required fraction of replicates that move toward `√2`; reported
    /// without a verdict when unset.
    pub stute_paired_fraction: Option<f64>,
}

impl Default for ExperimentChecks {
    fn default() -> Self {
        Self {
            decomposition: false,
            gstar_trend: false,
            ratio_factor: 3.0,
            slope_tolerance: 0.15,
            gstar_slope_max: 0.05,
            stute_band: (1.1, 1.75),
            stute_paired_fraction: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ProcessModel,
    pub n_grid: Vec<usize>,
    pub bandwidth: BandwidthRule,
    pub replicates: usize,
    pub seed: u64,
    pub checks: ExperimentChecks,
}

/// Size of a Monte Carlo reference marginal for samples up to `n_max`.
pub fn reference_size_for(n_max: usize) -> usize {
    DEFAULT_REFERENCE_SIZE.max(100 * n_max).min(MAX_REFERENCE_SIZE)
}

impl ExperimentConfig {
    /// Default checks; a Monte Carlo marginal is sized for the largest `n`
    /// and seeded from `seed`.
    pub fn new(model: ProcessModel, n_grid: Vec<usize>, bandwidth: BandwidthRule, replicates: usize, seed: u64) -> Result<Self> {
        let n_max = n_grid.iter().copied().max().unwrap_or(0);
        let model = model.with_reference_defaults(reference_size_for(n_max), seed)?;
        Ok(Self {
            model,
            n_grid,
            bandwidth,
            replicates,
            seed,
            checks: ExperimentChecks::default(),
        })
    }

    pub fn with_checks(mut self, checks: ExperimentChecks) -> Self {
        self.checks = checks;
        self
    }

    fn validate(&self) -> Result<Vec<f64>> {
        if self.n_grid.len() < 2 {
            return Err(Error::config("n_grid", "need at least two sample sizes"));
        }
        if let Some(n) = self.n_grid.iter().find(|n| !n.is_power_of_two() || **n < 4) {
            return Err(Error::config("n_grid", format!("entries must be powers of two ≥ 4, got {n}")));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config("n_grid", "must be strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be positive"));
        }
        let c = &self.checks;
        if !(c.ratio_factor >= 1.0) {
            return Err(Error::config("checks.ratio_factor", format!("must be at least 1, got {}", c.ratio_factor)));
        }
        if !(c.slope_tolerance >= 0.0) {
            return Err(Error::config("checks.slope_tolerance", "must be nonnegative"));
        }
        if !(c.stute_band.0 < c.stute_band.1) {
            return Err(Error::config("checks.stute_band", "lower end must be below upper end"));
        }
        if c.stute_paired_fraction.is_some_and(|f| !(0.0..=1.0).contains(&f)) {
            return Err(Error::config("checks.stute_paired_fraction", "must lie in [0, 1]"));
        }
        self.bandwidth.bandwidths(&self.n_grid)
    }
}

/// A bandwidth-regime condition evaluated along the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub name: String,
    pub passed: bool,
    /// The sequence whose trend is checked.
    pub values: Vec<f64>,
    pub detail: String,
}

fn strictly(values: &[f64], decreasing: bool) -> bool {
    values.windows(2).all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] })
}

/// `b_n → 0`, `n b_n → ∞` (as strict trends) and `n b_n / ln n`
/// non-decreasing.
pub fn rate_regime(n_grid: &[usize], b: &[f64]) -> Vec<RegimeCheck> {
    let nb: Vec<f64> = n_grid.iter().zip(b).map(|(&n, &b)| n as f64 * b).collect();
    let nb_log: Vec<f64> = n_grid.iter().zip(&nb).map(|(&n, &v)| v / (n as f64).ln()).collect();
    vec![
        RegimeCheck {
            name: "bandwidth_vanishes".into(),
            passed: strictly(b, true),
            values: b.to_vec(),
            detail: "b_n strictly decreasing".into(),
        },
        RegimeCheck {
            name: "window_count_grows".into(),
            passed: strictly(&nb, false),
            values: nb,
            detail: "n·b_n strictly increasing".into(),
        },
        RegimeCheck {
            name: "log_n_over_nb_bounded".into(),
            passed: nb_log.windows(2).all(|w| w[1] >= w[0]),
            values: nb_log,
            detail: "n·b_n/ln n non-decreasing".into(),
        },
    ]
}

/// `ln n/(n b_n) → 0` and `ln ln n/ln(1/b_n) → 0`, as strict decreasing trends.
pub fn stute_regime(n_grid: &[usize], b: &[f64]) -> Vec<RegimeCheck> {
    let r1: Vec<f64> = n_grid.iter().zip(b).map(|(&n, &b)| (n as f64).ln() / (n as f64 * b)).collect();
    let r2: Vec<f64> = n_grid
        .iter()
        .zip(b)
        .map(|(&n, &b)| (n as f64).ln().ln() / (1.0 / b).ln())
        .collect();
    vec![
        RegimeCheck {
            name: "log_n_small_vs_nb".into(),
            passed: strictly(&r1, true),
            values: r1,
            detail: "ln n/(n·b_n) strictly decreasing".into(),
        },
        RegimeCheck {
            name: "loglog_n_small_vs_log_inv_b".into(),
            passed: strictly(&r2, true),
            values: r2,
            detail: "ln ln n/ln(1/b_n) strictly decreasing".into(),
        },
    ]
}

fn require(checks: &[RegimeCheck]) -> Result<()> {
    match checks.iter().find(|c| !c.passed) {
        Some(c) => Err(Error::config(
            "bandwidth",
            format!("regime condition {} fails: {} does not hold on {:?}", c.name, c.detail, c.values),
        )),
        None => Ok(()),
    }
}

/// One `(n, replicate)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRecord {
    pub n_index: usize,
    pub rep: usize,
    #[serde(flatten)]
    pub osc: OscillationRecord,
    /// `Δ_n°`
    pub delta_circ: Option<f64>,
    pub delta_circ_error: Option<f64>,
    /// `sup|g_n*|` over the decomposition grid
    pub sup_gstar: Option<f64>,
    /// `sup|g_n*|/ι(n)`
    pub gstar_ratio: Option<f64>,
    /// `Δ_n ≤ Δ_n° + b_n·sup|g_n*|·(1 + slack)`, up to the stated error of `Δ_n°`.
    pub bound_holds: Option<bool>,
}

/// Medians and IQRs per grid entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub n: usize,
    pub b: f64,
    pub replicates: usize,
    pub median_delta: f64,
    pub median_ratio_sqrt: f64,
    pub iqr_ratio_sqrt: f64,
    pub median_ratio_stute: f64,
    pub iqr_ratio_stute: f64,
    pub median_ratio_iota: f64,
    pub iqr_ratio_iota: f64,
    pub median_gstar_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
    Informational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub outcome: Outcome,
    pub value: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, value: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            outcome: if passed { Outcome::Pass } else { Outcome::Fail },
            value,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendFit {
    pub name: String,
    #[serde(flatten)]
    pub fit: LineFit,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Rate,
    Stute,
    Gstar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub model: String,
    pub n_grid: Vec<usize>,
    pub bandwidths: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub regime: Vec<RegimeCheck>,
    /// `√(n/M)` per grid entry for a Monte Carlo marginal of size `M`, else 0:
    /// the order of the extra error in `Δ_n` from using the reference.
    pub marginal_error: Vec<f64>,
    pub records: Vec<RateRecord>,
    pub aggregates: Vec<Aggregate>,
    pub trends: Vec<TrendFit>,
    pub checks: Vec<CheckResult>,
    /// False when some optional computation was unavailable.
    pub complete: bool,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    /// Pass, unless some check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Per-`n` aggregates from raw records.
pub fn aggregate(records: &[RateRecord], n_grid: &[usize], b: &[f64]) -> Vec<Aggregate> {
    n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let cell: Vec<&RateRecord> = records.iter().filter(|r| r.n_index == i).collect();
            let col = |f: &dyn Fn(&RateRecord) -> f64| cell.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let rs = col(&|r| r.osc.ratio_sqrt);
            let rt = col(&|r| r.osc.ratio_stute);
            let ri = col(&|r| r.osc.ratio_iota);
            let g: Option<Vec<f64>> = cell.iter().map(|r| r.gstar_ratio).collect();
            Aggregate {
                n,
                b: b[i],
                replicates: cell.len(),
                median_delta: stats::median(&col(&|r| r.osc.delta)),
                median_ratio_sqrt: stats::median(&rs),
                iqr_ratio_sqrt: stats::iqr(&rs),
                median_ratio_stute: stats::median(&rt),
                iqr_ratio_stute: stats::iqr(&rt),
                median_ratio_iota: stats::median(&ri),
                iqr_ratio_iota: stats::iqr(&ri),
                median_gstar_ratio: g.filter(|g| !g.is_empty()).map(|g| stats::median(&g)),
            }
        })
        .collect()
}

fn fit(name: &str, x: Vec<f64>, y: Vec<f64>) -> TrendFit {
    TrendFit {
        name: name.into(),
        fit: stats::ols(&x, &y),
        x,
        y,
    }
}

fn is_uniform01(model: &ProcessModel) -> bool {
    model.is_iid() && model.innovation() == &InnovationDistribution::Uniform { lo: 0.0, hi: 1.0 }
}

/// Whether `G_n*` and `Δ_n°` can be computed for this model.
pub fn supports_decomposition(model: &ProcessModel) -> std::result::Result<(), String> {
    if !model.marginal_spec().is_closed() {
        return Err(format!("{} has no closed-form marginal", model.label()));
    }
    if model.is_iid() {
        return Ok(());
    }
    match model.step_law() {
        Ok(ContinuousLaw::Cauchy { .. }) => Err("heavy-tailed step law".into()),
        Ok(_) => Ok(()),
        Err(e) => Err(e.to_string()),
    }
}

fn run_cell(cfg: &ExperimentConfig, i: usize, rep: usize, b: f64, decomp: bool) -> Result<RateRecord> {
    let n = cfg.n_grid[i];
    let mut rng = substream(cfg.seed, &[tags::RATE_CELL, i as u64, rep as u64]);
    let marginal = cfg.model.marginal()?;
    let mut record = RateRecord {
        n_index: i,
        rep,
        osc: OscillationRecord::new(n, b, 0.0),
        delta_circ: None,
        delta_circ_error: None,
        sup_gstar: None,
        gstar_ratio: None,
        bound_holds: None,
    };
    if !decomp {
        let x = cfg.model.simulate_path(n, &mut rng);
        let delta = oscillation_modulus(&SortedSample::new(x)?, b, marginal.as_ref())?;
        record.osc = OscillationRecord::new(n, b, delta);
        return Ok(record);
    }
    let path = cfg.model.simulate_path_with_states(n, &mut rng);
    let delta = oscillation_modulus(&SortedSample::new(path.x.clone())?, b, marginal.as_ref())?;
    record.osc = OscillationRecord::new(n, b, delta);
    let grid = default_grid(&cfg.model, &path.y)?;
    let d = decompose(&path, &cfg.model, &grid)?;
    record.sup_gstar = Some(d.sup_gstar_deriv);
    record.gstar_ratio = Some(d.sup_gstar_deriv / iota(n as f64));
    if cfg.checks.decomposition {
        let m = martingale_modulus(&path, &cfg.model, b)?;
        record.delta_circ = Some(m.delta);
        record.delta_circ_error = Some(m.error_bound);
        let smooth = b * d.sup_gstar_deriv * (1.0 + SMOOTH_BOUND_SLACK);
        record.bound_holds = Some(delta <= m.delta + smooth + m.error_bound);
    }
    Ok(record)
}

fn run_cells(cfg: &ExperimentConfig, b: &[f64], decomp: bool) -> Result<Vec<RateRecord>> {
    // build a Monte Carlo marginal once, before the workers need it
    cfg.model.marginal()?;
    let cells: Vec<(usize, usize)> = (0..cfg.n_grid.len())
        .flat_map(|i| (0..cfg.replicates).map(move |r| (i, r)))
        .collect();
    cells
        .into_par_iter()
        .map(|(i, r)| run_cell(cfg, i, r, b[i], decomp))
        .collect()
}

fn gstar_checks(cfg: &ExperimentConfig, aggs: &[Aggregate], trends: &mut Vec<TrendFit>, checks: &mut Vec<CheckResult>) {
    let med: Vec<f64> = aggs.iter().filter_map(|a| a.median_gstar_ratio).collect();
    if med.len() != aggs.len() {
        return;
    }
    let max_slope = cfg.checks.gstar_slope_max;
    if med.iter().all(|&m| m == 0.0) {
        checks.push(CheckResult::new("gstar_trend", true, 0.0, "sup|g*| vanishes identically".into()));
        return;
    }
    if med.iter().any(|&m| m <= 0.0) {
        checks.push(CheckResult {
            name: "gstar_trend".into(),
            outcome: Outcome::Inconclusive,
            value: f64::NAN,
            detail: "some medians are zero; log-log fit undefined".into(),
        });
        return;
    }
    let t = fit(
        "log_gstar_ratio_vs_log_n",
        cfg.n_grid.iter().map(|&n| (n as f64).ln()).collect(),
        med.iter().map(|m| m.ln()).collect(),
    );
    let slope = t.fit.slope;
    trends.push(t);
    checks.push(CheckResult::new(
        "gstar_trend",
        slope <= max_slope,
        slope,
        format!("slope of log median sup|g*|/ι(n) vs log n must be ≤ {max_slope}"),
    ));
}

fn marginal_error(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let m = cfg.model.marginal()?.reference_size();
    Ok(cfg
        .n_grid
        .iter()
        .map(|&n| m.map_or(0.0, |m| (n as f64 / m as f64).sqrt()))
        .collect())
}

fn decomposition_plan(cfg: &ExperimentConfig, notes: &mut Vec<String>) -> Result<bool> {
    let wanted = cfg.checks.decomposition || cfg.checks.gstar_trend;
    if !wanted {
        return Ok(false);
    }
    match supports_decomposition(&cfg.model) {
        Ok(()) => Ok(true),
        Err(why) => {
            notes.push(format!("decomposition skipped: {why}"));
            Ok(false)
        }
    }
}

/// `Δ_n(b_n)` and its normalisations on every cell, with optional
/// decomposition quantities, aggregates and trend checks.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let b = cfg.validate()?;
    let regime = rate_regime(&cfg.n_grid, &b);
    require(&regime)?;
    let mut notes = Vec::new();
    let decomp = decomposition_plan(cfg, &mut notes)?;
    let records = run_cells(cfg, &b, decomp)?;
    let aggregates = aggregate(&records, &cfg.n_grid, &b);

    let mut trends = Vec::new();
    let mut checks = Vec::new();
    let first = aggregates[0].median_ratio_sqrt;
    let max = aggregates.iter().map(|a| a.median_ratio_sqrt).fold(f64::MIN, f64::max);
    let factor = cfg.checks.ratio_factor;
    checks.push(CheckResult::new(
        "ratio_bounded",
        max <= factor * first,
        max / first,
        format!("max median Δ/√(b ln n) over the grid must be ≤ {factor}× the first"),
    ));
    let t = fit(
        "log_median_delta_vs_log_rate",
        aggregates.iter().map(|a| (a.b * (a.n as f64).ln()).sqrt().ln()).collect(),
        aggregates.iter().map(|a| a.median_delta.ln()).collect(),
    );
    let slope = t.fit.slope;
    trends.push(t);
    let tol = cfg.checks.slope_tolerance;
    checks.push(CheckResult::new(
        "rate_slope",
        (slope - 1.0).abs() <= tol,
        slope,
        format!("slope of log median Δ vs log √(b ln n) must be within 1 ± {tol}"),
    ));
    if decomp && cfg.checks.decomposition {
        let bad = records.iter().filter(|r| r.bound_holds == Some(false)).count();
        checks.push(CheckResult::new(
            "decomposition_bound",
            bad == 0,
            bad as f64,
            "records violating Δ ≤ Δ° + b·sup|g*|·1.01".into(),
        ));
    }
    if decomp && cfg.checks.gstar_trend {
        gstar_checks(cfg, &aggregates, &mut trends, &mut checks);
    }
    if cfg.bandwidth.informational() {
        notes.push("b_n = 1/ln n: verdicts are informational".into());
        for c in &mut checks {
            c.outcome = Outcome::Informational;
        }
    }
    let complete = !(cfg.checks.decomposition || cfg.checks.gstar_trend) || decomp;
    Ok(ExperimentReport {
        kind: ExperimentKind::Rate,
        model: cfg.model.label(),
        n_grid: cfg.n_grid.clone(),
        bandwidths: b,
        replicates: cfg.replicates,
        seed: cfg.seed,
        regime,
        marginal_error: marginal_error(cfg)?,
        records,
        aggregates,
        trends,
        checks,
        complete,
        notes,
    })
}

/// Iid `U(0,1)` only: `Δ_n(b_n)/√(b_n ln(1/b_n))` along the grid against
/// its limit `√2`.
pub fn run_stute_calibration(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !is_uniform01(&cfg.model) {
        return Err(Error::config(
            "model",
            format!("calibration needs iid uniform(0, 1) data, got {}", cfg.model.label()),
        ));
    }
    let b = cfg.validate()?;
    let mut regime = rate_regime(&cfg.n_grid, &b);
    regime.extend(stute_regime(&cfg.n_grid, &b));
    require(&regime)?;
    let records = run_cells(cfg, &b, false)?;
    let aggregates = aggregate(&records, &cfg.n_grid, &b);
    let (lo, hi) = cfg.checks.stute_band;
    let first = &aggregates[0];
    let last = aggregates.last().unwrap();
    let gap = |m: f64| (m - SQRT_2).abs();
    let mut checks = vec![
        CheckResult::new(
            "stute_band",
            (lo..=hi).contains(&last.median_ratio_stute),
            last.median_ratio_stute,
            format!("median ratio at n = {} must lie in [{lo}, {hi}]", last.n),
        ),
        CheckResult::new(
            "stute_closer",
            gap(last.median_ratio_stute) < gap(first.median_ratio_stute),
            gap(first.median_ratio_stute) - gap(last.median_ratio_stute),
            format!("median at n = {} must be strictly closer to √2 than at n = {}", last.n, first.n),
        ),
    ];
    let last_i = cfg.n_grid.len() - 1;
    let closer = (0..cfg.replicates)
        .filter(|&r| {
            let at = |i: usize| records[i * cfg.replicates + r].osc.ratio_stute;
            gap(at(last_i)) < gap(at(0))
        })
        .count() as f64
        / cfg.replicates as f64;
    let what = format!("fraction of replicates closer to √2 at n = {} than at n = {}", last.n, first.n);
    checks.push(match cfg.checks.stute_paired_fraction {
        Some(need) => CheckResult::new("stute_paired", closer >= need, closer, format!("{what} must be ≥ {need}")),
        None => CheckResult {
            name: "stute_paired".into(),
            outcome: Outcome::Informational,
            value: closer,
            detail: what,
        },
    });
    let positive = records.iter().all(|r| r.osc.ratio_stute > 0.0);
    checks.push(CheckResult::new("ratio_positive", positive, positive as u8 as f64, "all ratios > 0".into()));
    let trends = vec![fit(
        "median_ratio_stute_gap_vs_log_n",
        cfg.n_grid.iter().map(|&n| (n as f64).ln()).collect(),
        aggregates.iter().map(|a| gap(a.median_ratio_stute)).collect(),
    )];
    Ok(ExperimentReport {
        kind: ExperimentKind::Stute,
        model: cfg.model.label(),
        n_grid: cfg.n_grid.clone(),
        bandwidths: b,
        replicates: cfg.replicates,
        seed: cfg.seed,
        regime,
        marginal_error: marginal_error(cfg)?,
        records,
        aggregates,
        trends,
        checks,
        complete: true,
        notes: Vec::new(),
    })
}

/// Trend of `sup|g_n*|/ι(n)`; refuses models without a decomposition.
pub fn run_gstar_trend(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    supports_decomposition(&cfg.model).map_err(|why| Error::capability(format!("sup|g*| trend unavailable: {why}")))?;
    let mut cfg = cfg.clone();
    cfg.checks.gstar_trend = true;
    cfg.checks.decomposition = false;
    let mut report = run_rate_experiment(&cfg)?;
    report.kind = ExperimentKind::Gstar;
    report.checks.retain(|c| c.name == "gstar_trend");
    report.trends.retain(|t| t.name == "log_gstar_ratio_vs_log_n");
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> ProcessModel {
        ProcessModel::iid(InnovationDistribution::uniform(0.0, 1.0).unwrap()).unwrap()
    }

    fn cfg(model: ProcessModel, grid: Vec<usize>, reps: usize) -> ExperimentConfig {
        ExperimentConfig::new(model, grid, BandwidthRule::PowerLaw { eta: 0.5 }, reps, 11).unwrap()
    }

    #[test]
    fn regime_checks() {
        let grid = [1 << 10, 1 << 12, 1 << 14];
        let b = BandwidthRule::PowerLaw { eta: 0.5 }.bandwidths(&grid).unwrap();
        assert!(rate_regime(&grid, &b).iter().all(|c| c.passed));
        assert!(stute_regime(&grid, &b).iter().all(|c| c.passed));
        let b = BandwidthRule::InverseLog.bandwidths(&grid).unwrap();
        assert!(rate_regime(&grid, &b).iter().all(|c| c.passed));
        let s = stute_regime(&grid, &b);
        assert!(!s[1].passed);
        let c = ExperimentConfig::new(uniform(), grid.to_vec(), BandwidthRule::InverseLog, 2, 1).unwrap();
        assert!(matches!(run_stute_calibration(&c), Err(Error::Config { .. })));
        let b = BandwidthRule::Explicit { values: vec![0.1, 0.1, 0.1] }.bandwidths(&grid).unwrap();
        assert!(!rate_regime(&grid, &b)[0].passed);
    }

    #[test]
    fn rejects_bad_configs() {
        for grid in [vec![1 << 10], vec![1000, 2000], vec![1 << 12, 1 << 10]] {
            let c = cfg(uniform(), grid, 2);
            assert!(matches!(run_rate_experiment(&c), Err(Error::Config { key, .. }) if key == "n_grid"));
        }
        let rule = BandwidthRule::Explicit { values: vec![0.1] };
        let c = ExperimentConfig::new(uniform(), vec![16, 32], rule, 2, 1).unwrap();
        assert!(matches!(run_rate_experiment(&c), Err(Error::Config { key, .. }) if key == "bandwidth.values"));
        let g = ProcessModel::iid(InnovationDistribution::standard_gaussian()).unwrap();
        assert!(matches!(
            run_stute_calibration(&cfg(g, vec![16, 32], 2)),
            Err(Error::Config { key, .. }) if key == "model"
        ));
    }

    #[test]
    fn aggregates_recompute_from_records() {
        let c = cfg(uniform(), vec![1 << 8, 1 << 10, 1 << 12], 7);
        let r = run_rate_experiment(&c).unwrap();
        assert_eq!(r.records.len(), 21);
        assert_eq!(aggregate(&r.records, &r.n_grid, &r.bandwidths), r.aggregates);
        assert!(r.records.iter().all(|x| x.osc.delta > 0.0 && x.delta_circ.is_none()));
        assert!(r.complete);
    }

    #[test]
    fn decomposition_records() {
        let m = ProcessModel::linear_geometric(0.5, 20, InnovationDistribution::standard_gaussian()).unwrap();
        let checks = ExperimentChecks {
            decomposition: true,
            gstar_trend: true,
            ..Default::default()
        };
        let c = cfg(m, vec![1 << 8, 1 << 10], 4).with_checks(checks);
        let r = run_rate_experiment(&c).unwrap();
        assert!(r.records.iter().all(|x| x.bound_holds == Some(true)));
        assert_eq!(r.check("decomposition_bound").unwrap().outcome, Outcome::Pass);
        assert!(r.check("gstar_trend").is_some());

        let iid = ProcessModel::iid(InnovationDistribution::standard_gaussian()).unwrap();
        let g = run_gstar_trend(&cfg(iid, vec![1 << 8, 1 << 10], 3)).unwrap();
        assert!(g.records.iter().all(|x| x.sup_gstar == Some(0.0)));
        assert_eq!(g.checks[0].outcome, Outcome::Pass);

        let tar = ProcessModel::tar(0.5, -0.3, InnovationDistribution::standard_gaussian()).unwrap();
        assert!(matches!(run_gstar_trend(&cfg(tar, vec![16, 32], 2)), Err(Error::Capability(_))));
    }

    #[test]
    fn skipped_decomposition_marks_report_incomplete() {
        let m = ProcessModel::tar(0.5, -0.3, InnovationDistribution::standard_gaussian())
            .unwrap()
            .with_reference(100_000, 3, None)
            .unwrap();
        let checks = ExperimentChecks {
            decomposition: true,
            ..Default::default()
        };
        let c = ExperimentConfig {
            model: m,
            n_grid: vec![64, 128],
            bandwidth: BandwidthRule::PowerLaw { eta: 0.5 },
            replicates: 2,
            seed: 1,
            checks,
        };
        let r = run_rate_experiment(&c).unwrap();
        assert!(!r.complete);
        assert_eq!(r.records.len(), 4);
        assert!(r.check("decomposition_bound").is_none());
    }

    #[test]
    fn inverse_log_is_informational() {
        let c = ExperimentConfig::new(uniform(), vec![1 << 8, 1 << 10], BandwidthRule::InverseLog, 3, 2).unwrap();
        let r = run_rate_experiment(&c).unwrap();
        assert!(r.checks.iter().all(|c| c.outcome == Outcome::Informational));
    }
}
