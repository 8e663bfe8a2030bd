//! The `oscillab` command line.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
//! 3 unsupported capability.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, ConditionsSpec};
use crate::dependence::{cf_term_series, pdm_summability, Verdict};
use crate::error::{Error, Result};
use crate::experiments::{run_rate_experiment, run_stute_calibration, CheckResult, ExperimentReport, Outcome};
use crate::innovations::{cf_integrability, parseval_check, InnovationDistribution};
use crate::oscillation::{oscillation_modulus, oscillation_modulus_bruteforce, OscillationRecord, SortedSample};
use crate::quadrature::Finiteness;
use crate::report::{self, fmt_f64, Manifest, OutputDir, Table};
use crate::rng::{substream, tags};

#[derive(Debug, Parser)]
#[command(name = "oscillab", version, about = "Oscillation moduli of empirical processes for dependent data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Output directory, created if absent.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Override the configured master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; never changes output bytes.
    #[arg(long, env = "OSCILLAB_THREADS")]
    pub threads: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
    /// Repeat for more progress output on stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path of the configured model.
    Simulate(Common),
    /// Exact oscillation modulus of a given or simulated sample.
    Oscillate(Common),
    /// Physical dependence measures and characteristic-function terms.
    Dependence(Common),
    /// Rate experiment over an n-grid.
    Rate(Common),
    /// Iid uniform calibration toward √2.
    Stute(Common),
    /// CF integrability, Parseval and density conditions of the innovation law.
    CheckConditions(Common),
    /// Closed-form sanity checks.
    Selftest {
        /// Also write verdict.json here.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capability(_) => 3,
        _ => 2,
    }
}

fn print_checks(checks: &[CheckResult]) {
    for c in checks {
        let tag = match c.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Inconclusive => "INCONCLUSIVE",
            Outcome::Informational => "INFO",
        };
        println!("{tag:<12} {:<28} {:<22} {}", c.name, fmt_f64(c.value), c.detail);
    }
}

fn status(checks: &[CheckResult]) -> u8 {
    if checks.iter().any(|c| c.outcome == Outcome::Fail) {
        1
    } else {
        0
    }
}

struct Run {
    cfg: Config,
    out: OutputDir,
    manifest: Manifest,
    verbose: u8,
    start: Instant,
}

impl Run {
    fn open(name: &str, c: &Common, files: &[&str]) -> Result<Self> {
        let bytes = std::fs::read(&c.config)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", c.config.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| Error::config("--config", "not UTF-8"))?;
        let mut cfg = Config::from_json(&text)?;
        if let Some(s) = c.seed {
            cfg.seed = s;
        }
        let out = OutputDir::create(&c.out, c.force)?;
        out.claim(files)?;
        out.claim(&[report::MANIFEST, report::VERDICT])?;
        let threads = rayon::current_num_threads();
        let manifest = Manifest::new(name, Some((c.config.as_path(), &bytes)), cfg.seed, threads);
        Ok(Self {
            cfg,
            out,
            manifest,
            verbose: c.verbose,
            start: Instant::now(),
        })
    }

    fn log(&self, msg: &str) {
        if self.verbose > 0 {
            eprintln!("[{:8.2}s] {msg}", self.start.elapsed().as_secs_f64());
        }
    }

    fn csv(&mut self, name: &str, t: &Table) -> Result<()> {
        self.out.write_csv(name, t)?;
        self.manifest.outputs.push(name.into());
        Ok(())
    }

    fn finish(&mut self, checks: &[CheckResult]) -> Result<u8> {
        self.out.write_json(report::VERDICT, &report::verdict_json(checks))?;
        self.manifest.outputs.push(report::VERDICT.into());
        self.manifest.outputs.push(report::MANIFEST.into());
        self.manifest.wall_time_s = self.start.elapsed().as_secs_f64();
        self.out.write_json(report::MANIFEST, &self.manifest)?;
        print_checks(checks);
        Ok(status(checks))
    }
}

fn simulate(c: &Common) -> Result<u8> {
    let mut run = Run::open("simulate", c, &[report::RAW, report::AGGREGATE, "plot_path.csv"])?;
    let spec = run.cfg.section("simulate", &run.cfg.simulate)?.clone();
    if spec.n == 0 {
        return Err(Error::config("simulate.n", "must be positive"));
    }
    let model = run.cfg.model.build()?;
    let mut rng = substream(run.cfg.seed, &[tags::PATH]);
    let path = model.simulate_path_with_states(spec.n, &mut rng);
    let mut raw = Table::new(if spec.states { &["k", "x", "y", "eps"] } else { &["k", "x"] });
    for k in 0..spec.n {
        let mut row = vec![(k + 1).to_string(), fmt_f64(path.x[k])];
        if spec.states {
            row.push(fmt_f64(path.y[k]));
            row.push(fmt_f64(path.eps[k]));
        }
        raw.push(row);
    }
    run.csv(report::RAW, &raw)?;
    let x = &path.x;
    let mut agg = Table::new(&["n", "mean", "variance", "lag1_autocorrelation", "min", "max"]);
    agg.push(vec![
        spec.n.to_string(),
        fmt_f64(crate::stats::mean(x)),
        fmt_f64(if spec.n > 1 { crate::stats::variance(x) } else { f64::NAN }),
        fmt_f64(if spec.n > 2 { crate::stats::lag1_autocorrelation(x) } else { f64::NAN }),
        fmt_f64(x.iter().copied().fold(f64::INFINITY, f64::min)),
        fmt_f64(x.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    ]);
    run.csv(report::AGGREGATE, &agg)?;
    let k: Vec<f64> = (1..=spec.n).map(|k| k as f64).collect();
    run.csv("plot_path.csv", &Table::xy(&k, x))?;
    println!("simulated {} values of {}", spec.n, model.label());
    run.finish(&[])
}

fn oscillate(c: &Common) -> Result<u8> {
    let mut run = Run::open("oscillate", c, &[report::RAW, report::AGGREGATE, "plot_modulus.csv"])?;
    let spec = run.cfg.section("oscillate", &run.cfg.oscillate)?.clone();
    if spec.b.is_empty() {
        return Err(Error::config("oscillate.b", "need at least one bandwidth"));
    }
    let values = match (&spec.sample, spec.n) {
        (Some(s), None) => s.clone(),
        (None, Some(n)) if n > 0 => run.cfg.model.build()?.simulate_path(n, &mut substream(run.cfg.seed, &[tags::PATH])),
        _ => return Err(Error::config("oscillate.sample", "give exactly one of `sample` or a positive `n`")),
    };
    let n = values.len();
    let model = run.cfg.model(n)?;
    let marginal = model.marginal()?;
    let sample = SortedSample::new(values).map_err(|e| Error::config("oscillate.sample", e.to_string()))?;
    let mut raw = Table::new(&[
        "b", "n", "delta", "rate_sqrt", "rate_stute", "rate_iota", "ratio_sqrt", "ratio_stute", "ratio_iota", "bruteforce",
    ]);
    let mut checks = Vec::new();
    let mut deltas = Vec::new();
    for (i, &b) in spec.b.iter().enumerate() {
        let d = oscillation_modulus(&sample, b, marginal.as_ref()).map_err(|e| e.within(&format!("oscillate.b[{i}]")))?;
        let r = OscillationRecord::new(n, b, d);
        println!("b = {}  Δ = {}", fmt_f64(b), fmt_f64(d));
        let brute = match spec.bruteforce_step {
            Some(step) if step > 0.0 => {
                let lo = sample.min() - b - 1.0;
                let hi = sample.max() + b + 1.0;
                let v = oscillation_modulus_bruteforce(&sample, b, marginal.as_ref(), step, lo, hi)?;
                let fsup = marginal.closed().map(|l| l.density_sup());
                let slack = fsup.map(|f| 2.0 * (n as f64).sqrt() * f * step + 1e-9);
                let ok = d >= v - 1e-12 && slack.is_none_or(|s| d - v <= s);
                checks.push(CheckResult {
                    name: format!("oracle_b{i}"),
                    outcome: if ok { Outcome::Pass } else { Outcome::Fail },
                    value: d - v,
                    detail: format!("exact − grid oracle must lie in [0, {}]", slack.map_or("?".into(), fmt_f64)),
                });
                Some(v)
            }
            Some(_) => return Err(Error::config("oscillate.bruteforce_step", "must be positive")),
            None => None,
        };
        deltas.push(d);
        raw.push(vec![
            fmt_f64(b),
            n.to_string(),
            fmt_f64(d),
            fmt_f64(r.rate_sqrt),
            fmt_f64(r.rate_stute),
            fmt_f64(r.rate_iota),
            fmt_f64(r.ratio_sqrt),
            fmt_f64(r.ratio_stute),
            fmt_f64(r.ratio_iota),
            brute.map(fmt_f64).unwrap_or_default(),
        ]);
    }
    let monotone = spec
        .b
        .iter()
        .zip(&deltas)
        .all(|(b1, d1)| spec.b.iter().zip(&deltas).all(|(b2, d2)| b1 > b2 || d1 <= d2));
    checks.push(CheckResult {
        name: "monotone_in_b".into(),
        outcome: if monotone { Outcome::Pass } else { Outcome::Fail },
        value: monotone as u8 as f64,
        detail: "Δ(b) non-decreasing in b".into(),
    });
    run.csv(report::RAW, &raw)?;
    let mut agg = Table::new(&["n", "max_multiplicity", "jump_bound", "reference_size"]);
    agg.push(vec![
        n.to_string(),
        sample.max_multiplicity().to_string(),
        fmt_f64((n as f64).sqrt() * sample.max_multiplicity() as f64 / n as f64),
        marginal.reference_size().map(|m| m.to_string()).unwrap_or_default(),
    ]);
    run.csv(report::AGGREGATE, &agg)?;
    run.csv("plot_modulus.csv", &Table::xy(&spec.b, &deltas))?;
    run.finish(&checks)
}

fn verdict_check(name: &str, v: Verdict, total: f64, detail: &str) -> CheckResult {
    CheckResult {
        name: name.into(),
        outcome: match v {
            Verdict::Summable => Outcome::Pass,
            Verdict::NotSummable => Outcome::Fail,
            Verdict::Inconclusive => Outcome::Inconclusive,
        },
        value: total,
        detail: detail.into(),
    }
}

fn dependence(c: &Common) -> Result<u8> {
    let mut run = Run::open("dependence", c, &[report::RAW, report::AGGREGATE, "plot_pdm.csv", "plot_cf_terms.csv"])?;
    let spec = run.cfg.section("dependence", &run.cfg.dependence)?.clone();
    let model = run.cfg.model.build()?;
    let seed = run.cfg.seed;
    run.log("estimating dependence profile");
    let p = pdm_summability(&model, spec.alpha, spec.max_lag, spec.replicates, seed).map_err(|e| e.within("dependence"))?;
    let cf = if spec.cf_terms {
        run.log("computing characteristic-function terms");
        Some(
            cf_term_series(&model, spec.max_lag, spec.alpha, &spec.quadrature, spec.replicates, seed)
                .map_err(|e| e.within("dependence"))?,
        )
    } else {
        None
    };
    run.csv(report::RAW, &report::dependence_raw(&p, cf.as_ref()))?;
    let mut agg = Table::new(&["alpha", "replicates", "decay_slope", "decay_r_squared", "pdm_verdict", "cf_verdict", "reliable"]);
    agg.push(vec![
        fmt_f64(p.alpha),
        p.replicates.to_string(),
        p.decay_fit.map(|f| fmt_f64(f.slope)).unwrap_or_default(),
        p.decay_fit.map(|f| fmt_f64(f.r_squared)).unwrap_or_default(),
        format!("{:?}", p.tail.verdict).to_lowercase(),
        cf.as_ref().map(|c| format!("{:?}", c.tail.verdict).to_lowercase()).unwrap_or_default(),
        p.reliable.to_string(),
    ]);
    run.csv(report::AGGREGATE, &agg)?;
    let lags: Vec<f64> = p.lags.iter().map(|&k| k as f64).collect();
    run.csv("plot_pdm.csv", &Table::xy(&lags, &p.pdm))?;
    let mut checks = vec![verdict_check(
        "pdm_summable",
        p.tail.verdict,
        *p.partial_sums.last().unwrap(),
        "partial sum of pdm^{α/2}; verdict from its tail fit",
    )];
    if !p.reliable {
        checks.push(CheckResult {
            name: "pdm_moment".into(),
            outcome: Outcome::Inconclusive,
            value: spec.alpha,
            detail: "α at or above the innovation tail index; the moment may be infinite".into(),
        });
    }
    if let Some(c) = &cf {
        run.csv("plot_cf_terms.csv", &Table::xy(&lags, &c.terms))?;
        checks.push(verdict_check(
            "cf_summable",
            c.tail.verdict,
            *c.partial_sums.last().unwrap(),
            "partial sum of the CF terms; verdict from their tail fit",
        ));
        let v = c.violations();
        checks.push(CheckResult {
            name: "cf_moment_bound".into(),
            outcome: if v.is_empty() { Outcome::Pass } else { Outcome::Fail },
            value: v.len() as f64,
            detail: "lags whose CF term exceeds its α-moment bound".into(),
        });
    }
    run.finish(&checks)
}

fn experiment_outputs(run: &mut Run, report: &ExperimentReport) -> Result<u8> {
    run.csv(report::RAW, &report::rate_raw(report))?;
    run.csv(report::AGGREGATE, &report::rate_aggregate(report))?;
    for (name, t) in report::rate_plots(report) {
        run.csv(&name, &t)?;
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    if !report.complete {
        println!("note: report incomplete");
    }
    for a in &report.aggregates {
        println!(
            "n = {:>8}  b = {:<12.6}  median Δ = {:<10.6}  Δ/√(b ln n) = {:<8.4}  Δ/√(b ln(1/b)) = {:.4}",
            a.n, a.b, a.median_delta, a.median_ratio_sqrt, a.median_ratio_stute
        );
    }
    run.finish(&report.checks)
}

const EXPERIMENT_FILES: &[&str] = &[report::RAW, report::AGGREGATE];

fn rate(c: &Common) -> Result<u8> {
    let mut run = Run::open("rate", c, EXPERIMENT_FILES)?;
    let cfg = run.cfg.experiment_config()?;
    run.log("running rate experiment");
    let r = run_rate_experiment(&cfg)?;
    experiment_outputs(&mut run, &r)
}

fn stute(c: &Common) -> Result<u8> {
    let mut run = Run::open("stute", c, EXPERIMENT_FILES)?;
    let cfg = run.cfg.experiment_config()?;
    run.log("running calibration");
    let r = run_stute_calibration(&cfg)?;
    experiment_outputs(&mut run, &r)
}

fn integrability_rows(
    label: &str,
    dist: &InnovationDistribution,
    spec: &ConditionsSpec,
    raw: &mut Table,
    checks: &mut Vec<CheckResult>,
) -> Result<()> {
    for (i, &alpha) in spec.alpha.iter().enumerate() {
        let r = cf_integrability(dist, alpha, &spec.quadrature).map_err(|e| e.within(&format!("conditions.alpha[{i}]")))?;
        let finite = r.verdict == Finiteness::Finite;
        println!(
            "cf_integrability[{label}] alpha = {}: {} ({})",
            fmt_f64(alpha),
            fmt_f64(r.value),
            if finite { "finite" } else { "diverges" }
        );
        raw.push(vec![
            format!("cf_integrability_{label}"),
            fmt_f64(alpha),
            fmt_f64(r.value),
            fmt_f64(r.error),
            fmt_f64(r.cutoff),
            if finite { "finite".into() } else { "diverges".into() },
        ]);
        checks.push(CheckResult {
            name: format!("cf_integrability_{label}_alpha{}", fmt_f64(alpha)),
            outcome: if finite { Outcome::Pass } else { Outcome::Fail },
            value: r.value,
            detail: "∫|φ(t)|²(1+t²)|t|^α dt < ∞".into(),
        });
    }
    Ok(())
}

fn check_conditions(c: &Common) -> Result<u8> {
    let mut run = Run::open("check-conditions", c, &[report::RAW, report::AGGREGATE])?;
    let spec = run.cfg.conditions.clone().unwrap_or_default();
    let model = run.cfg.model.build()?;
    let innov = *model.innovation();
    let mut raw = Table::new(&["check", "alpha", "value", "error", "cutoff", "verdict"]);
    let mut checks = Vec::new();
    integrability_rows("innovation", &innov, &spec, &mut raw, &mut checks)?;
    if let Ok(step) = model.step_distribution() {
        if step != innov {
            integrability_rows("step", &step, &spec, &mut raw, &mut checks)?;
        }
    }
    match parseval_check(&innov, &spec.quadrature) {
        Ok(p) => {
            let tol = if matches!(innov, InnovationDistribution::Uniform { .. }) { 1e-3 } else { 1e-6 };
            println!("parseval: ∫|φ|² = {}  2π∫f² = {}  gap = {}", fmt_f64(p.lhs), fmt_f64(p.rhs), fmt_f64(p.rel_gap));
            raw.push(vec!["parseval".into(), String::new(), fmt_f64(p.lhs), fmt_f64(p.rel_gap), String::new(), fmt_f64(p.rhs)]);
            checks.push(CheckResult {
                name: "parseval".into(),
                outcome: if p.rel_gap < tol { Outcome::Pass } else { Outcome::Fail },
                value: p.rel_gap,
                detail: format!("relative gap below {tol}"),
            });
        }
        Err(Error::Capability(why)) => println!("parseval: skipped ({why})"),
        Err(e) => return Err(e),
    }
    let c0 = innov.density_sup();
    println!("density bound c0 = {}", fmt_f64(c0));
    raw.push(vec!["density_sup".into(), String::new(), fmt_f64(c0), String::new(), String::new(), String::new()]);
    run.csv(report::RAW, &raw)?;
    let mut agg = Table::new(&["model", "tail_index", "density_sup", "contraction"]);
    agg.push(vec![
        model.label(),
        fmt_f64(innov.tail_index()),
        fmt_f64(c0),
        model.rho().map(fmt_f64).unwrap_or_default(),
    ]);
    run.csv(report::AGGREGATE, &agg)?;
    run.finish(&checks)
}

fn selftest(out: Option<&Path>, force: bool) -> Result<u8> {
    let checks = crate::selftest::run();
    if let Some(dir) = out {
        let o = OutputDir::create(dir, force)?;
        o.write_json(report::VERDICT, &report::verdict_json(&checks))?;
    }
    print_checks(&checks);
    Ok(status(&checks))
}

fn set_threads(c: &Common) -> Result<()> {
    if let Some(t) = c.threads {
        if t == 0 {
            return Err(Error::config("--threads", "must be positive"));
        }
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<u8> {
    let common = match &cli.command {
        Command::Simulate(c)
        | Command::Oscillate(c)
        | Command::Dependence(c)
        | Command::Rate(c)
        | Command::Stute(c)
        | Command::CheckConditions(c) => Some(c),
        Command::Selftest { .. } => None,
    };
    if let Some(c) = common {
        set_threads(c)?;
    }
    match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Oscillate(c) => oscillate(c),
        Command::Dependence(c) => dependence(c),
        Command::Rate(c) => rate(c),
        Command::Stute(c) => stute(c),
        Command::CheckConditions(c) => check_conditions(c),
        Command::Selftest { out, force } => selftest(out.as_deref(), *force),
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
