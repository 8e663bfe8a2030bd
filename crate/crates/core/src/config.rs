//! The JSON run configuration.
//!
//! ```json
//! {
//!   "model": {"kind": "tar", "a": 0.5, "b": -0.3,
//!             "innovation": {"kind": "gaussian", "sd": 1.0}},
//!   "seed": 7,
//!   "simulate":   {"n": 1000},
//!   "oscillate":  {"sample": [0.25, 0.75], "b": [0.25]},
//!   "experiment": {"n_grid": [4096, 16384], "bandwidth": {"rule": "power_law", "eta": 0.5},
//!                  "replicates": 20, "checks": {"decomposition": true}},
//!   "dependence": {"alpha": 2.0, "max_lag": 12, "replicates": 10000, "cf_terms": true},
//!   "conditions": {"alpha": [1.0, 2.0]}
//! }
//! ```
//!
//! Unknown keys are rejected. Sections are only required by the
//! subcommands that read them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{reference_size_for, BandwidthRule, ExperimentChecks, ExperimentConfig};
use crate::innovations::InnovationDistribution;
use crate::process::{default_burn_in, ProcessKind, ProcessModel, RecursiveMap};
use crate::quadrature::QuadratureSpec;

fn standard_gaussian() -> InnovationDistribution {
    InnovationDistribution::standard_gaussian()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Ar { coef: f64 },
    Tanh { gain: f64 },
    Sine { gain: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Iid {
        #[serde(default = "standard_gaussian")]
        innovation: InnovationDistribution,
    },
    /// Either explicit `coeffs` or `a_k = ratio^k` for `k < len`.
    Linear {
        #[serde(default)]
        coeffs: Option<Vec<f64>>,
        #[serde(default)]
        ratio: Option<f64>,
        #[serde(default)]
        len: Option<usize>,
        #[serde(default = "standard_gaussian")]
        innovation: InnovationDistribution,
    },
    Tar {
        a: f64,
        b: f64,
        #[serde(default)]
        burn_in: Option<usize>,
        #[serde(default = "standard_gaussian")]
        innovation: InnovationDistribution,
    },
    Recursive {
        map: MapSpec,
        /// Defaults to the map's Lipschitz constant.
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default)]
        burn_in: Option<usize>,
        #[serde(default = "standard_gaussian")]
        innovation: InnovationDistribution,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<ProcessModel> {
        self.build_inner().map_err(|e| e.within("model"))
    }

    fn build_inner(&self) -> Result<ProcessModel> {
        match self {
            Self::Iid { innovation } => ProcessModel::iid(*innovation),
            Self::Linear {
                coeffs,
                ratio,
                len,
                innovation,
            } => match (coeffs, ratio, len) {
                (Some(c), None, None) => ProcessModel::linear(c.clone(), *innovation),
                (None, Some(r), Some(l)) => {
                    if *l == 0 {
                        return Err(Error::config("len", "must be positive"));
                    }
                    ProcessModel::linear_geometric(*r, *l, *innovation)
                }
                _ => Err(Error::config("coeffs", "give either `coeffs` or both `ratio` and `len`")),
            },
            Self::Tar { a, b, burn_in, innovation } => {
                let burn_in = burn_in.unwrap_or_else(|| default_burn_in(a.abs().max(b.abs())));
                ProcessModel::new(ProcessKind::ThresholdAr { a: *a, b: *b, burn_in }, *innovation)
            }
            Self::Recursive {
                map,
                rho,
                burn_in,
                innovation,
            } => {
                let map = match *map {
                    MapSpec::Ar { coef } => RecursiveMap::Ar { coef },
                    MapSpec::Tanh { gain } => RecursiveMap::Tanh { gain },
                    MapSpec::Sine { gain } => RecursiveMap::Sine { gain },
                };
                let rho = rho.unwrap_or_else(|| map.lipschitz().unwrap());
                let burn_in = burn_in.unwrap_or_else(|| default_burn_in(rho));
                ProcessModel::new(ProcessKind::Recursive { map, rho, burn_in }, *innovation)
            }
        }
    }
}

/// Settings for a Monte Carlo marginal, used when no closed form exists.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSpec {
    /// Defaults to `max(10^7, 100·n_max)`.
    pub size: Option<usize>,
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub n: usize,
    /// Also emit the states `Y_{k−1}` and innovations.
    #[serde(default)]
    pub states: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillateSpec {
    /// A fixed sample; when absent, `n` values are simulated from the model.
    #[serde(default)]
    pub sample: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Bandwidths at which to evaluate `Δ_n(b)`.
    pub b: Vec<f64>,
    /// Also run the grid oracle at this step.
    #[serde(default)]
    pub bruteforce_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n_grid: Vec<usize>,
    pub bandwidth: BandwidthRule,
    pub replicates: usize,
    #[serde(default)]
    pub checks: ExperimentChecks,
}

fn default_alpha() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependenceSpec {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub max_lag: usize,
    pub replicates: usize,
    /// Also compute the per-lag characteristic-function terms.
    #[serde(default)]
    pub cf_terms: bool,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

fn default_alphas() -> Vec<f64> {
    vec![1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsSpec {
    #[serde(default = "default_alphas")]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

impl Default for ConditionsSpec {
    fn default() -> Self {
        Self {
            alpha: default_alphas(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub simulate: Option<SimulateSpec>,
    #[serde(default)]
    pub oscillate: Option<OscillateSpec>,
    #[serde(default)]
    pub experiment: Option<ExperimentSpec>,
    #[serde(default)]
    pub dependence: Option<DependenceSpec>,
    #[serde(default)]
    pub conditions: Option<ConditionsSpec>,
}

/// Dotted path of the first offending key, from a serde path.
fn path_key(path: &serde_path_to_error::Path) -> String {
    let s = path.to_string();
    if s == "." { "<root>".into() } else { s }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = path_key(e.path());
            Error::config(key, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The model with its Monte Carlo marginal (if any) sized for samples
    /// up to `n_max` and seeded from `seed`.
    pub fn model(&self, n_max: usize) -> Result<ProcessModel> {
        let model = self.model.build()?;
        let size = self.reference.size.unwrap_or_else(|| reference_size_for(n_max));
        if model.marginal_spec().is_closed() {
            return Ok(model);
        }
        model
            .with_reference(size, self.seed, self.reference.cache.clone())
            .map_err(|e| e.within("reference"))
    }

    pub fn section<'a, T>(&self, name: &str, s: &'a Option<T>) -> Result<&'a T> {
        s.as_ref()
            .ok_or_else(|| Error::config(name, "section is required by this subcommand"))
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let e = self.section("experiment", &self.experiment)?;
        let n_max = e.n_grid.iter().copied().max().unwrap_or(0);
        let model = self.model(n_max)?;
        Ok(ExperimentConfig {
            model,
            n_grid: e.n_grid.clone(),
            bandwidth: e.bandwidth.clone(),
            replicates: e.replicates,
            seed: self.seed,
            checks: e.checks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(text: &str) -> String {
        match Config::from_json(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_full_config() {
        let c = Config::from_json(
            r#"{"model": {"kind": "tar", "a": 0.5, "b": -0.3, "innovation": {"kind": "gaussian"}},
                "seed": 3,
                "experiment": {"n_grid": [16, 32], "bandwidth": {"rule": "power_law", "eta": 0.5},
                               "replicates": 2, "checks": {"decomposition": true}},
                "dependence": {"max_lag": 4, "replicates": 100}}"#,
        )
        .unwrap();
        assert_eq!(c.seed, 3);
        let e = c.experiment_config().unwrap();
        assert!(e.checks.decomposition);
        assert_eq!(e.checks.ratio_factor, 3.0);
        assert_eq!(c.dependence.unwrap().alpha, 2.0);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(r#"{"model": {"kind": "iid"}, "sede": 1}"#), "sede");
        assert_eq!(key_of(r#"{"model": {"kind": "iid", "innovation": {"kind": "gaussian", "sd": "x"}}}"#), "model");
        assert_eq!(
            key_of(r#"{"model": {"kind": "iid"}, "experiment": {"n_grid": [1], "bandwidth": {"rule": "power_law", "eta": 0.5}, "replicates": 1, "checks": {"bogus": 1}}}"#),
            "experiment.checks.bogus"
        );
        let c = Config::from_json(r#"{"model": {"kind": "tar", "a": 1.5, "b": 0.0}}"#).unwrap();
        assert!(matches!(c.model(100), Err(Error::Config { key, .. }) if key == "model.a"));
        let c = Config::from_json(r#"{"model": {"kind": "iid", "innovation": {"kind": "gaussian", "sd": -1}}}"#).unwrap();
        assert!(matches!(c.model(100), Err(Error::Config { key, .. }) if key == "model.innovation.sd"));
        let c = Config::from_json(r#"{"model": {"kind": "linear", "ratio": 0.5}}"#).unwrap();
        assert!(matches!(c.model(100), Err(Error::Config { key, .. }) if key == "model.coeffs"));
        let c = Config::from_json(r#"{"model": {"kind": "iid"}}"#).unwrap();
        assert!(matches!(c.experiment_config(), Err(Error::Config { key, .. }) if key == "experiment"));
    }

    #[test]
    fn recursive_rho_defaults_to_lipschitz() {
        let c = Config::from_json(r#"{"model": {"kind": "recursive", "map": {"family": "tanh", "gain": 0.6}}}"#).unwrap();
        assert_eq!(c.model.build().unwrap().rho(), Some(0.6));
        let c = Config::from_json(
            r#"{"model": {"kind": "recursive", "map": {"family": "sine", "gain": 0.6}, "rho": 0.5}}"#,
        )
        .unwrap();
        assert!(matches!(c.model.build(), Err(Error::Config { key, .. }) if key == "model.rho"));
    }

    #[test]
    fn reference_marginal_settings() {
        let c = Config::from_json(r#"{"model": {"kind": "tar", "a": 0.5, "b": -0.3}, "reference": {"size": 1000}, "seed": 9}"#).unwrap();
        let m = c.model(10).unwrap();
        assert_eq!(m.marginal().unwrap().reference_size(), Some(1000));
        let c = Config::from_json(r#"{"model": {"kind": "iid"}, "reference": {"size": 1000}}"#).unwrap();
        assert!(c.model(10).unwrap().marginal_spec().is_closed());
    }
}
