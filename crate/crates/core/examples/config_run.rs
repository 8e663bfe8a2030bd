//! Drive an experiment from a JSON configuration and write the CSV and
//! JSON outputs the command-line tool produces.

use oscillab::config::Config;
use oscillab::experiments::run_rate_experiment;
use oscillab::report::{self, rate_aggregate, rate_raw, verdict_json, OutputDir};

const CONFIG: &str = r#"{
  "model": {"kind": "recursive", "map": {"family": "sine", "gain": 0.7},
            "innovation": {"kind": "gaussian", "sd": 0.5}},
  "seed": 17,
  "reference": {"size": 2000000},
  "experiment": {"n_grid": [1024, 4096, 16384], "bandwidth": {"rule": "power_law", "eta": 0.4},
                 "replicates": 8}
}"#;

fn main() -> oscillab::Result<()> {
    let cfg = Config::from_json(CONFIG)?;
    let exp = cfg.experiment_config()?;
    let r = run_rate_experiment(&exp)?;
    let dir = std::env::temp_dir().join("oscillab-config-run");
    let out = OutputDir::create(&dir, true)?;
    out.write_csv(report::RAW, &rate_raw(&r))?;
    out.write_csv(report::AGGREGATE, &rate_aggregate(&r))?;
    out.write_json(report::VERDICT, &verdict_json(&r.checks))?;
    println!("wrote {}", dir.display());
    print!("{}", String::from_utf8_lossy(&rate_aggregate(&r).to_csv()?));

    // a bad key is reported by name
    if let Err(e) = Config::from_json(r#"{"model": {"kind": "iid"}, "seeed": 1}"#) {
        println!("{e}");
    }
    Ok(())
}
