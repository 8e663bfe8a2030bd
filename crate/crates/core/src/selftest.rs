//! Quick closed-form checks, each a few milliseconds, run by `oscillab selftest`.

use std::f64::consts::{E, PI};

use crate::decomposition::{decompose, default_grid, kolmogorov_check};
use crate::dependence::{bound_chain_check, cf_distance_onestep, pdm_summability};
use crate::experiments::{BandwidthRule, CheckResult, Outcome};
use crate::innovations::InnovationDistribution as D;
use crate::oscillation::{edf_eval, iota, oscillation_modulus, SortedSample};
use crate::process::ProcessModel;
use crate::rng::substream;

fn close(name: &str, got: f64, want: f64, tol: f64) -> CheckResult {
    CheckResult {
        name: name.into(),
        outcome: if (got - want).abs() <= tol { Outcome::Pass } else { Outcome::Fail },
        value: got,
        detail: format!("expected {want} ± {tol}"),
    }
}

fn holds(name: &str, ok: bool, detail: &str) -> CheckResult {
    CheckResult {
        name: name.into(),
        outcome: if ok { Outcome::Pass } else { Outcome::Fail },
        value: ok as u8 as f64,
        detail: detail.into(),
    }
}

fn errored(name: &str, e: crate::Error) -> CheckResult {
    CheckResult {
        name: name.into(),
        outcome: Outcome::Fail,
        value: f64::NAN,
        detail: e.to_string(),
    }
}

pub fn run() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |r: crate::Result<CheckResult>, name: &str| out.push(r.unwrap_or_else(|e| errored(name, e)));

    push(
        (|| {
            let s = SortedSample::new(vec![1.0, 2.0, 3.0])?;
            Ok(close("edf_at_middle", edf_eval(&s, 2.0), 2.0 / 3.0, 0.0))
        })(),
        "edf_at_middle",
    );
    push(
        (|| {
            let s = SortedSample::new(vec![1.0, 2.0, 3.0])?;
            Ok(holds("edf_limits", edf_eval(&s, 0.5) == 0.0 && edf_eval(&s, 3.0) == 1.0, "0 below min, 1 at max"))
        })(),
        "edf_limits",
    );
    let g = D::standard_gaussian();
    push(
        Ok(holds(
            "cf_at_zero",
            [g, D::Uniform { lo: 0.0, hi: 1.0 }, D::Cauchy { loc: 1.0, scale: 2.0 }, D::SymmetricStable { alpha: 0.7, scale: 1.0 }]
                .iter()
                .all(|d| d.cf(0.0).re == 1.0 && d.cf(0.0).im == 0.0),
            "cf(0) = 1 for every law",
        )),
        "cf_at_zero",
    );
    push(Ok(close("gaussian_cf_at_one", g.cf(1.0).re, (-0.5f64).exp(), 1e-15)), "gaussian_cf_at_one");
    push(
        Ok(close(
            "stable_cf",
            D::SymmetricStable { alpha: 1.5, scale: 1.0 }.cf(2.0).re,
            (-(2f64.powf(1.5))).exp(),
            1e-15,
        )),
        "stable_cf",
    );
    let u01 = D::Uniform { lo: 0.0, hi: 1.0 };
    push(
        (|| {
            let m = ProcessModel::iid(u01)?;
            let s = SortedSample::new(vec![0.5])?;
            Ok(close("modulus_single_point", oscillation_modulus(&s, 1.0, m.marginal()?.as_ref())?, 1.0, 1e-12))
        })(),
        "modulus_single_point",
    );
    push(
        (|| {
            let m = ProcessModel::iid(u01)?;
            let s = SortedSample::new(vec![0.25, 0.75])?;
            let d = oscillation_modulus(&s, 0.25, m.marginal()?.as_ref())?;
            Ok(close("modulus_two_points", d, 0.5 * 2f64.sqrt(), 1e-12))
        })(),
        "modulus_two_points",
    );
    push(
        (|| {
            let m = ProcessModel::iid(u01)?;
            let s = SortedSample::new(vec![0.1, 0.4, 0.7])?;
            let d = oscillation_modulus(&s, 1e-12, m.marginal()?.as_ref())?;
            Ok(holds("modulus_jump_bound", d >= 3f64.sqrt() / 3.0, "Δ(0⁺) ≥ √n/n"))
        })(),
        "modulus_jump_bound",
    );
    push(
        (|| {
            let m = ProcessModel::iid(u01)?;
            let x = m.simulate_path(4, &mut substream(1, &[0]));
            let e = u01.sample_n(4, &mut substream(1, &[0]));
            Ok(holds("iid_path_is_innovations", x == e, "bit-identical draws"))
        })(),
        "iid_path_is_innovations",
    );
    push(
        (|| {
            let m = ProcessModel::linear(vec![1.0], g)?;
            let x = m.simulate_path(16, &mut substream(2, &[0]));
            let e = g.sample_n(16, &mut substream(2, &[0]));
            Ok(holds("degenerate_filter", x == e, "a = (1) reproduces the innovations"))
        })(),
        "degenerate_filter",
    );
    push(
        (|| {
            let m = ProcessModel::iid(g)?;
            let c = m.simulate_coupled(5, &mut substream(3, &[0]));
            Ok(holds("iid_coupling", (1..=5).all(|k| c.x[k] == c.x_star[k]), "X_k = X_k* for k ≥ 1"))
        })(),
        "iid_coupling",
    );
    push(
        (|| {
            let m = ProcessModel::tar(0.5, -0.3, g)?;
            Ok(close("conditional_cdf_symmetry", m.conditional_cdf(1.0, 1.0)?, 0.5, 1e-15))
        })(),
        "conditional_cdf_symmetry",
    );
    push(
        (|| {
            let m = ProcessModel::iid(u01)?;
            Ok(close("uniform_marginal", m.marginal_cdf(0.3)?, 0.3, 1e-15))
        })(),
        "uniform_marginal",
    );
    push(Ok(close("iota", iota(E.powi(4)), 2.0 * 4f64.ln(), 1e-12)), "iota");
    push(
        Ok({
            let c = bound_chain_check(PI, 0.0);
            holds("bound_chain_antipodal", c.holds() && (c.lhs - 2.0).abs() < 1e-15, "|e^{iπ} − 1| = 2 ≤ 2")
        }),
        "bound_chain_antipodal",
    );
    push(
        Ok({
            let c = bound_chain_check(1.0, 1.0);
            holds("bound_chain_equal", c.lhs == 0.0 && c.rhs == 0.0, "0 ≤ 0")
        }),
        "bound_chain_equal",
    );
    push(
        (|| {
            let k = kolmogorov_check(&[0.0; 16], &[0.0; 16], 0.1, 1.0)?;
            Ok(holds("kolmogorov_zero", k.sup_sq == 0.0 && k.bound == 0.0 && k.holds(), "H ≡ 0"))
        })(),
        "kolmogorov_zero",
    );
    push(
        (|| {
            let m = ProcessModel::linear(vec![0.8, 0.6], g)?;
            Ok(close("cf_distance_at_zero", cf_distance_onestep(&m, 1, 0.0, 50, 4)?, 0.0, 0.0))
        })(),
        "cf_distance_at_zero",
    );
    push(
        (|| {
            let m = ProcessModel::iid(g)?;
            let p = pdm_summability(&m, 2.0, 5, 100, 5)?;
            Ok(holds("iid_profile", p.pdm[1..].iter().all(|&v| v == 0.0), "pdm vanishes beyond lag 0"))
        })(),
        "iid_profile",
    );
    push(
        (|| {
            let m = ProcessModel::iid(g)?;
            let path = m.simulate_path_with_states(200, &mut substream(6, &[0]));
            let d = decompose(&path, &m, &default_grid(&m, &path.y)?)?;
            Ok(holds(
                "iid_decomposition",
                d.g_star.iter().all(|&v| v == 0.0) && d.g_circ == d.g_n,
                "G* ≡ 0 and G° = G for iid data",
            ))
        })(),
        "iid_decomposition",
    );
    push(
        Ok(holds(
            "inverse_log_rule_rejected",
            {
                let grid = [1 << 10, 1 << 12];
                let b = BandwidthRule::InverseLog.bandwidths(&grid).unwrap();
                !crate::experiments::stute_regime(&grid, &b).iter().all(|c| c.passed)
            },
            "b = 1/ln n fails the calibration regime",
        )),
        "inverse_log_rule_rejected",
    );
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_pass() {
        for c in super::run() {
            assert_eq!(c.outcome, crate::experiments::Outcome::Pass, "{c:?}");
        }
    }
}
