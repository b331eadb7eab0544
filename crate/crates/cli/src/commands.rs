use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Value};
use wiener_chaos::chaos::{gauss_hermite, hermite_all, ChaosExpansion, HValuedChaos, Truncation};
use wiener_chaos::integrator::{
    admissibility_diagnostic, brownian_path_integrand, field_ito_integral, ito_integral, strat_integral,
    truncated_horizon,
};
use wiener_chaos::kernel::{
    covariance_from_kernel, fbm_c_h, fbm_k1, k1_empirical, op_norm_bound, op_norm_estimate, KernelSpec,
};
use wiener_chaos::sde::{solve_closed_form, solve_picard};
use wiener_chaos::verify::{run_suite, Suite, VerifyOptions};
use wiener_chaos::{ChaosError, Result};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Ito,
    Strat,
    FieldIto,
}

/// What a command prints, the files it leaves in the output directory, and
/// whether its checks passed.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub pass: bool,
}

impl Outcome {
    fn new(stdout: String, pass: bool) -> Self {
        Self {
            stdout,
            files: Vec::new(),
            pass,
        }
    }
}

pub fn to_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize") + "\n"
}

/// `a` or `a:b`, inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderRange {
    pub lo: u32,
    pub hi: u32,
}

impl FromStr for OrderRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
        let (lo, hi) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => (parse(s)?, parse(s)?),
        };
        if lo > hi {
            return Err(format!("empty range {lo}:{hi}"));
        }
        if hi > 170 {
            return Err(format!("order {hi} overflows double precision"));
        }
        Ok(Self { lo, hi })
    }
}

/// `x`, `a:b` (11 points) or `a:b:n` (n points).
#[derive(Clone, Debug, PartialEq)]
pub struct Points(pub Vec<f64>);

impl FromStr for Points {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| format!("{x:?}: {e}"))
                .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("{x:?} is not finite")) })
        };
        let parts: Vec<&str> = s.split(':').collect();
        let (lo, hi, n) = match parts.as_slice() {
            [x] => return Ok(Self(vec![parse(x)?])),
            [a, b] => (parse(a)?, parse(b)?, 11),
            [a, b, n] => (parse(a)?, parse(b)?, n.trim().parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?),
            _ => return Err(format!("cannot read {s:?} as x, a:b or a:b:n")),
        };
        if lo > hi || n < 2 {
            return Err(format!("empty range {s:?}"));
        }
        Ok(Self((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()))
    }
}

/// Table of `H_n(t)`, or of `E[H_n H_m]` by Gauss–Hermite quadrature.
pub fn cmd_hermite(orders: OrderRange, points: &Points, orthogonality: bool, format: Format) -> Outcome {
    let ns: Vec<u32> = (orders.lo..=orders.hi).collect();
    if orthogonality {
        let (nodes, weights) = gauss_hermite(orders.hi as usize + 1);
        let table: Vec<Vec<f64>> = nodes.iter().map(|&x| hermite_all(orders.hi, x)).collect();
        let e = |n: u32, m: u32| -> f64 {
            table
                .iter()
                .zip(&weights)
                .map(|(h, w)| w * h[n as usize] * h[m as usize])
                .sum()
        };
        return match format {
            Format::Csv => {
                let mut out = String::from("n,m,expectation\n");
                for &n in &ns {
                    for &m in &ns {
                        writeln!(out, "{n},{m},{}", e(n, m)).unwrap();
                    }
                }
                Outcome::new(out, true)
            }
            Format::Json => {
                let rows: Vec<Value> = ns
                    .iter()
                    .flat_map(|&n| ns.iter().map(move |&m| (n, m)))
                    .map(|(n, m)| json!({ "n": n, "m": m, "expectation": e(n, m) }))
                    .collect();
                Outcome::new(to_json(&json!({ "nodes": nodes.len(), "table": rows })), true)
            }
        };
    }
    let values: Vec<Vec<f64>> = points.0.iter().map(|&t| hermite_all(orders.hi, t)).collect();
    match format {
        Format::Csv => {
            let mut out = String::from("t");
            for n in &ns {
                write!(out, ",H_{n}").unwrap();
            }
            out.push('\n');
            for (t, row) in points.0.iter().zip(&values) {
                write!(out, "{t}").unwrap();
                for &n in &ns {
                    write!(out, ",{}", row[n as usize]).unwrap();
                }
                out.push('\n');
            }
            Outcome::new(out, true)
        }
        Format::Json => {
            let rows: Vec<Value> = points
                .0
                .iter()
                .zip(&values)
                .map(|(t, row)| {
                    json!({ "t": t, "values": ns.iter().map(|&n| row[n as usize]).collect::<Vec<_>>() })
                })
                .collect();
            Outcome::new(to_json(&json!({ "orders": ns, "rows": rows })), true)
        }
    }
}

fn coefficients_json(e: &ChaosExpansion) -> Vec<Value> {
    e.iter()
        .map(|(a, v)| {
            json!({
                "alpha": a.entries().iter().map(|&(k, n)| [k, n as usize]).collect::<Vec<_>>(),
                "value": v,
            })
        })
        .collect()
}

fn load_integrand(path: &Path) -> Result<HValuedChaos> {
    let text = fs::read_to_string(path).map_err(|e| ChaosError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ChaosError::Parse(format!("integrand {}: {e}", path.display())))
}

/// Isometry tolerance for the built-in path integrand.
const ISOMETRY_TOL: f64 = 1e-10;

pub fn cmd_integrate(cfg: &ExperimentConfig, integrand: &str, mode: Mode, format: Format) -> Result<Outcome> {
    let basis = cfg.basis()?;
    let rule = cfg.rule();
    let eta = match integrand {
        "w-path" => brownian_path_integrand(&basis, Truncation::new(cfg.modes, cfg.order), &rule)?,
        "zero" => HValuedChaos::zero(cfg.truncation()),
        path => load_integrand(Path::new(path))?,
    };
    let result = match mode {
        Mode::Ito => ito_integral(&eta),
        Mode::Strat => strat_integral(&eta),
        Mode::FieldIto => field_ito_integral(&eta, &cfg.kernel_spec()?, &basis, &rule)?,
    };
    let norm_sq = result.norm_sq();
    let mut summary = json!({
        "integrand": integrand,
        "mode": match mode { Mode::Ito => "ito", Mode::Strat => "strat", Mode::FieldIto => "field-ito" },
        "trunc": result.truncation(),
        "mean": result.mean(),
        "norm_sq": norm_sq,
        "admissibility": admissibility_diagnostic(&eta),
        "coefficients": coefficients_json(&result),
    });
    let mut pass = true;
    if integrand == "w-path" && mode != Mode::FieldIto {
        // W_K(T) ~ N(0, s_K): E[((W² − s)/2)²] = s²/2 and E[(W²/2)²] = 3s²/4.
        let s_k = truncated_horizon(&basis, cfg.modes);
        let expected = if mode == Mode::Ito { s_k * s_k / 2.0 } else { 0.75 * s_k * s_k };
        pass = (norm_sq - expected).abs() <= ISOMETRY_TOL;
        summary["s_k"] = json!(s_k);
        summary["expected_norm_sq"] = json!(expected);
    }
    summary["pass"] = json!(pass);
    let stdout = match format {
        Format::Json => to_json(&summary),
        Format::Csv => {
            let mut out = String::from("alpha,value\n");
            for (a, v) in result.iter() {
                writeln!(out, "{a},{v}").unwrap();
            }
            out
        }
    };
    Ok(Outcome::new(stdout, pass))
}

/// Largest Picard problem, in multi-indices, solved alongside the closed form.
const PICARD_BUDGET: usize = 5000;
/// Largest coefficient table the solver will write.
const TABLE_BUDGET: usize = 50_000_000;
const DISCREPANCY_TOL: f64 = 1e-8;
const SECOND_MOMENT_TOL: f64 = 1e-2;

pub fn cmd_sde(cfg: &ExperimentConfig, format: Format) -> Result<Outcome> {
    let kernel = cfg.kernel_spec()?;
    if !kernel.adapted() {
        return Err(ChaosError::UnsupportedKernel(format!("{} is not adapted", kernel.name())));
    }
    let basis = cfg.basis()?;
    let rule = cfg.rule();
    let trunc = cfg.truncation();
    if trunc.size().saturating_mul(cfg.grid + 1) > TABLE_BUDGET {
        return Err(ChaosError::Config(format!(
            "{} indices on {} time points exceed the table budget of {TABLE_BUDGET}",
            trunc.size(),
            cfg.grid + 1
        )));
    }
    let closed = solve_closed_form(&kernel, &basis, trunc, cfg.grid, &rule)?;
    let picard_order = (1..=cfg.order)
        .take_while(|&n| Truncation::new(cfg.modes, n).size() <= PICARD_BUDGET)
        .last()
        .unwrap_or(0);
    let picard_trunc = Truncation::new(cfg.modes, picard_order);
    let picard = solve_picard(&kernel, &basis, picard_trunc, cfg.grid, cfg.picard_refine, &rule)?;
    let discrepancy = closed.restricted(picard_trunc)?.max_abs_diff(&picard)?;

    let t = cfg.horizon;
    let last = closed.times().len() - 1;
    let second_moment = closed.second_moment(t)?;
    let r = covariance_from_kernel(&kernel, t, t, &rule);
    let r_k: f64 = closed.m_tilde(last).iter().map(|v| v * v).sum();
    let gap = (second_moment - r.exp()).abs();
    let pass = discrepancy <= DISCREPANCY_TOL && gap <= SECOND_MOMENT_TOL;
    let summary = json!({
        "kernel": kernel.name(),
        "hurst": match &kernel { KernelSpec::Fbm(f) => json!(f.hurst()), _ => Value::Null },
        "basis": cfg.basis,
        "trunc": trunc,
        "grid": cfg.grid,
        "picard_order": picard_order,
        "closed_vs_picard": { "value": discrepancy, "tolerance": DISCREPANCY_TOL, "pass": discrepancy <= DISCREPANCY_TOL },
        "second_moment": {
            "value": second_moment,
            "exp_r": r.exp(),
            "exp_r_truncated": r_k.exp(),
            "gap": gap,
            "tolerance": SECOND_MOMENT_TOL,
            "pass": gap <= SECOND_MOMENT_TOL,
        },
        "pass": pass,
    });
    let csv = closed.to_csv();
    let stdout = match format {
        Format::Json => to_json(&summary),
        Format::Csv => csv.clone(),
    };
    Ok(Outcome {
        stdout,
        files: vec![
            ("solution.csv".into(), csv),
            ("alphas.json".into(), to_json(&closed.alpha_map())),
            ("summary.json".into(), to_json(&summary)),
        ],
        pass,
    })
}

pub fn cmd_fbm(cfg: &ExperimentConfig, format: Format) -> Result<Outcome> {
    let (h, t) = (cfg.hurst, cfg.horizon);
    let c_h = fbm_c_h(h)?;
    let k1 = fbm_k1(h, t)?;
    let kernel = KernelSpec::fbm(h)?;
    let rule = cfg.rule();
    let k1_emp = k1_empirical(&kernel, t, &rule);
    let bound = op_norm_bound(kernel.k0(), k1);
    let estimate = op_norm_estimate(&kernel, t, cfg.grid, &rule)?;
    let k1_pass = k1_emp <= k1 + 1e-6;
    let norm_pass = estimate <= bound;
    let summary = json!({
        "hurst": h,
        "horizon": t,
        "c_h": c_h,
        "k1": k1,
        "k1_empirical": k1_emp,
        "norm_bound": bound,
        "norm_estimate": estimate,
        "grid": cfg.grid,
        "k1_pass": k1_pass,
        "norm_pass": norm_pass,
        "pass": k1_pass && norm_pass,
    });
    let stdout = match format {
        Format::Json => to_json(&summary),
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            for key in ["hurst", "horizon", "c_h", "k1", "k1_empirical", "norm_bound", "norm_estimate"] {
                writeln!(out, "{key},{}", summary[key]).unwrap();
            }
            out
        }
    };
    Ok(Outcome::new(stdout, k1_pass && norm_pass))
}

pub fn cmd_verify(cfg: &ExperimentConfig, suite: &str, format: Format) -> Result<Outcome> {
    let suite: Suite = suite.parse()?;
    let opts = VerifyOptions {
        seed: cfg.seed,
        samples: cfg.samples,
    };
    let report = run_suite(suite, &opts)?;
    let stdout = match format {
        Format::Json => to_json(&serde_json::to_value(&report).expect("report serializes")),
        Format::Csv => {
            let mut out = String::from("criterion,name,value,tolerance,pass\n");
            for c in &report.checks {
                writeln!(out, "{},{},{},{},{}", c.criterion, c.name, c.value, c.tolerance, c.pass).unwrap();
            }
            out
        }
    };
    Ok(Outcome::new(stdout, report.pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("3".parse::<OrderRange>().unwrap(), OrderRange { lo: 3, hi: 3 });
        assert_eq!("0:10".parse::<OrderRange>().unwrap(), OrderRange { lo: 0, hi: 10 });
        assert!("5:2".parse::<OrderRange>().is_err());
        assert!("x".parse::<OrderRange>().is_err());
        assert_eq!("-1:1:3".parse::<Points>().unwrap(), Points(vec![-1.0, 0.0, 1.0]));
        assert_eq!("2.5".parse::<Points>().unwrap(), Points(vec![2.5]));
        assert_eq!("0:1".parse::<Points>().unwrap().0.len(), 11);
        assert!("1:0".parse::<Points>().is_err());
        assert!("0:1:1".parse::<Points>().is_err());
        assert!("nan".parse::<Points>().is_err());
    }

    #[test]
    fn hermite_table() {
        let out = cmd_hermite("2".parse().unwrap(), &"3".parse().unwrap(), false, Format::Csv);
        assert_eq!(out.stdout, "t,H_2\n3,8\n");
        let out = cmd_hermite("0".parse().unwrap(), &"-2:2:5".parse().unwrap(), false, Format::Csv);
        assert!(out.stdout.lines().skip(1).all(|l| l.ends_with(",1")));
    }

    #[test]
    fn orthogonality_table_has_factorial_diagonal() {
        let out = cmd_hermite("0:5".parse().unwrap(), &Points(vec![]), true, Format::Json);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        let mut fact = 1.0;
        for row in v["table"].as_array().unwrap() {
            let (n, m) = (row["n"].as_u64().unwrap(), row["m"].as_u64().unwrap());
            let e = row["expectation"].as_f64().unwrap();
            if n == m {
                if n > 0 {
                    fact *= n as f64;
                }
                assert!((e - fact).abs() < 1e-9 * fact, "{n}: {e}");
            } else {
                assert!(e.abs() < 1e-9);
            }
        }
    }
}
