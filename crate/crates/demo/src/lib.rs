//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string, so the page needs nothing beyond the generated glue.

use serde_json::json;
use wasm_bindgen::prelude::*;
use wiener_chaos::chaos::{hermite_all, Truncation};
use wiener_chaos::function_space::{Basis, QuadratureRule};
use wiener_chaos::kernel::KernelSpec;
use wiener_chaos::mc::{sample_batch, PathSynthesizer};
use wiener_chaos::sde::solve_closed_form;

fn kernel(hurst: f64) -> Result<KernelSpec, JsError> {
    if hurst == 0.5 {
        Ok(KernelSpec::Brownian)
    } else {
        KernelSpec::fbm(hurst).map_err(|e| JsError::new(&e.to_string()))
    }
}

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `H_0, …, H_{n_max}` on `points` equally spaced values of `[lo, hi]`.
#[wasm_bindgen]
pub fn hermite_curves(n_max: u32, lo: f64, hi: f64, points: usize) -> Result<String, JsError> {
    if points < 2 || !(lo < hi) || n_max > 20 {
        return Err(JsError::new("need lo < hi, at least two points and n_max ≤ 20"));
    }
    let t: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let values: Vec<Vec<f64>> = t.iter().map(|&x| hermite_all(n_max, x)).collect();
    let curves: Vec<Vec<f64>> = (0..=n_max as usize)
        .map(|n| values.iter().map(|v| v[n]).collect())
        .collect();
    Ok(json!({ "t": t, "curves": curves }).to_string())
}

/// `count` truncated paths `X(t_i) = Σ_k M̃_k(t_i) ξ_k` on `[0, 1]`;
/// `hurst = 0.5` gives Brownian motion.
#[wasm_bindgen]
pub fn sample_paths(hurst: f64, modes: usize, grid: usize, count: usize, seed: u64) -> Result<String, JsError> {
    if modes == 0 || grid == 0 || count == 0 || modes > 256 || grid > 2048 || count > 64 {
        return Err(JsError::new("modes, grid and count must be positive and moderate"));
    }
    let rule = QuadratureRule::default();
    let basis = Basis::cosine(1.0).map_err(js)?;
    let synth = PathSynthesizer::new(&kernel(hurst)?, &basis, modes, grid, &rule).map_err(js)?;
    let batch = sample_batch(seed, count, modes).map_err(js)?;
    let paths: Vec<Vec<f64>> = batch.rows().map(|z| synth.path(z).values).collect();
    Ok(json!({ "t": synth.times(), "paths": paths }).to_string())
}

/// Second moment of the chaos solution of `u = 1 + X^⋄(u)` against
/// `exp(R_K(t, t))`, on `grid + 1` points of `[0, 1]`.
#[wasm_bindgen]
pub fn wick_exponential(hurst: f64, modes: usize, order: usize, grid: usize) -> Result<String, JsError> {
    let trunc = Truncation::new(modes, order);
    if modes == 0 || grid == 0 || trunc.size().saturating_mul(grid + 1) > 2_000_000 {
        return Err(JsError::new("truncation too large for the browser"));
    }
    let rule = QuadratureRule::default();
    let basis = Basis::cosine(1.0).map_err(js)?;
    let sol = solve_closed_form(&kernel(hurst)?, &basis, trunc, grid, &rule).map_err(js)?;
    let mut moment = Vec::new();
    let mut target = Vec::new();
    for (i, &t) in sol.times().iter().enumerate() {
        moment.push(sol.second_moment(t).map_err(js)?);
        target.push(sol.m_tilde(i).iter().map(|m| m * m).sum::<f64>().exp());
    }
    Ok(json!({
        "t": sol.times(),
        "second_moment": moment,
        "exp_r": target,
        "indices": trunc.size(),
    })
    .to_string())
}
