//! The linear Wick equation `u(t) = 1 + X^⋄_t(u)` driven by a kernel field.
//!
//! Its chaos coefficients solve the triangular system
//! `u_α(t) = Σ_k √α_k ∫_0^t u_{α−ε_k}(s) m̃_k(s) ds`, `u_0 ≡ 1`, whose solution
//! is `u_α(t) = M̃(t)^α / √α!`, i.e. `u(t) = exp^⋄(X(t))`.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chaos::expansion::alpha_to_wire;
use crate::chaos::{wick_exp_first_chaos, ChaosExpansion, MultiIndex, Truncation};
use crate::error::{ChaosError, Result};
use crate::function_space::{legendre, Basis, GaussLegendre, QuadratureRule};
use crate::kernel::{k_apply_basis, m_tilde_all, KernelSpec};

/// Which stochastic integral the equation is written with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpretation {
    Ito,
    Stratonovich,
}

/// Only the Itô (Wick) form has a coefficient system that is triangular in
/// `|α|`; the Stratonovich form couples each shell to the next one.
pub fn check_interpretation(kind: Interpretation) -> Result<()> {
    match kind {
        Interpretation::Ito => Ok(()),
        Interpretation::Stratonovich => Err(ChaosError::Config(
            "the Stratonovich equation couples u_α to u_{α+ε_k} and cannot be solved shell by shell".into(),
        )),
    }
}

/// Coefficients `u_α(t_i)` on a uniform grid together with `M̃_k(t_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorSolution {
    trunc: Truncation,
    times: Vec<f64>,
    indices: Vec<MultiIndex>,
    /// `coeffs[i][a] = u_{indices[a]}(times[i])`.
    coeffs: Vec<Vec<f64>>,
    m_tilde: Vec<Vec<f64>>,
}

fn uniform_grid(horizon: f64, grid: usize) -> Result<Vec<f64>> {
    if grid == 0 {
        return Err(ChaosError::Config("time grid needs at least one step".into()));
    }
    Ok((0..=grid).map(|i| horizon * i as f64 / grid as f64).collect())
}

impl PropagatorSolution {
    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Multi-indices in graded order; `alpha_id` is the position in this list.
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// `u_α(t_i)` for every `α`, in [`Self::indices`] order.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coeffs[i]
    }

    pub fn coefficient(&self, i: usize, alpha: &MultiIndex) -> f64 {
        self.indices
            .iter()
            .position(|a| a == alpha)
            .map_or(0.0, |p| self.coeffs[i][p])
    }

    pub fn m_tilde(&self, i: usize) -> &[f64] {
        &self.m_tilde[i]
    }

    /// `u(t_i)` as a chaos expansion.
    pub fn expansion(&self, i: usize) -> ChaosExpansion {
        ChaosExpansion::from_coeffs(
            self.trunc,
            self.indices.iter().cloned().zip(self.coeffs[i].iter().copied()),
        )
        .expect("indices enumerate the truncation")
    }

    fn time_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * self.times.last().copied().unwrap_or(1.0).max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or_else(|| ChaosError::domain("t", t, "the solution grid"))
    }

    /// `E u(t)² = Σ_α u_α(t)²`, for `t` on the grid.
    pub fn second_moment(&self, t: f64) -> Result<f64> {
        let i = self.time_index(t)?;
        Ok(self.coeffs[i].iter().map(|v| v * v).sum())
    }

    /// Largest coefficient discrepancy against a solution on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.times != other.times || self.indices != other.indices {
            return Err(ChaosError::Config("solutions live on different grids or truncations".into()));
        }
        Ok(self
            .coeffs
            .iter()
            .flatten()
            .zip(other.coeffs.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// The same solution on a smaller truncation with the same modes.
    pub fn restricted(&self, trunc: Truncation) -> Result<Self> {
        if trunc.modes != self.trunc.modes || trunc.max_order > self.trunc.max_order {
            return Err(ChaosError::TruncationMismatch {
                left: self.trunc,
                right: trunc,
            });
        }
        // Graded order lists every index of order ≤ n before any of order n + 1.
        let keep = trunc.size();
        Ok(Self {
            trunc,
            times: self.times.clone(),
            indices: self.indices[..keep].to_vec(),
            coeffs: self.coeffs.iter().map(|r| r[..keep].to_vec()).collect(),
            m_tilde: self.m_tilde.clone(),
        })
    }

    /// Rows `t,alpha_id,coefficient`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,alpha_id,coefficient\n");
        for (t, row) in self.times.iter().zip(&self.coeffs) {
            for (id, v) in row.iter().enumerate() {
                writeln!(out, "{t},{id},{v}").expect("writing to a String");
            }
        }
        out
    }

    /// Sidecar mapping `alpha_id` to the sparse multi-index.
    pub fn alpha_map(&self) -> serde_json::Value {
        json!({
            "trunc": self.trunc,
            "alphas": self
                .indices
                .iter()
                .enumerate()
                .map(|(id, a)| json!({ "id": id, "alpha": alpha_to_wire(a) }))
                .collect::<Vec<_>>(),
        })
    }
}

/// `u_α(t_i) = M̃(t_i)^α / √α!`.
pub fn solve_closed_form(
    kernel: &KernelSpec,
    basis: &Basis,
    trunc: Truncation,
    grid: usize,
    rule: &QuadratureRule,
) -> Result<PropagatorSolution> {
    let times = uniform_grid(basis.horizon, grid)?;
    let m_tilde: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| m_tilde_all(kernel, basis, trunc.modes, t, rule))
        .collect();
    let indices = trunc.enumerate();
    let coeffs = m_tilde
        .iter()
        .map(|c| {
            let u = wick_exp_first_chaos(c, trunc)?;
            Ok(indices.iter().map(|a| u.get(a)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(PropagatorSolution {
        trunc,
        times,
        indices,
        coeffs,
        m_tilde,
    })
}

/// Spectral integration matrix on Gauss–Legendre nodes:
/// `S[q][r] = ∫_{-1}^{x_q} ℓ_r(x) dx`, `ℓ_r` the Lagrange basis.
fn integration_matrix(gl: &GaussLegendre) -> Vec<Vec<f64>> {
    let n = gl.len();
    let antideriv = |m: usize, x: f64| {
        if m == 0 {
            x + 1.0
        } else {
            (legendre(m + 1, x) - legendre(m - 1, x)) / (2 * m + 1) as f64
        }
    };
    (0..n)
        .map(|q| {
            let x = gl.nodes[q];
            (0..n)
                .map(|r| {
                    (0..n)
                        .map(|m| gl.weights[r] * legendre(m, gl.nodes[r]) * (2 * m + 1) as f64 / 2.0 * antideriv(m, x))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Nodes per panel of the triangular solve.
const PICARD_NODES: usize = 12;
/// Geometric levels in the first cell, where `m̃_k` may behave like `t^{H−1/2}`.
const FIRST_CELL_LEVELS: usize = 16;

/// Panel layout: `(a, b, grid index reached at b)`.
fn picard_panels(times: &[f64], refine: usize) -> Vec<(f64, f64, Option<usize>)> {
    let mut panels = Vec::new();
    let h = times[1] - times[0];
    let mut edge = h * 0.25f64.powi(FIRST_CELL_LEVELS as i32);
    panels.push((0.0, edge, None));
    for _ in 0..FIRST_CELL_LEVELS {
        let next = edge * 4.0;
        panels.push((edge, next, None));
        edge = next;
    }
    let last = panels.len() - 1;
    panels[last] = (panels[last].0, times[1], Some(1));
    for i in 1..times.len() - 1 {
        let (a, b) = (times[i], times[i + 1]);
        let step = (b - a) / refine as f64;
        for p in 0..refine {
            let lo = a + p as f64 * step;
            let hi = if p + 1 == refine { b } else { lo + step };
            panels.push((lo, hi, (p + 1 == refine).then_some(i + 1)));
        }
    }
    panels
}

/// Solves the triangular system shell by shell on Gauss–Legendre panels.
/// Every grid cell is split into `refine` panels; the first cell is refined
/// geometrically toward `t = 0`.
pub fn solve_picard(
    kernel: &KernelSpec,
    basis: &Basis,
    trunc: Truncation,
    grid: usize,
    refine: usize,
    rule: &QuadratureRule,
) -> Result<PropagatorSolution> {
    let times = uniform_grid(basis.horizon, grid)?;
    let refine = refine.max(1);
    let gl = GaussLegendre::new(PICARD_NODES);
    let smat = integration_matrix(&gl);
    let panels = picard_panels(&times, refine);
    let q = PICARD_NODES;
    let node_t: Vec<f64> = panels
        .iter()
        .flat_map(|&(a, b, _)| gl.nodes.iter().map(move |x| 0.5 * (a + b) + 0.5 * (b - a) * x))
        .collect();
    let modes = trunc.modes;
    // mt[k][node] = m̃_{k+1}(t_node).
    let by_node: Vec<Vec<f64>> = node_t
        .par_iter()
        .map(|&t| k_apply_basis(kernel, basis, modes, t, rule))
        .collect();
    let mt: Vec<Vec<f64>> = (0..modes).map(|k| by_node.iter().map(|r| r[k]).collect()).collect();

    // Cumulative integral of f (given at the nodes) at nodes and grid points.
    let integrate = |f: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut at_nodes = vec![0.0; f.len()];
        let mut at_grid = vec![0.0; times.len()];
        let mut acc = 0.0;
        for (p, &(a, b, g)) in panels.iter().enumerate() {
            let half = 0.5 * (b - a);
            let fp = &f[p * q..(p + 1) * q];
            for (j, srow) in smat.iter().enumerate() {
                at_nodes[p * q + j] = acc + half * srow.iter().zip(fp).map(|(s, v)| s * v).sum::<f64>();
            }
            acc += half * gl.weights.iter().zip(fp).map(|(w, v)| w * v).sum::<f64>();
            if let Some(i) = g {
                at_grid[i] = acc;
            }
        }
        (at_nodes, at_grid)
    };

    let indices = trunc.enumerate();
    let position: HashMap<&MultiIndex, usize> = indices.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut coeffs = vec![vec![0.0; indices.len()]; times.len()];
    for row in coeffs.iter_mut() {
        row[0] = 1.0;
    }
    let mut prev_shell: HashMap<MultiIndex, Vec<f64>> = HashMap::new();
    prev_shell.insert(MultiIndex::zero(), vec![1.0; node_t.len()]);
    for n in 1..=trunc.max_order {
        let shell = trunc.shell(n);
        let solved: Vec<(MultiIndex, Vec<f64>, Vec<f64>)> = shell
            .into_par_iter()
            .map(|alpha| {
                let mut f = vec![0.0; node_t.len()];
                for &(k, ak) in alpha.entries() {
                    let lower = alpha.sub_unit(k).expect("k in support");
                    let u = &prev_shell[&lower];
                    let scale = (ak as f64).sqrt();
                    for ((fv, uv), mv) in f.iter_mut().zip(u).zip(&mt[k - 1]) {
                        *fv += scale * uv * mv;
                    }
                }
                let (nodes, grid_vals) = integrate(&f);
                (alpha, nodes, grid_vals)
            })
            .collect();
        let mut next = HashMap::with_capacity(solved.len());
        for (alpha, nodes, grid_vals) in solved {
            let p = position[&alpha];
            for (row, v) in coeffs.iter_mut().zip(&grid_vals) {
                row[p] = *v;
            }
            next.insert(alpha, nodes);
        }
        prev_shell = next;
    }
    // The first shell carries M̃ only when N ≥ 1.
    let m_tilde = if trunc.max_order >= 1 {
        coeffs
            .iter()
            .map(|row| (1..=modes).map(|k| row[position[&MultiIndex::unit(k)]]).collect())
            .collect()
    } else {
        vec![vec![0.0; modes]; times.len()]
    };
    Ok(PropagatorSolution {
        trunc,
        times,
        indices,
        coeffs,
        m_tilde,
    })
}
