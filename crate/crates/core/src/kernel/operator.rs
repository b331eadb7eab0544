//! The operator `K*`, its norm, the constant `K_1`, and the kernel applied to
//! basis functions.

use nalgebra::{DMatrix, DVector};

use super::KernelSpec;
use crate::error::{ChaosError, Result};
use crate::function_space::{Basis, QuadratureRule, Side, StepFunction};

/// `K*f` for a step function `f = Σ a_i (χ_{s_{i+1}} − χ_{s_i})`:
/// `Σ_i a_i (K(s_{i+1}, s) − K(s_i, s))`. Adaptedness makes the terms with
/// `s_{i+1} < s` vanish, which leaves `a_i K(s_{i+1}, s) + Σ_{k>i} …` on the
/// cell containing `s`.
pub fn kstar_apply_step<'a>(kernel: &'a KernelSpec, f: &'a StepFunction) -> impl Fn(f64) -> f64 + 'a {
    move |s| {
        let b = f.breaks();
        let first = f.cell(s).unwrap_or(0);
        if s > *b.last().expect("non-empty") {
            return 0.0;
        }
        f.values()
            .iter()
            .enumerate()
            .skip(first)
            .map(|(i, &a)| a * (kernel.eval(b[i + 1], s) - kernel.eval(b[i], s)))
            .sum()
    }
}

/// `(K*f)(s) = K(s⁺, s) f(s) + ∫_s^T f(t) K^{(1)}(t, s) dt`.
pub fn kstar_apply<'a, F>(
    kernel: &'a KernelSpec,
    f: F,
    horizon: f64,
    rule: &'a QuadratureRule,
) -> impl Fn(f64) -> f64 + 'a
where
    F: Fn(f64) -> f64 + 'a,
{
    move |s| {
        let diag = kernel.diag_limit(s) * f(s);
        let tail = match kernel {
            KernelSpec::Brownian => 0.0,
            KernelSpec::Fbm(k) => {
                if s <= 0.0 || s >= horizon {
                    0.0
                } else {
                    rule.singular(|t| f(t) * k.dt_regular(t, s), s, horizon, k.hurst() - 1.5)
                        .expect("integrable diagonal exponent")
                }
            }
            KernelSpec::CustomGrid(g) => {
                let mut pts = vec![s];
                pts.extend(g.t_points().iter().copied().filter(|&t| t > s && t < horizon));
                pts.push(horizon);
                rule.integrate_piecewise(|t| f(t) * g.dt_eval(t, s), &pts)
            }
        };
        diag + tail
    }
}

/// `M̃_k(t) = ∫_0^t K(t, s) m_k(s) ds` for `k = 1..=modes`.
pub fn m_tilde_all(kernel: &KernelSpec, basis: &Basis, modes: usize, t: f64, rule: &QuadratureRule) -> Vec<f64> {
    if let KernelSpec::Brownian = kernel {
        return basis.antiderivs(modes, t);
    }
    let mut out = vec![0.0; modes];
    for (s, w) in kernel.k_nodes(t, 0.0, rule) {
        for (o, m) in out.iter_mut().zip(basis.values(modes, s)) {
            *o += w * m;
        }
    }
    out
}

/// Single mode of [`m_tilde_all`], with domain checks.
pub fn m_tilde(kernel: &KernelSpec, basis: &Basis, k: usize, t: f64, rule: &QuadratureRule) -> Result<f64> {
    if k == 0 {
        return Err(ChaosError::Dimension("basis modes start at 1".into()));
    }
    if !(0.0..=basis.horizon).contains(&t) {
        return Err(ChaosError::domain("t", t, format!("[0, {}]", basis.horizon)));
    }
    if let KernelSpec::Brownian = kernel {
        return Ok(basis.antideriv_value(k, t));
    }
    Ok(kernel
        .k_nodes(t, 0.0, rule)
        .into_iter()
        .map(|(s, w)| w * basis.value(k, s))
        .sum())
}

/// `m̃_k(t) = (K m_k)(t) = K(t⁺, t) m_k(t) + ∫_0^t K^{(1)}(t, s) m_k(s) ds`,
/// the derivative of `M̃_k`.
pub fn k_apply_basis(kernel: &KernelSpec, basis: &Basis, modes: usize, t: f64, rule: &QuadratureRule) -> Vec<f64> {
    let diag = kernel.diag_limit(t);
    let mut out: Vec<f64> = if diag != 0.0 {
        basis.values(modes, t).into_iter().map(|m| diag * m).collect()
    } else {
        vec![0.0; modes]
    };
    for (s, w) in kernel.dt_nodes(t, 0.0, rule) {
        for (o, m) in out.iter_mut().zip(basis.values(modes, s)) {
            *o += w * m;
        }
    }
    out
}

/// `∫_0^t K(T, s) K^{(1)}(t, s) ds`.
fn k1_integrand(kernel: &KernelSpec, horizon: f64, t: f64, rule: &QuadratureRule) -> f64 {
    let extra = kernel.origin_exponent().unwrap_or(0.0);
    kernel
        .dt_nodes(t, extra, rule)
        .into_iter()
        .map(|(s, w)| w * kernel.eval(horizon, s))
        .sum()
}

/// `sup_{0<t≤T} ∫_0^t K(T, s) K^{(1)}(t, s) ds`: a scan over 256 uniform
/// points, then bracket halving around the best point until the supremum
/// moves by less than `1e-6` and the bracket is below `T/4096`.
pub fn k1_empirical(kernel: &KernelSpec, horizon: f64, rule: &QuadratureRule) -> f64 {
    if let KernelSpec::Brownian = kernel {
        return 0.0;
    }
    let f = |t: f64| k1_integrand(kernel, horizon, t, rule);
    let n = 256usize;
    let h = horizon / n as f64;
    let (mut t_best, mut best) = (1..=n)
        .map(|i| {
            let t = h * i as f64;
            (t, f(t))
        })
        .fold((horizon, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    let mut half = h;
    for _ in 0..40 {
        half *= 0.5;
        let mut moved = 0.0f64;
        for t in [t_best - half, t_best + half] {
            if t > 0.0 && t <= horizon {
                let v = f(t);
                if v > best {
                    moved = moved.max(v - best);
                    best = v;
                    t_best = t;
                }
            }
        }
        if moved < 1e-6 && half < horizon / 4096.0 {
            break;
        }
    }
    best
}

/// `√(2(K_0² + K_1))`, or `√K_1` when `K_0 = 0`.
pub fn op_norm_bound(k0: f64, k1: f64) -> f64 {
    if k0 > 0.0 {
        (2.0 * (k0 * k0 + k1)).sqrt()
    } else {
        k1.sqrt()
    }
}

/// Galerkin matrix of `K*` on the orthonormal cell indicators of a uniform
/// grid: `A_ij = (1/h) ∫_{cell i} (K(t_{j+1}, s) − K(t_j, s)) ds`.
pub fn kstar_matrix(kernel: &KernelSpec, horizon: f64, n: usize, rule: &QuadratureRule) -> DMatrix<f64> {
    let h = horizon / n as f64;
    let grid = |i: usize| horizon * i as f64 / n as f64;
    let mut a = DMatrix::zeros(n, n);
    match kernel {
        KernelSpec::Fbm(k) => {
            let alpha = k.hurst() - 0.5;
            let near = QuadratureRule::gauss_legendre(2, 12);
            let tensor = QuadratureRule::gauss_legendre(1, 8);
            for i in 0..n {
                let (lo, hi) = (grid(i), grid(i + 1));
                // Nodes on cell i; the first cell carries the s^{−α} factor.
                let cell_nodes: Vec<(f64, f64)> = if i == 0 {
                    near.singular_nodes(lo, hi, -alpha, Side::Left)
                        .expect("integrable")
                        .into_iter()
                        .map(|(s, w)| (s, w * s.powf(alpha)))
                        .collect()
                } else {
                    tensor.composite_nodes(lo, hi)
                };
                // j = i: K(t_{i+1}, s) is Hölder at the right end of the cell.
                let diag: f64 = if i == 0 {
                    kernel.k_nodes(hi, 0.0, &near).iter().map(|&(_, w)| w).sum()
                } else {
                    near.graded_nodes(lo, hi, Side::Right)
                        .into_iter()
                        .map(|(s, w)| w * k.eval(hi, s))
                        .sum()
                };
                a[(i, i)] = diag / h;
                if i + 1 < n {
                    let t2 = grid(i + 2);
                    let nodes: Vec<(f64, f64)> = if i == 0 {
                        cell_nodes.clone()
                    } else {
                        near.graded_nodes(lo, hi, Side::Right)
                    };
                    let v: f64 = nodes.iter().map(|&(s, w)| w * (k.eval(t2, s) - k.eval(hi, s))).sum();
                    a[(i, i + 1)] = v / h;
                }
                // j ≥ i + 2: smooth double integral of K^{(1)}.
                let s_pre: Vec<(f64, f64, f64)> = cell_nodes
                    .iter()
                    .map(|&(s, w)| (s, w, k.dt_regular(1.0, s)))
                    .collect();
                for j in (i + 2)..n {
                    let mut v = 0.0;
                    for (tau, wt) in tensor.composite_nodes(grid(j), grid(j + 1)) {
                        let tau_pow = tau.powf(alpha);
                        for &(s, ws, reg) in &s_pre {
                            v += wt * ws * reg * tau_pow * (tau - s).powf(alpha - 1.0);
                        }
                    }
                    a[(i, j)] = v / h;
                }
            }
        }
        _ => {
            for i in 0..n {
                let nodes = rule.composite_nodes(grid(i), grid(i + 1));
                for j in i..n {
                    let (t0, t1) = (grid(j), grid(j + 1));
                    let v: f64 = nodes
                        .iter()
                        .map(|&(s, w)| w * (kernel.eval(t1, s) - kernel.eval(t0, s)))
                        .sum();
                    a[(i, j)] = v / h;
                }
            }
        }
    }
    a
}

/// Largest singular value of the `n_grid × n_grid` Galerkin discretization of
/// `K*`, by power iteration on `AᵀA` (relative tolerance `1e-8`).
pub fn op_norm_estimate(kernel: &KernelSpec, horizon: f64, n_grid: usize, rule: &QuadratureRule) -> Result<f64> {
    if n_grid < 2 {
        return Err(ChaosError::Config("operator norm estimate needs n_grid ≥ 2".into()));
    }
    let a = kstar_matrix(kernel, horizon, n_grid, rule);
    Ok(largest_singular_value(&a, 1e-8))
}

pub(crate) fn largest_singular_value(a: &DMatrix<f64>, tol: f64) -> f64 {
    let n = a.ncols();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = a.tr_mul(&(a * &v));
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / next;
        if (next - lambda).abs() <= tol * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}
