//! Probabilists' Hermite polynomials and Gauss–Hermite quadrature for the
//! standard Gaussian measure.

use nalgebra::{DMatrix, SymmetricEigen};

/// `H_n(t)` with leading coefficient one, from
/// `H_{n+1}(t) = t·H_n(t) − n·H_{n−1}(t)`.
pub fn hermite(n: u32, t: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = t * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `[H_0(t), …, H_max(t)]`.
pub fn hermite_all(max: u32, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(1.0);
    if max >= 1 {
        out.push(t);
    }
    for k in 1..max as usize {
        out.push(t * out[k] - k as f64 * out[k - 1]);
    }
    out
}

/// `[h_0(t), …, h_max(t)]` with `h_n = H_n/√(n!)`, the orthonormal family.
///
/// Uses the scaled recurrence `√(n+1)·h_{n+1} = t·h_n − √n·h_{n−1}` so no
/// factorial is ever formed.
pub fn normalized_hermite_all(max: u32, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(1.0);
    if max >= 1 {
        out.push(t);
    }
    for k in 1..max as usize {
        let kf = k as f64;
        out.push((t * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt());
    }
    out
}

/// Gauss–Hermite rule for `E f(Z)`, `Z ~ N(0, 1)`: nodes and probability weights.
///
/// Starting values come from the eigenvalues of the Jacobi matrix; each node
/// is then polished by Newton steps on `h_n` and weighted by
/// `1 / (n·h_{n−1}(x)²)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Hermite rule needs at least one node");
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let deg = n as u32;
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..4 {
            let h = normalized_hermite_all(deg, *x);
            let deriv = (n as f64).sqrt() * h[n - 1];
            let step = h[n] / deriv;
            *x -= step;
            if step.abs() < 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let h = normalized_hermite_all(deg, *x);
        weights.push(1.0 / (n as f64 * h[n - 1] * h[n - 1]));
    }
    (nodes, weights)
}
