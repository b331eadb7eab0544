//! Orthonormal bases of `L_2((0, T))`, inner products, time localization and
//! quadrature.

pub mod basis;
pub mod quadrature;
pub mod step;

pub use basis::{legendre, Basis, BasisKind};
pub use quadrature::{quad_singular, GaussLegendre, QuadratureKind, QuadratureRule, Side};
pub use step::StepFunction;

use crate::error::{ChaosError, Result};

/// `(f, g)_{L_2(0,T)}` by the composite rule.
pub fn inner_product<F, G>(f: F, g: G, horizon: f64, rule: &QuadratureRule) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    rule.integrate(|t| f(t) * g(t), 0.0, horizon)
}

/// `(f, g)` with the interval split at `breaks` (interior discontinuities).
pub fn inner_product_piecewise<F, G>(f: F, g: G, horizon: f64, breaks: &[f64], rule: &QuadratureRule) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let mut pts: Vec<f64> = std::iter::once(0.0)
        .chain(breaks.iter().copied().filter(|&b| b > 0.0 && b < horizon))
        .chain(std::iter::once(horizon))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    rule.integrate_piecewise(|t| f(t) * g(t), &pts)
}

/// `(f χ_t, m_k) = ∫_0^t f(s) m_k(s) ds`.
pub fn localize_coeff<F>(f: F, t: f64, k: usize, basis: &Basis, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(0.0..=basis.horizon).contains(&t) {
        return Err(ChaosError::domain("t", t, format!("[0, {}]", basis.horizon)));
    }
    if k == 0 {
        return Err(ChaosError::Dimension("basis modes start at 1".into()));
    }
    Ok(rule.integrate(|s| f(s) * basis.value(k, s), 0.0, t))
}

/// Coefficients `(f, m_k)`, `k = 1..=modes`.
pub fn project<F>(f: F, modes: usize, basis: &Basis, rule: &QuadratureRule) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    project_on(f, modes, basis, rule, &[])
}

/// [`project`] with the interval split at interior discontinuities of `f`.
pub fn project_on<F>(f: F, modes: usize, basis: &Basis, rule: &QuadratureRule, breaks: &[f64]) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let mut pts: Vec<f64> = std::iter::once(0.0)
        .chain(breaks.iter().copied().filter(|&b| b > 0.0 && b < basis.horizon))
        .chain(std::iter::once(basis.horizon))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = vec![0.0; modes];
    let nodes = pts.windows(2).flat_map(|w| rule.composite_nodes(w[0], w[1]));
    for (x, wt) in nodes {
        let fx = f(x) * wt;
        if fx != 0.0 {
            for (slot, m) in out.iter_mut().zip(basis.values(modes, x)) {
                *slot += fx * m;
            }
        }
    }
    out
}

/// Localization Gram matrix `L_{kj}(t) = (m_k χ_t, m_j) = ∫_0^t m_k m_j`.
pub fn localization_gram(basis: &Basis, modes: usize, t: f64, rule: &QuadratureRule) -> Result<Vec<Vec<f64>>> {
    if !(0.0..=basis.horizon).contains(&t) {
        return Err(ChaosError::domain("t", t, format!("[0, {}]", basis.horizon)));
    }
    let mut gram = vec![vec![0.0; modes]; modes];
    if t == 0.0 {
        return Ok(gram);
    }
    for (x, w) in rule.composite_nodes(0.0, t) {
        let m = basis.values(modes, x);
        for k in 0..modes {
            for j in k..modes {
                gram[k][j] += w * m[k] * m[j];
            }
        }
    }
    for k in 0..modes {
        for j in 0..k {
            gram[k][j] = gram[j][k];
        }
    }
    Ok(gram)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_inner_products() {
        let rule = QuadratureRule::default();
        let b = Basis::cosine(1.0).unwrap();
        assert!((inner_product(|t| b.value(1, t), |t| b.value(1, t), 1.0, &rule) - 1.0).abs() < 1e-14);
        assert!((inner_product(|t| b.value(2, t), |t| b.value(2, t), 1.0, &rule) - 1.0).abs() < 1e-14);
        let v = inner_product(|t| b.antideriv_value(1, t), |t| b.value(1, t), 1.0, &rule);
        assert!((v - 0.5).abs() < 1e-14);
        let chi = |t: f64| move |s: f64| if s <= t { 1.0 } else { 0.0 };
        let v = inner_product_piecewise(chi(0.25), chi(0.6), 1.0, &[0.25, 0.6], &rule);
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn localization_examples() {
        let rule = QuadratureRule::default();
        let b = Basis::cosine(1.0).unwrap();
        assert!((localize_coeff(|s| b.value(1, s), 1.0, 1, &b, &rule).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(localize_coeff(|s| b.value(1, s), 0.0, 3, &b, &rule).unwrap(), 0.0);
        assert!((localize_coeff(|_| 1.0, 0.4, 1, &b, &rule).unwrap() - 0.4).abs() < 1e-14);
        assert!(localize_coeff(|_| 1.0, 1.2, 1, &b, &rule).is_err());
    }

    #[test]
    fn gram_of_basis_is_identity() {
        let rule = QuadratureRule::gauss_legendre(4, 32);
        for basis in [Basis::cosine(2.0).unwrap(), Basis::legendre(2.0).unwrap()] {
            let g = localization_gram(&basis, 32, 2.0, &rule).unwrap();
            for (k, row) in g.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-10, "{:?} ({k},{j}) = {v}", basis.kind);
                }
            }
        }
    }

    #[test]
    fn parseval_on_indicators() {
        let rule = QuadratureRule::default();
        let b = Basis::cosine(1.0).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let coeffs = project_on(|s| if s <= t { 1.0 } else { 0.0 }, 256, &b, &rule.refined(8), &[t]);
            let mut partial = 0.0;
            let mut last = 0.0;
            for c in &coeffs {
                partial += c * c;
                assert!(partial >= last);
                last = partial;
            }
            assert!(partial <= t + 1e-12 && t - partial <= 1.0 / 256.0, "t={t}: {partial}");
            // Closed form: (χ_t, m_k) = M_k(t).
            for (k, c) in coeffs.iter().enumerate().take(16) {
                assert!((c - b.antideriv_value(k + 1, t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn integration_by_parts_identity() {
        let rule = QuadratureRule::default();
        let b = Basis::cosine(1.0).unwrap();
        let horizon = 1.0;
        for j in 1..=16 {
            for k in 1..=16 {
                let mj_k = inner_product(|t| b.antideriv_value(j, t), |t| b.value(k, t), horizon, &rule);
                let mk_j = inner_product(|t| b.antideriv_value(k, t), |t| b.value(j, t), horizon, &rule);
                let rhs = b.antideriv_value(j, horizon) * b.antideriv_value(k, horizon);
                assert!((mj_k + mk_j - rhs).abs() < 1e-12, "j={j} k={k}");
            }
        }
    }
}
