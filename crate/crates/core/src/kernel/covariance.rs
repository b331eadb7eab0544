//! Covariance functions and their Gram matrices on finite time grids.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::KernelSpec;
use crate::error::{ChaosError, Result};
use crate::function_space::QuadratureRule;

/// `R(t, s) = ∫_0^{t∧s} K(t, τ) K(s, τ) dτ`.
pub fn covariance_from_kernel(kernel: &KernelSpec, t: f64, s: f64, rule: &QuadratureRule) -> f64 {
    if t <= 0.0 || s <= 0.0 {
        return 0.0;
    }
    let (lo, hi) = if t <= s { (t, s) } else { (s, t) };
    if let KernelSpec::Brownian = kernel {
        return lo;
    }
    let extra = kernel.origin_exponent().unwrap_or(0.0);
    kernel
        .k_nodes(lo, extra, rule)
        .into_iter()
        .map(|(tau, w)| w * kernel.eval(hi, tau))
        .sum()
}

/// A symmetric positive-semidefinite function `R(t, s)`.
#[derive(Clone)]
pub struct CovarianceFunction {
    name: String,
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CovarianceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CovarianceFunction").field("name", &self.name).finish()
    }
}

impl CovarianceFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `min(t, s)`.
    pub fn brownian() -> Self {
        Self::new("brownian", |t: f64, s: f64| t.min(s).max(0.0))
    }

    /// `½(t^{2H} + s^{2H} − |t − s|^{2H})`.
    pub fn fbm(hurst: f64) -> Result<Self> {
        super::fbm::check_hurst(hurst)?;
        let e = 2.0 * hurst;
        Ok(Self::new(format!("fbm(H={hurst})"), move |t: f64, s: f64| {
            0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e))
        }))
    }

    /// Covariance of the field generated by an adapted kernel.
    pub fn from_kernel(kernel: KernelSpec, rule: QuadratureRule) -> Self {
        let name = format!("kernel({})", kernel.name());
        Self::new(name, move |t, s| covariance_from_kernel(&kernel, t, s, &rule))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        (self.f)(t, s)
    }
}

/// `G_ij = R(t_i, t_j)`, rejected when its smallest eigenvalue is below
/// `−1e−10` or it is not symmetric.
pub fn hr_gram(cov: &CovarianceFunction, times: &[f64]) -> Result<DMatrix<f64>> {
    if let Some(&t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(ChaosError::domain("t", t, "[0, ∞)"));
    }
    let n = times.len();
    let g = DMatrix::from_fn(n, n, |i, j| cov.eval(times[i], times[j]));
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (g[(i, j)], g[(j, i)]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(ChaosError::InvalidCovariance(format!(
                    "R({}, {}) = {a} but R({}, {}) = {b}",
                    times[i], times[j], times[j], times[i]
                )));
            }
        }
    }
    if n > 0 {
        let min = SymmetricEigen::new(g.clone()).eigenvalues.min();
        if min < -1e-10 {
            return Err(ChaosError::InvalidCovariance(format!(
                "Gram matrix has eigenvalue {min}"
            )));
        }
    }
    Ok(g)
}

/// `L` (n × r) with `L Lᵀ = G` up to the discarded eigenvalues `< 1e−12`;
/// `r` is the numerical rank. Maps iid standard normals to samples with
/// covariance `G`, including the degenerate case.
pub fn white_noise_factor(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(gram.clone());
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= 1e-12)
        .collect();
    DMatrix::from_fn(gram.nrows(), keep.len(), |i, c| {
        let k = keep[c];
        eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_covariance_is_min() {
        let rule = QuadratureRule::default();
        let k = KernelSpec::Brownian;
        assert_eq!(covariance_from_kernel(&k, 0.3, 0.8, &rule), 0.3);
        assert_eq!(covariance_from_kernel(&k, 0.0, 0.8, &rule), 0.0);
        let g = hr_gram(&CovarianceFunction::brownian(), &[0.5, 1.0]).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 1.0]));
    }

    #[test]
    fn fbm_kernel_reproduces_fbm_covariance() {
        let rule = QuadratureRule::default();
        let k = KernelSpec::fbm(0.7).unwrap();
        let exact = CovarianceFunction::fbm(0.7).unwrap();
        let pts = [0.2, 0.4, 0.6, 0.8, 1.0];
        for &t in &pts {
            for &s in &pts {
                let got = covariance_from_kernel(&k, t, s, &rule);
                assert!((got - exact.eval(t, s)).abs() < 1e-8, "({t},{s}): {got} vs {}", exact.eval(t, s));
            }
        }
        assert_eq!(covariance_from_kernel(&k, 0.0, 0.5, &rule), 0.0);
    }

    #[test]
    fn gram_checks() {
        let rank_one = CovarianceFunction::new("ts", |t, s| t * s);
        let g = hr_gram(&rank_one, &[0.5, 1.0, 2.0]).unwrap();
        let eig = SymmetricEigen::new(g.clone()).eigenvalues;
        assert!(eig.iter().all(|&l| l > -1e-12));
        assert_eq!(eig.iter().filter(|&&l| l > 1e-10).count(), 1);
        let l = white_noise_factor(&g);
        assert_eq!(l.ncols(), 1);
        assert!((&l * l.transpose() - &g).abs().max() < 1e-12);

        let fbm = CovarianceFunction::fbm(0.75).unwrap();
        assert!(hr_gram(&fbm, &[0.25, 0.5, 0.75, 1.0]).is_ok());

        let bad = CovarianceFunction::new("neg", |t, s| if t == s { -1.0 } else { 0.0 });
        assert!(matches!(hr_gram(&bad, &[0.5, 1.0]), Err(ChaosError::InvalidCovariance(_))));
        let asym = CovarianceFunction::new("asym", |t, _s| t);
        assert!(hr_gram(&asym, &[0.5, 1.0]).is_err());
        assert!(hr_gram(&fbm, &[-0.5]).is_err());
    }
}
