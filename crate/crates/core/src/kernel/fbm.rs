//! The Volterra kernel of fractional Brownian motion, `1/2 < H < 1`.

use std::sync::Arc;

use libm::tgamma;

use crate::error::{ChaosError, Result};
use crate::function_space::{QuadratureRule, Side};

pub(crate) fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.5 && hurst < 1.0 {
        Ok(())
    } else {
        Err(ChaosError::domain("H", hurst, "(1/2, 1)"))
    }
}

/// `C_H = (2H Γ(3/2 − H) / (Γ(H + 1/2) Γ(2 − 2H)))^{1/2}`.
pub fn fbm_c_h(hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    Ok((2.0 * hurst * tgamma(1.5 - hurst) / (tgamma(hurst + 0.5) * tgamma(2.0 - 2.0 * hurst))).sqrt())
}

/// `K_1 = H(2H − 1) Γ(H − 1/2) / Γ(H + 1/2) · T^{2H−1}`. The Gamma ratio is
/// `1/(H − 1/2)`, which leaves `2H T^{2H−1}`.
pub fn fbm_k1(hurst: f64, horizon: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(horizon > 0.0) {
        return Err(ChaosError::domain("horizon", horizon, "(0, ∞)"));
    }
    Ok(2.0 * hurst * horizon.powf(2.0 * hurst - 1.0))
}

/// `K(t, s)` with a fresh fBm descriptor; prefer [`FbmKernel::eval`] in loops.
pub fn fbm_kernel(hurst: f64, t: f64, s: f64) -> Result<f64> {
    Ok(FbmKernel::new(hurst)?.eval(t, s))
}

/// `∂K/∂t (t, s)`.
pub fn fbm_kernel_dt(hurst: f64, t: f64, s: f64) -> Result<f64> {
    Ok(FbmKernel::new(hurst)?.dt_eval(t, s))
}

/// fBm kernel with its substitution template precomputed.
///
/// `K(t,s) = C_H (H − 1/2) s^{1/2−H} ∫_s^t (τ − s)^{H−3/2} τ^{H−1/2} dτ`. With
/// `a = H − 1/2` and `τ = s + (t − s) v^{1/a}` the inner integral is
/// `(t − s)^a / a · ∫_0^1 (s + (t − s) v^{1/a})^a dv`, a smooth integrand in `v`
/// apart from a boundary layer near `v = 0` when `s ≪ t`, which the graded
/// panels resolve.
#[derive(Clone, Debug)]
pub struct FbmKernel {
    hurst: f64,
    c_h: f64,
    template: Arc<Vec<(f64, f64)>>,
}

impl PartialEq for FbmKernel {
    fn eq(&self, other: &Self) -> bool {
        self.hurst == other.hurst
    }
}

impl FbmKernel {
    pub fn new(hurst: f64) -> Result<Self> {
        Self::with_rule(hurst, &QuadratureRule::default())
    }

    pub fn with_rule(hurst: f64, rule: &QuadratureRule) -> Result<Self> {
        let c_h = fbm_c_h(hurst)?;
        let p = 1.0 / (hurst - 0.5);
        let template = rule
            .graded_nodes(0.0, 1.0, Side::Left)
            .into_iter()
            .map(|(v, w)| (v.powf(p), w))
            .collect();
        Ok(Self {
            hurst,
            c_h,
            template: Arc::new(template),
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    fn a(&self) -> f64 {
        self.hurst - 0.5
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        if s >= t || s <= 0.0 {
            return 0.0;
        }
        let a = self.a();
        let d = t - s;
        let sum: f64 = self
            .template
            .iter()
            .map(|&(vp, w)| w * (s + d * vp).powf(a))
            .sum();
        self.c_h * (d / s).powf(a) * sum
    }

    pub fn dt_eval(&self, t: f64, s: f64) -> f64 {
        if s >= t || s <= 0.0 {
            return 0.0;
        }
        self.dt_regular(t, s) * (t - s).powf(self.a() - 1.0)
    }

    /// `K^{(1)}(t, s) (t − s)^{3/2−H}`, smooth up to the diagonal.
    pub fn dt_regular(&self, t: f64, s: f64) -> f64 {
        let a = self.a();
        self.c_h * a * (t / s).powf(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_matches_gamma_ratio() {
        assert_eq!(fbm_k1(0.75, 1.0).unwrap(), 1.5);
        assert_eq!(fbm_k1(0.75, 4.0).unwrap(), 3.0);
        for h in [0.51, 0.6, 0.75, 0.9, 0.99] {
            for t in [0.5, 1.0, 2.0] {
                let want = h * (2.0 * h - 1.0) * tgamma(h - 0.5) / tgamma(h + 0.5) * f64::powf(t, 2.0 * h - 1.0);
                assert!((fbm_k1(h, t).unwrap() - want).abs() < 1e-12 * want);
            }
        }
        assert!((fbm_k1(0.501, 1.0).unwrap() - 1.0).abs() < 1e-2);
        assert!(fbm_k1(0.5, 1.0).is_err());
        assert!(fbm_k1(1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_vanishes_on_diagonal_and_is_positive() {
        let k = FbmKernel::new(0.75).unwrap();
        assert_eq!(k.eval(0.4, 0.4), 0.0);
        assert_eq!(k.eval(0.3, 0.4), 0.0);
        for (t, s) in [(1.0, 0.5), (1.0, 1e-6), (0.2, 0.19999), (2.0, 0.1)] {
            assert!(k.eval(t, s) > 0.0);
        }
    }

    #[test]
    fn kernel_matches_refined_oracle() {
        let h = 0.75;
        let k = FbmKernel::new(h).unwrap();
        let (t, s) = (1.0, 0.5);
        let fine = QuadratureRule::gauss_legendre(64, 24);
        let a = h - 0.5;
        let inner = fine
            .singular(|tau: f64| tau.powf(a), s, t, a - 1.0)
            .unwrap();
        let oracle = fbm_c_h(h).unwrap() * a * s.powf(-a) * inner;
        assert!((k.eval(t, s) - oracle).abs() < 1e-8, "{} vs {oracle}", k.eval(t, s));
    }

    #[test]
    fn homogeneity() {
        for h in [0.6, 0.75, 0.9] {
            let k = FbmKernel::new(h).unwrap();
            for &(t, s) in &[(1.0, 0.3), (0.5, 0.01), (2.0, 1.9)] {
                let lambda: f64 = 1.7;
                let lhs = k.eval(lambda * t, lambda * s);
                let rhs = lambda.powf(h - 0.5) * k.eval(t, s);
                assert!((lhs - rhs).abs() < 1e-11 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let k = FbmKernel::new(0.7).unwrap();
        let (t, s, eps) = (0.9, 0.3, 1e-5);
        let fd = (k.eval(t + eps, s) - k.eval(t - eps, s)) / (2.0 * eps);
        assert!((fd - k.dt_eval(t, s)).abs() < 1e-6 * k.dt_eval(t, s).abs());
    }

    #[test]
    fn free_functions_check_domain() {
        assert!(fbm_c_h(0.4).is_err());
        assert!(fbm_kernel(1.2, 1.0, 0.5).is_err());
        assert!(fbm_kernel_dt(0.75, 1.0, 0.5).unwrap() > 0.0);
        // C_{1/2+} → 1: the Brownian normalization.
        assert!((fbm_c_h(0.5 + 1e-9).unwrap() - 1.0).abs() < 1e-6);
    }
}
