//! Volterra kernels `K(t, s)`, the operator `K*`, covariance functions and
//! the fractional Brownian motion kernel.

pub mod covariance;
pub mod fbm;
pub mod operator;

pub use covariance::{covariance_from_kernel, hr_gram, white_noise_factor, CovarianceFunction};
pub use fbm::{fbm_c_h, fbm_k1, fbm_kernel, fbm_kernel_dt, FbmKernel};
pub use operator::{
    k1_empirical, k_apply_basis, kstar_apply, kstar_apply_step, m_tilde, m_tilde_all,
    op_norm_bound, op_norm_estimate,
};

use serde::{Deserialize, Serialize};

use crate::error::{ChaosError, Result};
use crate::function_space::{QuadratureRule, Side};

/// An adapted Volterra kernel: `K(t, s) = 0` for `s > t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelWire", into = "KernelWire")]
pub enum KernelSpec {
    /// `K(t, s) = χ_t(s)`; `K*` is the identity.
    Brownian,
    Fbm(FbmKernel),
    CustomGrid(GridKernel),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum KernelWire {
    Brownian,
    Fbm { hurst: f64 },
    CustomGrid { t: Vec<f64>, s: Vec<f64>, values: Vec<Vec<f64>> },
}

impl TryFrom<KernelWire> for KernelSpec {
    type Error = ChaosError;

    fn try_from(w: KernelWire) -> Result<Self> {
        match w {
            KernelWire::Brownian => Ok(Self::Brownian),
            KernelWire::Fbm { hurst } => Self::fbm(hurst),
            KernelWire::CustomGrid { t, s, values } => Ok(Self::CustomGrid(GridKernel::new(t, s, values)?)),
        }
    }
}

impl From<KernelSpec> for KernelWire {
    fn from(k: KernelSpec) -> Self {
        match k {
            KernelSpec::Brownian => Self::Brownian,
            KernelSpec::Fbm(f) => Self::Fbm { hurst: f.hurst() },
            KernelSpec::CustomGrid(g) => Self::CustomGrid {
                t: g.t_points,
                s: g.s_points,
                values: g.values,
            },
        }
    }
}

impl KernelSpec {
    pub fn fbm(hurst: f64) -> Result<Self> {
        Ok(Self::Fbm(FbmKernel::new(hurst)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Brownian => "brownian",
            Self::Fbm(_) => "fbm",
            Self::CustomGrid(_) => "custom-grid",
        }
    }

    pub fn adapted(&self) -> bool {
        true
    }

    /// `K(t, s)`; zero for `s > t`.
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        match self {
            Self::Brownian => {
                if s <= t {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Fbm(f) => f.eval(t, s),
            Self::CustomGrid(g) => g.eval(t, s),
        }
    }

    /// `K(s⁺, s)`.
    pub fn diag_limit(&self, s: f64) -> f64 {
        match self {
            Self::Brownian => 1.0,
            Self::Fbm(_) => 0.0,
            Self::CustomGrid(g) => g.eval(s, s),
        }
    }

    /// `K^{(1)}(t, s) = ∂K/∂t` for `t > s`.
    pub fn dt_eval(&self, t: f64, s: f64) -> f64 {
        match self {
            Self::Brownian => 0.0,
            Self::Fbm(f) => f.dt_eval(t, s),
            Self::CustomGrid(g) => g.dt_eval(t, s),
        }
    }

    /// Exponent `γ` with `K^{(1)}(t, s) ~ (t − s)^γ` as `t ↓ s`, if singular.
    pub fn dt_singularity(&self) -> Option<f64> {
        match self {
            Self::Fbm(f) => Some(f.hurst() - 1.5),
            _ => None,
        }
    }

    /// Exponent `γ₀` with `K(t, s) ~ s^{γ₀}` as `s ↓ 0`, if singular.
    pub fn origin_exponent(&self) -> Option<f64> {
        match self {
            Self::Fbm(f) => Some(0.5 - f.hurst()),
            _ => None,
        }
    }

    /// `K_0 = sup_s |K(s⁺, s)|`.
    pub fn k0(&self) -> f64 {
        match self {
            Self::Brownian => 1.0,
            Self::Fbm(_) => 0.0,
            Self::CustomGrid(g) => g
                .s_points
                .iter()
                .map(|&s| g.eval(s, s).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Closed-form `K_1` where one is known.
    pub fn k1_analytic(&self, horizon: f64) -> Option<f64> {
        match self {
            Self::Brownian => Some(0.0),
            Self::Fbm(f) => fbm_k1(f.hurst(), horizon).ok(),
            Self::CustomGrid(_) => None,
        }
    }

    /// Points in `(0, t)` where the kernel is not smooth in `s`.
    fn breaks_below(&self, t: f64) -> Vec<f64> {
        let mut pts = vec![0.0];
        if let Self::CustomGrid(g) = self {
            pts.extend(g.s_points.iter().copied().filter(|&s| s > 0.0 && s < t));
        }
        pts.push(t);
        pts
    }

    /// Nodes and weights `(s_i, W_i)` with `Σ W_i φ(s_i) ≈ ∫_0^t K(t, s) φ(s) ds`,
    /// for `φ` behaving like `s^{extra}` at the origin.
    pub(crate) fn k_nodes(&self, t: f64, extra: f64, rule: &QuadratureRule) -> Vec<(f64, f64)> {
        if t <= 0.0 {
            return Vec::new();
        }
        match self {
            Self::Fbm(f) => {
                let gamma = 0.5 - f.hurst() + extra;
                let mid = 0.5 * t;
                let mut out: Vec<(f64, f64)> = rule
                    .singular_nodes(0.0, mid, gamma, Side::Left)
                    .expect("integrable origin exponent")
                    .into_iter()
                    .map(|(s, w)| (s, w * f.eval(t, s) * s.powf(-gamma)))
                    .collect();
                out.extend(
                    rule.graded_nodes(mid, t, Side::Right)
                        .into_iter()
                        .map(|(s, w)| (s, w * f.eval(t, s))),
                );
                out
            }
            _ => {
                let mut out = Vec::new();
                for w in self.breaks_below(t).windows(2) {
                    for (s, wt) in rule.composite_nodes(w[0], w[1]) {
                        out.push((s, wt * self.eval(t, s)));
                    }
                }
                out
            }
        }
    }

    /// Nodes and weights with `Σ W_i φ(s_i) ≈ ∫_0^t K^{(1)}(t, s) φ(s) ds`.
    pub(crate) fn dt_nodes(&self, t: f64, extra: f64, rule: &QuadratureRule) -> Vec<(f64, f64)> {
        if t <= 0.0 {
            return Vec::new();
        }
        match self {
            Self::Brownian => Vec::new(),
            Self::Fbm(f) => {
                let a = f.hurst() - 0.5;
                let gamma = -a + extra;
                let mid = 0.5 * t;
                let mut out: Vec<(f64, f64)> = rule
                    .singular_nodes(0.0, mid, gamma, Side::Left)
                    .expect("integrable origin exponent")
                    .into_iter()
                    .map(|(s, w)| (s, w * f.dt_eval(t, s) * s.powf(-gamma)))
                    .collect();
                out.extend(
                    rule.singular_nodes(mid, t, a - 1.0, Side::Right)
                        .expect("integrable diagonal exponent")
                        .into_iter()
                        .map(|(s, w)| (s, w * f.dt_regular(t, s))),
                );
                out
            }
            Self::CustomGrid(g) => {
                let mut out = Vec::new();
                for w in self.breaks_below(t).windows(2) {
                    out.extend(
                        rule.composite_nodes(w[0], w[1])
                            .into_iter()
                            .map(|(s, wt)| (s, wt * g.dt_eval(t, s))),
                    );
                }
                out
            }
        }
    }
}

/// Kernel tabulated on a tensor grid, bilinear in between and clamped at the
/// edges; `values[i][j] = K(t_i, s_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridKernel {
    t_points: Vec<f64>,
    s_points: Vec<f64>,
    values: Vec<Vec<f64>>,
}

fn check_axis(name: &str, pts: &[f64]) -> Result<()> {
    if pts.len() < 2 || !pts.windows(2).all(|w| w[0] < w[1]) || pts.iter().any(|x| !x.is_finite()) {
        return Err(ChaosError::Config(format!(
            "{name} grid must hold at least two strictly increasing finite points"
        )));
    }
    Ok(())
}

/// `(i, λ)` with `x = (1 − λ) p_i + λ p_{i+1}`, clamped to the grid.
fn locate(pts: &[f64], x: f64) -> (usize, f64) {
    let n = pts.len();
    if x <= pts[0] {
        return (0, 0.0);
    }
    if x >= pts[n - 1] {
        return (n - 2, 1.0);
    }
    let i = pts.partition_point(|&p| p <= x) - 1;
    (i, (x - pts[i]) / (pts[i + 1] - pts[i]))
}

impl GridKernel {
    pub fn new(t_points: Vec<f64>, s_points: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_axis("t", &t_points)?;
        check_axis("s", &s_points)?;
        if values.len() != t_points.len() || values.iter().any(|r| r.len() != s_points.len()) {
            return Err(ChaosError::Dimension(format!(
                "kernel table must be {}×{}",
                t_points.len(),
                s_points.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ChaosError::Config("kernel table holds non-finite values".into()));
        }
        Ok(Self {
            t_points,
            s_points,
            values,
        })
    }

    /// CSV with a header row of `s` points and a leading column of `t` points;
    /// the top-left cell is a label and is ignored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let parse = |cell: &str| {
            cell.trim()
                .parse::<f64>()
                .map_err(|e| ChaosError::Parse(format!("{cell:?}: {e}")))
        };
        let header = rows.next().ok_or_else(|| ChaosError::Parse("empty kernel table".into()))?;
        let s_points = header.split(',').skip(1).map(parse).collect::<Result<Vec<_>>>()?;
        let mut t_points = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            let mut cells = row.split(',');
            t_points.push(parse(cells.next().unwrap_or(""))?);
            values.push(cells.map(parse).collect::<Result<Vec<_>>>()?);
        }
        Self::new(t_points, s_points, values)
    }

    fn bilinear(&self, t: f64, s: f64) -> f64 {
        let (i, a) = locate(&self.t_points, t);
        let (j, b) = locate(&self.s_points, s);
        let v = &self.values;
        (1.0 - a) * ((1.0 - b) * v[i][j] + b * v[i][j + 1]) + a * ((1.0 - b) * v[i + 1][j] + b * v[i + 1][j + 1])
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        if s > t {
            0.0
        } else {
            self.bilinear(t, s)
        }
    }

    /// Slope in `t` of the bilinear interpolant; zero outside the `t` range.
    pub fn dt_eval(&self, t: f64, s: f64) -> f64 {
        if s >= t || t < self.t_points[0] || t > *self.t_points.last().expect("non-empty") {
            return 0.0;
        }
        let (i, _) = locate(&self.t_points, t);
        let (t0, t1) = (self.t_points[i], self.t_points[i + 1]);
        (self.bilinear(t1, s) - self.bilinear(t0, s)) / (t1 - t0)
    }

    pub fn t_points(&self) -> &[f64] {
        &self.t_points
    }

    pub fn s_points(&self) -> &[f64] {
        &self.s_points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernels() -> Vec<KernelSpec> {
        let pts: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let values = pts
            .iter()
            .map(|&t| pts.iter().map(|&s| if s <= t { 1.0 + t - s } else { 0.0 }).collect())
            .collect();
        vec![
            KernelSpec::Brownian,
            KernelSpec::fbm(0.75).unwrap(),
            KernelSpec::CustomGrid(GridKernel::new(pts.clone(), pts, values).unwrap()),
        ]
    }

    #[test]
    fn adapted_kernels_vanish_above_diagonal() {
        for k in kernels() {
            assert!(k.adapted());
            for &(t, s) in &[(0.2, 0.3), (0.5, 0.9), (0.0, 0.1)] {
                assert_eq!(k.eval(t, s), 0.0, "{}", k.name());
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference_off_diagonal() {
        for k in kernels() {
            let (t, s, h) = (0.7, 0.2, 1e-6);
            let fd = (k.eval(t + h, s) - k.eval(t, s)) / h;
            assert!((fd - k.dt_eval(t, s)).abs() < 1e-4, "{}: {fd} vs {}", k.name(), k.dt_eval(t, s));
        }
    }

    #[test]
    fn metadata() {
        let ks = kernels();
        assert_eq!(ks[0].diag_limit(0.3), 1.0);
        assert_eq!(ks[1].diag_limit(0.3), 0.0);
        assert!((ks[2].diag_limit(0.375) - 1.0).abs() < 1e-12);
        assert_eq!(ks[1].dt_singularity(), Some(-0.75));
        assert_eq!(ks[1].origin_exponent(), Some(-0.25));
        assert_eq!(ks[0].dt_singularity(), None);
        assert_eq!(ks[0].k0(), 1.0);
        assert_eq!(ks[1].k0(), 0.0);
    }

    #[test]
    fn k_nodes_integrate_the_kernel() {
        let rule = QuadratureRule::default();
        let k = KernelSpec::fbm(0.75).unwrap();
        // ∫_0^t K(t,s) ds against a fine direct rule.
        let t = 0.8;
        let got: f64 = k.k_nodes(t, 0.0, &rule).iter().map(|&(_, w)| w).sum();
        let fine = QuadratureRule::gauss_legendre(64, 24);
        let want = fine.singular(|s| k.eval(t, s) * s.powf(0.25), 0.0, 0.4, -0.25).unwrap()
            + fine.integrate_graded(|s| k.eval(t, s), 0.4, t, Side::Right);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        // K^{(1)} integrates back to K: ∫_s^t K^{(1)}(τ, s) dτ = K(t, s).
        let s = 0.3;
        let direct = rule
            .singular(|tau| match &k {
                KernelSpec::Fbm(f) => f.dt_regular(tau, s),
                _ => unreachable!(),
            }, s, t, -0.75)
            .unwrap();
        assert!((direct - k.eval(t, s)).abs() < 1e-10);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let text = "t\\s,0,0.5,1\n0,0,0,0\n0.5,1,1,0\n1,1,1,1\n";
        let g = GridKernel::from_csv(text).unwrap();
        assert_eq!(g.s_points(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.eval(0.75, 0.25), 1.0);
        assert!(GridKernel::from_csv("x,0,1\n0,1\n").is_err());
        assert!(GridKernel::from_csv("x,0,a\n0,1,1\n1,1,1\n").is_err());
        assert!(GridKernel::from_csv("").is_err());
    }

    #[test]
    fn json_round_trip() {
        for k in kernels() {
            let json = serde_json::to_string(&k).unwrap();
            let back: KernelSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, k);
        }
        assert_eq!(serde_json::to_string(&KernelSpec::fbm(0.75).unwrap()).unwrap(), r#"{"kind":"fbm","hurst":0.75}"#);
        assert!(serde_json::from_str::<KernelSpec>(r#"{"kind":"fbm","hurst":0.3}"#).is_err());
    }
}
