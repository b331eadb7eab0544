//! Composite Gauss–Legendre quadrature, geometric grading toward weakly
//! singular endpoints, and the power substitution for integrable endpoint
//! singularities `(τ − a)^γ`, `−1 < γ < 0`.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{ChaosError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    GaussLegendreComposite,
    SingularSubstitution,
}

/// Endpoint toward which panels are refined geometrically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                deriv = dp;
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            if dp != 0.0 {
                deriv = dp;
            }
            let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Single-panel rule on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Nodes and weights mapped to `[a, b]`, appended to `out`.
    pub fn push_mapped(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        out.extend(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| (mid + half * x, half * w)),
        );
    }
}

/// `(P_n(x), P_n'(x))`.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        0.5 * n as f64 * (n as f64 + 1.0) * x.powi(n as i32 + 1)
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

fn cached_rule(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<std::sync::Mutex<Vec<Option<Arc<GaussLegendre>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    if guard.len() <= n {
        guard.resize(n + 1, None);
    }
    guard[n]
        .get_or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

/// Number of geometric levels used when grading toward an endpoint.
const GRADED_LEVELS: usize = 14;
/// Ratio between successive graded panels.
const GRADED_RATIO: f64 = 0.25;

/// A composite quadrature rule. All integration routines are pure; a rule is
/// cheap to clone and safe to share across threads.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub panels: usize,
    pub nodes: usize,
    pub tolerance: f64,
    rule: Arc<GaussLegendre>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::new(QuadratureKind::GaussLegendreComposite, 8, 16, 1e-10)
    }
}

impl QuadratureRule {
    pub fn new(kind: QuadratureKind, panels: usize, nodes: usize, tolerance: f64) -> Self {
        assert!(panels >= 1 && nodes >= 1, "empty quadrature rule");
        Self {
            kind,
            panels,
            nodes,
            tolerance,
            rule: cached_rule(nodes),
        }
    }

    pub fn gauss_legendre(panels: usize, nodes: usize) -> Self {
        Self::new(QuadratureKind::GaussLegendreComposite, panels, nodes, 1e-10)
    }

    pub fn singular_substitution(panels: usize, nodes: usize) -> Self {
        Self::new(QuadratureKind::SingularSubstitution, panels, nodes, 1e-10)
    }

    /// Same shape with `factor` times as many panels.
    pub fn refined(&self, factor: usize) -> Self {
        Self::new(self.kind, self.panels * factor, self.nodes, self.tolerance)
    }

    pub fn base_rule(&self) -> &GaussLegendre {
        &self.rule
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let h = (b - a) / self.panels as f64;
        (0..self.panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                let hi = if p + 1 == self.panels { b } else { lo + h };
                self.rule.integrate(&f, lo, hi)
            })
            .sum()
    }

    /// Nodes and weights of [`Self::integrate`] on `[a, b]`.
    pub fn composite_nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.panels * self.nodes);
        if a == b {
            return out;
        }
        let h = (b - a) / self.panels as f64;
        for p in 0..self.panels {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == self.panels { b } else { lo + h };
            self.rule.push_mapped(lo, hi, &mut out);
        }
        out
    }

    /// Composite rule over consecutive `breaks`; each interval gets the full
    /// composite rule, so discontinuities at the breaks are integrated exactly.
    pub fn integrate_piecewise<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> f64 {
        breaks
            .windows(2)
            .map(|w| self.integrate(&f, w[0], w[1]))
            .sum()
    }

    /// Nodes and weights of [`Self::integrate_graded`], for callers that share
    /// evaluations between several integrands.
    pub fn graded_nodes(&self, a: f64, b: f64, side: Side) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity((GRADED_LEVELS + 1 + self.panels) * self.nodes);
        if a == b {
            return out;
        }
        let w = b - a;
        let place = |d: f64| match side {
            Side::Left => a + d,
            Side::Right => b - d,
        };
        // Outer region [r·w, w] from the singular end, uniform panels.
        let h = (1.0 - GRADED_RATIO) * w / self.panels as f64;
        for p in 0..self.panels {
            let d0 = GRADED_RATIO * w + p as f64 * h;
            let d1 = if p + 1 == self.panels { w } else { d0 + h };
            let (x0, x1) = (place(d0), place(d1));
            self.rule.push_mapped(x0.min(x1), x0.max(x1), &mut out);
        }
        // Geometric panels down to the singular end.
        let mut outer = GRADED_RATIO * w;
        for level in 0..GRADED_LEVELS {
            let inner = if level + 1 == GRADED_LEVELS {
                0.0
            } else {
                outer * GRADED_RATIO
            };
            let (x0, x1) = (place(inner), place(outer));
            self.rule.push_mapped(x0.min(x1), x0.max(x1), &mut out);
            outer = inner;
        }
        out
    }

    /// Composite rule with panels refined geometrically toward one endpoint,
    /// for integrands that are bounded or weakly singular there
    /// (`|f| ≲ |x − end|^γ`, `γ > −1/2`). The singular endpoint is never
    /// evaluated.
    pub fn integrate_graded<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, side: Side) -> f64 {
        self.graded_nodes(a, b, side)
            .into_iter()
            .map(|(x, w)| w * f(x))
            .sum()
    }

    /// Graded at both ends, split at the midpoint.
    pub fn integrate_graded_both<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        self.integrate_graded(&f, a, mid, Side::Left) + self.integrate_graded(&f, mid, b, Side::Right)
    }

    /// `∫_a^b (τ − a)^γ g(τ) dτ` for smooth `g`, through `u = (τ − a)^{γ+1}`:
    /// the integral becomes `(1/(γ+1)) ∫_0^{(b−a)^{γ+1}} g(a + u^{1/(γ+1)}) du`,
    /// which is evaluated with panels graded toward `u = 0`.
    pub fn singular<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64, gamma: f64) -> Result<f64> {
        Ok(self
            .singular_nodes(a, b, gamma, Side::Left)?
            .into_iter()
            .map(|(x, w)| w * g(x))
            .sum())
    }

    /// `∫_a^b (b − τ)^γ g(τ) dτ`, the mirror image of [`Self::singular`].
    pub fn singular_right<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64, gamma: f64) -> Result<f64> {
        Ok(self
            .singular_nodes(a, b, gamma, Side::Right)?
            .into_iter()
            .map(|(x, w)| w * g(x))
            .sum())
    }

    /// Nodes `τ_i` and weights `w_i` with `Σ w_i g(τ_i) ≈ ∫ |τ − end|^γ g(τ) dτ`.
    pub fn singular_nodes(&self, a: f64, b: f64, gamma: f64, side: Side) -> Result<Vec<(f64, f64)>> {
        if gamma <= -1.0 || gamma.is_nan() {
            return Err(ChaosError::NonIntegrable(gamma));
        }
        if b < a {
            return Err(ChaosError::domain("upper limit", b, format!("[{a}, ∞)")));
        }
        if a == b {
            return Ok(Vec::new());
        }
        let e = gamma + 1.0;
        let p = 1.0 / e;
        let top = (b - a).powf(e);
        let nodes = self.graded_nodes(0.0, top, Side::Left);
        Ok(nodes
            .into_iter()
            .map(|(u, w)| {
                let d = u.powf(p).min(b - a);
                let x = match side {
                    Side::Left => a + d,
                    Side::Right => b - d,
                };
                (x, w / e)
            })
            .collect())
    }

    /// Doubles the panel count until two successive composite estimates
    /// agree to `tolerance` (absolute), starting from this rule.
    pub fn integrate_adaptive<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let mut rule = self.clone();
        let mut prev = rule.integrate(&f, a, b);
        for _ in 0..16 {
            rule = rule.refined(2);
            let next = rule.integrate(&f, a, b);
            if (next - prev).abs() <= self.tolerance {
                return next;
            }
            prev = next;
        }
        prev
    }
}

/// `∫_a^b (τ − a)^γ g(τ) dτ`, `γ ∈ (−1, 0)`.
pub fn quad_singular<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    gamma: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    rule.singular(g, a, b, gamma)
}
