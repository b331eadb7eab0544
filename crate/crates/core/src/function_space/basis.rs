//! Orthonormal bases of `L_2((0, T))` with closed-form antiderivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ChaosError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// `m_1 = 1/√T`, `m_k = √(2/T) cos((k−1)πt/T)`.
    Cosine,
    /// `m_k = √((2k−1)/T) P_{k−1}(2t/T − 1)`.
    Legendre,
}

impl std::str::FromStr for BasisKind {
    type Err = ChaosError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Self::Cosine),
            "legendre" => Ok(Self::Legendre),
            other => Err(ChaosError::Config(format!("unknown basis {other:?}"))),
        }
    }
}

/// A basis family on `[0, T]`; both families start with the constant `1/√T`,
/// so `M_1(T) = √T` and `M_k(T) = 0` for `k ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub kind: BasisKind,
    pub horizon: f64,
}

impl Basis {
    pub fn new(kind: BasisKind, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(ChaosError::domain("horizon", horizon, "(0, ∞)"));
        }
        Ok(Self { kind, horizon })
    }

    pub fn cosine(horizon: f64) -> Result<Self> {
        Self::new(BasisKind::Cosine, horizon)
    }

    pub fn legendre(horizon: f64) -> Result<Self> {
        Self::new(BasisKind::Legendre, horizon)
    }

    fn check(&self, k: usize, t: f64) -> Result<()> {
        if k == 0 {
            return Err(ChaosError::Dimension("basis modes start at 1".into()));
        }
        if !(0.0..=self.horizon).contains(&t) {
            return Err(ChaosError::domain("t", t, format!("[0, {}]", self.horizon)));
        }
        Ok(())
    }

    /// `m_k(t)`, checked.
    pub fn eval(&self, k: usize, t: f64) -> Result<f64> {
        self.check(k, t)?;
        Ok(self.value(k, t))
    }

    /// `M_k(t) = ∫_0^t m_k`, checked.
    pub fn antideriv(&self, k: usize, t: f64) -> Result<f64> {
        self.check(k, t)?;
        Ok(self.antideriv_value(k, t))
    }

    /// `m_k(t)` without domain checks.
    pub fn value(&self, k: usize, t: f64) -> f64 {
        let horizon = self.horizon;
        match self.kind {
            BasisKind::Cosine => {
                if k == 1 {
                    1.0 / horizon.sqrt()
                } else {
                    (2.0 / horizon).sqrt() * ((k - 1) as f64 * PI * t / horizon).cos()
                }
            }
            BasisKind::Legendre => {
                let x = 2.0 * t / horizon - 1.0;
                ((2 * k - 1) as f64 / horizon).sqrt() * legendre(k - 1, x)
            }
        }
    }

    /// `M_k(t)` without domain checks.
    pub fn antideriv_value(&self, k: usize, t: f64) -> f64 {
        let horizon = self.horizon;
        match self.kind {
            BasisKind::Cosine => {
                if k == 1 {
                    t / horizon.sqrt()
                } else {
                    let w = (k - 1) as f64 * PI / horizon;
                    (2.0 / horizon).sqrt() * (w * t).sin() / w
                }
            }
            BasisKind::Legendre => {
                let n = k - 1;
                let x = 2.0 * t / horizon - 1.0;
                let scale = ((2 * k - 1) as f64 / horizon).sqrt() * 0.5 * horizon;
                if n == 0 {
                    scale * (x + 1.0)
                } else {
                    // ∫_{-1}^x P_n = (P_{n+1}(x) − P_{n−1}(x)) / (2n + 1)
                    scale * (legendre(n + 1, x) - legendre(n - 1, x)) / (2 * n + 1) as f64
                }
            }
        }
    }

    /// `[m_1(t), …, m_K(t)]`.
    pub fn values(&self, modes: usize, t: f64) -> Vec<f64> {
        match self.kind {
            BasisKind::Cosine => (1..=modes).map(|k| self.value(k, t)).collect(),
            BasisKind::Legendre => {
                let x = 2.0 * t / self.horizon - 1.0;
                legendre_all(modes, x)
                    .into_iter()
                    .enumerate()
                    .map(|(n, p)| ((2 * n + 1) as f64 / self.horizon).sqrt() * p)
                    .collect()
            }
        }
    }

    /// `[M_1(t), …, M_K(t)]`.
    pub fn antiderivs(&self, modes: usize, t: f64) -> Vec<f64> {
        (1..=modes).map(|k| self.antideriv_value(k, t)).collect()
    }
}

/// `P_n(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `[P_0(x), …, P_{count−1}(x)]`.
fn legendre_all(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let p = match n {
            0 => 1.0,
            1 => x,
            _ => {
                let nf = n as f64;
                ((2.0 * nf - 1.0) * x * out[n - 1] - (nf - 1.0) * out[n - 2]) / nf
            }
        };
        out.push(p);
    }
    out
}
