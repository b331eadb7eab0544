//! Itô–Skorokhod and Stratonovich integrals as transforms of chaos
//! coefficients, time localization, and integrals against kernel fields.
//!
//! An integrand `η = Σ_α Σ_k η_{α,k} m_k ξ_α` with `α ∈ I(K, N)` integrates to
//! an element of `I(K, N + 1)`: the Itô integral raises the chaos order by one.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::chaos::{malliavin_derivative, ChaosExpansion, HValuedChaos, MultiIndex, Truncation};
use crate::error::{ChaosError, Result};
use crate::function_space::{inner_product, localization_gram, Basis, QuadratureRule, Side};
use crate::kernel::{k_apply_basis, KernelSpec};

fn collect(trunc: Truncation, map: BTreeMap<MultiIndex, f64>) -> ChaosExpansion {
    ChaosExpansion::from_coeffs(trunc, map).expect("indices constructed inside the truncation")
}

/// `B^⋄(η)`: coefficient `Σ_k √α_k η_{α−ε_k, k}` at `α`.
pub fn ito_integral(eta: &HValuedChaos) -> ChaosExpansion {
    let out_trunc = eta.truncation().raised();
    let mut acc = BTreeMap::new();
    for (beta, row) in eta.rows() {
        for (i, &v) in row.iter().enumerate() {
            if v != 0.0 {
                let k = i + 1;
                let scale = ((beta.get(k) + 1) as f64).sqrt();
                *acc.entry(beta.add_unit(k)).or_insert(0.0) += scale * v;
            }
        }
    }
    collect(out_trunc, acc)
}

/// `B^∘(η)`: coefficient `Σ_k (√α_k η_{α−ε_k, k} + √(α_k + 1) η_{α+ε_k, k})`.
/// The output truncation is `(K, N + 1)`, as for the Itô integral.
pub fn strat_integral(eta: &HValuedChaos) -> ChaosExpansion {
    let out_trunc = eta.truncation().raised();
    let mut acc = BTreeMap::new();
    for (alpha, row) in eta.rows() {
        for (i, &v) in row.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let k = i + 1;
            let n = alpha.get(k);
            *acc.entry(alpha.add_unit(k)).or_insert(0.0) += ((n + 1) as f64).sqrt() * v;
            if let Some(lower) = alpha.sub_unit(k) {
                *acc.entry(lower).or_insert(0.0) += (n as f64).sqrt() * v;
            }
        }
    }
    collect(out_trunc, acc)
}

/// `Σ_α (η_α, D ξ_α)_H`, the trace term linking the two integrals.
pub fn malliavin_trace(eta: &HValuedChaos) -> ChaosExpansion {
    let trunc = eta.truncation();
    let mut acc = BTreeMap::new();
    for (alpha, row) in eta.rows() {
        let xi = ChaosExpansion::basis_element(trunc, alpha.clone()).expect("row index is in the truncation");
        for (beta, d) in malliavin_derivative(&xi).rows() {
            let pairing: f64 = d.iter().zip(row).map(|(a, b)| a * b).sum();
            *acc.entry(beta.clone()).or_insert(0.0) += pairing;
        }
    }
    collect(trunc.raised(), acc)
}

/// `B^⋄(η) + Σ_α (η_α, D ξ_α)_H`.
pub fn strat_via_trace(eta: &HValuedChaos) -> ChaosExpansion {
    ito_integral(eta)
        .add(&malliavin_trace(eta))
        .expect("both live in the raised truncation")
}

/// Truncated Brownian path `W_K(t) = Σ_k M_k(t) ξ_k` as an integrand:
/// `η_{ε_k, j} = (M_k, m_j)`.
pub fn brownian_path_integrand(basis: &Basis, trunc: Truncation, rule: &QuadratureRule) -> Result<HValuedChaos> {
    if trunc.max_order < 1 {
        return Err(ChaosError::Config("the path integrand needs max_order ≥ 1".into()));
    }
    let modes = trunc.modes;
    let mut eta = HValuedChaos::zero(trunc);
    for k in 1..=modes {
        let row: Vec<f64> = (1..=modes)
            .map(|j| {
                inner_product(
                    |t| basis.antideriv_value(k, t),
                    |t| basis.value(j, t),
                    basis.horizon,
                    rule,
                )
            })
            .collect();
        eta.set_row(MultiIndex::unit(k), &row)?;
    }
    Ok(eta)
}

/// `s_K = Σ_{k≤K} M_k(T)²`.
pub fn truncated_horizon(basis: &Basis, modes: usize) -> f64 {
    basis
        .antiderivs(modes, basis.horizon)
        .iter()
        .map(|m| m * m)
        .sum()
}

/// Time localization `η ↦ η χ_t` in coefficient form,
/// `η'_{α,j} = Σ_k η_{α,k} (m_k χ_t, m_j)`, with the Gram matrices cached per `t`.
#[derive(Debug)]
pub struct Localizer {
    basis: Basis,
    modes: usize,
    rule: QuadratureRule,
    cache: Mutex<HashMap<u64, Arc<Vec<Vec<f64>>>>>,
}

impl Localizer {
    pub fn new(basis: Basis, modes: usize, rule: QuadratureRule) -> Self {
        Self {
            basis,
            modes,
            rule,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn gram(&self, t: f64) -> Result<Arc<Vec<Vec<f64>>>> {
        if let Some(g) = self.cache.lock().expect("cache poisoned").get(&t.to_bits()) {
            return Ok(g.clone());
        }
        let g = Arc::new(localization_gram(&self.basis, self.modes, t, &self.rule)?);
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(t.to_bits(), g.clone());
        Ok(g)
    }

    pub fn localize(&self, eta: &HValuedChaos, t: f64) -> Result<HValuedChaos> {
        if eta.truncation().modes != self.modes {
            return Err(ChaosError::Dimension(format!(
                "integrand has {} modes, localizer {}",
                eta.truncation().modes,
                self.modes
            )));
        }
        if t >= self.basis.horizon {
            if t > self.basis.horizon {
                return Err(ChaosError::domain("t", t, format!("[0, {}]", self.basis.horizon)));
            }
            return Ok(eta.clone());
        }
        Ok(eta.transform_modes(&self.gram(t)?))
    }
}

/// One-off [`Localizer::localize`].
pub fn localize_integrand(eta: &HValuedChaos, t: f64, basis: &Basis, rule: &QuadratureRule) -> Result<HValuedChaos> {
    Localizer::new(*basis, eta.truncation().modes, rule.clone()).localize(eta, t)
}

/// `A_jk = ∫_0^T m_j(t) m̃_k(t) dt = (K* m_j, m_k)` with `m̃_k = K m_k`.
pub fn field_mode_matrix(kernel: &KernelSpec, basis: &Basis, modes: usize, rule: &QuadratureRule) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; modes]; modes];
    if let KernelSpec::Brownian = kernel {
        for (j, row) in a.iter_mut().enumerate() {
            row[j] = 1.0;
        }
        return a;
    }
    // m̃_k behaves like t^{H−1/2} at the origin.
    for (t, w) in rule.graded_nodes(0.0, basis.horizon, Side::Left) {
        let m = basis.values(modes, t);
        let mt = k_apply_basis(kernel, basis, modes, t, rule);
        for j in 0..modes {
            for k in 0..modes {
                a[j][k] += w * m[j] * mt[k];
            }
        }
    }
    a
}

/// `X^⋄(η) = B^⋄(K* η)`: rows are mapped through `(K* m_j, m_k)` before the
/// Itô transform.
pub fn field_ito_integral(
    eta: &HValuedChaos,
    kernel: &KernelSpec,
    basis: &Basis,
    rule: &QuadratureRule,
) -> Result<ChaosExpansion> {
    if let KernelSpec::Brownian = kernel {
        return Ok(ito_integral(eta));
    }
    let a = field_mode_matrix(kernel, basis, eta.truncation().modes, rule);
    Ok(ito_integral(&eta.transform_modes(&a)))
}

/// `Σ_α |α| ‖η_α‖²` and the share of `‖η‖²` in the top shell `|α| = N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub weighted_sum: f64,
    pub tail_ratio: f64,
}

pub fn admissibility_diagnostic(eta: &HValuedChaos) -> Admissibility {
    let top = eta.truncation().max_order as u32;
    let mut weighted = 0.0;
    let mut tail = 0.0;
    let mut total = 0.0;
    for (alpha, row) in eta.rows() {
        let mass: f64 = row.iter().map(|v| v * v).sum();
        weighted += alpha.order() as f64 * mass;
        total += mass;
        if alpha.order() == top {
            tail += mass;
        }
    }
    Admissibility {
        weighted_sum: weighted,
        tail_ratio: if total > 0.0 { tail / total } else { 0.0 },
    }
}
