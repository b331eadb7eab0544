//! `H`-valued chaos expansions `η = Σ_α Σ_k η_{α,k} m_k ξ_α`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expansion::{alpha_from_wire, alpha_to_wire};
use super::{ChaosExpansion, MultiIndex, Truncation};
use crate::error::{ChaosError, Result};

/// Coefficients `η_{α,k}` for `α ∈ I(K, N)` and modes `1 ≤ k ≤ K`.
///
/// Rows are stored sparsely by multi-index and densely by mode. The mode index
/// refers to whichever orthonormal basis the caller expanded the integrand in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HValuedWire", into = "HValuedWire")]
pub struct HValuedChaos {
    trunc: Truncation,
    rows: BTreeMap<MultiIndex, Vec<f64>>,
}

impl HValuedChaos {
    pub fn zero(trunc: Truncation) -> Self {
        Self {
            trunc,
            rows: BTreeMap::new(),
        }
    }

    /// Non-random integrand `f = Σ_k f_k m_k`.
    pub fn deterministic(trunc: Truncation, f: &[f64]) -> Result<Self> {
        let mut out = Self::zero(trunc);
        out.set_row(MultiIndex::zero(), f)?;
        Ok(out)
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.trunc.modes {
            return Err(ChaosError::Dimension(format!(
                "mode {k} outside 1..={}",
                self.trunc.modes
            )));
        }
        Ok(())
    }

    fn check_index(&self, alpha: &MultiIndex) -> Result<()> {
        if !self.trunc.contains(alpha) {
            return Err(ChaosError::OutsideTruncation {
                index: alpha.to_string(),
                trunc: self.trunc,
            });
        }
        Ok(())
    }

    /// `η_{α,k}`; zero when absent.
    pub fn get(&self, alpha: &MultiIndex, k: usize) -> f64 {
        if k == 0 || k > self.trunc.modes {
            return 0.0;
        }
        self.rows.get(alpha).map_or(0.0, |row| row[k - 1])
    }

    pub fn set(&mut self, alpha: MultiIndex, k: usize, value: f64) -> Result<()> {
        self.check_mode(k)?;
        self.check_index(&alpha)?;
        let modes = self.trunc.modes;
        let row = self.rows.entry(alpha.clone()).or_insert_with(|| vec![0.0; modes]);
        row[k - 1] = value;
        if row.iter().all(|&v| v == 0.0) {
            self.rows.remove(&alpha);
        }
        Ok(())
    }

    pub fn add_to(&mut self, alpha: MultiIndex, k: usize, value: f64) -> Result<()> {
        let current = self.get(&alpha, k);
        self.set(alpha, k, current + value)
    }

    /// Sets the whole row `η_α`; shorter slices are zero-padded.
    pub fn set_row(&mut self, alpha: MultiIndex, values: &[f64]) -> Result<()> {
        self.check_index(&alpha)?;
        if values.len() > self.trunc.modes {
            return Err(ChaosError::Dimension(format!(
                "row of length {} for {} modes",
                values.len(),
                self.trunc.modes
            )));
        }
        let mut row = vec![0.0; self.trunc.modes];
        row[..values.len()].copy_from_slice(values);
        if row.iter().all(|&v| v == 0.0) {
            self.rows.remove(&alpha);
        } else {
            self.rows.insert(alpha, row);
        }
        Ok(())
    }

    /// Row `η_α` as mode coefficients, or `None` when identically zero.
    pub fn row(&self, alpha: &MultiIndex) -> Option<&[f64]> {
        self.rows.get(alpha).map(Vec::as_slice)
    }

    /// Non-zero rows in graded order.
    pub fn rows(&self) -> impl Iterator<Item = (&MultiIndex, &[f64])> + '_ {
        self.rows.iter().map(|(a, r)| (a, r.as_slice()))
    }

    /// True when only the zero-index row is present.
    pub fn is_deterministic(&self) -> bool {
        self.rows.keys().all(MultiIndex::is_zero)
    }

    /// `Σ_{α,k} η_{α,k}²`.
    pub fn norm_sq(&self) -> f64 {
        self.rows.values().flatten().map(|v| v * v).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.rows.values_mut().flatten().for_each(|v| *v *= c);
        out.rows.retain(|_, r| r.iter().any(|&v| v != 0.0));
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.trunc != other.trunc {
            return Err(ChaosError::TruncationMismatch {
                left: self.trunc,
                right: other.trunc,
            });
        }
        let mut out = self.clone();
        for (a, row) in &other.rows {
            let target = out
                .rows
                .entry(a.clone())
                .or_insert_with(|| vec![0.0; self.trunc.modes]);
            target.iter_mut().zip(row).for_each(|(t, v)| *t += v);
        }
        out.rows.retain(|_, r| r.iter().any(|&v| v != 0.0));
        Ok(out)
    }

    /// Mixes the mode coefficients of every row through `matrix`:
    /// `η'_{α,j} = Σ_k η_{α,k} matrix[k][j]`.
    pub fn transform_modes(&self, matrix: &[Vec<f64>]) -> Self {
        let modes = self.trunc.modes;
        let mut out = Self::zero(self.trunc);
        for (a, row) in &self.rows {
            let mut new_row = vec![0.0; modes];
            for (k, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    for (j, slot) in new_row.iter_mut().enumerate() {
                        *slot += v * matrix[k][j];
                    }
                }
            }
            if new_row.iter().any(|&v| v != 0.0) {
                out.rows.insert(a.clone(), new_row);
            }
        }
        out
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let modes = self.trunc.modes.max(other.trunc.modes);
        let keys: std::collections::BTreeSet<&MultiIndex> =
            self.rows.keys().chain(other.rows.keys()).collect();
        let mut worst: f64 = 0.0;
        for a in keys {
            for k in 1..=modes {
                worst = worst.max((self.get(a, k) - other.get(a, k)).abs());
            }
        }
        worst
    }
}

/// Malliavin derivative `D F`, `D ξ_α = Σ_k √α_k ξ_{α−ε_k} m_k`.
///
/// The result lives in the same truncation as `F`.
pub fn malliavin_derivative(f: &ChaosExpansion) -> HValuedChaos {
    let trunc = f.truncation();
    let mut out = HValuedChaos::zero(trunc);
    for (alpha, value) in f.iter() {
        for &(k, n) in alpha.entries() {
            let lower = alpha.sub_unit(k).expect("k is in the support");
            let row = out
                .rows
                .entry(lower)
                .or_insert_with(|| vec![0.0; trunc.modes]);
            row[k - 1] += (n as f64).sqrt() * value;
        }
    }
    out.rows.retain(|_, r| r.iter().any(|&v| v != 0.0));
    out
}

#[derive(Serialize, Deserialize)]
struct HValuedWire {
    trunc: Truncation,
    coeffs: Vec<HCoeffWire>,
}

#[derive(Serialize, Deserialize)]
struct HCoeffWire {
    alpha: Vec<[usize; 2]>,
    k: usize,
    value: f64,
}

impl From<HValuedChaos> for HValuedWire {
    fn from(h: HValuedChaos) -> Self {
        let mut coeffs = Vec::new();
        for (a, row) in &h.rows {
            for (i, &value) in row.iter().enumerate() {
                if value != 0.0 {
                    coeffs.push(HCoeffWire {
                        alpha: alpha_to_wire(a),
                        k: i + 1,
                        value,
                    });
                }
            }
        }
        HValuedWire {
            trunc: h.trunc,
            coeffs,
        }
    }
}

impl TryFrom<HValuedWire> for HValuedChaos {
    type Error = ChaosError;

    fn try_from(w: HValuedWire) -> Result<Self> {
        if w.trunc.modes == 0 {
            return Err(ChaosError::Config("truncation needs at least one mode".into()));
        }
        let mut out = HValuedChaos::zero(w.trunc);
        for c in &w.coeffs {
            out.add_to(alpha_from_wire(&c.alpha)?, c.k, c.value)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_first_element() {
        let tr = Truncation::new(2, 2);
        let f = ChaosExpansion::basis_element(tr, MultiIndex::unit(1)).unwrap();
        let d = malliavin_derivative(&f);
        assert_eq!(d.get(&MultiIndex::zero(), 1), 1.0);
        assert_eq!(d.norm_sq(), 1.0);
    }

    #[test]
    fn derivative_of_second_order_element() {
        let tr = Truncation::new(1, 2);
        let f = ChaosExpansion::basis_element(tr, MultiIndex::pure(1, 2)).unwrap();
        let d = malliavin_derivative(&f);
        assert!((d.get(&MultiIndex::unit(1), 1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.rows().count(), 1);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let f = ChaosExpansion::constant(Truncation::new(3, 2), 4.0);
        assert_eq!(malliavin_derivative(&f).norm_sq(), 0.0);
    }

    #[test]
    fn derivative_obeys_number_operator_identity() {
        // E‖DF‖² = Σ_α |α| F_α².
        let tr = Truncation::new(3, 3);
        let f = ChaosExpansion::from_coeffs(
            tr,
            tr.enumerate()
                .into_iter()
                .enumerate()
                .map(|(i, a)| (a, ((i * 7 % 5) as f64 - 2.0) * 0.3)),
        )
        .unwrap();
        let weighted: f64 = f.iter().map(|(a, v)| a.order() as f64 * v * v).sum();
        assert!((malliavin_derivative(&f).norm_sq() - weighted).abs() < 1e-12);
    }

    #[test]
    fn row_and_entry_validation() {
        let tr = Truncation::new(2, 1);
        let mut h = HValuedChaos::zero(tr);
        assert!(h.set(MultiIndex::zero(), 3, 1.0).is_err());
        assert!(h.set(MultiIndex::pure(1, 2), 1, 1.0).is_err());
        h.set(MultiIndex::unit(2), 1, 0.5).unwrap();
        assert!(!h.is_deterministic());
        h.set(MultiIndex::unit(2), 1, 0.0).unwrap();
        assert!(h.is_deterministic());
    }

    #[test]
    fn json_schema() {
        let tr = Truncation::new(2, 1);
        let mut h = HValuedChaos::zero(tr);
        h.set(MultiIndex::unit(1), 2, 0.5).unwrap();
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(
            json,
            r#"{"trunc":{"modes":2,"max_order":1},"coeffs":[{"alpha":[[1,1]],"k":2,"value":0.5}]}"#
        );
        assert_eq!(serde_json::from_str::<HValuedChaos>(&json).unwrap(), h);
    }
}
