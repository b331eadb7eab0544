//! Square-integrable random variables in truncated chaos coordinates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hermite::normalized_hermite_all;
use super::{MultiIndex, Truncation};
use crate::error::{ChaosError, Result};

/// `η = Σ_α η_α ξ_α` over a truncated index set. Absent coefficients are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpansionWire", into = "ExpansionWire")]
pub struct ChaosExpansion {
    trunc: Truncation,
    coeffs: BTreeMap<MultiIndex, f64>,
}

/// Result of a truncated Wick product.
#[derive(Clone, Debug, PartialEq)]
pub struct WickProduct {
    pub product: ChaosExpansion,
    /// `Σ out(γ)²` over the products that landed above the maximal order.
    pub dropped_mass: f64,
}

impl ChaosExpansion {
    pub fn zero(trunc: Truncation) -> Self {
        Self {
            trunc,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(trunc: Truncation, value: f64) -> Self {
        let mut out = Self::zero(trunc);
        out.coeffs.insert(MultiIndex::zero(), value);
        out.prune();
        out
    }

    /// The single basis element `ξ_α`.
    pub fn basis_element(trunc: Truncation, alpha: MultiIndex) -> Result<Self> {
        Self::from_coeffs(trunc, [(alpha, 1.0)])
    }

    /// First-chaos element `Σ_k c_k ξ_{ε_k}`.
    pub fn first_chaos(trunc: Truncation, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() > trunc.modes {
            return Err(ChaosError::Dimension(format!(
                "{} first-chaos coefficients for {} modes",
                coeffs.len(),
                trunc.modes
            )));
        }
        if trunc.max_order == 0 && coeffs.iter().any(|&c| c != 0.0) {
            return Err(ChaosError::OutsideTruncation {
                index: MultiIndex::unit(1).to_string(),
                trunc,
            });
        }
        Ok(Self::from_coeffs_unchecked(
            trunc,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (MultiIndex::unit(i + 1), c)),
        ))
    }

    /// Sums repeated keys; rejects keys outside the truncation.
    pub fn from_coeffs<I>(trunc: Truncation, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut map = BTreeMap::new();
        for (alpha, value) in coeffs {
            if !trunc.contains(&alpha) {
                return Err(ChaosError::OutsideTruncation {
                    index: alpha.to_string(),
                    trunc,
                });
            }
            *map.entry(alpha).or_insert(0.0) += value;
        }
        let mut out = Self { trunc, coeffs: map };
        out.prune();
        Ok(out)
    }

    pub(crate) fn from_coeffs_unchecked<I>(trunc: Truncation, coeffs: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut map = BTreeMap::new();
        for (alpha, value) in coeffs {
            debug_assert!(trunc.contains(&alpha));
            *map.entry(alpha).or_insert(0.0) += value;
        }
        let mut out = Self { trunc, coeffs: map };
        out.prune();
        out
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, v| *v != 0.0);
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn get(&self, alpha: &MultiIndex) -> f64 {
        self.coeffs.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, alpha: MultiIndex, value: f64) -> Result<()> {
        if !self.trunc.contains(&alpha) {
            return Err(ChaosError::OutsideTruncation {
                index: alpha.to_string(),
                trunc: self.trunc,
            });
        }
        if value == 0.0 {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, value);
        }
        Ok(())
    }

    /// Non-zero coefficients in graded order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.coeffs.iter().map(|(a, &v)| (a, v))
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    /// `E η = η_0`.
    pub fn mean(&self) -> f64 {
        self.get(&MultiIndex::zero())
    }

    /// `E η² = Σ_α η_α²`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|v| v * v).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.norm_sq() - m * m
    }

    /// `Σ_{|α| = n} η_α²`.
    pub fn shell_mass(&self, n: u32) -> f64 {
        self.coeffs
            .iter()
            .filter(|(a, _)| a.order() == n)
            .map(|(_, v)| v * v)
            .sum()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.trunc != other.trunc {
            return Err(ChaosError::TruncationMismatch {
                left: self.trunc,
                right: other.trunc,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, &v) in &other.coeffs {
            *out.coeffs.entry(a.clone()).or_insert(0.0) += v;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.values_mut().for_each(|v| *v *= c);
        out.prune();
        out
    }

    /// Re-expresses the expansion in another truncation; coefficients that do
    /// not fit are discarded and their squared mass returned.
    pub fn retruncated(&self, trunc: Truncation) -> (Self, f64) {
        let mut dropped = 0.0;
        let mut coeffs = BTreeMap::new();
        for (a, &v) in &self.coeffs {
            if trunc.contains(a) {
                coeffs.insert(a.clone(), v);
            } else {
                dropped += v * v;
            }
        }
        (Self { trunc, coeffs }, dropped)
    }

    /// Largest absolute coefficient difference over the union of supports.
    /// Truncations may differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, &v) in &self.coeffs {
            worst = worst.max((v - other.get(a)).abs());
        }
        for (a, &v) in &other.coeffs {
            if !self.coeffs.contains_key(a) {
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    /// Wick product `F ⋄ G`, `ξ_α ⋄ ξ_β = √((α+β)!/(α!β!)) ξ_{α+β}`.
    pub fn wick_product(&self, other: &Self) -> Result<WickProduct> {
        self.check_same(other)?;
        let mut kept: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        let mut dropped: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (a, &fa) in &self.coeffs {
            for (b, &gb) in &other.coeffs {
                let g = a.add(b);
                let value = fa * gb * wick_coefficient(a, b);
                let target = if g.order() as usize <= self.trunc.max_order {
                    &mut kept
                } else {
                    &mut dropped
                };
                *target.entry(g).or_insert(0.0) += value;
            }
        }
        let mut product = Self {
            trunc: self.trunc,
            coeffs: kept,
        };
        product.prune();
        Ok(WickProduct {
            product,
            dropped_mass: dropped.values().map(|v| v * v).sum(),
        })
    }

    /// `η(z) = Σ_α η_α Π_k h_{α_k}(z_k)` for one realization `z_k = ξ_{ε_k}`.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.len() < self.trunc.modes {
            return Err(ChaosError::Dimension(format!(
                "sample has {} coordinates, expansion uses {} modes",
                z.len(),
                self.trunc.modes
            )));
        }
        let max = self.trunc.max_order as u32;
        let table: Vec<Vec<f64>> = z[..self.trunc.modes]
            .iter()
            .map(|&x| normalized_hermite_all(max, x))
            .collect();
        Ok(self.eval_with_table(&table))
    }

    /// Evaluation against precomputed normalized Hermite values,
    /// `table[k-1][n] = h_n(z_k)`.
    pub(crate) fn eval_with_table(&self, table: &[Vec<f64>]) -> f64 {
        self.coeffs
            .iter()
            .map(|(a, &v)| {
                v * a
                    .entries()
                    .iter()
                    .map(|&(k, n)| table[k - 1][n as usize])
                    .product::<f64>()
            })
            .sum()
    }

    /// `E η³`, from the closed form of `E[h_a h_b h_c]` for one Gaussian.
    pub fn third_moment(&self) -> f64 {
        let terms: Vec<(&MultiIndex, f64)> = self.iter().collect();
        let mut total = 0.0;
        for (a, fa) in &terms {
            for (b, fb) in &terms {
                for (c, fc) in &terms {
                    let e = triple_expectation(a, b, c);
                    if e != 0.0 {
                        total += fa * fb * fc * e;
                    }
                }
            }
        }
        total
    }
}

/// `√((α+β)!/(α!β!)) = Π_k √binom(α_k+β_k, α_k)`.
pub fn wick_coefficient(a: &MultiIndex, b: &MultiIndex) -> f64 {
    let mut prod = 1.0;
    let (ea, eb) = (a.entries(), b.entries());
    let (mut i, mut j) = (0, 0);
    while i < ea.len() && j < eb.len() {
        match ea[i].0.cmp(&eb[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                prod *= binomial_f64(ea[i].1 + eb[j].1, ea[i].1);
                i += 1;
                j += 1;
            }
        }
    }
    prod.sqrt()
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    if n <= 60 {
        let mut acc: u64 = 1;
        for i in 0..k as u64 {
            acc = acc * (n as u64 - i) / (i + 1);
        }
        acc as f64
    } else {
        use super::multi_index::ln_factorial;
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}

/// `E[ξ_α ξ_β ξ_γ]` as a product over modes of
/// `E[h_a h_b h_c] = √(a!b!c!) / ((s−a)!(s−b)!(s−c)!)`, `2s = a+b+c`.
pub fn triple_expectation(a: &MultiIndex, b: &MultiIndex, c: &MultiIndex) -> f64 {
    use super::multi_index::ln_factorial;
    let mut log = 0.0;
    let mut touched = std::collections::BTreeSet::new();
    for alpha in [a, b, c] {
        touched.extend(alpha.entries().iter().map(|&(k, _)| k));
    }
    for k in touched {
        let (x, y, z) = (a.get(k), b.get(k), c.get(k));
        let sum = x + y + z;
        if sum % 2 == 1 {
            return 0.0;
        }
        let s = sum / 2;
        if s < x || s < y || s < z {
            return 0.0;
        }
        log += 0.5 * (ln_factorial(x) + ln_factorial(y) + ln_factorial(z))
            - ln_factorial(s - x)
            - ln_factorial(s - y)
            - ln_factorial(s - z);
    }
    log.exp()
}

/// `ξ_α(z) = Π_k H_{α_k}(z_k)/√(α_k!)`.
pub fn xi_alpha_eval(alpha: &MultiIndex, z: &[f64]) -> Result<f64> {
    if alpha.max_position() > z.len() {
        return Err(ChaosError::Dimension(format!(
            "index {alpha} needs {} coordinates, got {}",
            alpha.max_position(),
            z.len()
        )));
    }
    Ok(alpha
        .entries()
        .iter()
        .map(|&(k, n)| normalized_hermite_all(n, z[k - 1])[n as usize])
        .product())
}

/// Truncated Wick exponential `exp^⋄(Σ_k c_k ξ_{ε_k})`: coefficient
/// `c^α/√(α!)` at every `α ∈ I(K, N)`, including the unit term at the zero index.
pub fn wick_exp_first_chaos(c: &[f64], trunc: Truncation) -> Result<ChaosExpansion> {
    if c.len() != trunc.modes {
        return Err(ChaosError::Dimension(format!(
            "{} coefficients for {} modes",
            c.len(),
            trunc.modes
        )));
    }
    let coeffs = trunc.enumerate().into_iter().map(|alpha| {
        let value = monomial(c, &alpha) / alpha.sqrt_factorial();
        (alpha, value)
    });
    Ok(ChaosExpansion::from_coeffs_unchecked(trunc, coeffs))
}

/// `c^α = Π_k c_k^{α_k}`.
pub fn monomial(c: &[f64], alpha: &MultiIndex) -> f64 {
    alpha
        .entries()
        .iter()
        .map(|&(k, n)| c[k - 1].powi(n as i32))
        .product()
}

#[derive(Serialize, Deserialize)]
struct ExpansionWire {
    trunc: Truncation,
    coeffs: Vec<CoeffWire>,
}

#[derive(Serialize, Deserialize)]
struct CoeffWire {
    alpha: Vec<[usize; 2]>,
    value: f64,
}

pub(crate) fn alpha_to_wire(alpha: &MultiIndex) -> Vec<[usize; 2]> {
    alpha
        .entries()
        .iter()
        .map(|&(k, v)| [k, v as usize])
        .collect()
}

pub(crate) fn alpha_from_wire(pairs: &[[usize; 2]]) -> Result<MultiIndex> {
    let canonical = pairs.windows(2).all(|w| w[0][0] < w[1][0]) && pairs.iter().all(|p| p[1] > 0);
    if !canonical {
        return Err(ChaosError::InvalidMultiIndex(format!(
            "{pairs:?} is not in canonical sparse form"
        )));
    }
    MultiIndex::from_pairs(pairs.iter().map(|p| (p[0], p[1] as u32)))
}

impl From<ChaosExpansion> for ExpansionWire {
    fn from(e: ChaosExpansion) -> Self {
        ExpansionWire {
            trunc: e.trunc,
            coeffs: e
                .coeffs
                .iter()
                .map(|(a, &value)| CoeffWire {
                    alpha: alpha_to_wire(a),
                    value,
                })
                .collect(),
        }
    }
}

impl TryFrom<ExpansionWire> for ChaosExpansion {
    type Error = ChaosError;

    fn try_from(w: ExpansionWire) -> Result<Self> {
        if w.trunc.modes == 0 {
            return Err(ChaosError::Config("truncation needs at least one mode".into()));
        }
        let coeffs = w
            .coeffs
            .iter()
            .map(|c| Ok((alpha_from_wire(&c.alpha)?, c.value)))
            .collect::<Result<Vec<_>>>()?;
        ChaosExpansion::from_coeffs(w.trunc, coeffs)
    }
}
