//! Finite-support multi-indices.
//!
//! A [`MultiIndex`] labels one element `ξ_α` of the Cameron–Martin basis. It is
//! stored sparsely as strictly increasing `(position, value)` pairs with
//! positions starting at 1 and values strictly positive, so structural
//! equality coincides with equality of the underlying sequences.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{ChaosError, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<(usize, u32)>,
}

impl MultiIndex {
    /// The zero index, labelling the constant basis element `ξ_0 = 1`.
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit index `ε_k`.
    pub fn unit(k: usize) -> Self {
        assert!(k >= 1, "multi-index positions start at 1");
        Self {
            entries: vec![(k, 1)],
        }
    }

    /// `n·ε_k`; the zero index when `n == 0`.
    pub fn pure(k: usize, n: u32) -> Self {
        assert!(k >= 1, "multi-index positions start at 1");
        if n == 0 {
            Self::zero()
        } else {
            Self {
                entries: vec![(k, n)],
            }
        }
    }

    /// Builds an index from sparse pairs. Pairs may come in any order and zero
    /// values are dropped; repeated positions and position 0 are rejected.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u32)>,
    {
        let mut entries: Vec<(usize, u32)> = pairs.into_iter().filter(|&(_, v)| v > 0).collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        if entries.first().is_some_and(|&(k, _)| k == 0) {
            return Err(ChaosError::InvalidMultiIndex(
                "positions start at 1".to_string(),
            ));
        }
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ChaosError::InvalidMultiIndex(
                "repeated position".to_string(),
            ));
        }
        Ok(Self { entries })
    }

    /// Builds an index from a dense slice, `dense[i]` being `α_{i+1}`.
    pub fn from_dense(dense: &[u32]) -> Self {
        Self {
            entries: dense
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(|(i, &v)| (i + 1, v))
                .collect(),
        }
    }

    pub fn to_dense(&self, modes: usize) -> Vec<u32> {
        let mut dense = vec![0; modes];
        for &(k, v) in &self.entries {
            if k <= modes {
                dense[k - 1] = v;
            }
        }
        dense
    }

    /// Stored `(position, value)` pairs in increasing position order.
    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `α_k`, zero outside the support.
    pub fn get(&self, k: usize) -> u32 {
        match self.entries.binary_search_by_key(&k, |&(p, _)| p) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    /// `|α| = Σ α_k`.
    pub fn order(&self) -> u32 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    /// Largest position in the support, 0 for the zero index.
    pub fn max_position(&self) -> usize {
        self.entries.last().map_or(0, |&(k, _)| k)
    }

    /// `½ Σ_k ln(α_k!)`, the logarithm of `√(α!)`.
    pub fn sqrt_factorial_ln(&self) -> f64 {
        0.5 * self.entries.iter().map(|&(_, v)| ln_factorial(v)).sum::<f64>()
    }

    /// `√(α!)`.
    pub fn sqrt_factorial(&self) -> f64 {
        self.sqrt_factorial_ln().exp()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    entries.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    entries.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    entries.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        entries.extend_from_slice(&self.entries[i..]);
        entries.extend_from_slice(&other.entries[j..]);
        MultiIndex { entries }
    }

    /// `α + ε_k`.
    pub fn add_unit(&self, k: usize) -> MultiIndex {
        assert!(k >= 1, "multi-index positions start at 1");
        let mut entries = self.entries.clone();
        match entries.binary_search_by_key(&k, |&(p, _)| p) {
            Ok(i) => entries[i].1 += 1,
            Err(i) => entries.insert(i, (k, 1)),
        }
        MultiIndex { entries }
    }

    /// `α − ε_k`, or `None` when `α_k = 0`.
    pub fn sub_unit(&self, k: usize) -> Option<MultiIndex> {
        let i = self.entries.binary_search_by_key(&k, |&(p, _)| p).ok()?;
        let mut entries = self.entries.clone();
        if entries[i].1 == 1 {
            entries.remove(i);
        } else {
            entries[i].1 -= 1;
        }
        Some(MultiIndex { entries })
    }
}

/// Graded order: first by `|α|`, then lexicographically on `(α_1, α_2, …)`
/// with larger leading entries first, so `ε_1` precedes `ε_2`.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| {
            let (mut i, mut j) = (0, 0);
            loop {
                match (self.entries.get(i), other.entries.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(&(ka, va)), Some(&(kb, vb))) => {
                        if ka != kb {
                            // The index with the earlier non-zero position is larger there.
                            return ka.cmp(&kb);
                        }
                        if va != vb {
                            return vb.cmp(&va);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, &(k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if v == 1 {
                write!(f, "e{k}")?;
            } else {
                write!(f, "{v}e{k}")?;
            }
        }
        Ok(())
    }
}

/// `ln(n!)`, exact summation below 171 and Stirling–series above.
pub fn ln_factorial(n: u32) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 170 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        let x = n as f64 + 1.0;
        libm::lgamma(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_example() -> MultiIndex {
        MultiIndex::from_dense(&[0, 2, 0, 1, 3])
    }

    #[test]
    fn order_of_sparse_example() {
        assert_eq!(paper_example().order(), 6);
        assert_eq!(MultiIndex::zero().order(), 0);
        assert_eq!(MultiIndex::unit(7).order(), 1);
    }

    #[test]
    fn sqrt_factorial_log_domain() {
        assert_eq!(MultiIndex::zero().sqrt_factorial_ln(), 0.0);
        let three = MultiIndex::pure(1, 3);
        assert!((three.sqrt_factorial_ln() - 0.5 * 6f64.ln()).abs() < 1e-15);
        let exact: u64 = 2 * 6;
        assert!((paper_example().sqrt_factorial_ln() - 0.5 * (exact as f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn add_and_subtract_units() {
        let e1 = MultiIndex::unit(1);
        assert_eq!(e1.add(&e1), MultiIndex::pure(1, 2));
        assert_eq!(MultiIndex::pure(3, 2).sub_unit(3), Some(MultiIndex::unit(3)));
        assert_eq!(MultiIndex::unit(2).sub_unit(1), None);
        assert_eq!(MultiIndex::unit(2).sub_unit(2), Some(MultiIndex::zero()));
        assert_eq!(MultiIndex::unit(2).add_unit(1), MultiIndex::from_dense(&[1, 1]));
    }

    #[test]
    fn canonical_form_from_pairs() {
        let a = MultiIndex::from_pairs([(5, 3), (2, 2), (4, 1), (7, 0)]).unwrap();
        assert_eq!(a, paper_example());
        assert!(MultiIndex::from_pairs([(0, 1)]).is_err());
        assert!(MultiIndex::from_pairs([(2, 1), (2, 3)]).is_err());
    }

    #[test]
    fn graded_lexicographic_order() {
        let zero = MultiIndex::zero();
        let e1 = MultiIndex::unit(1);
        let e2 = MultiIndex::unit(2);
        let two_e1 = MultiIndex::pure(1, 2);
        let e1e2 = MultiIndex::from_dense(&[1, 1]);
        let two_e2 = MultiIndex::pure(2, 2);
        let mut v = vec![two_e2.clone(), e2.clone(), e1e2.clone(), zero.clone(), two_e1.clone(), e1.clone()];
        v.sort();
        assert_eq!(v, vec![zero, e1, e2, two_e1, e1e2, two_e2]);
    }

    #[test]
    fn ln_factorial_matches_lgamma() {
        for n in [0u32, 1, 5, 20, 170, 171, 300] {
            let expect = libm::lgamma(n as f64 + 1.0);
            assert!((ln_factorial(n) - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    }
}
