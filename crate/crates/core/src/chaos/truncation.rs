use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::MultiIndex;

/// Finite chaos space: modes `1..=K` and chaos orders `0..=N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub modes: usize,
    pub max_order: usize,
}

impl Truncation {
    pub fn new(modes: usize, max_order: usize) -> Self {
        assert!(modes >= 1, "a truncation needs at least one mode");
        Self { modes, max_order }
    }

    /// Same modes, one more chaos order.
    pub fn raised(self) -> Self {
        Self::new(self.modes, self.max_order + 1)
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        alpha.max_position() <= self.modes && alpha.order() as usize <= self.max_order
    }

    /// `|I(K, N)| = binomial(N + K, K)`.
    pub fn size(&self) -> usize {
        binomial(self.max_order + self.modes, self.modes)
    }

    /// All of `I(K, N)`, ordered by `|α|` and then lexicographically with larger
    /// leading entries first.
    pub fn enumerate(&self) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(self.size());
        let mut dense = vec![0u32; self.modes];
        for order in 0..=self.max_order as u32 {
            compositions(&mut dense, 0, order, &mut out);
        }
        out
    }

    /// Indices of exactly order `n`, in enumeration order.
    pub fn shell(&self, n: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut dense = vec![0u32; self.modes];
        compositions(&mut dense, 0, n as u32, &mut out);
        out
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(K={}, N={})", self.modes, self.max_order)
    }
}

fn compositions(dense: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == dense.len() {
        dense[pos] = remaining;
        out.push(MultiIndex::from_dense(dense));
        dense[pos] = 0;
        return;
    }
    for v in (0..=remaining).rev() {
        dense[pos] = v;
        compositions(dense, pos + 1, remaining - v, out);
    }
    dense[pos] = 0;
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dense layout of a truncated index set: enumeration order plus reverse lookup.
#[derive(Clone, Debug)]
pub struct IndexTable {
    trunc: Truncation,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl IndexTable {
    pub fn new(trunc: Truncation) -> Self {
        let indices = trunc.enumerate();
        let positions = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Self {
            trunc,
            indices,
            positions,
        }
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.positions.get(alpha).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_by_recursion(modes: usize, order: usize) -> usize {
        // Number of α with support in 1..=modes and |α| ≤ order.
        if modes == 0 {
            return 1;
        }
        (0..=order).map(|a| count_by_recursion(modes - 1, order - a)).sum()
    }

    #[test]
    fn small_enumerations() {
        let t = Truncation::new(1, 2);
        assert_eq!(
            t.enumerate(),
            vec![MultiIndex::zero(), MultiIndex::unit(1), MultiIndex::pure(1, 2)]
        );
        let t = Truncation::new(2, 1);
        assert_eq!(
            t.enumerate(),
            vec![MultiIndex::zero(), MultiIndex::unit(1), MultiIndex::unit(2)]
        );
        assert_eq!(Truncation::new(8, 4).enumerate().len(), 495);
    }

    #[test]
    fn counts_match_binomial_and_recursion() {
        for k in 1..=10 {
            for n in 0..=10 {
                let t = Truncation::new(k, n);
                let brute = count_by_recursion(k, n);
                assert_eq!(t.size(), brute, "K={k} N={n}");
                if k <= 6 && n <= 6 {
                    assert_eq!(t.enumerate().len(), brute);
                }
            }
        }
    }

    #[test]
    fn enumeration_is_sorted_and_unique() {
        let list = Truncation::new(4, 4).enumerate();
        assert!(list.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn table_round_trip() {
        let table = IndexTable::new(Truncation::new(3, 3));
        for (i, a) in table.indices().iter().enumerate() {
            assert_eq!(table.position(a), Some(i));
        }
        assert_eq!(table.position(&MultiIndex::unit(4)), None);
    }
}
