//! Sets of share indices. Shares are numbered `1..=n` like the participants
//! they belong to; share `i` owns classical coordinates `i` (x-part) and
//! `n + i` (z-part) of a symplectic vector.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShareSet {
    n: usize,
    indices: Vec<usize>,
}

impl ShareSet {
    /// Builds a set from 1-based indices; duplicates are merged.
    pub fn new(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::ShareIndexOutOfRange { index: bad, n });
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(ShareSet { n, indices })
    }

    pub fn empty(n: usize) -> Self {
        ShareSet {
            n,
            indices: Vec::new(),
        }
    }

    pub fn all(n: usize) -> Self {
        ShareSet {
            n,
            indices: (1..=n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// 1-based indices in increasing order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn contains_position(&self, position: usize) -> bool {
        self.contains(position + 1)
    }

    /// 0-based qudit positions in increasing order.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().map(|i| i - 1)
    }

    pub fn complement(&self) -> ShareSet {
        ShareSet {
            n: self.n,
            indices: (1..=self.n).filter(|i| !self.contains(*i)).collect(),
        }
    }

    /// Classical coordinates owned by these shares: all x-columns, then all
    /// z-columns.
    pub fn owned_columns(&self) -> Vec<usize> {
        self.positions()
            .chain(self.positions().map(|q| q + self.n))
            .collect()
    }

    /// Every subset of `{1..n}` with at most `max_size` elements, ordered by
    /// size and then lexicographically. Includes the empty set.
    pub fn subsets_up_to(n: usize, max_size: usize) -> Vec<ShareSet> {
        let mut out = Vec::new();
        for size in 0..=max_size.min(n) {
            let mut combo: Vec<usize> = (1..=size).collect();
            loop {
                out.push(ShareSet {
                    n,
                    indices: combo.clone(),
                });
                // advance to the next combination in lexicographic order
                let mut i = size;
                while i > 0 && combo[i - 1] == n - size + i {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                combo[i - 1] += 1;
                for j in i..size {
                    combo[j] = combo[j - 1] + 1;
                }
            }
        }
        out
    }

    pub fn all_subsets(n: usize) -> Vec<ShareSet> {
        Self::subsets_up_to(n, n)
    }
}

impl fmt::Display for ShareSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
