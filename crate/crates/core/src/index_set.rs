use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};

/// Strictly increasing list of node ids.
///
/// Submatrices are always laid out in this order, so the `p`-th entry of any
/// vector indexed by the set refers to `self.as_slice()[p]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct OrderedIndexSet(Vec<usize>);

impl OrderedIndexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Sorts and deduplicates arbitrary input.
    pub fn from_unsorted<I: IntoIterator<Item = usize>>(items: I) -> Self {
        let mut v: Vec<usize> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0.binary_search(&node).is_ok()
    }

    /// Position of `node` within the set.
    pub fn position(&self, node: usize) -> Option<usize> {
        self.0.binary_search(&node).ok()
    }

    pub fn insert(&mut self, node: usize) -> bool {
        match self.0.binary_search(&node) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, node);
                true
            }
        }
    }

    pub fn remove(&mut self, node: usize) -> bool {
        match self.0.binary_search(&node) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_unsorted(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self(self.iter().filter(|x| !other.contains(*x)).collect())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.iter().all(|x| other.contains(x))
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Errors unless every member is below `dim`.
    pub fn check_bounds(&self, dim: usize) -> Result<()> {
        match self.max() {
            Some(m) if m >= dim => Err(GgmError::Dimension { index: m, dim }),
            _ => Ok(()),
        }
    }
}

impl From<Vec<usize>> for OrderedIndexSet {
    fn from(v: Vec<usize>) -> Self {
        Self::from_unsorted(v)
    }
}

impl From<OrderedIndexSet> for Vec<usize> {
    fn from(s: OrderedIndexSet) -> Self {
        s.0
    }
}

impl<const N: usize> From<[usize; N]> for OrderedIndexSet {
    fn from(a: [usize; N]) -> Self {
        Self::from_unsorted(a)
    }
}

impl FromIterator<usize> for OrderedIndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_unsorted(iter)
    }
}

impl fmt::Display for OrderedIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}
