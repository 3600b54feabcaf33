use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::index_set::OrderedIndexSet;

/// One forward step of a greedy learner and the backward pass that followed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub candidate: usize,
    /// Conditional MI for the MI test, loss decrease for the baseline.
    pub score: f64,
    /// Backward threshold in force after the addition.
    pub threshold: f64,
    pub pruned: Vec<usize>,
    /// Closed-form regression loss `Σ_{ii|S}` before and after the round.
    pub loss_before: f64,
    pub loss_after: f64,
}

/// Estimated neighborhood `S_i` of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodEstimate {
    pub node: usize,
    pub members: OrderedIndexSet,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<RoundRecord>,
    #[serde(default)]
    pub truncated: bool,
}

impl NeighborhoodEstimate {
    pub fn new(node: usize, members: OrderedIndexSet) -> Self {
        Self {
            node,
            members,
            trace: Vec::new(),
            truncated: false,
        }
    }
}

/// On-disk set of per-node estimates produced by `ggm learn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateFile {
    pub n: usize,
    pub algorithm: String,
    pub neighborhoods: Vec<OrderedIndexSet>,
}

impl EstimateFile {
    pub fn from_estimates(algorithm: &str, estimates: &[NeighborhoodEstimate]) -> Self {
        Self {
            n: estimates.len(),
            algorithm: algorithm.to_string(),
            neighborhoods: estimates.iter().map(|e| e.members.clone()).collect(),
        }
    }

    pub fn estimates(&self) -> Vec<NeighborhoodEstimate> {
        self.neighborhoods
            .iter()
            .enumerate()
            .map(|(i, s)| NeighborhoodEstimate::new(i, s.clone()))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if f.neighborhoods.len() != f.n {
            return Err(GgmError::Shape {
                expected: f.n,
                found: f.neighborhoods.len(),
            });
        }
        for s in &f.neighborhoods {
            s.check_bounds(f.n)?;
        }
        Ok(f)
    }
}
