//! Neighborhood selection for walk-summable models by thresholding
//! conditional covariances, followed by magnitude and symmetry pruning.

use nalgebra::DVector;

use crate::error::{GgmError, Result};
use crate::estimate::NeighborhoodEstimate;
use crate::gaussian::{Conditioner, CovarianceView};
use crate::index_set::OrderedIndexSet;
use crate::model::{GgmModel, ParamBox};

/// Relative slack on the per-round oracle threshold. The population bound is
/// attained with equality on some graphs, so the exact comparison would hinge
/// on the last bit of rounding.
const ORACLE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PruneLevel {
    /// `τ^p = ν a`.
    Fraction(f64),
    /// Absolute `τ^p`.
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub param_box: ParamBox,
    /// Slack subtracted from the population bound; `None` means half the bound.
    pub epsilon: Option<f64>,
    pub prune: PruneLevel,
    /// Use the tighter bound valid for triangle-free graphs.
    pub triangle_free: bool,
    /// Replace the threshold each round by the population bound computed
    /// from the true model. Exact covariance only.
    pub oracle: bool,
}

impl ThresholdConfig {
    pub fn new(param_box: ParamBox, triangle_free: bool) -> Self {
        Self {
            param_box,
            epsilon: None,
            prune: PruneLevel::Fraction(0.5),
            triangle_free,
            oracle: false,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_prune(mut self, prune: PruneLevel) -> Self {
        self.prune = prune;
        self
    }

    pub fn with_oracle(mut self, oracle: bool) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn tau_p(&self) -> Result<f64> {
        match self.prune {
            PruneLevel::Fraction(nu) if nu > 0.0 && nu < 1.0 => Ok(nu * self.param_box.a),
            PruneLevel::Absolute(t) if t > 0.0 && t.is_finite() => Ok(t),
            other => Err(GgmError::Config(format!("invalid pruning level {other:?}"))),
        }
    }
}

/// Per-round record of the forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    /// Set after the round.
    pub set: OrderedIndexSet,
    pub added: OrderedIndexSet,
    /// Largest `|Σ_{ij|S}|` over the unselected `j`.
    pub max_abs_cond_cov: f64,
    pub threshold: f64,
}

/// Lower bound on `max_j |Σ_{ij|S}|` while neighbors remain undiscovered:
/// `a / (d_max (d_max²(1+α) − a²))`, or `a / (d_max (d_max² − a²))` for
/// triangle-free graphs.
///
/// For normalized triangle-free models this is `a/(1−a²)`; the shorter
/// `a(1−a)^{-1/2}` sometimes quoted for that case is not used.
pub fn population_bound(pb: &ParamBox, triangle_free: bool) -> Result<f64> {
    let growth = if triangle_free { 1.0 } else { 1.0 + pb.alpha };
    let denom = pb.d_max * (pb.d_max * pb.d_max * growth - pb.a * pb.a);
    if !(denom > 0.0) {
        return Err(GgmError::Config(format!(
            "a = {} is too large for d_max = {} and alpha = {}",
            pb.a, pb.d_max, pb.alpha
        )));
    }
    Ok(pb.a / denom)
}

/// `τ = bound − ε`.
pub fn forward_threshold(config: &ThresholdConfig) -> Result<f64> {
    let bound = population_bound(&config.param_box, config.triangle_free)?;
    let eps = config.epsilon.unwrap_or(bound / 2.0);
    if !(eps >= 0.0) {
        return Err(GgmError::Config("epsilon must be non-negative".into()));
    }
    let tau = bound - eps;
    if !(tau > 0.0) {
        return Err(GgmError::Config(format!(
            "threshold {tau} is not positive; choose epsilon below {bound}"
        )));
    }
    Ok(tau)
}

/// `b² Δ_i / ((1−α)² d_min² τ²)`.
pub fn theorem2_size_bound(pb: &ParamBox, tau: f64, delta_i: usize) -> f64 {
    let s = (1.0 - pb.alpha) * pb.d_min * tau;
    pb.b * pb.b * delta_i as f64 / (s * s)
}

/// Population lower bound on `max_{j∈U} |Σ_{ij|S}|` where `U = N_i ∖ S`,
/// `K = |U|`:
///
/// `√( ‖J_{i,U}‖² / (K d_ii² (d_ii m − ‖J_{i,U}‖²)²) )`
///
/// with `m = (1+α) d_max` in general and `m = max_{j∈U} d_jj` for
/// triangle-free graphs.
pub fn lemma4_lower_bound(model: &GgmModel, i: usize, set: &OrderedIndexSet, triangle_free: bool) -> Result<f64> {
    if i >= model.dim() {
        return Err(GgmError::Dimension {
            index: i,
            dim: model.dim(),
        });
    }
    let j = model.precision();
    let undiscovered: Vec<usize> = model.neighbors(i).iter().filter(|&u| !set.contains(u)).collect();
    if undiscovered.is_empty() {
        return Err(GgmError::NoUndiscoveredNeighbors { node: i });
    }
    let k = undiscovered.len() as f64;
    let norm2: f64 = undiscovered.iter().map(|&u| j[(i, u)] * j[(i, u)]).sum();
    let dii = j[(i, i)];
    let m = if triangle_free {
        undiscovered
            .iter()
            .map(|&u| j[(u, u)])
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        let pb = model
            .param_box()
            .ok_or_else(|| GgmError::InvalidModel("model carries no parameter box".into()))?;
        (1.0 + pb.alpha) * pb.d_max
    };
    let gap = dii * m - norm2;
    if !(gap > 0.0) {
        return Err(GgmError::InvalidModel(format!(
            "bound denominator {gap} is not positive"
        )));
    }
    Ok((norm2 / (k * dii * dii * gap * gap)).sqrt())
}

/// Forward pass: each round admits every unselected `j` with
/// `|Σ_{ij|S}| ≥ τ`, for at most `Δ` rounds or until nothing is admitted.
///
/// Oracle mode needs the exact covariance and the true model.
pub fn threshold_select_neighborhood(
    view: &CovarianceView,
    i: usize,
    config: &ThresholdConfig,
    truth: Option<&GgmModel>,
) -> Result<(NeighborhoodEstimate, Vec<RoundTrace>)> {
    let n = view.dim();
    if i >= n {
        return Err(GgmError::Dimension { index: i, dim: n });
    }
    let truth = if config.oracle {
        match truth {
            Some(m) if view.is_exact() && m.dim() == n => Some(m),
            _ => return Err(GgmError::OracleMisuse),
        }
    } else {
        None
    };
    let tau = forward_threshold(config)?;
    let mut set = OrderedIndexSet::new();
    let mut trace = Vec::new();
    let mut truncated = false;

    for round in 0..config.param_box.delta_max {
        let threshold = match truth {
            None => tau,
            Some(m) => match lemma4_lower_bound(m, i, &set, config.triangle_free) {
                Ok(b) => b * (1.0 - ORACLE_SLACK),
                Err(GgmError::NoUndiscoveredNeighbors { .. }) => break,
                Err(e) => return Err(e),
            },
        };
        let cond = Conditioner::new(view, &set).map_err(|e| GgmError::Round {
            round,
            source: Box::new(e),
        })?;
        let wi = cond.whiten(i);
        let mut added = OrderedIndexSet::new();
        let mut max_abs = 0.0f64;
        for j in (0..n).filter(|&j| j != i && !set.contains(j)) {
            let wj = cond.whiten(j);
            let c = cond.covariance_whitened(i, j, &wi, &wj).abs();
            max_abs = max_abs.max(c);
            if c >= threshold {
                added.insert(j);
            }
        }
        if added.is_empty() {
            break;
        }
        set = set.union(&added);
        trace.push(RoundTrace {
            set: set.clone(),
            added,
            max_abs_cond_cov: max_abs,
            threshold,
        });
        if round + 1 == config.param_box.delta_max {
            truncated = true;
        }
    }

    let mut est = NeighborhoodEstimate::new(i, set);
    est.truncated = truncated;
    Ok((est, trace))
}

/// Signed `Σ_{i,S} Σ_{S,S}⁻¹`, one entry per member of `S`.
pub fn pruning_coefficients(view: &CovarianceView, i: usize, set: &OrderedIndexSet) -> Result<DVector<f64>> {
    if i >= view.dim() {
        return Err(GgmError::Dimension {
            index: i,
            dim: view.dim(),
        });
    }
    if set.contains(i) {
        return Err(GgmError::InvalidArgument(format!("{i} is in {set}")));
    }
    Ok(Conditioner::new(view, set)?.coefficients(i))
}

/// Drop the members of `S` whose regression coefficient magnitude is at most `τ^p`.
pub fn prune_neighborhood(
    view: &CovarianceView,
    i: usize,
    set: &OrderedIndexSet,
    config: &ThresholdConfig,
) -> Result<OrderedIndexSet> {
    let tau_p = config.tau_p()?;
    let gamma = pruning_coefficients(view, i, set)?;
    Ok(set
        .iter()
        .zip(gamma.iter())
        .filter(|(_, g)| g.abs() > tau_p)
        .map(|(s, _)| s)
        .collect())
}

/// Keep `j ∈ S_i` only when also `i ∈ S_j`. Estimates must be indexed by node.
pub fn prune_by_symmetry(estimates: &[NeighborhoodEstimate]) -> Result<Vec<NeighborhoodEstimate>> {
    let n = estimates.len();
    for (k, e) in estimates.iter().enumerate() {
        if e.node != k {
            return Err(GgmError::InvalidArgument(format!(
                "estimate {k} is for node {}",
                e.node
            )));
        }
        e.members.check_bounds(n)?;
    }
    Ok(estimates
        .iter()
        .map(|e| NeighborhoodEstimate {
            node: e.node,
            members: e
                .members
                .iter()
                .filter(|&j| estimates[j].members.contains(e.node))
                .collect(),
            trace: e.trace.clone(),
            truncated: e.truncated,
        })
        .collect())
}

/// Which stages follow the forward pass in [`learn_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pipeline {
    pub prune: bool,
    pub symmetry: bool,
}

impl Default for Pipeline {
    fn default() -> Self {
        Self {
            prune: true,
            symmetry: true,
        }
    }
}

/// Forward pass, magnitude pruning and symmetry pruning over every node.
pub fn learn_graph(
    view: &CovarianceView,
    config: &ThresholdConfig,
    truth: Option<&GgmModel>,
    pipeline: Pipeline,
) -> Result<Vec<NeighborhoodEstimate>> {
    let mut out = Vec::with_capacity(view.dim());
    for i in 0..view.dim() {
        let (mut est, _) = threshold_select_neighborhood(view, i, config, truth)?;
        if pipeline.prune && !est.members.is_empty() {
            est.members = prune_neighborhood(view, i, &est.members, config)?;
        }
        out.push(est);
    }
    if pipeline.symmetry {
        out = prune_by_symmetry(&out)?;
    }
    Ok(out)
}
