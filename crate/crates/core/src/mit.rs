//! Forward-backward neighborhood selection driven by conditional mutual
//! information, and the loss-driven forward-backward greedy baseline.

use nalgebra::DVector;

use crate::error::{GgmError, Result};
use crate::estimate::{NeighborhoodEstimate, RoundRecord};
use crate::gaussian::{Conditioner, CovarianceView};
use crate::index_set::OrderedIndexSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MitConfig {
    /// Forward stopping threshold on conditional MI, in nats.
    pub epsilon_f: f64,
    /// Backward calibration in `(0, 1)`.
    pub nu: f64,
    /// Defaults to `3n`.
    pub max_rounds: Option<usize>,
}

impl MitConfig {
    pub fn new(epsilon_f: f64, nu: f64) -> Result<Self> {
        if !(epsilon_f > 0.0) {
            return Err(GgmError::Config("epsilon_f must be positive".into()));
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(GgmError::Config("nu must lie in (0,1)".into()));
        }
        Ok(Self {
            epsilon_f,
            nu,
            max_rounds: None,
        })
    }

    pub fn with_max_rounds(mut self, rounds: usize) -> Self {
        self.max_rounds = Some(rounds);
        self
    }

    /// `ε_F = ½ log(1/(1−ε))`.
    pub fn from_epsilon(epsilon: f64, nu: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(GgmError::Config("epsilon must lie in (0,1)".into()));
        }
        Self::new(mi_threshold(epsilon), nu)
    }
}

/// `½ log(1/(1−ε))`.
pub fn mi_threshold(epsilon: f64) -> f64 {
    -0.5 * (1.0 - epsilon).ln()
}

fn in_context<T>(round: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| GgmError::Round {
        round,
        source: Box::new(e),
    })
}

fn check_node(view: &CovarianceView, i: usize) -> Result<()> {
    if i >= view.dim() {
        return Err(GgmError::Dimension {
            index: i,
            dim: view.dim(),
        });
    }
    if view.dim() < 2 {
        return Err(GgmError::InvalidArgument("need at least two variables".into()));
    }
    Ok(())
}

/// `Σ_{i,S} Σ_{S,S}⁻¹ √D_S`: regression coefficients of `X_i` on `X_S` scaled
/// by the standard deviation of each regressor. When `S ⊇ N_i` on the exact
/// covariance its zero entries are exactly the non-neighbors in `S`.
pub fn theorem1_prune_vector(view: &CovarianceView, i: usize, set: &OrderedIndexSet) -> Result<DVector<f64>> {
    check_node(view, i)?;
    if set.contains(i) {
        return Err(GgmError::InvalidArgument(format!("{i} is in {set}")));
    }
    let cond = Conditioner::new(view, set)?;
    let mut u = cond.coefficients(i);
    for (p, s) in set.iter().enumerate() {
        u[p] *= view.get(s, s).sqrt();
    }
    Ok(u)
}

/// Forward-backward MI test for the neighbors of node `i`.
///
/// Each round takes the candidate `j₁` with the largest `Î(X_i;X_j|X_S)`
/// (lowest index on ties) and stops without adding it when that value is
/// below `ε_F`. Otherwise it adds `j₁` and drops every member `s` of the new
/// set with `|u*_s| < ε_B`, where `u*` is [`theorem1_prune_vector`] and
/// `ε_B = √(ν(1−e^{−2δ}) k_{i,j₁})`, `k_{i,j₁} = Σ_ii e^{−2(Î(X_i;X_S)+Î(X_{j₁};X_S))}`
/// on the pre-addition set.
///
/// A round that leaves the set unchanged would repeat forever, so it ends
/// the run like the round cap does, with `truncated` set.
pub fn mit_select_neighborhood(view: &CovarianceView, i: usize, config: &MitConfig) -> Result<NeighborhoodEstimate> {
    check_node(view, i)?;
    let n = view.dim();
    let max_rounds = config.max_rounds.unwrap_or(3 * n);
    let mut members = OrderedIndexSet::new();
    let mut trace = Vec::new();
    let mut truncated = true;

    for round in 0..max_rounds {
        let cond = in_context(round, Conditioner::new(view, &members))?;
        let wi = cond.whiten(i);
        let vi = view.get(i, i) - wi.norm_squared();

        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| j != i && !members.contains(j)) {
            let wj = cond.whiten(j);
            let vj = view.get(j, j) - wj.norm_squared();
            let c = cond.covariance_whitened(i, j, &wi, &wj);
            let delta = in_context(round, mi_from_moments(i, j, c, vi, vj))?;
            if best.is_none_or(|(_, b)| delta > b) {
                best = Some((j, delta));
            }
        }
        let Some((j1, delta)) = best else {
            truncated = false;
            break;
        };
        if delta < config.epsilon_f {
            truncated = false;
            break;
        }

        let set_mi = in_context(round, cond.set_mi(i).and_then(|a| Ok(a + cond.set_mi(j1)?)))?;
        let calibration = view.get(i, i) * (-2.0 * set_mi).exp();
        let mut grown = members.clone();
        grown.insert(j1);
        let u = in_context(round, theorem1_prune_vector(view, i, &grown))?;
        let eps_b = (config.nu * (1.0 - (-2.0 * delta).exp()) * calibration).sqrt();
        let pruned: Vec<usize> = grown
            .iter()
            .zip(u.iter())
            .filter(|(_, x)| x.abs() < eps_b)
            .map(|(s, _)| s)
            .collect();
        let next = grown.difference(&OrderedIndexSet::from_unsorted(pruned.iter().copied()));
        let loss_after = in_context(round, regression_loss(view, i, &next))?;
        trace.push(RoundRecord {
            candidate: j1,
            score: delta,
            threshold: eps_b,
            pruned,
            loss_before: vi,
            loss_after,
        });
        if next == members {
            break;
        }
        members = next;
    }

    Ok(NeighborhoodEstimate {
        node: i,
        members,
        trace,
        truncated,
    })
}

fn mi_from_moments(i: usize, j: usize, c: f64, vi: f64, vj: f64) -> Result<f64> {
    if !(vi > 0.0) {
        return Err(GgmError::DegenerateDistribution { node: i, value: vi });
    }
    if !(vj > 0.0) {
        return Err(GgmError::DegenerateDistribution { node: j, value: vj });
    }
    let prod = vi * vj;
    let denom = prod - c * c;
    if !(denom > 0.0) {
        return Err(GgmError::PerfectCorrelation { i, j });
    }
    Ok(0.5 * (prod / denom).ln())
}

/// `L(β) = Σ_ii − 2βᵀΣ_{S,i} + βᵀΣ_{S,S}β` at the least-squares `β` on support `S`.
pub fn regression_loss(view: &CovarianceView, i: usize, set: &OrderedIndexSet) -> Result<f64> {
    let cond = Conditioner::new(view, set)?;
    let beta = cond.coefficients(i);
    let cross = cond.cross(i);
    let block = crate::gaussian::submatrix(view, set, set)?;
    let quad = if set.is_empty() {
        0.0
    } else {
        (beta.transpose() * &block * &beta)[(0, 0)]
    };
    Ok(view.get(i, i) - 2.0 * beta.dot(&cross) + quad)
}

/// Forward-backward greedy regression of `X_i` on the other variables.
///
/// Forward: add the variable with the largest loss decrease while that
/// decrease is at least `ε_s`. Backward, after every addition: remove the
/// member whose removal raises the loss least while the rise is at most
/// `ν ε_s`. Coefficients are refit from scratch after every change.
pub fn baseline_fb_greedy(
    view: &CovarianceView,
    i: usize,
    epsilon_s: f64,
    nu: f64,
    max_rounds: Option<usize>,
) -> Result<NeighborhoodEstimate> {
    check_node(view, i)?;
    if !(epsilon_s > 0.0) {
        return Err(GgmError::Config("epsilon_s must be positive".into()));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(GgmError::Config("nu must lie in (0,1)".into()));
    }
    let n = view.dim();
    let max_rounds = max_rounds.unwrap_or(3 * n);
    let mut members = OrderedIndexSet::new();
    let mut loss = view.get(i, i);
    let mut trace = Vec::new();
    let mut truncated = true;

    for round in 0..max_rounds {
        let candidates: Vec<usize> = (0..n).filter(|&j| j != i && !members.contains(j)).collect();
        let mut best: Option<(usize, f64, f64)> = None;
        for &j in &candidates {
            let mut trial = members.clone();
            trial.insert(j);
            let l = match regression_loss(view, i, &trial) {
                Ok(l) => l,
                Err(GgmError::SingularConditioning { .. }) => continue,
                Err(e) => return Err(in_context::<()>(round, Err(e)).unwrap_err()),
            };
            let gain = loss - l;
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((j, gain, l));
            }
        }
        let Some((j, gain, new_loss)) = best else {
            truncated = false;
            break;
        };
        if gain < epsilon_s {
            truncated = false;
            break;
        }
        let loss_before = loss;
        members.insert(j);
        loss = new_loss;

        let mut pruned = Vec::new();
        while members.len() > 1 {
            let mut weakest: Option<(usize, f64, f64)> = None;
            for s in members.iter() {
                let mut reduced = members.clone();
                reduced.remove(s);
                let l = in_context(round, regression_loss(view, i, &reduced))?;
                let rise = l - loss;
                if weakest.is_none_or(|(_, r, _)| rise < r) {
                    weakest = Some((s, rise, l));
                }
            }
            match weakest {
                Some((s, rise, l)) if rise <= nu * epsilon_s => {
                    members.remove(s);
                    pruned.push(s);
                    loss = l;
                }
                _ => break,
            }
        }
        trace.push(RoundRecord {
            candidate: j,
            score: gain,
            threshold: nu * epsilon_s,
            pruned,
            loss_before,
            loss_after: loss,
        });
    }

    Ok(NeighborhoodEstimate {
        node: i,
        members,
        trace,
        truncated,
    })
}

/// Forward threshold from the sample-complexity recipe:
/// `ε = 8 c ρ η d log n / (C_min N k_i)` clamped into `[1e-12, 1 − 1e-6]`,
/// returned as `½ log(1/(1−ε))`.
#[allow(clippy::too_many_arguments)]
pub fn theorem3_threshold(
    c: f64,
    rho: f64,
    eta: usize,
    d: usize,
    n: usize,
    samples: usize,
    c_min: f64,
    k_i: f64,
) -> Result<f64> {
    Ok(mi_threshold(theorem3_epsilon(c, rho, eta, d, n, samples, c_min, k_i)?))
}

/// The clamped `ε` behind [`theorem3_threshold`]; also the baseline's `ε_s`.
#[allow(clippy::too_many_arguments)]
pub fn theorem3_epsilon(
    c: f64,
    rho: f64,
    eta: usize,
    d: usize,
    n: usize,
    samples: usize,
    c_min: f64,
    k_i: f64,
) -> Result<f64> {
    if !(c > 0.0 && rho > 0.0 && c_min > 0.0 && k_i > 0.0) || eta == 0 || d == 0 || n == 0 || samples == 0 {
        return Err(GgmError::Config("threshold inputs must be positive".into()));
    }
    let raw = 8.0 * c * rho * eta as f64 * d as f64 * (n as f64).ln() / (c_min * samples as f64 * k_i);
    Ok(raw.clamp(1e-12, 1.0 - 1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_named, sparsity_multiplier, Topology};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn chain3() -> CovarianceView {
        build_named(Topology::Chain, 3, -0.3, 1.0).unwrap().exact_view()
    }

    #[test]
    fn prune_vector_on_chain() {
        let u = theorem1_prune_vector(&chain3(), 0, &[1, 2].into()).unwrap();
        assert!(u[0].abs() > 0.1);
        assert_abs_diff_eq!(u[1], 0.0, epsilon = 1e-10);
        let id = CovarianceView::exact(DMatrix::identity(4, 4)).unwrap();
        let u = theorem1_prune_vector(&id, 0, &[1, 2, 3].into()).unwrap();
        assert_eq!(u, DVector::zeros(3));
    }

    #[test]
    fn prune_vector_matches_precision_pattern() {
        // With N_i ⊆ S the regression coefficients are −J_is/J_ii.
        let m = build_named(Topology::Grid, 3, 0.2, 1.3).unwrap();
        let v = m.exact_view();
        let full = OrderedIndexSet::from([0, 1, 3, 5, 7, 8]);
        let u = theorem1_prune_vector(&v, 4, &full).unwrap();
        for (p, s) in full.iter().enumerate() {
            let expected = -m.precision()[(4, s)] / m.precision()[(4, 4)] * v.get(s, s).sqrt();
            assert_abs_diff_eq!(u[p], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn independent_model_selects_nothing() {
        let v = CovarianceView::exact(DMatrix::identity(5, 5)).unwrap();
        let cfg = MitConfig::from_epsilon(0.01, 0.5).unwrap();
        for i in 0..5 {
            let e = mit_select_neighborhood(&v, i, &cfg).unwrap();
            assert!(e.members.is_empty());
            assert!(!e.truncated);
            assert!(baseline_fb_greedy(&v, i, 1e-3, 0.5, None).unwrap().members.is_empty());
        }
    }

    #[test]
    fn leaf_of_star_finds_hub_in_one_round() {
        let m = build_named(Topology::Star, 6, 0.25, 1.0).unwrap();
        let v = m.exact_view();
        let cfg = MitConfig::from_epsilon(0.01, 0.5).unwrap();
        for leaf in 1..6 {
            let e = mit_select_neighborhood(&v, leaf, &cfg).unwrap();
            assert_eq!(e.members.as_slice(), &[0]);
            assert_eq!(e.trace.len(), 1);
            let b = baseline_fb_greedy(&v, leaf, 1e-3, 0.5, None).unwrap();
            assert_eq!(b.members.as_slice(), &[0]);
            assert_eq!(b.trace.len(), 1);
        }
    }

    #[test]
    fn chain10_exact_recovery() {
        let m = build_named(Topology::Chain, 10, -0.3, 1.0).unwrap();
        let v = m.exact_view();
        let cfg = MitConfig::from_epsilon(0.01, 0.5).unwrap();
        for i in 0..10 {
            let e = mit_select_neighborhood(&v, i, &cfg).unwrap();
            assert_eq!(&e.members, m.neighbors(i), "mit node {i}");
            let b = baseline_fb_greedy(&v, i, 1e-3, 0.5, None).unwrap();
            assert_eq!(&b.members, m.neighbors(i), "baseline node {i}");
        }
    }

    #[test]
    fn loss_matches_conditional_variance() {
        let v = chain3();
        let set = OrderedIndexSet::from([1]);
        let l = regression_loss(&v, 0, &set).unwrap();
        let c = Conditioner::new(&v, &set).unwrap().variance(0);
        assert_abs_diff_eq!(l, c, epsilon = 1e-12);
    }

    #[test]
    fn threshold_closed_forms() {
        assert_abs_diff_eq!(mi_threshold(0.5), 0.5 * 2f64.ln(), epsilon = 1e-15);
        let eta = sparsity_multiplier(3.0, 2);
        let got = theorem3_threshold(0.1, 3.0, eta, 2, 10, 1000, 0.1, 1.0).unwrap();
        // hand plug-in: η = ⌈2 + 36(√3 + √2)²⌉
        let eta_hand = (2.0 + 36.0 * (3f64.sqrt() + 2f64.sqrt()).powi(2)).ceil();
        assert_eq!(eta as f64, eta_hand);
        let eps = (8.0 * 0.1 * 3.0 * eta_hand * 2.0 * 10f64.ln() / (0.1 * 1000.0)).min(1.0 - 1e-6);
        assert_abs_diff_eq!(got, -0.5 * (1.0 - eps).ln(), epsilon = 1e-12);
        let mut last = f64::INFINITY;
        for samples in [1_000usize, 10_000, 100_000, 1_000_000, 10_000_000] {
            let t = theorem3_threshold(0.001, 3.0, eta, 2, 10, samples, 0.1, 1.0).unwrap();
            assert!(t > 0.0 && t <= last);
            last = t;
        }
        assert!(theorem3_threshold(0.0, 3.0, eta, 2, 10, 10, 0.1, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(MitConfig::new(0.1, 1.0).is_err());
        assert!(MitConfig::new(0.0, 0.5).is_err());
        assert!(MitConfig::from_epsilon(1.0, 0.5).is_err());
    }

    #[test]
    fn singular_view_reports_round() {
        // X2 duplicates X1: conditioning on {1,2} is singular.
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.5, 0.5, 1.0, 1.0, 0.5, 1.0, 1.0]);
        let v = CovarianceView::exact(cov).unwrap();
        let cfg = MitConfig::new(1e-9, 0.5).unwrap();
        let err = mit_select_neighborhood(&v, 0, &cfg).unwrap_err();
        assert!(matches!(err, GgmError::Round { .. }), "{err:?}");
    }

    #[test]
    fn round_cap_sets_truncated() {
        let m = build_named(Topology::Chain, 6, -0.3, 1.0).unwrap();
        let cfg = MitConfig::new(1e-9, 0.5).unwrap().with_max_rounds(1);
        let e = mit_select_neighborhood(&m.exact_view(), 2, &cfg).unwrap();
        assert!(e.truncated);
        assert_eq!(e.members.len(), 1);
    }
}
