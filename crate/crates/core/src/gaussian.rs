//! Covariance algebra shared by every learner.
//!
//! All conditioning goes through [`Conditioner`], which factors `Σ_{S,S}` once
//! and answers conditional covariance, conditional mutual information and
//! regression queries against that factor. Logs are natural (nats).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::index_set::OrderedIndexSet;

/// Relative asymmetry tolerated in a covariance view.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A Cholesky pivot below this fraction of the largest diagonal entry of the
/// conditioning block is treated as singular.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    Exact,
    Empirical { samples: usize },
}

/// Either the population covariance of a model or an empirical estimate.
#[derive(Debug, Clone)]
pub struct CovarianceView {
    entries: DMatrix<f64>,
    kind: CovarianceKind,
}

impl CovarianceView {
    pub fn new(entries: DMatrix<f64>, kind: CovarianceKind) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(GgmError::Shape {
                expected: n,
                found: entries.ncols(),
            });
        }
        if n == 0 {
            return Err(GgmError::InvalidCovariance("empty matrix".into()));
        }
        for i in 0..n {
            let d = entries[(i, i)];
            if !(d.is_finite() && d > 0.0) {
                return Err(GgmError::InvalidCovariance(format!("diagonal entry {i} is {d}")));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (x, y) = (entries[(i, j)], entries[(j, i)]);
                if !(x.is_finite() && y.is_finite()) {
                    return Err(GgmError::InvalidCovariance(format!("non-finite entry at ({i},{j})")));
                }
                let scale = (entries[(i, i)] * entries[(j, j)]).sqrt();
                if (x - y).abs() > SYMMETRY_TOL * scale.max(x.abs()) {
                    return Err(GgmError::InvalidCovariance(format!(
                        "asymmetric at ({i},{j}): {x} vs {y}"
                    )));
                }
            }
        }
        Ok(Self { entries, kind })
    }

    pub fn exact(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries, CovarianceKind::Exact)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn is_exact(&self) -> bool {
        self.kind == CovarianceKind::Exact
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.dim() {
            Err(GgmError::Dimension {
                index: node,
                dim: self.dim(),
            })
        } else {
            Ok(())
        }
    }
}

/// `result[p][q] = Σ[rows[p]][cols[q]]`.
pub fn submatrix(view: &CovarianceView, rows: &OrderedIndexSet, cols: &OrderedIndexSet) -> Result<DMatrix<f64>> {
    rows.check_bounds(view.dim())?;
    cols.check_bounds(view.dim())?;
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |p, q| {
        view.get(rows.as_slice()[p], cols.as_slice()[q])
    }))
}

/// `Σ_{S,S}` factored once, with queries conditioned on `X_S`.
pub struct Conditioner<'a> {
    view: &'a CovarianceView,
    set: OrderedIndexSet,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl<'a> Conditioner<'a> {
    pub fn new(view: &'a CovarianceView, set: &OrderedIndexSet) -> Result<Self> {
        set.check_bounds(view.dim())?;
        if set.is_empty() {
            return Ok(Self {
                view,
                set: set.clone(),
                chol: None,
            });
        }
        let block = submatrix(view, set, set)?;
        let max_diag = block.diagonal().max();
        let singular = || GgmError::SingularConditioning {
            set: set.as_slice().to_vec(),
        };
        let chol = Cholesky::new(block).ok_or_else(singular)?;
        let l = chol.l_dirty();
        let min_pivot = (0..set.len())
            .map(|k| l[(k, k)] * l[(k, k)])
            .fold(f64::INFINITY, f64::min);
        if !(min_pivot >= PIVOT_TOL * max_diag) {
            return Err(singular());
        }
        Ok(Self {
            view,
            set: set.clone(),
            chol: Some(chol),
        })
    }

    pub fn set(&self) -> &OrderedIndexSet {
        &self.set
    }

    pub fn view(&self) -> &CovarianceView {
        self.view
    }

    /// `L⁻¹ Σ_{S,node}` where `Σ_{S,S} = L Lᵀ`.
    pub fn whiten(&self, node: usize) -> DVector<f64> {
        match &self.chol {
            None => DVector::zeros(0),
            Some(chol) => {
                let mut b = self.cross(node);
                let l = chol.l_dirty();
                // forward substitution on the lower factor
                let m = b.len();
                for r in 0..m {
                    let mut acc = b[r];
                    for c in 0..r {
                        acc -= l[(r, c)] * b[c];
                    }
                    b[r] = acc / l[(r, r)];
                }
                b
            }
        }
    }

    /// `Σ_{S,node}` as a column.
    pub fn cross(&self, node: usize) -> DVector<f64> {
        DVector::from_iterator(self.set.len(), self.set.iter().map(|s| self.view.get(s, node)))
    }

    /// `Σ_{S,S}⁻¹ Σ_{S,node}`: the least-squares coefficients of `X_node` on `X_S`.
    pub fn coefficients(&self, node: usize) -> DVector<f64> {
        match &self.chol {
            None => DVector::zeros(0),
            Some(chol) => chol.solve(&self.cross(node)),
        }
    }

    /// `Σ_{ij|S}`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        let wi = self.whiten(i);
        let wj = self.whiten(j);
        self.view.get(i, j) - wi.dot(&wj)
    }

    /// Same as [`Conditioner::covariance`] with pre-whitened operands.
    #[inline]
    pub fn covariance_whitened(&self, i: usize, j: usize, wi: &DVector<f64>, wj: &DVector<f64>) -> f64 {
        self.view.get(i, j) - wi.dot(wj)
    }

    /// `Σ_{ii|S}`: the variance of the rejection of `X_i` from the span of `X_S`.
    pub fn variance(&self, i: usize) -> f64 {
        let wi = self.whiten(i);
        self.view.get(i, i) - wi.norm_squared()
    }

    /// Full statistics for `(i, j)` given `S`.
    pub fn stats(&self, i: usize, j: usize) -> Result<ConditionalStats> {
        let wi = self.whiten(i);
        let wj = self.whiten(j);
        ConditionalStats::from_moments(
            i,
            j,
            self.view.get(i, j) - wi.dot(&wj),
            self.view.get(i, i) - wi.norm_squared(),
            self.view.get(j, j) - wj.norm_squared(),
        )
    }

    /// `½ log(Σ_{xx} / Σ_{xx|S})`, the mutual information between `X_x` and `X_S`.
    pub fn set_mi(&self, x: usize) -> Result<f64> {
        if self.set.is_empty() {
            return Ok(0.0);
        }
        let v = self.variance(x);
        if !(v > 0.0) {
            return Err(GgmError::DegenerateDistribution { node: x, value: v });
        }
        Ok(0.5 * (self.view.get(x, x) / v).ln())
    }
}

/// Pairwise second-order statistics after conditioning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalStats {
    pub sigma_ij_given_s: f64,
    pub sigma_ii_given_s: f64,
    pub sigma_jj_given_s: f64,
    pub cond_corr: f64,
    /// Nats.
    pub cond_mi: f64,
}

impl ConditionalStats {
    fn from_moments(i: usize, j: usize, cij: f64, vi: f64, vj: f64) -> Result<Self> {
        if !(vi > 0.0) {
            return Err(GgmError::DegenerateDistribution { node: i, value: vi });
        }
        if !(vj > 0.0) {
            return Err(GgmError::DegenerateDistribution { node: j, value: vj });
        }
        let prod = vi * vj;
        let denom = prod - cij * cij;
        if !(denom > 0.0) {
            return Err(GgmError::PerfectCorrelation { i, j });
        }
        Ok(Self {
            sigma_ij_given_s: cij,
            sigma_ii_given_s: vi,
            sigma_jj_given_s: vj,
            cond_corr: cij / prod.sqrt(),
            cond_mi: 0.5 * (prod / denom).ln(),
        })
    }
}

fn check_pair(view: &CovarianceView, i: usize, j: usize, set: &OrderedIndexSet) -> Result<()> {
    view.check_node(i)?;
    view.check_node(j)?;
    if i == j {
        return Err(GgmError::InvalidArgument(format!("i and j are both {i}")));
    }
    if set.contains(i) || set.contains(j) {
        return Err(GgmError::InvalidArgument(format!(
            "conditioning set {set} contains {i} or {j}"
        )));
    }
    Ok(())
}

/// `Σ_{ij} − Σ_{i,S} Σ_{S,S}⁻¹ Σ_{S,j}`.
pub fn conditional_covariance(view: &CovarianceView, i: usize, j: usize, set: &OrderedIndexSet) -> Result<f64> {
    check_pair(view, i, j, set)?;
    Ok(Conditioner::new(view, set)?.covariance(i, j))
}

/// Conditional correlation and mutual information of `(X_i, X_j)` given `X_S`.
pub fn conditional_mi(view: &CovarianceView, i: usize, j: usize, set: &OrderedIndexSet) -> Result<ConditionalStats> {
    check_pair(view, i, j, set)?;
    Conditioner::new(view, set)?.stats(i, j)
}

/// Projection of `X_i` onto the span of `X_S`: the coefficients
/// `Σ_{S,S}⁻¹ Σ_{S,i}` and the residual variance `Σ_{ii|S}`.
pub fn rejection_decomposition(view: &CovarianceView, i: usize, set: &OrderedIndexSet) -> Result<(DVector<f64>, f64)> {
    view.check_node(i)?;
    if set.contains(i) {
        return Err(GgmError::InvalidArgument(format!("{i} is in {set}")));
    }
    let cond = Conditioner::new(view, set)?;
    let beta = cond.coefficients(i);
    let sigma_si = cond.cross(i);
    let var = view.get(i, i) - beta.dot(&sigma_si);
    Ok((beta, var.max(0.0)))
}

/// Residual of `2 I(X_i;X_j|X_S) = log E[Y_i²] − log min_a E[(Y_i − a Y_j)²]`,
/// with the right-hand side built from explicit projection coefficients.
pub fn verify_lemma1(view: &CovarianceView, i: usize, j: usize, set: &OrderedIndexSet) -> Result<f64> {
    let stats = conditional_mi(view, i, j, set)?;
    let (beta_i, _) = rejection_decomposition(view, i, set)?;
    let (beta_j, _) = rejection_decomposition(view, j, set)?;
    let sss = submatrix(view, set, set)?;
    let si = DVector::from_iterator(set.len(), set.iter().map(|s| view.get(s, i)));
    let sj = DVector::from_iterator(set.len(), set.iter().map(|s| view.get(s, j)));

    // E[Y_a Y_b] with Y_a = X_a − β_aᵀ X_S
    let e_yy = |a: usize, b: usize, ba: &DVector<f64>, bb: &DVector<f64>, sa: &DVector<f64>, sb: &DVector<f64>| {
        view.get(a, b) - ba.dot(sb) - bb.dot(sa) + (ba.transpose() * &sss * bb)[(0, 0)]
    };
    let yi2 = e_yy(i, i, &beta_i, &beta_i, &si, &si);
    let yj2 = e_yy(j, j, &beta_j, &beta_j, &sj, &sj);
    let yij = e_yy(i, j, &beta_i, &beta_j, &si, &sj);
    let inner_min = yi2 - yij * yij / yj2;
    let rhs = yi2.ln() - inner_min.ln();
    Ok((2.0 * stats.cond_mi - rhs).abs())
}
