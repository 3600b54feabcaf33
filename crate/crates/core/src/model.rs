//! Ground-truth Gaussian graphical models.
//!
//! A [`GgmModel`] owns a precision matrix `J`, its inverse `Σ`, and the support
//! graph of `J`. Models come from the named topologies ([`build_named`]), the
//! random walk-summable generator ([`generate_random_walk_summable`]) or a
//! model file ([`GgmModel::load`]).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::gaussian::CovarianceView;
use crate::index_set::OrderedIndexSet;

/// Attempts made by the random generator before giving up.
pub const GENERATION_BUDGET: usize = 10_000;

/// Target `‖|R|‖₂` of a generated model, as a fraction of `α`.
pub const SPECTRAL_TARGET: f64 = 0.95;

/// Largest dimension accepted by [`check_restricted_eigenvalue`].
pub const RESTRICTED_EIGEN_MAX_DIM: usize = 14;

const EIGEN_TOL: f64 = 1e-10;

/// Bounds a walk-summable model is assumed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub alpha: f64,
    /// Lower bound on nonzero off-diagonal magnitudes of `J`.
    pub a: f64,
    /// Upper bound on nonzero off-diagonal magnitudes of `J`.
    pub b: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// Degree bound Δ.
    pub delta_max: usize,
}

impl ParamBox {
    pub fn new(alpha: f64, a: f64, b: f64, d_min: f64, d_max: f64, delta_max: usize) -> Result<Self> {
        let pb = Self {
            alpha,
            a,
            b,
            d_min,
            d_max,
            delta_max,
        };
        pb.validate()?;
        Ok(pb)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GgmError::Config(format!("parameter box: {m}")));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0,1)");
        }
        if !(self.a > 0.0 && self.a <= self.b) {
            return bad("need 0 < a <= b");
        }
        if !(self.d_min > 0.0 && self.d_min <= self.d_max) {
            return bad("need 0 < d_min <= d_max");
        }
        if self.delta_max < 1 {
            return bad("delta_max must be at least 1");
        }
        Ok(())
    }
}

/// `R = I − J_norm`, zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCorrelationMatrix {
    entries: DMatrix<f64>,
}

impl PartialCorrelationMatrix {
    pub fn from_precision(precision: &DMatrix<f64>) -> Self {
        let n = precision.nrows();
        let entries = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                -precision[(i, j)] / (precision[(i, i)] * precision[(j, j)]).sqrt()
            }
        });
        Self { entries }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `‖|R|‖₂`, the spectral norm of the entrywise absolute value.
    pub fn abs_spectral_norm(&self) -> f64 {
        spectral_norm_sym(&self.entries.abs())
    }
}

fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let ev = SymmetricEigen::new(m.clone()).eigenvalues;
    (ev.min(), ev.max())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Chain,
    Star,
    Grid,
    Diamond,
}

impl Topology {
    pub fn tag(self) -> &'static str {
        match self {
            Topology::Chain => "chain",
            Topology::Star => "star",
            Topology::Grid => "grid",
            Topology::Diamond => "diamond",
        }
    }

    /// Node count and edge list; `size` is the side length for grids.
    pub fn edges(self, size: usize) -> Result<(usize, Vec<(usize, usize)>)> {
        match self {
            Topology::Chain => {
                if size < 2 {
                    return Err(GgmError::Config("chain needs at least 2 nodes".into()));
                }
                Ok((size, (0..size - 1).map(|i| (i, i + 1)).collect()))
            }
            Topology::Star => {
                if size < 2 {
                    return Err(GgmError::Config("star needs at least 2 nodes".into()));
                }
                Ok((size, (1..size).map(|i| (0, i)).collect()))
            }
            Topology::Grid => {
                if size < 2 {
                    return Err(GgmError::Config("grid side must be at least 2".into()));
                }
                let mut e = Vec::new();
                for r in 0..size {
                    for c in 0..size {
                        let v = r * size + c;
                        if c + 1 < size {
                            e.push((v, v + 1));
                        }
                        if r + 1 < size {
                            e.push((v, v + size));
                        }
                    }
                }
                Ok((size * size, e))
            }
            Topology::Diamond => {
                if size != 4 {
                    return Err(GgmError::Config("diamond has exactly 4 nodes".into()));
                }
                // K4 minus the edge {2,3}: degrees (3,3,2,2)
                Ok((4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]))
            }
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Topology {
    type Err = GgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Topology::Chain),
            "star" => Ok(Topology::Star),
            "grid" => Ok(Topology::Grid),
            "diamond" => Ok(Topology::Diamond),
            other => Err(GgmError::Parse(format!("unknown topology {other}"))),
        }
    }
}

/// Immutable ground-truth model.
#[derive(Debug, Clone)]
pub struct GgmModel {
    precision: DMatrix<f64>,
    covariance: DMatrix<f64>,
    adjacency: Vec<Vec<bool>>,
    neighborhoods: Vec<OrderedIndexSet>,
    param_box: Option<ParamBox>,
    seed: Option<u64>,
    generator: String,
}

impl GgmModel {
    /// Validates `J` and derives `Σ`, the adjacency and the neighborhoods.
    ///
    /// An off-diagonal entry is an edge iff `|J_norm,ij| ≥ a/2` when a parameter
    /// box is attached, and iff it is nonzero otherwise.
    pub fn from_precision(
        precision: DMatrix<f64>,
        param_box: Option<ParamBox>,
        seed: Option<u64>,
        generator: impl Into<String>,
    ) -> Result<Self> {
        let n = precision.nrows();
        if n == 0 || precision.ncols() != n {
            return Err(GgmError::InvalidModel("precision must be square and non-empty".into()));
        }
        if precision.iter().any(|x| !x.is_finite()) {
            return Err(GgmError::InvalidModel("non-finite precision entry".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (x, y) = (precision[(i, j)], precision[(j, i)]);
                if (x - y).abs() > 1e-12 * x.abs().max(1.0) {
                    return Err(GgmError::InvalidModel(format!("precision asymmetric at ({i},{j})")));
                }
            }
        }
        if let Some(pb) = &param_box {
            pb.validate()?;
        }
        let chol = Cholesky::new(precision.clone()).ok_or_else(|| GgmError::NotPositiveDefinite {
            min_eigenvalue: extreme_eigenvalues(&precision).0,
        })?;
        let mut covariance = chol.inverse();
        covariance = (&covariance + covariance.transpose()) * 0.5;
        let residual = (&covariance * &precision - DMatrix::<f64>::identity(n, n)).amax();
        if residual > 1e-8 {
            return Err(GgmError::InvalidModel(format!(
                "covariance inversion residual {residual:e} exceeds 1e-8"
            )));
        }

        let cut = param_box.map(|pb| pb.a / 2.0);
        let mut adjacency = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let norm = precision[(i, j)].abs() / (precision[(i, i)] * precision[(j, j)]).sqrt();
                adjacency[i][j] = match cut {
                    Some(c) => norm >= c,
                    None => norm > 0.0,
                };
            }
        }
        let neighborhoods = adjacency
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &e)| e).map(|(j, _)| j).collect())
            .collect();
        Ok(Self {
            precision,
            covariance,
            adjacency,
            neighborhoods,
            param_box,
            seed,
            generator: generator.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.precision.nrows()
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn exact_view(&self) -> CovarianceView {
        CovarianceView::exact(self.covariance.clone()).expect("model covariance is a valid view")
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn neighbors(&self, i: usize) -> &OrderedIndexSet {
        &self.neighborhoods[i]
    }

    pub fn neighborhoods(&self) -> &[OrderedIndexSet] {
        &self.neighborhoods
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighborhoods[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighborhoods.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Undirected edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn param_box(&self) -> Option<&ParamBox> {
        self.param_box.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn generator(&self) -> &str {
        &self.generator
    }

    pub fn partial_correlation(&self) -> PartialCorrelationMatrix {
        PartialCorrelationMatrix::from_precision(&self.precision)
    }

    pub fn is_triangle_free(&self) -> bool {
        self.edges()
            .iter()
            .all(|&(i, j)| !self.neighborhoods[i].iter().any(|k| self.adjacency[j][k]))
    }

    pub fn to_file(&self) -> ModelFile {
        let n = self.dim();
        ModelFile {
            n,
            precision: (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| self.precision[(i, j)])
                .collect(),
            param_box: self.param_box,
            seed: self.seed,
            generator: self.generator.clone(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.precision.len() != file.n * file.n {
            return Err(GgmError::Shape {
                expected: file.n * file.n,
                found: file.precision.len(),
            });
        }
        let j = DMatrix::from_row_slice(file.n, file.n, &file.precision);
        Self::from_precision(j, file.param_box, file.seed, file.generator)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk model document. The covariance is recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: usize,
    /// Row-major `n·n` entries of `J`.
    pub precision: Vec<f64>,
    pub param_box: Option<ParamBox>,
    pub seed: Option<u64>,
    pub generator: String,
}

fn named_from_weights(
    topology: Topology,
    size: usize,
    weights: &[f64],
    diag: f64,
    seed: Option<u64>,
) -> Result<GgmModel> {
    let (n, edges) = topology.edges(size)?;
    if !(diag > 0.0) {
        return Err(GgmError::Config("diagonal must be positive".into()));
    }
    let mut j = DMatrix::from_diagonal_element(n, n, diag);
    for (&(u, v), &w) in edges.iter().zip(weights) {
        if w == 0.0 {
            return Err(GgmError::Config("edge weight must be nonzero".into()));
        }
        j[(u, v)] = w;
        j[(v, u)] = w;
    }
    let mut model = GgmModel::from_precision(j, None, seed, topology.tag())?;
    model.param_box = infer_box(&model);
    Ok(model)
}

/// Parameter box a named model satisfies, if it is walk-summable.
fn infer_box(model: &GgmModel) -> Option<ParamBox> {
    let alpha = model.partial_correlation().abs_spectral_norm();
    let mags: Vec<f64> = model
        .edges()
        .iter()
        .map(|&(i, j)| model.precision[(i, j)].abs())
        .collect();
    if mags.is_empty() || !(alpha > 0.0 && alpha < 1.0) {
        return None;
    }
    let diag = model.precision.diagonal();
    ParamBox::new(
        alpha,
        mags.iter().copied().fold(f64::INFINITY, f64::min),
        mags.iter().copied().fold(0.0, f64::max),
        diag.min(),
        diag.max(),
        model.max_degree().max(1),
    )
    .ok()
}

/// Named topology with one uniform off-diagonal weight.
pub fn build_named(topology: Topology, size: usize, edge_weight: f64, diag: f64) -> Result<GgmModel> {
    let (_, edges) = topology.edges(size)?;
    named_from_weights(topology, size, &vec![edge_weight; edges.len()], diag, None)
}

/// Named topology whose edge magnitudes are drawn uniformly from `[lo, hi]`
/// with random signs, redrawn until `J` is positive definite.
pub fn build_named_random(topology: Topology, size: usize, lo: f64, hi: f64, diag: f64, seed: u64) -> Result<GgmModel> {
    if !(lo > 0.0 && lo <= hi) {
        return Err(GgmError::Config("need 0 < lo <= hi for edge magnitudes".into()));
    }
    let (_, edges) = topology.edges(size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERATION_BUDGET {
        let weights: Vec<f64> = edges
            .iter()
            .map(|_| {
                let m = if hi > lo { rng.random_range(lo..=hi) } else { lo };
                if rng.random::<bool>() {
                    m
                } else {
                    -m
                }
            })
            .collect();
        match named_from_weights(topology, size, &weights, diag, Some(seed)) {
            Ok(m) => return Ok(m),
            Err(GgmError::NotPositiveDefinite { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GgmError::GenerationFailed {
        attempts: GENERATION_BUDGET,
    })
}

/// Inclusion probability of each candidate edge in the random generator.
///
/// `min(1, Δ/(n−1))`; for triangle-free draws it is further capped at
/// `C(n,3)^(−1/3)`, which keeps about one expected triangle per structure so
/// whole-structure rejection terminates.
pub fn edge_probability(n: usize, delta_max: usize, triangle_free: bool) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let p = (delta_max as f64 / (n - 1) as f64).min(1.0);
    if triangle_free && n >= 3 {
        let triples = (n * (n - 1) * (n - 2)) as f64 / 6.0;
        p.min(triples.powf(-1.0 / 3.0))
    } else {
        p
    }
}

fn has_triangle(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    edges.iter().any(|&(u, v)| (0..n).any(|k| adj[u][k] && adj[v][k]))
}

/// Random α-walk-summable model inside `pb`.
///
/// Each attempt draws a structure (edges i.i.d. with [`edge_probability`]),
/// rejects it on a degree above Δ or, when asked, a triangle; draws standard
/// Gaussian partial correlations on the edges, rescales them so
/// `‖|R|‖₂ = 0.95 α`, draws the diagonal uniformly in `[d_min, d_max]` and
/// rejects the whole instance if any `|J_ij|` leaves `[a, b]`.
pub fn generate_random_walk_summable(n: usize, pb: &ParamBox, triangle_free: bool, seed: u64) -> Result<GgmModel> {
    pb.validate()?;
    if n < 2 {
        return Err(GgmError::Config("random models need n >= 2".into()));
    }
    let p = edge_probability(n, pb.delta_max, triangle_free);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GENERATION_BUDGET {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        if degree.iter().any(|&d| d > pb.delta_max) {
            continue;
        }
        if triangle_free && has_triangle(n, &edges) {
            continue;
        }

        let z: Vec<f64> = edges.iter().map(|_| rng.sample(StandardNormal)).collect();
        let mut abs_r = DMatrix::<f64>::zeros(n, n);
        for (&(u, v), &w) in edges.iter().zip(&z) {
            abs_r[(u, v)] = w.abs();
            abs_r[(v, u)] = w.abs();
        }
        let scale = SPECTRAL_TARGET * pb.alpha / spectral_norm_sym(&abs_r);
        let diag: Vec<f64> = (0..n)
            .map(|_| {
                if pb.d_max > pb.d_min {
                    rng.random_range(pb.d_min..=pb.d_max)
                } else {
                    pb.d_min
                }
            })
            .collect();

        let mut j = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone()));
        let mut in_box = true;
        for (&(u, v), &w) in edges.iter().zip(&z) {
            let entry = -scale * w * (diag[u] * diag[v]).sqrt();
            if entry.abs() < pb.a || entry.abs() > pb.b {
                in_box = false;
                break;
            }
            j[(u, v)] = entry;
            j[(v, u)] = entry;
        }
        if !in_box {
            continue;
        }
        let tag = if triangle_free {
            "random-triangle-free"
        } else {
            "random"
        };
        return GgmModel::from_precision(j, Some(*pb), Some(seed), tag);
    }
    Err(GgmError::GenerationFailed {
        attempts: GENERATION_BUDGET,
    })
}

/// `‖|R|‖₂ ≤ α`.
pub fn check_walk_summable(model: &GgmModel, alpha: f64) -> (bool, f64) {
    let norm = model.partial_correlation().abs_spectral_norm();
    (norm <= alpha, norm)
}

/// `(d_max α / a)²`.
pub fn degree_bound(pb: &ParamBox) -> f64 {
    (pb.d_max * pb.alpha / pb.a).powi(2)
}

/// Max degree within both `(d_max α/a)²` and Δ.
pub fn check_degree_bound(model: &GgmModel, pb: &ParamBox) -> bool {
    let d = model.max_degree();
    d as f64 <= degree_bound(pb) && d <= pb.delta_max
}

/// `1 ≤ Δ < d_min α / b`: the condition under which models of arbitrary size
/// exist for the box.
pub fn check_scalability(pb: &ParamBox) -> bool {
    pb.delta_max >= 1 && (pb.delta_max as f64) < pb.d_min * pb.alpha / pb.b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvalueReport {
    pub j_low: f64,
    pub j_high: f64,
    pub sigma_low: f64,
    pub sigma_high: f64,
    pub ok: bool,
}

/// Extreme eigenvalues of `J` and `Σ` against
/// `λ(J) ⊆ [(1−α)d_min, (1+α)d_max]` and `λ(Σ) ⊆ [((1+α)d_max)⁻¹, ((1−α)d_min)⁻¹]`.
pub fn check_eigenvalue_bounds(model: &GgmModel, pb: &ParamBox) -> EigenvalueReport {
    let (j_low, j_high) = extreme_eigenvalues(&model.precision);
    let (sigma_low, sigma_high) = extreme_eigenvalues(&model.covariance);
    let jl = (1.0 - pb.alpha) * pb.d_min;
    let jh = (1.0 + pb.alpha) * pb.d_max;
    let within = |x: f64, lo: f64, hi: f64| x >= lo * (1.0 - EIGEN_TOL) && x <= hi * (1.0 + EIGEN_TOL);
    let ok = within(j_low, jl, jh)
        && within(j_high, jl, jh)
        && within(sigma_low, 1.0 / jh, 1.0 / jl)
        && within(sigma_high, 1.0 / jh, 1.0 / jl);
    EigenvalueReport {
        j_low,
        j_high,
        sigma_low,
        sigma_high,
        ok,
    }
}

/// `η = ⌈2 + 4ρ²(√((ρ²−ρ)/d) + √2)²⌉`.
pub fn sparsity_multiplier(rho: f64, d: usize) -> usize {
    let d = d.max(1) as f64;
    let inner = ((rho * rho - rho).max(0.0) / d).sqrt() + 2f64.sqrt();
    (2.0 + 4.0 * rho * rho * inner * inner).ceil() as usize
}

/// Exhaustive restricted-eigenvalue check for node `i`: every column
/// submatrix of `Σ_{−i}` on at most `η·d` columns has singular values in
/// `[C_min, ρ C_min]`.
///
/// Column-submatrix singular values interlace, so only supports of the
/// maximal size are enumerated. Cost is `C(n−1, min(ηd, n−1))` SVDs.
pub fn check_restricted_eigenvalue(model: &GgmModel, i: usize, c_min: f64, rho: f64, d: usize) -> Result<bool> {
    restricted_eigenvalue_on(&model.covariance, i, c_min, rho, d)
}

/// [`check_restricted_eigenvalue`] on a bare covariance matrix.
pub fn restricted_eigenvalue_on(cov: &DMatrix<f64>, i: usize, c_min: f64, rho: f64, d: usize) -> Result<bool> {
    let n = cov.nrows();
    if n > RESTRICTED_EIGEN_MAX_DIM {
        return Err(GgmError::UnsupportedSize {
            n,
            limit: RESTRICTED_EIGEN_MAX_DIM,
        });
    }
    if i >= n {
        return Err(GgmError::Dimension { index: i, dim: n });
    }
    let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    if others.is_empty() {
        return Ok(true);
    }
    let width = (sparsity_multiplier(rho, d) * d.max(1)).min(others.len());
    let lo = c_min * (1.0 - EIGEN_TOL);
    let hi = rho * c_min * (1.0 + EIGEN_TOL);
    let mut ok = true;
    for_each_combination(others.len(), width, &mut |cols| {
        let sub = DMatrix::from_fn(others.len(), cols.len(), |r, c| cov[(others[r], others[cols[c]])]);
        let sv = sub.singular_values();
        if sv.min() < lo || sv.max() > hi {
            ok = false;
        }
        ok
    });
    Ok(ok)
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order until it
/// returns false.
pub(crate) fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < n - k + pos {
                break;
            }
            if pos == 0 {
                return;
            }
        }
        idx[pos] += 1;
        for q in (pos + 1)..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}
