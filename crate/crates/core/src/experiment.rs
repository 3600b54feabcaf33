//! Recovery metrics and seeded experiment sweeps.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{GgmError, Result};
use crate::estimate::NeighborhoodEstimate;
use crate::gaussian::CovarianceView;
use crate::index_set::OrderedIndexSet;
use crate::mit::{baseline_fb_greedy, mi_threshold, mit_select_neighborhood, theorem3_epsilon, MitConfig};
use crate::model::{
    build_named, build_named_random, generate_random_walk_summable, sparsity_multiplier, GgmModel, ParamBox, Topology,
};
use crate::sampler::sample_covariance;
use crate::threshold::{
    forward_threshold, prune_neighborhood, threshold_select_neighborhood, PruneLevel, ThresholdConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Fraction of nodes whose estimated neighborhood is exactly right.
    pub success_rate: f64,
    /// `1 − |Â Δ A| / |A|` over ordered off-diagonal pairs.
    pub accuracy: f64,
}

/// Score one estimate per node against the true graph.
pub fn score(truth: &GgmModel, estimates: &[NeighborhoodEstimate]) -> Result<Metrics> {
    for (k, e) in estimates.iter().enumerate() {
        if e.node != k {
            return Err(GgmError::InvalidArgument(format!(
                "estimate {k} is for node {}",
                e.node
            )));
        }
    }
    let sets: Vec<Option<OrderedIndexSet>> = estimates.iter().map(|e| Some(e.members.clone())).collect();
    score_partial(truth, &sets)
}

/// Like [`score`], with `None` marking a node whose learner failed. A failed
/// node is never a success and counts as an empty row of `Â`.
///
/// With an empty true graph the accuracy is 1 if the estimate is empty too
/// and 0 otherwise.
pub fn score_partial(truth: &GgmModel, estimates: &[Option<OrderedIndexSet>]) -> Result<Metrics> {
    let n = truth.dim();
    if estimates.len() != n {
        return Err(GgmError::Shape {
            expected: n,
            found: estimates.len(),
        });
    }
    let empty = OrderedIndexSet::new();
    let mut successes = 0usize;
    let mut diff = 0usize;
    let mut support = 0usize;
    for (i, est) in estimates.iter().enumerate() {
        let truth_i = truth.neighbors(i);
        let s = est.as_ref().unwrap_or(&empty);
        s.check_bounds(n)?;
        if s.contains(i) {
            return Err(GgmError::InvalidArgument(format!("node {i} lists itself")));
        }
        if est.is_some() && s == truth_i {
            successes += 1;
        }
        diff += s.difference(truth_i).len() + truth_i.difference(s).len();
        support += truth_i.len();
    }
    let accuracy = if support == 0 {
        if diff == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - diff as f64 / support as f64
    };
    Ok(Metrics {
        success_rate: successes as f64 / n as f64,
        accuracy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeWeight {
    Fixed(f64),
    /// Magnitude uniform in `[lo, hi]`, random sign, seeded per trial.
    Uniform {
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Named {
        topology: Topology,
        /// Node count, or side length for grids.
        size: usize,
        weight: EdgeWeight,
        #[serde(default = "unit")]
        diag: f64,
    },
    Random {
        n: usize,
        param_box: ParamBox,
        #[serde(default)]
        triangle_free: bool,
    },
}

fn unit() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

impl GeneratorSpec {
    pub fn tag(&self) -> String {
        match self {
            GeneratorSpec::Named { topology, .. } => topology.tag().to_string(),
            GeneratorSpec::Random {
                triangle_free: true, ..
            } => "random-triangle-free".into(),
            GeneratorSpec::Random { .. } => "random".into(),
        }
    }

    pub fn build(&self, seed: u64) -> Result<GgmModel> {
        match *self {
            GeneratorSpec::Named {
                topology,
                size,
                weight: EdgeWeight::Fixed(w),
                diag,
            } => build_named(topology, size, w, diag),
            GeneratorSpec::Named {
                topology,
                size,
                weight: EdgeWeight::Uniform { lo, hi },
                diag,
            } => build_named_random(topology, size, lo, hi, diag, seed),
            GeneratorSpec::Random {
                n,
                ref param_box,
                triangle_free,
            } => generate_random_walk_summable(n, param_box, triangle_free, seed),
        }
    }

    fn triangle_free(&self, model: &GgmModel) -> bool {
        match self {
            GeneratorSpec::Random { triangle_free, .. } => *triangle_free,
            GeneratorSpec::Named { .. } => model.is_triangle_free(),
        }
    }
}

/// How the greedy learners pick their forward threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThresholdRule {
    /// One `ε` for every sample size.
    Fixed { epsilon: f64 },
    /// `ε = 8cρηd log n / (C_min N k_i)` with `d` the true maximum degree;
    /// exact-covariance runs use the floor `1e-12`.
    SampleScaled {
        c: f64,
        rho: f64,
        c_min: f64,
        #[serde(default = "unit")]
        k_i: f64,
    },
}

impl ThresholdRule {
    /// The `ε` for a given model and sample count, before any log transform.
    pub fn epsilon(&self, model: &GgmModel, samples: Option<usize>) -> Result<f64> {
        match *self {
            ThresholdRule::Fixed { epsilon } if epsilon > 0.0 && epsilon < 1.0 => Ok(epsilon),
            ThresholdRule::Fixed { epsilon } => Err(GgmError::Config(format!("epsilon {epsilon} outside (0,1)"))),
            ThresholdRule::SampleScaled { c, rho, c_min, k_i } => {
                let Some(count) = samples else { return Ok(1e-12) };
                let d = model.max_degree().max(1);
                theorem3_epsilon(c, rho, sparsity_multiplier(rho, d), d, model.dim(), count, c_min, k_i)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Mit {
        threshold: ThresholdRule,
        #[serde(default = "half")]
        nu: f64,
        #[serde(default)]
        label: Option<String>,
    },
    Baseline {
        threshold: ThresholdRule,
        #[serde(default = "half")]
        nu: f64,
        #[serde(default)]
        label: Option<String>,
    },
    Threshold {
        #[serde(default)]
        epsilon: Option<f64>,
        /// Absolute pruning level; wins over `nu`.
        #[serde(default)]
        tau_p: Option<f64>,
        #[serde(default = "half")]
        nu: f64,
        #[serde(default = "yes")]
        prune: bool,
        #[serde(default = "yes")]
        symmetry: bool,
        #[serde(default)]
        oracle: bool,
        /// Defaults to whether the true graph is triangle-free.
        #[serde(default)]
        triangle_free: Option<bool>,
        #[serde(default)]
        label: Option<String>,
    },
}

impl AlgorithmSpec {
    pub fn tag(&self) -> String {
        match self {
            AlgorithmSpec::Mit { label: Some(l), .. }
            | AlgorithmSpec::Baseline { label: Some(l), .. }
            | AlgorithmSpec::Threshold { label: Some(l), .. } => l.clone(),
            AlgorithmSpec::Mit { .. } => "mit".into(),
            AlgorithmSpec::Baseline { .. } => "baseline".into(),
            AlgorithmSpec::Threshold {
                prune,
                symmetry,
                oracle,
                ..
            } => {
                let mut t = String::from("threshold");
                if *oracle {
                    t.push_str("-oracle");
                }
                if *prune {
                    t.push_str("+prune");
                }
                if *symmetry {
                    t.push_str("+sym");
                }
                t
            }
        }
    }
}

/// Per-node outcome of one learner run; `None` marks a failed node.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub estimates: Vec<Option<OrderedIndexSet>>,
    /// First failure, if any.
    pub error: Option<String>,
}

/// Run one learner over every node of `view`.
///
/// Configuration problems that affect every node are returned as errors;
/// numerical failures on a single node are folded into the outcome.
pub fn run_algorithm(
    algorithm: &AlgorithmSpec,
    model: &GgmModel,
    view: &CovarianceView,
    triangle_free: bool,
) -> Result<TrialOutcome> {
    let n = view.dim();
    let samples = match view.kind() {
        crate::gaussian::CovarianceKind::Exact => None,
        crate::gaussian::CovarianceKind::Empirical { samples } => Some(samples),
    };
    let mut error = None;
    let mut keep = |r: Result<OrderedIndexSet>| match r {
        Ok(s) => Some(s),
        Err(e) => {
            error.get_or_insert_with(|| e.to_string());
            None
        }
    };
    let estimates: Vec<Option<OrderedIndexSet>> = match algorithm {
        AlgorithmSpec::Mit { threshold, nu, .. } => {
            let cfg = MitConfig::new(mi_threshold(threshold.epsilon(model, samples)?), *nu)?;
            (0..n)
                .map(|i| keep(mit_select_neighborhood(view, i, &cfg).map(|e| e.members)))
                .collect()
        }
        AlgorithmSpec::Baseline { threshold, nu, .. } => {
            let eps = threshold.epsilon(model, samples)?;
            (0..n)
                .map(|i| keep(baseline_fb_greedy(view, i, eps, *nu, None).map(|e| e.members)))
                .collect()
        }
        AlgorithmSpec::Threshold {
            epsilon,
            tau_p,
            nu,
            prune,
            symmetry,
            oracle,
            triangle_free: tf,
            ..
        } => {
            let pb = *model
                .param_box()
                .ok_or_else(|| GgmError::Config("thresholding needs a parameter box".into()))?;
            let mut cfg = ThresholdConfig::new(pb, tf.unwrap_or(triangle_free)).with_oracle(*oracle);
            cfg.epsilon = *epsilon;
            cfg.prune = match tau_p {
                Some(t) => PruneLevel::Absolute(*t),
                None => PruneLevel::Fraction(*nu),
            };
            forward_threshold(&cfg)?;
            if *prune {
                cfg.tau_p()?;
            }
            let truth = oracle.then_some(model);
            let mut sets: Vec<Option<OrderedIndexSet>> = (0..n)
                .map(|i| {
                    keep(threshold_select_neighborhood(view, i, &cfg, truth).and_then(|(e, _)| {
                        if *prune && !e.members.is_empty() {
                            prune_neighborhood(view, i, &e.members, &cfg)
                        } else {
                            Ok(e.members)
                        }
                    }))
                })
                .collect();
            if *symmetry {
                let snapshot = sets.clone();
                let has = |j: usize, i: usize| snapshot[j].as_ref().is_some_and(|s| s.contains(i));
                for (i, s) in sets.iter_mut().enumerate() {
                    if let Some(s) = s {
                        *s = s.iter().filter(|&j| has(j, i)).collect();
                    }
                }
            }
            sets
        }
    };
    Ok(TrialOutcome { estimates, error })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base_seed: u64,
    pub trials: usize,
    /// Sample counts; run in ascending order.
    #[serde(default)]
    pub sample_counts: Vec<usize>,
    /// Also run every learner on the exact covariance.
    #[serde(default)]
    pub include_exact: bool,
    pub cells: Vec<GeneratorSpec>,
    pub algorithms: Vec<AlgorithmSpec>,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let spec: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(GgmError::Config("trials must be at least 1".into()));
        }
        if self.sample_counts.is_empty() && !self.include_exact {
            return Err(GgmError::Config("no sample counts given".into()));
        }
        if let Some(&c) = self.sample_counts.iter().find(|&&c| c < 2) {
            return Err(GgmError::Config(format!("sample count {c} is below 2")));
        }
        if self.cells.is_empty() || self.algorithms.is_empty() {
            return Err(GgmError::Config("sweep needs cells and algorithms".into()));
        }
        Ok(())
    }

    /// Sample sizes in run order; `None` is the exact covariance.
    pub fn sample_grid(&self) -> Vec<Option<usize>> {
        let mut counts = self.sample_counts.clone();
        counts.sort_unstable();
        counts.dedup();
        let mut grid: Vec<Option<usize>> = counts.into_iter().map(Some).collect();
        if self.include_exact {
            grid.push(None);
        }
        grid
    }
}

/// Per-trial model seed derived from the base seed.
pub fn trial_seed(base_seed: u64, cell: usize, trial: usize) -> u64 {
    let mut x = base_seed;
    for v in [cell as u64, trial as u64] {
        x = splitmix64(x ^ splitmix64(v));
    }
    x
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub generator: String,
    pub n: usize,
    pub params: GeneratorSpec,
    /// `None` for the exact covariance.
    #[serde(rename = "N")]
    pub samples: Option<usize>,
    pub algorithm: String,
    pub seed: u64,
    pub trial: usize,
    pub metrics: Metrics,
    pub wall_time_ms: f64,
    pub failed: bool,
    #[serde(default)]
    pub error: Option<String>,
}

impl ExperimentRecord {
    /// The record with its timing zeroed, for comparisons across runs.
    pub fn without_wall_time(&self) -> Self {
        Self {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }
}

/// Run every (cell, sample size, algorithm, trial) combination.
///
/// The model of each (cell, trial) is shared by all sample sizes and
/// learners; the samples for one size are shared by all learners. Records
/// come back grouped by cell, then ascending sample size, then algorithm,
/// then trial.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let grid = spec.sample_grid();
    let mut records = Vec::new();
    for (ci, cell) in spec.cells.iter().enumerate() {
        let mut cell_records: Vec<(usize, usize, usize, ExperimentRecord)> = Vec::new();
        for trial in 0..spec.trials {
            let seed = trial_seed(spec.base_seed, ci, trial);
            let model = cell.build(seed);
            for (gi, &samples) in grid.iter().enumerate() {
                let view = model.as_ref().map_err(|e| e.to_string()).and_then(|m| match samples {
                    None => Ok(m.exact_view()),
                    Some(count) => sample_covariance(m, count, seed, count as u64).map_err(|e| e.to_string()),
                });
                for (ai, algo) in spec.algorithms.iter().enumerate() {
                    let mut record = ExperimentRecord {
                        generator: cell.tag(),
                        n: model.as_ref().map(|m| m.dim()).unwrap_or(0),
                        params: cell.clone(),
                        samples,
                        algorithm: algo.tag(),
                        seed,
                        trial,
                        metrics: Metrics {
                            success_rate: 0.0,
                            accuracy: 0.0,
                        },
                        wall_time_ms: 0.0,
                        failed: true,
                        error: None,
                    };
                    match (&model, &view) {
                        (Ok(m), Ok(v)) => {
                            let start = Instant::now();
                            let outcome = run_algorithm(algo, m, v, cell.triangle_free(m));
                            record.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
                            match outcome.and_then(|o| Ok((score_partial(m, &o.estimates)?, o.error))) {
                                Ok((metrics, error)) => {
                                    record.metrics = metrics;
                                    record.failed = error.is_some();
                                    record.error = error;
                                }
                                Err(e) => record.error = Some(e.to_string()),
                            }
                        }
                        (Err(e), _) => record.error = Some(e.to_string()),
                        (_, Err(e)) => record.error = Some(e.clone()),
                    }
                    cell_records.push((gi, ai, trial, record));
                }
            }
        }
        cell_records.sort_by_key(|&(gi, ai, trial, _)| (gi, ai, trial));
        records.extend(cell_records.into_iter().map(|(_, _, _, r)| r));
    }
    Ok(records)
}

/// Mean success rate per (generator, N, algorithm) group, in record order.
pub fn mean_success(records: &[ExperimentRecord]) -> Vec<(String, Option<usize>, String, f64)> {
    let mut out: Vec<(String, Option<usize>, String, f64, usize)> = Vec::new();
    for r in records {
        match out
            .iter_mut()
            .find(|g| g.0 == r.generator && g.1 == r.samples && g.2 == r.algorithm)
        {
            Some(g) => {
                g.3 += r.metrics.success_rate;
                g.4 += 1;
            }
            None => out.push((
                r.generator.clone(),
                r.samples,
                r.algorithm.clone(),
                r.metrics.success_rate,
                1,
            )),
        }
    }
    out.into_iter()
        .map(|(g, s, a, sum, k)| (g, s, a, sum / k as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// `.csv` means CSV, anything else JSON.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => OutputFormat::Csv,
            _ => OutputFormat::Json,
        }
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "generator",
    "n",
    "N",
    "algorithm",
    "seed",
    "trial",
    "success_rate",
    "accuracy",
    "wall_time_ms",
];

pub fn emit_results<W: Write>(
    records: &[ExperimentRecord],
    format: OutputFormat,
    wall_time: bool,
    w: &mut W,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let cols = if wall_time { &CSV_HEADER[..] } else { &CSV_HEADER[..8] };
            writeln!(w, "{}", cols.join(","))?;
            for r in records {
                let samples = r.samples.map_or_else(|| "exact".to_string(), |s| s.to_string());
                write!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    r.generator, r.n, samples, r.algorithm, r.seed, r.trial, r.metrics.success_rate, r.metrics.accuracy
                )?;
                if wall_time {
                    write!(w, ",{}", r.wall_time_ms)?;
                }
                writeln!(w)?;
            }
        }
        OutputFormat::Json => {
            let stripped: Vec<ExperimentRecord>;
            let out = if wall_time {
                records
            } else {
                stripped = records.iter().map(ExperimentRecord::without_wall_time).collect();
                &stripped
            };
            serde_json::to_writer_pretty(&mut *w, out)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn write_results(records: &[ExperimentRecord], path: &Path, wall_time: bool) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    emit_results(records, OutputFormat::for_path(path), wall_time, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn load_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn estimates(sets: &[&[usize]]) -> Vec<NeighborhoodEstimate> {
        sets.iter()
            .enumerate()
            .map(|(i, s)| NeighborhoodEstimate::new(i, OrderedIndexSet::from_unsorted(s.iter().copied())))
            .collect()
    }

    #[test]
    fn perfect_and_empty_scores() {
        let m = build_named(Topology::Chain, 4, -0.3, 1.0).unwrap();
        let perfect = estimates(&[&[1], &[0, 2], &[1, 3], &[2]]);
        assert_eq!(
            score(&m, &perfect).unwrap(),
            Metrics {
                success_rate: 1.0,
                accuracy: 1.0
            }
        );
        let single = build_named(Topology::Chain, 2, -0.3, 1.0).unwrap();
        let mut j = single.precision().clone().resize(5, 5, 0.0);
        for k in 2..5 {
            j[(k, k)] = 1.0;
        }
        let m = GgmModel::from_precision(j, None, None, "test").unwrap();
        let s = score(&m, &estimates(&[&[], &[], &[], &[], &[]])).unwrap();
        assert_eq!(s.success_rate, 3.0 / 5.0);
        assert_eq!(s.accuracy, 0.0);
    }

    #[test]
    fn empty_truth_convention() {
        let m = GgmModel::from_precision(DMatrix::identity(3, 3), None, None, "diag").unwrap();
        assert_eq!(score(&m, &estimates(&[&[], &[], &[]])).unwrap().accuracy, 1.0);
        assert_eq!(score(&m, &estimates(&[&[1], &[0], &[]])).unwrap().accuracy, 0.0);
    }

    #[test]
    fn failed_nodes_count_as_empty() {
        let m = build_named(Topology::Chain, 3, -0.3, 1.0).unwrap();
        let sets = vec![Some([1].into()), None, Some([1].into())];
        let s = score_partial(&m, &sets).unwrap();
        assert_eq!(s.success_rate, 2.0 / 3.0);
        assert_eq!(s.accuracy, 0.5);
    }

    #[test]
    fn score_rejects_misaligned_input() {
        let m = build_named(Topology::Chain, 3, -0.3, 1.0).unwrap();
        assert!(score(&m, &estimates(&[&[1], &[0, 2]])).is_err());
        assert!(score(&m, &estimates(&[&[0], &[0, 2], &[1]])).is_err());
        assert!(score(&m, &estimates(&[&[7], &[0, 2], &[1]])).is_err());
    }

    fn tiny_spec() -> SweepSpec {
        serde_json::from_str(
            r#"{
                "base_seed": 7,
                "trials": 2,
                "sample_counts": [500, 200],
                "include_exact": true,
                "cells": [{"kind": "named", "topology": "chain", "size": 5, "weight": {"lo": 0.2, "hi": 0.3}}],
                "algorithms": [
                    {"kind": "mit", "threshold": {"rule": "fixed", "epsilon": 0.01}},
                    {"kind": "baseline", "threshold": {"rule": "fixed", "epsilon": 0.01}},
                    {"kind": "threshold", "tau_p": 0.001}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn sweep_order_and_determinism() {
        let spec = tiny_spec();
        let a = run_sweep(&spec).unwrap();
        assert_eq!(a.len(), 3 * 3 * 2);
        let grid: Vec<Option<usize>> = a.iter().map(|r| r.samples).collect();
        assert_eq!(grid[0], Some(200));
        assert_eq!(grid[6], Some(500));
        assert_eq!(grid[12], None);
        assert_eq!(a[2].algorithm, "baseline");
        assert_eq!(a[4].algorithm, "threshold+prune+sym");
        let b = run_sweep(&spec).unwrap();
        let strip = |v: &[ExperimentRecord]| v.iter().map(|r| r.without_wall_time()).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
        let exact: Vec<_> = a.iter().filter(|r| r.samples.is_none()).collect();
        assert!(exact.iter().all(|r| r.metrics.success_rate == 1.0 && !r.failed));
    }

    #[test]
    fn one_cell_one_trial_one_record() {
        let mut spec = tiny_spec();
        spec.trials = 1;
        spec.sample_counts = vec![100];
        spec.include_exact = false;
        spec.algorithms.truncate(1);
        assert_eq!(run_sweep(&spec).unwrap().len(), 1);
    }

    #[test]
    fn generation_failure_is_recorded() {
        let mut spec = tiny_spec();
        spec.trials = 1;
        spec.cells = vec![GeneratorSpec::Named {
            topology: Topology::Diamond,
            size: 5,
            weight: EdgeWeight::Fixed(0.2),
            diag: 1.0,
        }];
        let r = run_sweep(&spec).unwrap();
        assert!(r.iter().all(|r| r.failed && r.error.is_some()));
    }

    #[test]
    fn csv_and_json_emission() {
        let mut buf = Vec::new();
        emit_results(&[], OutputFormat::Csv, true, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
        let mut spec = tiny_spec();
        spec.trials = 1;
        spec.sample_counts = vec![100];
        spec.include_exact = false;
        spec.algorithms.truncate(1);
        let records = run_sweep(&spec).unwrap();
        let mut buf = Vec::new();
        emit_results(&records, OutputFormat::Csv, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("generator,n,N,algorithm,seed,trial,success_rate,accuracy\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_results(&records, &path, true).unwrap();
        assert_eq!(load_records(&path).unwrap(), records);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = tiny_spec();
        spec.trials = 0;
        assert!(run_sweep(&spec).is_err());
        let mut spec = tiny_spec();
        spec.sample_counts = vec![1];
        assert!(spec.validate().is_err());
    }
}
