//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ggm_core::experiment::{mean_success, run_sweep, SweepSpec};
use ggm_core::gaussian::{conditional_covariance, verify_lemma1, Conditioner};
use ggm_core::mit::{mit_select_neighborhood, MitConfig};
use ggm_core::model::{build_named, generate_random_walk_summable, Topology};
use ggm_core::sampler::{concentration_curve, sample_covariance};
use ggm_core::threshold::{
    forward_threshold, learn_graph, lemma4_lower_bound, pruning_coefficients, theorem2_size_bound,
    threshold_select_neighborhood, Pipeline, PruneLevel, ThresholdConfig,
};
use ggm_core::{CovarianceView, GgmModel, OrderedIndexSet, ParamBox};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// α = 0.4, a = 0.01, b = 0.28, Δ = 10, unit diagonal.
fn reference_box() -> ParamBox {
    ParamBox::new(0.4, 0.01, 0.28, 1.0, 1.0, 10).unwrap()
}

fn reference_instance(seed: u64) -> GgmModel {
    generate_random_walk_summable(20, &reference_box(), true, seed).unwrap()
}

/// Denser graphs with triangles allowed; used at n <= 10 where the
/// degree-capped generator succeeds reliably.
fn general_box() -> ParamBox {
    ParamBox::new(0.6, 0.02, 0.4, 1.0, 1.0, 6).unwrap()
}

/// Non-unit diagonal.
fn scaled_box() -> ParamBox {
    ParamBox::new(0.5, 0.02, 0.5, 1.0, 2.0, 4).unwrap()
}

fn sets_equal(est: &[ggm_core::NeighborhoodEstimate], m: &GgmModel) -> bool {
    est.iter().all(|e| &e.members == m.neighbors(e.node))
}

fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let ev = SymmetricEigen::new(m.clone()).eigenvalues;
    (ev.min(), ev.max())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg = ThresholdConfig::new(reference_box(), true).with_prune(PruneLevel::Fraction(0.5));
    let mut exact = 0;
    for seed in 0..100 {
        let m = reference_instance(seed);
        let est = learn_graph(&m.exact_view(), &cfg, None, Pipeline::default()).unwrap();
        if sets_equal(&est, &m) {
            exact += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        exact >= 99 && secs < 10.0,
        format!("exact-covariance recovery on {exact}/100 seeds (need >= 99) in {secs:.2} s (limit 10 s)"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let m = reference_instance(0);
    let pruned_cfg = ThresholdConfig::new(reference_box(), true).with_prune(PruneLevel::Absolute(1e-3));
    let forward_only = Pipeline {
        prune: false,
        symmetry: true,
    };
    let true_edges = m.edge_count();
    let mut exact = 0;
    let mut superset = 0;
    let mut false_edges = 0usize;
    let mut kept_false = 0usize;
    let mut lost_true = 0usize;
    for sample_seed in 0..100 {
        let view = sample_covariance(&m, 1_000_000, sample_seed, 0).unwrap();
        let pruned = learn_graph(&view, &pruned_cfg, None, Pipeline::default()).unwrap();
        if sets_equal(&pruned, &m) {
            exact += 1;
        }
        for e in &pruned {
            kept_false += e.members.difference(m.neighbors(e.node)).len();
            lost_true += m.neighbors(e.node).difference(&e.members).len();
        }
        let fwd = learn_graph(&view, &pruned_cfg, None, forward_only).unwrap();
        if fwd.iter().all(|e| m.neighbors(e.node).is_subset(&e.members)) {
            superset += 1;
        }
        false_edges += fwd
            .iter()
            .map(|e| e.members.difference(m.neighbors(e.node)).len())
            .sum::<usize>()
            / 2;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        exact >= 90 && superset >= 90 && secs < 120.0,
        format!(
            "N = 1e6, tau_p = 1e-3: exact graph on {exact}/100 sample seeds (need >= 90; mean {:.2} false and \
             {:.2} missed edges after pruning); forward + symmetry superset of the {true_edges} true edges on \
             {superset}/100 (mean {:.1} false edges); {secs:.1} s (limit 120 s)",
            kept_false as f64 / 200.0,
            lost_true as f64 / 200.0,
            false_edges as f64 / 100.0
        ),
    )
}

fn criterion_3() -> Outcome {
    let pb = reference_box();
    let cfg = ThresholdConfig::new(pb, true);
    let tau = forward_threshold(&cfg).unwrap();
    let mut violations = 0;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let m = reference_instance(seed);
        let v = m.exact_view();
        for i in 0..m.dim() {
            let (e, _) = threshold_select_neighborhood(&v, i, &cfg, None).unwrap();
            let bound = theorem2_size_bound(&pb, tau, m.degree(i));
            if e.members.len() as f64 > bound {
                violations += 1;
            }
            if bound > 0.0 {
                worst = worst.max(e.members.len() as f64 / bound);
            }
        }
    }
    outcome(
        violations == 0,
        format!("|S_i| above the size bound in {violations} of 2000 node runs (largest |S_i|/bound {worst:.2e})"),
    )
}

fn criterion_4() -> Outcome {
    let mut violations = 0;
    let mut max_deg = 0;
    for (pb, n, tf) in [
        (reference_box(), 20, true),
        (general_box(), 10, false),
        (scaled_box(), 10, false),
        (scaled_box(), 20, true),
    ] {
        let limit = (pb.d_max * pb.alpha / pb.a).powi(2);
        for seed in 0..100 {
            let m = generate_random_walk_summable(n, &pb, tf, seed).unwrap();
            let deg = (0..m.dim()).map(|i| m.neighbors(i).len()).max().unwrap();
            max_deg = max_deg.max(deg);
            if deg as f64 > limit {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("degree bound violated by {violations} of 400 models (largest degree {max_deg})"),
    )
}

fn lemma4_models() -> Vec<GgmModel> {
    let mut models = Vec::new();
    for seed in 0..3 {
        models.push(generate_random_walk_summable(12, &reference_box(), true, seed).unwrap());
        models.push(generate_random_walk_summable(10, &general_box(), false, seed).unwrap());
        models.push(generate_random_walk_summable(10, &scaled_box(), false, seed).unwrap());
    }
    models.push(build_named(Topology::Chain, 8, -0.3, 1.0).unwrap());
    models.push(build_named(Topology::Star, 8, 0.3, 1.0).unwrap());
    models.push(build_named(Topology::Grid, 3, 0.2, 1.0).unwrap());
    models.push(build_named(Topology::Diamond, 4, 0.25, 1.0).unwrap());
    models
}

fn criterion_5() -> Outcome {
    // Equality holds on some graphs; allow only floating-point rounding.
    const ROUNDING: f64 = 1e-12;
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut rounds = 0usize;
    let mut round_violations = 0usize;
    let mut tightest = f64::INFINITY;
    for m in lemma4_models() {
        let n = m.dim();
        let v = m.exact_view();
        let flags: &[bool] = if m.is_triangle_free() { &[false, true] } else { &[false] };
        for i in 0..n {
            let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            for mask in 0u32..(1 << others.len()) {
                let set: OrderedIndexSet = others
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &k)| k)
                    .collect();
                let undiscovered = m.neighbors(i).difference(&set);
                if undiscovered.is_empty() {
                    continue;
                }
                let cond = Conditioner::new(&v, &set).unwrap();
                let actual = undiscovered
                    .iter()
                    .map(|j| cond.covariance(i, j).abs())
                    .fold(0.0, f64::max);
                for &tf in flags {
                    let bound = lemma4_lower_bound(&m, i, &set, tf).unwrap();
                    checked += 1;
                    tightest = tightest.min(actual / bound);
                    if actual < bound * (1.0 - ROUNDING) {
                        violations += 1;
                    }
                }
            }
            for &tf in flags {
                let cfg = ThresholdConfig::new(*m.param_box().unwrap(), tf);
                let tau = forward_threshold(&cfg).unwrap();
                let (_, trace) = threshold_select_neighborhood(&v, i, &cfg, None).unwrap();
                let mut before = OrderedIndexSet::new();
                for r in std::iter::once(None).chain(trace.iter().map(Some)) {
                    if let Some(r) = r {
                        before = r.set.clone();
                    }
                    if m.neighbors(i).is_subset(&before) {
                        break;
                    }
                    rounds += 1;
                    if tau > lemma4_lower_bound(&m, i, &before, tf).unwrap() {
                        round_violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0 && round_violations == 0,
        format!(
            "bound exceeded the population maximum in {violations} of {checked} (node, set) cases \
             (smallest actual/bound {tightest:.6}); thresholding threshold above the per-round bound in \
             {round_violations} of {rounds} rounds"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut max_nb_err = 0.0f64;
    let mut max_non_err = 0.0f64;
    let mut prune_misses = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = ThresholdConfig::new(reference_box(), true);
    for seed in 0..100 {
        let m = reference_instance(seed);
        let v = m.exact_view();
        let j = m.precision();
        for i in 0..m.dim() {
            let mut set = m.neighbors(i).clone();
            for k in (0..m.dim()).filter(|&k| k != i) {
                if rng.random_bool(0.3) {
                    set.insert(k);
                }
            }
            let gamma = pruning_coefficients(&v, i, &set).unwrap();
            for (p, s) in set.iter().enumerate() {
                if m.is_edge(i, s) {
                    max_nb_err = max_nb_err.max((gamma[p] + j[(i, s)] / j[(i, i)]).abs());
                } else {
                    max_non_err = max_non_err.max(gamma[p].abs());
                }
            }
            if &ggm_core::threshold::prune_neighborhood(&v, i, &set, &cfg).unwrap() != m.neighbors(i) {
                prune_misses += 1;
            }
        }
    }
    outcome(
        max_nb_err <= 1e-9 && max_non_err <= 1e-10 && prune_misses == 0,
        format!(
            "max |Gamma + J_is/J_ii| over neighbors {max_nb_err:.2e} (limit 1e-9), max |Gamma| over \
             non-neighbors {max_non_err:.2e} (limit 1e-10); pruning missed N_i {prune_misses} times"
        ),
    )
}

fn criterion_7() -> Outcome {
    // Exact covariance: any positive threshold below the weakest edge's MI works.
    let cfg = MitConfig::new(1e-8, 0.5).unwrap();
    let mut leaves = 0;
    let mut failures = 0;
    for seed in 0..100 {
        let m = reference_instance(seed);
        let v = m.exact_view();
        for i in (0..m.dim()).filter(|&i| m.degree(i) == 1) {
            leaves += 1;
            let e = mit_select_neighborhood(&v, i, &cfg).unwrap();
            if &e.members != m.neighbors(i) || e.trace.len() != 1 || e.truncated {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0 && leaves > 0,
        format!("{failures} of {leaves} degree-1 nodes not resolved in exactly one round"),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pool = Vec::new();
    for seed in 0..10 {
        pool.push(generate_random_walk_summable(6 + (seed as usize % 3) * 2, &general_box(), false, seed).unwrap());
        pool.push(generate_random_walk_summable(12, &reference_box(), true, seed).unwrap());
        pool.push(generate_random_walk_summable(8, &scaled_box(), false, seed).unwrap());
    }
    let mut worst = 0.0f64;
    let mut probes = 0;
    let mut skipped = 0;
    while probes < 10_000 {
        let m = &pool[rng.random_range(0..pool.len())];
        let n = m.dim();
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let set: OrderedIndexSet = (0..n).filter(|&k| k != i && k != j && rng.random_bool(0.4)).collect();
        let v = m.exact_view();
        let sub = DMatrix::from_fn(set.len(), set.len(), |r, c| v.get(set.as_slice()[r], set.as_slice()[c]));
        if !set.is_empty() && eigen_range(&sub).0 < 1e-3 {
            skipped += 1;
            continue;
        }
        worst = worst.max(verify_lemma1(&v, i, j, &set).unwrap());
        probes += 1;
    }
    outcome(
        worst < 1e-8,
        format!("max residual {worst:.2e} over {probes} probes (limit 1e-8, {skipped} ill-conditioned draws skipped)"),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let spec: SweepSpec = serde_json::from_str(
        r#"{
            "base_seed": 2024,
            "trials": 100,
            "sample_counts": [100, 1000, 10000, 100000],
            "cells": [
                {"kind": "named", "topology": "chain", "size": 10, "weight": {"lo": 0.2, "hi": 0.3}},
                {"kind": "named", "topology": "star", "size": 10, "weight": {"lo": 0.2, "hi": 0.3}},
                {"kind": "named", "topology": "grid", "size": 3, "weight": {"lo": 0.2, "hi": 0.3}},
                {"kind": "named", "topology": "diamond", "size": 4, "weight": {"lo": 0.2, "hi": 0.3}}
            ],
            "algorithms": [
                {"kind": "mit", "threshold": {"rule": "sample_scaled", "c": 0.001, "rho": 3, "c_min": 0.1}},
                {"kind": "baseline", "threshold": {"rule": "sample_scaled", "c": 0.001, "rho": 3, "c_min": 0.1}}
            ]
        }"#,
    )
    .unwrap();
    let records = run_sweep(&spec).unwrap();
    let means = mean_success(&records);
    let mut pass = true;
    let mut lines = Vec::new();
    for generator in ["chain", "star", "grid", "diamond"] {
        for algorithm in ["mit", "baseline"] {
            let curve: Vec<f64> = [100usize, 1000, 10_000, 100_000]
                .iter()
                .map(|&n| {
                    means
                        .iter()
                        .find(|g| g.0 == generator && g.2 == algorithm && g.1 == Some(n))
                        .map(|g| g.3)
                        .unwrap()
                })
                .collect();
            let monotone = curve.windows(2).all(|w| w[1] >= w[0] - 0.05);
            let reaches = curve[3] == 1.0;
            pass &= monotone && reaches;
            lines.push(format!(
                "{generator}/{algorithm} [{}]",
                curve.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    outcome(
        pass,
        format!(
            "success by N = 1e2..1e5: {}; {secs:.1} s (limit 300 s)",
            lines.join(", ")
        ),
    )
}

fn criterion_10() -> Outcome {
    let m = reference_instance(0);
    let counts = [1_000usize, 4_000, 16_000, 64_000];
    let curve = concentration_curve(&m, &counts, 50, 10).unwrap();
    let ratios: Vec<f64> = curve.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let pass = ratios.iter().all(|&r| (0.5 * 0.75..=0.5 * 1.25).contains(&r));
    outcome(
        pass,
        format!(
            "error ratio per 4x samples {} (need 0.375..0.625)",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut violations = 0;
    let mut total = 0;
    for (pb, n, tf) in [
        (reference_box(), 20, true),
        (general_box(), 10, false),
        (scaled_box(), 10, false),
        (scaled_box(), 20, true),
    ] {
        for seed in 0..100 {
            let m = generate_random_walk_summable(n, &pb, tf, seed).unwrap();
            let (jl, jh) = eigen_range(m.precision());
            let (sl, sh) = eigen_range(m.covariance());
            let j_ok = jl >= (1.0 - pb.alpha) * pb.d_min && jh <= (1.0 + pb.alpha) * pb.d_max;
            let s_ok = sl >= 1.0 / ((1.0 + pb.alpha) * pb.d_max) && sh <= 1.0 / ((1.0 - pb.alpha) * pb.d_min);
            total += 1;
            if !(j_ok && s_ok) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("eigenvalues outside the box for {violations} of {total} models"),
    )
}

fn main() -> ExitCode {
    // Conditioning sanity used by several criteria.
    let chain = build_named(Topology::Chain, 3, -0.3, 1.0).unwrap();
    let v: CovarianceView = chain.exact_view();
    assert!(conditional_covariance(&v, 0, 2, &[1].into()).unwrap().abs() < 1e-12);

    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("exact-covariance full recovery", criterion_1),
        ("finite-sample recovery at N = 1e6", criterion_2),
        ("forward-pass size bound", criterion_3),
        ("degree bound", criterion_4),
        ("per-round population bound", criterion_5),
        ("pruning coefficients", criterion_6),
        ("single-neighbor nodes in one round", criterion_7),
        ("geometric MI identity", criterion_8),
        ("named-graph recovery curves", criterion_9),
        ("covariance concentration rate", criterion_10),
        ("eigenvalue box", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
