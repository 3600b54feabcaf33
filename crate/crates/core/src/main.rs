use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ggm_core::estimate::EstimateFile;
use ggm_core::experiment::{run_sweep, score, write_results, SweepSpec};
use ggm_core::mit::{baseline_fb_greedy, mi_threshold, mit_select_neighborhood, MitConfig};
use ggm_core::model::{build_named_random, check_walk_summable, generate_random_walk_summable};
use ggm_core::sampler::{draw, empirical_covariance, SampleSet};
use ggm_core::threshold::{learn_graph, Pipeline, PruneLevel, ThresholdConfig};
use ggm_core::{GgmError, GgmModel, ParamBox, Result, Topology};

#[derive(Parser)]
#[command(name = "ggm", version, about = "Gaussian graphical model structure learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a ground-truth model.
    Generate(GenerateArgs),
    /// Draw samples from a model.
    Sample(SampleArgs),
    /// Estimate every neighborhood of a model's graph.
    Learn(LearnArgs),
    /// Run an experiment sweep.
    Sweep(SweepArgs),
    /// Score an estimate against the true graph.
    Score(ScoreArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Chain,
    Star,
    Grid,
    Diamond,
    Random,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    topology: TopologyArg,
    /// Node count (ignored for grids).
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Grid side length.
    #[arg(long)]
    side: Option<usize>,
    #[arg(long)]
    triangle_free: bool,
    #[arg(long, default_value_t = 0.4)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    a: f64,
    #[arg(long, default_value_t = 0.28)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    dmin: f64,
    #[arg(long, default_value_t = 1.0)]
    dmax: f64,
    #[arg(long, default_value_t = 10)]
    delta: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `.bin` for binary, anything else for text.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Mit,
    Threshold,
    Baseline,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, conflicts_with = "exact", required_unless_present = "exact")]
    samples: Option<PathBuf>,
    /// Use the model's exact covariance.
    #[arg(long)]
    exact: bool,
    /// Per-round population thresholds (threshold, exact only).
    #[arg(long)]
    oracle: bool,
    /// Threshold slack (threshold), `ε` (mit) or `ε_s` (baseline).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    /// Absolute pruning level (threshold).
    #[arg(long)]
    tau_p: Option<f64>,
    /// Forward MI threshold in nats (mit); overrides `--epsilon`.
    #[arg(long)]
    epsilon_f: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    spec: PathBuf,
    /// `.csv` for CSV, anything else for JSON.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    no_walltime: bool,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    estimate: PathBuf,
}

const DEFAULT_EPSILON: f64 = 0.01;

fn generate(args: GenerateArgs) -> Result<()> {
    let pb = ParamBox::new(args.alpha, args.a, args.b, args.dmin, args.dmax, args.delta)?;
    let named = |t: Topology, size: usize| -> Result<GgmModel> {
        let m = build_named_random(t, size, args.a, args.b, args.dmin, args.seed)?;
        let (ok, norm) = check_walk_summable(&m, args.alpha);
        if !ok {
            return Err(GgmError::InvalidModel(format!(
                "{t} model has |R| norm {norm}, above alpha = {}",
                args.alpha
            )));
        }
        Ok(m)
    };
    let model = match args.topology {
        TopologyArg::Random => generate_random_walk_summable(args.n, &pb, args.triangle_free, args.seed)?,
        TopologyArg::Chain => named(Topology::Chain, args.n)?,
        TopologyArg::Star => named(Topology::Star, args.n)?,
        TopologyArg::Diamond => named(Topology::Diamond, 4)?,
        TopologyArg::Grid => named(Topology::Grid, args.side.unwrap_or(3))?,
    };
    model.save(&args.out)?;
    println!("{} nodes, {} edges", model.dim(), model.edge_count());
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    let model = GgmModel::load(&args.model)?;
    draw(&model, args.count, args.seed)?.save(&args.out)
}

fn learn(args: LearnArgs) -> Result<()> {
    let model = GgmModel::load(&args.model)?;
    let view = match &args.samples {
        Some(path) => {
            let s = SampleSet::load(path)?;
            if s.dim() != model.dim() {
                return Err(GgmError::Shape {
                    expected: model.dim(),
                    found: s.dim(),
                });
            }
            empirical_covariance(&s)?
        }
        None => model.exact_view(),
    };
    if args.oracle && !matches!(args.algo, Algo::Threshold) {
        return Err(GgmError::Config(
            "--oracle applies to the threshold learner only".into(),
        ));
    }
    let n = model.dim();
    let (tag, estimates) = match args.algo {
        Algo::Mit => {
            let eps_f = match args.epsilon_f {
                Some(e) => e,
                None => mi_threshold(args.epsilon.unwrap_or(DEFAULT_EPSILON)),
            };
            let cfg = MitConfig::new(eps_f, args.nu)?;
            let est = (0..n)
                .map(|i| mit_select_neighborhood(&view, i, &cfg))
                .collect::<Result<Vec<_>>>()?;
            ("mit", est)
        }
        Algo::Baseline => {
            let eps = args.epsilon.unwrap_or(DEFAULT_EPSILON);
            let est = (0..n)
                .map(|i| baseline_fb_greedy(&view, i, eps, args.nu, None))
                .collect::<Result<Vec<_>>>()?;
            ("baseline", est)
        }
        Algo::Threshold => {
            let pb = *model
                .param_box()
                .ok_or_else(|| GgmError::Config("model carries no parameter box".into()))?;
            let mut cfg = ThresholdConfig::new(pb, model.is_triangle_free()).with_oracle(args.oracle);
            cfg.epsilon = args.epsilon;
            cfg.prune = match args.tau_p {
                Some(t) => PruneLevel::Absolute(t),
                None => PruneLevel::Fraction(args.nu),
            };
            let est = learn_graph(&view, &cfg, Some(&model), Pipeline::default())?;
            ("threshold", est)
        }
    };
    let file = EstimateFile::from_estimates(tag, &estimates);
    file.save(&args.out)?;
    let edges: usize = file.neighborhoods.iter().map(|s| s.len()).sum();
    println!("{tag}: {edges} directed edges over {n} nodes");
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let spec = SweepSpec::load(&args.spec)?;
    let records = run_sweep(&spec)?;
    write_results(&records, &args.out, !args.no_walltime)?;
    let failed = records.iter().filter(|r| r.failed).count();
    println!("{} records, {failed} failed", records.len());
    Ok(())
}

fn score_cmd(args: ScoreArgs) -> Result<()> {
    let truth = GgmModel::load(&args.truth)?;
    let est = EstimateFile::load(&args.estimate)?;
    let metrics = score(&truth, &est.estimates())?;
    println!("{}", serde_json::to_string(&metrics)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Sample(a) => sample(a),
        Command::Learn(a) => learn(a),
        Command::Sweep(a) => sweep(a),
        Command::Score(a) => score_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
