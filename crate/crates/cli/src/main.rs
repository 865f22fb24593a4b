use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use centrograph::centrality::{CentralityWeights, Measure};
use centrograph::evaluator::{ClassifierOptions, SplitSpec};
use centrograph::experiment::{evaluate_files, with_thread_cap, Precision, SPLIT_SEED_OFFSET};
use centrograph::sampler::NegativeDistribution;
use centrograph::trainer::UpdateRule;
use centrograph::{compare_runs, io, load_edge_list, run_experiment, EmbeddingMethod, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "centrograph", version, about = "Skip-gram graph embeddings with centrality-weighted sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Train embeddings, write checkpoints and evaluate them.
    Train(TrainArgs),
    /// Print centrality scores as `node_id<TAB>measure<TAB>score`.
    Centrality(CentralityArgs),
    /// Evaluate saved embedding files against a label file.
    Evaluate(EvaluateArgs),
    /// Compare metrics files from several runs.
    Compare(CompareArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Resolved config from a previous run; other flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// deepwalk, node2vec, line or nbne
    #[arg(long)]
    method: Option<String>,
    /// none, degree, bc, clos, pr, load or uniform
    #[arg(long)]
    centrality: Option<String>,
    /// sample or weight
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    smoothing: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    examples: Option<u64>,
    #[arg(long)]
    batch: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    context: Option<usize>,
    #[arg(long = "walk-length")]
    walk_length: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "train-frac")]
    train_frac: Option<f64>,
    /// Number of evaluation splits.
    #[arg(long)]
    seeds: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Inverse L2 strength of the classifier.
    #[arg(long)]
    reg: Option<f64>,
    /// Average gradients over each batch instead of per-pair updates.
    #[arg(long = "batch-average")]
    batch_average: bool,
    /// Use degree^0.75 negatives instead of uniform ones.
    #[arg(long = "unigram-negatives")]
    unigram_negatives: bool,
    /// Train in single precision.
    #[arg(long)]
    f32: bool,
    /// Write the generated pairs as TSV.
    #[arg(long = "dump-pairs")]
    dump_pairs: bool,
    /// Skip per-checkpoint embedding files.
    #[arg(long = "no-checkpoint-files")]
    no_checkpoint_files: bool,
}

#[derive(Args)]
struct CentralityArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Measure to compute, or `all`.
    #[arg(long, default_value = "all")]
    centrality: String,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    labels: PathBuf,
    /// Embedding files, one per checkpoint, in training order.
    #[arg(required = true)]
    embeddings: Vec<PathBuf>,
    /// Examples per checkpoint, for the `examples` column.
    #[arg(long, default_value_t = 100_000)]
    batch: u64,
    #[arg(long = "train-frac", default_value_t = 0.5)]
    train_frac: f64,
    #[arg(long, default_value_t = 4)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    reg: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// `metrics.csv` files; the baseline run is detected from its config.json.
    #[arg(required = true, num_args = 2..)]
    metrics: Vec<PathBuf>,
    /// Also write the per-run comparison as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn resolve(args: TrainArgs) -> AnyResult<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => {
            let edges = args.edges.clone().ok_or("--edges is required without --config")?;
            RunConfig::new(edges, None)
        }
    };
    if let Some(v) = args.edges {
        cfg.edges = v;
    }
    if let Some(v) = args.labels {
        cfg.labels = Some(v);
    }
    if let Some(v) = args.method {
        cfg.method = v.parse::<EmbeddingMethod>()?;
    }
    if let Some(v) = args.centrality {
        cfg.centrality = match v.as_str() {
            "none" => None,
            other => Some(other.parse::<Measure>()?),
        };
    }
    if let Some(v) = args.mode {
        cfg.mode = v.parse::<Mode>()?;
    }
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = args.$field {
                cfg.$field = v;
            }
        )*};
    }
    set!(smoothing, dim, examples, batch, lr, context, walk_length, p, q, train_frac, seeds, seed, out, reg);
    if args.batch_average {
        cfg.update = UpdateRule::BatchAverage;
    }
    if args.unigram_negatives {
        cfg.negatives = NegativeDistribution::Unigram;
    }
    if args.f32 {
        cfg.precision = Precision::F32;
    }
    if args.dump_pairs {
        cfg.dump_pairs = true;
    }
    if args.no_checkpoint_files {
        cfg.write_checkpoints = false;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> AnyResult<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = resolve(args)?;
            let outcome = run_experiment(&cfg)?;
            for a in &outcome.report.aggregates {
                println!("{}\t{}\t{:.4}\t{:.4}", a.checkpoint, a.examples, a.mean, a.std);
            }
            eprintln!("wrote {} files to {}", outcome.files.len(), cfg.out.display());
        }
        Command::Centrality(args) => {
            let (graph, _) = load_edge_list(&args.edges, None)?;
            let measures: Vec<Measure> = if args.centrality == "all" {
                Measure::ALL.iter().copied().filter(|&m| m != Measure::Uniform).collect()
            } else {
                vec![args.centrality.parse()?]
            };
            let weights = with_thread_cap(|| {
                measures
                    .iter()
                    .map(|&m| CentralityWeights::compute(&graph, m))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            let refs: Vec<&CentralityWeights> = weights.iter().collect();
            let text = io::centrality_tsv(&graph, &refs);
            match args.out {
                Some(path) => std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Evaluate(args) => {
            let spec = SplitSpec {
                train_fraction: args.train_frac,
                split_seed: args.seed + SPLIT_SEED_OFFSET,
                stratified: true,
            };
            let opts = ClassifierOptions {
                reg: args.reg,
                ..ClassifierOptions::default()
            };
            let report = evaluate_files(&args.embeddings, &args.labels, args.batch, &spec, args.seeds, &opts)?;
            match args.out {
                Some(path) => std::fs::write(&path, report.to_csv()).map_err(|e| format!("{}: {e}", path.display()))?,
                None => print!("{}", report.to_csv()),
            }
        }
        Command::Compare(args) => {
            let cmp = compare_runs(&args.metrics)?;
            print!("{}", cmp.table());
            println!();
            print!("{}", cmp.to_csv());
            if let Some(path) = args.out {
                std::fs::write(&path, cmp.to_csv()).map_err(|e| format!("{}: {e}", path.display()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
