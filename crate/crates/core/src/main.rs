use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mvsmooth::dataset::{generate_synthetic, save_dataset, SyntheticSpec};
use mvsmooth::pipeline::{bench_scaling, run_pipeline, sweep, write_csv_rows, Mode, PipelineConfig};
use mvsmooth::{Error, Result};

#[derive(Parser)]
#[command(name = "mvsmooth", version, about = "Multi-view clustering with graph filtering and anchors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one dataset and write labels, metrics and a run report.
    Run(RunArgs),
    /// Run the pipeline over a parameter grid and write sweep.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Time the pipeline on synthetic data of growing size; writes bench.csv.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        /// Sample counts, ascending.
        #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
        sizes: Vec<usize>,
        /// Timed repetitions per size; the fastest is reported.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
    /// Write a synthetic dataset directory.
    Synth {
        /// Generator spec as JSON.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory containing manifest.json.
    #[arg(long, conflicts_with = "synth")]
    data: Option<PathBuf>,
    /// Synthetic generator spec (JSON) used instead of a dataset directory.
    #[arg(long)]
    synth: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Filter order.
    #[arg(long)]
    k: Option<usize>,
    /// Filter balance parameter.
    #[arg(long)]
    mu: Option<f64>,
    /// Ridge trade-off of the anchor fit.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of anchors m.
    #[arg(long)]
    anchors: Option<usize>,
    /// Sharpening exponent of degree-based anchor sampling.
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of clusters g.
    #[arg(long)]
    clusters: Option<usize>,
    /// Neighbors per node when building graphs from features.
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// K-means restarts for the final partition.
    #[arg(long)]
    restarts: Option<usize>,
    /// Standardize each feature to zero mean and unit variance.
    #[arg(long)]
    standardize: bool,
    /// Scale the columns of the concatenated similarity to unit norm.
    #[arg(long)]
    normalize_z: bool,
    /// Scale embedding rows to unit norm before K-means.
    #[arg(long)]
    normalize_q: bool,
    /// Accept asymmetric graph files by averaging with the transpose.
    #[arg(long)]
    symmetrize: bool,
    /// Also write embedding.csv.
    #[arg(long)]
    export_embedding: bool,
    /// Also write the concatenated similarity as zbar.csv (large).
    #[arg(long)]
    dump_z: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum ModeArg {
    Auto,
    Feature,
    Graph,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(id = "grid_k", long = "grid-k", value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(id = "grid_mu", long = "grid-mu", value_delimiter = ',')]
    mu: Vec<f64>,
    #[arg(id = "grid_alpha", long = "grid-alpha", value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(id = "grid_anchors", long = "grid-anchors", value_delimiter = ',')]
    anchors: Vec<usize>,
    #[arg(id = "grid_gamma", long = "grid-gamma", value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(id = "grid_knn", long = "grid-knn", value_delimiter = ',')]
    knn: Vec<usize>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn build_config(args: &RunArgs) -> Result<PipelineConfig> {
    let mut cfg: PipelineConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(dir) = &args.data {
        cfg.data = Some(dir.clone());
        cfg.synth = None;
    }
    if let Some(path) = &args.synth {
        cfg.synth = Some(read_json(path)?);
        cfg.data = None;
    }
    if let Some(mode) = args.mode {
        cfg.mode = match mode {
            ModeArg::Auto => Mode::Auto,
            ModeArg::Feature => Mode::Feature,
            ModeArg::Graph => Mode::Graph,
        };
    }
    cfg.k = args.k.or(cfg.k);
    cfg.mu = args.mu.or(cfg.mu);
    cfg.alpha = args.alpha.or(cfg.alpha);
    cfg.anchors = args.anchors.or(cfg.anchors);
    cfg.gamma = args.gamma.or(cfg.gamma);
    cfg.clusters = args.clusters.or(cfg.clusters);
    cfg.knn = args.knn.or(cfg.knn);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.restarts = args.restarts.unwrap_or(cfg.restarts);
    cfg.standardize |= args.standardize;
    cfg.normalize_z |= args.normalize_z;
    cfg.normalize_q |= args.normalize_q;
    cfg.symmetrize |= args.symmetrize;
    cfg.export_embedding |= args.export_embedding;
    cfg.dump_z |= args.dump_z;
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    Ok(cfg)
}

fn out_dir(cfg: &PipelineConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = build_config(&args)?;
            cfg.out = Some(out_dir(&cfg));
            let report = run_pipeline(&cfg)?;
            match report.metrics {
                Some(m) => println!(
                    "acc {:.4}  nmi {:.4}  purity {:.4}  f1 {:.4}  ari {:.4}  ({:.3}s)",
                    m.acc, m.nmi, m.purity, m.f1, m.ari, report.timings.total
                ),
                None => println!("clustered {} samples in {:.3}s", report.labels.len(), report.timings.total),
            }
        }
        Command::Sweep { run, grid } => {
            let mut cfg = build_config(&run)?;
            let g = &mut cfg.grid;
            for (dst, src) in [(&mut g.k, grid.k), (&mut g.anchors, grid.anchors), (&mut g.knn, grid.knn)] {
                if !src.is_empty() {
                    *dst = src;
                }
            }
            for (dst, src) in [(&mut g.mu, grid.mu), (&mut g.alpha, grid.alpha), (&mut g.gamma, grid.gamma)] {
                if !src.is_empty() {
                    *dst = src;
                }
            }
            let rows = sweep(&cfg)?;
            let dir = out_dir(&cfg);
            fs::create_dir_all(&dir)?;
            write_csv_rows(&rows, &dir.join("sweep.csv"))?;
            println!("{} sweep cells written to {}", rows.len(), dir.join("sweep.csv").display());
        }
        Command::Bench { run, sizes, repeats } => {
            let cfg = build_config(&run)?;
            let base = cfg
                .synth
                .clone()
                .ok_or_else(|| Error::InvalidParameter("bench needs --synth SPEC.json as the base spec".into()))?;
            let rows = bench_scaling(&sizes, &base, &cfg, repeats)?;
            let dir = out_dir(&cfg);
            fs::create_dir_all(&dir)?;
            write_csv_rows(&rows, &dir.join("bench.csv"))?;
            for r in &rows {
                println!("n = {:>7}  nnz = {:>9}  {:.3}s", r.n, r.nnz, r.seconds);
            }
        }
        Command::Synth { spec, out } => {
            let spec: SyntheticSpec = read_json(&spec)?;
            save_dataset(&generate_synthetic(&spec)?, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
