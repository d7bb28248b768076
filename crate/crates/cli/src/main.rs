use std::path::PathBuf;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use sapphire_cli::pipeline::{self, Artifacts};
use sapphire_cli::{emit_sapphire_svg, peak_rss_kib, run_bench, run_pipeline, write_bench_csv, RunConfig};
use sapphire_core::dataset::{write_csv, write_raw, DataFormat};
use sapphire_core::hcluster::tree_stats;
use sapphire_core::spantree::{exact_mst, SpanningTree};
use sapphire_core::synthgen::{generate, write_labels_csv, WellSpec};

#[derive(Parser)]
#[command(name = "sapphire", version, about = "Progress-index construction and SAPPHIRE plots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// key = value configuration file
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides in key=value form, applied after the file
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let cfg = base.with_overrides(&self.overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled multi-well Markov time series
    Synth(SynthArgs),
    /// Build the cluster tree and write it as CSV
    Cluster(ConfigArgs),
    /// Build the exact minimum spanning tree
    Mst(ConfigArgs),
    /// Build a short spanning tree
    Sst(ConfigArgs),
    /// Build the progress index from a spanning-tree CSV
    Pindex {
        /// Spanning tree CSV (u,v,weight)
        #[arg(long)]
        tree: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Render a progress-index CSV as an SVG plot
    Plot {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time SST construction across thread counts
    Bench {
        /// Comma-separated thread counts
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        threads: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        repeats: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run clustering, spanning tree and progress index end to end
    Pipeline(ConfigArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(short, long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    dim: usize,
    /// Number of wells, spaced along the first axis
    #[arg(long, default_value_t = 2)]
    wells: usize,
    #[arg(long, default_value_t = 12.0)]
    separation: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    /// Per-step probability of leaving the current well
    #[arg(long, default_value_t = 0.001)]
    hop: f64,
    #[arg(long, default_value_t = 0.0)]
    outlier_rate: f64,
    #[arg(long, default_value_t = 4.0)]
    outlier_scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// csv or raw
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(short, long, default_value = "synth.csv")]
    output: PathBuf,
    /// Labels sidecar (snapshot_id,state,outlier)
    #[arg(long)]
    labels: Option<PathBuf>,
}

fn synth(a: &SynthArgs) -> Result<()> {
    ensure!(a.wells >= 1, "need at least one well");
    let mut spec = WellSpec::two_well(a.dim, a.separation, a.width, a.hop);
    spec.means = (0..a.wells)
        .map(|k| {
            let mut m = vec![0.0; a.dim];
            m[0] = k as f64 * a.separation;
            m
        })
        .collect();
    spec.transition = (0..a.wells)
        .map(|i| {
            (0..a.wells)
                .map(|j| match (i == j, a.wells) {
                    (true, 1) => 1.0,
                    (true, _) => 1.0 - a.hop,
                    (false, w) => a.hop / (w - 1) as f64,
                })
                .collect()
        })
        .collect();
    spec.outlier_rate = a.outlier_rate;
    spec.outlier_scale = a.outlier_scale;
    let run = generate(&spec, a.n, a.seed)?;
    match a.format.parse::<DataFormat>()? {
        DataFormat::Csv => write_csv(&run.store, &a.output, true)?,
        DataFormat::RawBinary => write_raw(&run.store, &a.output)?,
    }
    if let Some(path) = &a.labels {
        write_labels_csv(path, &run)?;
    }
    println!(
        "wrote {} snapshots of {} features to {} ({} outliers)",
        a.n,
        a.dim,
        a.output.display(),
        run.outliers.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a)?,
        Command::Cluster(c) => {
            let cfg = c.load()?;
            let store = pipeline::load(&cfg)?;
            let tree = pipeline::cluster(&cfg, &store)?;
            let out = Artifacts::in_dir(&cfg.output);
            std::fs::create_dir_all(&cfg.output)?;
            tree.write_csv(&out.cluster_tree)?;
            println!("level,threshold,clusters,max_size");
            for s in tree_stats(&tree) {
                println!("{},{},{},{}", s.level, s.threshold, s.clusters, s.max_size);
            }
        }
        Command::Mst(c) => {
            let cfg = c.load()?;
            let store = pipeline::load(&cfg)?;
            let st = exact_mst(&store, &cfg.metric()).context("exact spanning tree")?;
            let n = store.len() as u64;
            report_spanning(&cfg, &st, 0, n * n.saturating_sub(1) / 2)?;
        }
        Command::Sst(c) => {
            let cfg = c.load()?;
            let store = pipeline::load(&cfg)?;
            let tree = pipeline::cluster(&cfg, &store)?;
            let (st, stages, evaluations) = pipeline::spanning_tree(&cfg, &store, &tree)?;
            report_spanning(&cfg, &st, stages, evaluations)?;
        }
        Command::Pindex { tree, config } => {
            let cfg = config.load()?;
            let st = SpanningTree::read_csv(&tree).with_context(|| format!("reading {}", tree.display()))?;
            let store = if cfg.annotate.is_empty() {
                None
            } else {
                Some(pipeline::load(&cfg)?)
            };
            let (_, table) = pipeline::progress(&cfg, store.as_ref(), &st)?;
            let out = Artifacts::in_dir(&cfg.output);
            std::fs::create_dir_all(&cfg.output)?;
            table.write_csv(&out.progress)?;
            println!("wrote {}", out.progress.display());
        }
        Command::Plot { input, output } => {
            let output = output.unwrap_or_else(|| input.with_extension("svg"));
            emit_sapphire_svg(&input, &output)?;
            println!("wrote {}", output.display());
        }
        Command::Bench {
            threads,
            repeats,
            config,
        } => {
            let cfg = config.load()?;
            let store = pipeline::load(&cfg)?;
            let tree = pipeline::cluster(&cfg, &store)?;
            let rows = run_bench(&store, &cfg.metric(), &tree, &cfg.sst_params(), &threads, repeats)?;
            std::fs::create_dir_all(&cfg.output)?;
            let path = cfg.output.join("bench.csv");
            write_bench_csv(&path, &rows)?;
            println!("threads,t_min,t_max,evaluations,time_per_eval,efficiency");
            for r in &rows {
                println!(
                    "{},{:.4},{:.4},{},{:.3e},{:.3}",
                    r.threads, r.t_min, r.t_max, r.evaluations, r.time_per_eval, r.efficiency
                );
            }
        }
        Command::Pipeline(c) => {
            let cfg = c.load()?;
            let (out, summary) = run_pipeline(&cfg)?;
            print!("{}", summary.to_kv());
            println!("output = {}", out.summary.parent().unwrap_or(&cfg.output).display());
        }
    }
    Ok(())
}

fn report_spanning(cfg: &RunConfig, st: &SpanningTree, stages: usize, evaluations: u64) -> Result<()> {
    let out = Artifacts::in_dir(&cfg.output);
    std::fs::create_dir_all(&cfg.output)?;
    st.write_csv(&out.spanning_tree)?;
    println!(
        "n = {}\nstages = {stages}\nevaluations = {evaluations}\ntree_length = {}",
        st.n_vertices(),
        st.total_length()
    );
    if let Some(kib) = peak_rss_kib() {
        println!("peak_rss_kib = {kib}");
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
