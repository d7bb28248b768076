use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use sapphire_core::dataset::{load_dataset, DataFormat, SnapshotStore};
use sapphire_core::hcluster::{build_tree, refine_multipass, ClusterTree};
use sapphire_core::progindex::{build_progress_index, cut_annotation, structural_track, ProgressIndex, ProgressTable};
use sapphire_core::spantree::{build_sst, exact_mst, SpanningTree};
use sapphire_core::synthgen::read_labels_csv;

use crate::config::{RunConfig, TreeMode};
use crate::memory::peak_rss_kib;

pub const CLUSTER_TREE_FILE: &str = "cluster_tree.csv";
pub const SPANNING_TREE_FILE: &str = "spanning_tree.csv";
pub const PROGRESS_FILE: &str = "progress.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub cluster_tree: PathBuf,
    pub spanning_tree: PathBuf,
    pub progress: PathBuf,
    pub summary: PathBuf,
}

impl Artifacts {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            cluster_tree: dir.join(CLUSTER_TREE_FILE),
            spanning_tree: dir.join(SPANNING_TREE_FILE),
            progress: dir.join(PROGRESS_FILE),
            summary: dir.join(SUMMARY_FILE),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub d: usize,
    pub tree: TreeMode,
    /// Borůvka stages; zero for the exact tree.
    pub stages: usize,
    /// Distance evaluations of the spanning-tree step.
    pub evaluations: u64,
    pub tree_length: f64,
    pub wall_seconds: f64,
    pub peak_rss_kib: Option<u64>,
}

impl Summary {
    pub fn to_kv(&self) -> String {
        let tree = match self.tree {
            TreeMode::Sst => "sst",
            TreeMode::Exact => "exact",
        };
        let mut s = format!(
            "n = {}\nd = {}\ntree = {tree}\nstages = {}\nevaluations = {}\ntree_length = {}\nwall_seconds = {}\n",
            self.n, self.d, self.stages, self.evaluations, self.tree_length, self.wall_seconds
        );
        if let Some(kib) = self.peak_rss_kib {
            s.push_str(&format!("peak_rss_kib = {kib}\n"));
        }
        s
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut out = Summary {
            n: 0,
            d: 0,
            tree: TreeMode::Sst,
            stages: 0,
            evaluations: 0,
            tree_length: 0.0,
            wall_seconds: 0.0,
            peak_rss_kib: None,
        };
        let mut seen = 0;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("summary line {line:?}"))?;
            let (k, v) = (k.trim(), v.trim());
            let num = || format!("summary {k}: bad value {v:?}");
            match k {
                "n" => out.n = v.parse().with_context(num)?,
                "d" => out.d = v.parse().with_context(num)?,
                "tree" => {
                    out.tree = match v {
                        "sst" => TreeMode::Sst,
                        "exact" => TreeMode::Exact,
                        _ => bail!(num()),
                    }
                }
                "stages" => out.stages = v.parse().with_context(num)?,
                "evaluations" => out.evaluations = v.parse().with_context(num)?,
                "tree_length" => out.tree_length = v.parse().with_context(num)?,
                "wall_seconds" => out.wall_seconds = v.parse().with_context(num)?,
                "peak_rss_kib" => out.peak_rss_kib = Some(v.parse().with_context(num)?),
                _ => bail!("unknown summary key {k:?}"),
            }
            seen += 1;
        }
        ensure!(seen >= 7, "summary is incomplete");
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_kv(&text)
    }
}

/// Number of fields in the first non-empty CSV record.
fn csv_width(path: &Path) -> Result<usize> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    for rec in rd.records() {
        let rec = rec?;
        if !(rec.len() == 1 && rec[0].trim().is_empty()) {
            return Ok(rec.len());
        }
    }
    bail!("{} is empty", path.display())
}

pub fn load(cfg: &RunConfig) -> Result<SnapshotStore> {
    let width = match (cfg.format, cfg.features.is_empty()) {
        (DataFormat::Csv, true) => Some(csv_width(&cfg.input)?),
        _ => None,
    };
    let kinds = cfg.feature_kinds(width)?;
    let store = load_dataset(&cfg.input, cfg.format, kinds)
        .with_context(|| format!("loading {}", cfg.input.display()))?;
    cfg.metric()
        .check(&store)
        .context("metric does not fit the features")?;
    for &f in &cfg.annotate {
        ensure!(f < store.dim(), "annotate: feature {f} out of range for {} features", store.dim());
    }
    ensure!(cfg.start < store.len(), "start snapshot {} out of range for {} snapshots", cfg.start, store.len());
    Ok(store)
}

pub fn cluster(cfg: &RunConfig, store: &SnapshotStore) -> Result<ClusterTree> {
    let mut tree = build_tree(store, &cfg.metric(), cfg.levels, cfg.d_coarse, cfg.d_fine).context("clustering")?;
    if cfg.eta_max > 0 {
        refine_multipass(&mut tree, store, cfg.eta_max).context("cluster refinement")?;
    }
    Ok(tree)
}

/// Spanning tree with its stage count and evaluation counter.
pub fn spanning_tree(cfg: &RunConfig, store: &SnapshotStore, tree: &ClusterTree) -> Result<(SpanningTree, usize, u64)> {
    match cfg.tree {
        TreeMode::Sst => {
            let report = build_sst(store, &cfg.metric(), tree, &cfg.sst_params()).context("short spanning tree")?;
            Ok((report.tree, report.stages, report.evaluations))
        }
        TreeMode::Exact => {
            let n = store.len() as u64;
            let mst = exact_mst(store, &cfg.metric()).context("exact spanning tree")?;
            Ok((mst, 0, n * n.saturating_sub(1) / 2))
        }
    }
}

/// Progress index plus the table with every configured annotation.
pub fn progress(cfg: &RunConfig, store: Option<&SnapshotStore>, st: &SpanningTree) -> Result<(ProgressIndex, ProgressTable)> {
    let pi = build_progress_index(st, cfg.start, cfg.rho_f).context("progress index")?;
    let cut = cut_annotation(&pi);
    let mut tracks = Vec::new();
    if !cfg.annotate.is_empty() {
        let store = store.context("feature annotations need the data set")?;
        for &f in &cfg.annotate {
            tracks.push((format!("f{f}"), structural_track(store, &pi, f)?));
        }
    }
    if let Some(path) = &cfg.labels {
        let (labels, _) = read_labels_csv(path).with_context(|| format!("reading labels {}", path.display()))?;
        ensure!(
            labels.len() == pi.len(),
            "labels file has {} rows for {} snapshots",
            labels.len(),
            pi.len()
        );
        tracks.push(("state".to_owned(), pi.order.iter().map(|&v| labels[v as usize] as f64).collect()));
    }
    let table = ProgressTable::new(&pi, &cut, &tracks)?;
    Ok((pi, table))
}

/// Runs every step, then writes all artifacts into the output directory.
/// Nothing is written when a step fails.
pub fn run_pipeline(cfg: &RunConfig) -> Result<(Artifacts, Summary)> {
    cfg.validate()?;
    let t0 = Instant::now();
    let store = load(cfg)?;
    let ctree = cluster(cfg, &store)?;
    let (st, stages, evaluations) = spanning_tree(cfg, &store, &ctree)?;
    let (_, table) = progress(cfg, Some(&store), &st)?;
    let summary = Summary {
        n: store.len(),
        d: store.dim(),
        tree: cfg.tree,
        stages,
        evaluations,
        tree_length: st.total_length(),
        wall_seconds: t0.elapsed().as_secs_f64(),
        peak_rss_kib: peak_rss_kib(),
    };

    std::fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
    let out = Artifacts::in_dir(&cfg.output);
    ctree.write_csv(&out.cluster_tree)?;
    st.write_csv(&out.spanning_tree)?;
    table.write_csv(&out.progress)?;
    std::fs::write(&out.summary, summary.to_kv()).with_context(|| format!("writing {}", out.summary.display()))?;
    Ok((out, summary))
}
