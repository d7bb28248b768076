use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use sapphire_core::dataset::{parse_feature_spec, DataFormat, FeatureKind, Metric, MetricKind};
use sapphire_core::spantree::{RngMode, SstParams};

/// Spanning tree used for the progress index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeMode {
    Sst,
    Exact,
}

/// Every user parameter of a pipeline run.
///
/// Read from a flat `key = value` file (`#` starts a comment) and patched with
/// `key=value` overrides from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: DataFormat,
    pub features: String,
    pub metric: MetricKind,
    pub period: f64,
    pub levels: usize,
    pub d_coarse: f64,
    pub d_fine: f64,
    pub eta_max: usize,
    pub n_guesses: usize,
    pub sigma_max: usize,
    pub schedule_span: usize,
    pub seed: u64,
    pub threads: usize,
    pub rng: RngMode,
    pub tree: TreeMode,
    pub start: usize,
    pub rho_f: usize,
    /// Feature columns to attach as structural tracks.
    pub annotate: Vec<usize>,
    /// Optional labels sidecar attached as a `state` track.
    pub labels: Option<PathBuf>,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            format: DataFormat::Csv,
            features: String::new(),
            metric: MetricKind::Euclidean,
            period: 360.0,
            levels: 8,
            d_coarse: 10.0,
            d_fine: 1.0,
            eta_max: 0,
            n_guesses: 16,
            sigma_max: 2,
            schedule_span: 150,
            seed: 0,
            threads: 1,
            rng: RngMode::PerVertex,
            tree: TreeMode::Sst,
            start: 0,
            rho_f: 0,
            annotate: Vec::new(),
            labels: None,
            output: PathBuf::from("sapphire-out"),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| anyhow::anyhow!("{key}: cannot parse {value:?}"))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.apply(line)
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` assignment.
    pub fn apply(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            bail!("expected key=value, got {assignment:?}");
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "input" => self.input = PathBuf::from(value),
            "format" => self.format = value.parse()?,
            "features" => self.features = value.to_owned(),
            "metric" => self.metric = value.parse()?,
            "period" => self.period = parse_num(key, value)?,
            "levels" | "H" => self.levels = parse_num(key, value)?,
            "d_coarse" => self.d_coarse = parse_num(key, value)?,
            "d_fine" => self.d_fine = parse_num(key, value)?,
            "eta_max" => self.eta_max = parse_num(key, value)?,
            "n_guesses" | "N_g" => self.n_guesses = parse_num(key, value)?,
            "sigma_max" => self.sigma_max = parse_num(key, value)?,
            "schedule_span" => self.schedule_span = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "threads" => self.threads = parse_num(key, value)?,
            "rng" => {
                self.rng = match value {
                    "per_vertex" => RngMode::PerVertex,
                    "shared" => RngMode::Shared,
                    _ => bail!("rng: expected per_vertex or shared, got {value:?}"),
                }
            }
            "tree" => {
                self.tree = match value {
                    "sst" => TreeMode::Sst,
                    "exact" | "mst" => TreeMode::Exact,
                    _ => bail!("tree: expected sst or exact, got {value:?}"),
                }
            }
            "start" => self.start = parse_num(key, value)?,
            "rho_f" => self.rho_f = parse_num(key, value)?,
            "annotate" => {
                self.annotate = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_num(key, s))
                    .collect::<Result<_>>()?
            }
            "labels" => self.labels = (!value.is_empty()).then(|| PathBuf::from(value)),
            "output" => self.output = PathBuf::from(value),
            _ => bail!("unknown key {key:?}"),
        }
        Ok(())
    }

    pub fn with_overrides<S: AsRef<str>>(mut self, overrides: &[S]) -> Result<Self> {
        for o in overrides {
            self.apply(o.as_ref())?;
        }
        Ok(self)
    }

    /// Feature kinds. An empty spec means every column has the metric's kind
    /// and the width is taken from `columns`.
    pub fn feature_kinds(&self, columns: Option<usize>) -> Result<Vec<FeatureKind>> {
        if self.features.is_empty() {
            let d = columns.context("features must be given for raw binary input")?;
            return Ok(vec![self.metric.feature_kind(); d]);
        }
        Ok(parse_feature_spec(&self.features)?)
    }

    pub fn metric(&self) -> Metric {
        match self.metric {
            MetricKind::PeriodicEuclidean => Metric::periodic(self.period),
            kind => Metric::new(kind),
        }
    }

    pub fn sst_params(&self) -> SstParams {
        SstParams {
            n_guesses: self.n_guesses,
            sigma_max: self.sigma_max,
            schedule_span: self.schedule_span,
            seed: self.seed,
            threads: self.threads,
            rng_mode: self.rng,
            ..SstParams::default()
        }
    }

    /// Checks everything that can be checked without loading the data.
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.input.as_os_str().is_empty(), "no input file given");
        ensure!(
            self.input.is_file(),
            "input file {} does not exist",
            self.input.display()
        );
        if !self.features.is_empty() {
            parse_feature_spec(&self.features)?;
        } else {
            ensure!(
                self.format == DataFormat::Csv,
                "features must be given for raw binary input"
            );
        }
        ensure!(self.levels >= 2, "levels must be at least 2");
        ensure!(
            self.d_coarse > self.d_fine && self.d_fine > 0.0,
            "need d_coarse > d_fine > 0"
        );
        ensure!(
            self.eta_max + 2 <= self.levels,
            "eta_max must be at most levels - 2"
        );
        ensure!(self.period > 0.0, "period must be positive");
        if let Some(labels) = &self.labels {
            ensure!(labels.is_file(), "labels file {} does not exist", labels.display());
        }
        self.sst_params().validate()?;
        Ok(())
    }

    /// Key-value dump that [`RunConfig::from_file`] reads back.
    pub fn to_kv(&self) -> String {
        let format = match self.format {
            DataFormat::Csv => "csv",
            DataFormat::RawBinary => "raw",
        };
        let rng = match self.rng {
            RngMode::PerVertex => "per_vertex",
            RngMode::Shared => "shared",
        };
        let tree = match self.tree {
            TreeMode::Sst => "sst",
            TreeMode::Exact => "exact",
        };
        let annotate: Vec<String> = self.annotate.iter().map(|a| a.to_string()).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        kv("input", self.input.display().to_string());
        kv("format", format.into());
        kv("features", self.features.clone());
        kv("metric", self.metric.as_str().into());
        kv("period", self.period.to_string());
        kv("levels", self.levels.to_string());
        kv("d_coarse", self.d_coarse.to_string());
        kv("d_fine", self.d_fine.to_string());
        kv("eta_max", self.eta_max.to_string());
        kv("n_guesses", self.n_guesses.to_string());
        kv("sigma_max", self.sigma_max.to_string());
        kv("schedule_span", self.schedule_span.to_string());
        kv("seed", self.seed.to_string());
        kv("threads", self.threads.to_string());
        kv("rng", rng.into());
        kv("tree", tree.into());
        kv("start", self.start.to_string());
        kv("rho_f", self.rho_f.to_string());
        kv("annotate", annotate.join(","));
        kv(
            "labels",
            self.labels.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
        );
        kv("output", self.output.display().to_string());
        out
    }
}
