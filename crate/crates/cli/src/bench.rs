//! Thread-scaling benchmark of the SST step. Clustering is done once and not
//! timed.

use std::path::Path;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use sapphire_core::dataset::{Metric, SnapshotStore};
use sapphire_core::hcluster::ClusterTree;
use sapphire_core::spantree::{build_sst, SstParams};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub threads: usize,
    pub repeats: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub evaluations: u64,
    pub stages: usize,
    /// Seconds per distance evaluation, from the fastest repeat.
    pub time_per_eval: f64,
    /// `(t_1 / e_1) / (T * t_T / e_T)`.
    pub efficiency: f64,
    /// Whether every repeat made the same number of evaluations.
    pub reproducible: bool,
}

/// Runs the SST `repeats` times per thread count. A single-thread baseline is
/// added when missing.
pub fn run_bench(
    store: &SnapshotStore,
    metric: &Metric,
    tree: &ClusterTree,
    params: &SstParams,
    threads: &[usize],
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    ensure!(repeats >= 2, "at least 2 repeats are needed for a spread");
    ensure!(threads.iter().all(|&t| t >= 1), "thread counts must be positive");
    let mut list = threads.to_vec();
    if !list.contains(&1) {
        list.insert(0, 1);
    }

    let mut rows: Vec<BenchRow> = Vec::with_capacity(list.len());
    for &t in &list {
        let p = SstParams {
            threads: t,
            ..params.clone()
        };
        let mut times = Vec::with_capacity(repeats);
        let mut evals = Vec::with_capacity(repeats);
        let mut stages = 0;
        for _ in 0..repeats {
            let t0 = Instant::now();
            let report = build_sst(store, metric, tree, &p).with_context(|| format!("SST on {t} threads"))?;
            times.push(t0.elapsed().as_secs_f64());
            evals.push(report.evaluations);
            stages = report.stages;
        }
        let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
        let t_max = times.iter().copied().fold(0.0, f64::max);
        let evaluations = evals[0];
        rows.push(BenchRow {
            threads: t,
            repeats,
            t_min,
            t_max,
            evaluations,
            stages,
            time_per_eval: t_min / evaluations.max(1) as f64,
            efficiency: f64::NAN,
            reproducible: evals.iter().all(|&e| e == evaluations),
        });
    }
    let base = rows.iter().find(|r| r.threads == 1).map(|r| r.time_per_eval).unwrap_or(f64::NAN);
    for r in &mut rows {
        r.efficiency = if r.threads == 1 {
            1.0
        } else {
            base / (r.threads as f64 * r.time_per_eval)
        };
    }
    Ok(rows)
}

const HEADER: [&str; 9] = [
    "threads",
    "repeats",
    "t_min",
    "t_max",
    "evaluations",
    "stages",
    "time_per_eval",
    "efficiency",
    "reproducible",
];

pub fn write_bench_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.threads.to_string(),
            r.repeats.to_string(),
            r.t_min.to_string(),
            r.t_max.to_string(),
            r.evaluations.to_string(),
            r.stages.to_string(),
            r.time_per_eval.to_string(),
            r.efficiency.to_string(),
            u8::from(r.reproducible).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bench_csv(path: &Path) -> Result<Vec<BenchRow>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    ensure!(rd.headers()?.iter().eq(HEADER), "{}: unexpected header", path.display());
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        ensure!(rec.len() == HEADER.len(), "bench row {} has {} fields", i + 1, rec.len());
        let f = |k: usize| rec[k].to_owned();
        let bad = |k: usize| format!("bench row {}, column {}: {:?}", i + 1, HEADER[k], &rec[k]);
        rows.push(BenchRow {
            threads: f(0).parse().with_context(|| bad(0))?,
            repeats: f(1).parse().with_context(|| bad(1))?,
            t_min: f(2).parse().with_context(|| bad(2))?,
            t_max: f(3).parse().with_context(|| bad(3))?,
            evaluations: f(4).parse().with_context(|| bad(4))?,
            stages: f(5).parse().with_context(|| bad(5))?,
            time_per_eval: f(6).parse().with_context(|| bad(6))?,
            efficiency: f(7).parse().with_context(|| bad(7))?,
            reproducible: f(8) == "1",
        });
    }
    Ok(rows)
}
