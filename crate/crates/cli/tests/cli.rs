use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sapphire_cli::pipeline::Summary;
use sapphire_cli::plot::strip_runs;
use sapphire_cli::read_bench_csv;
use sapphire_core::hcluster::read_cluster_csv;
use sapphire_core::progindex::read_progress_csv;
use sapphire_core::spantree::SpanningTree;
use sapphire_core::synthgen::read_labels_csv;

fn sapphire(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sapphire"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn sapphire")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sapphire(dir, args);
    assert!(
        out.status.success(),
        "sapphire {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synth(dir: &Path, n: usize, extra: &[&str]) -> (PathBuf, PathBuf) {
    let n = n.to_string();
    let mut args = vec!["synth", "-n", &n, "--labels", "labels.csv", "-o", "data.csv"];
    args.extend_from_slice(extra);
    ok(dir, &args);
    (dir.join("data.csv"), dir.join("labels.csv"))
}

#[test]
fn missing_input_fails_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = sapphire(dir.path(), &["pipeline", "input=absent.csv", "output=run"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
    assert!(!dir.path().join("run").exists());
}

#[test]
fn unknown_key_is_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 50, &[]);
    let out = sapphire(dir.path(), &["pipeline", "input=data.csv", "colour=blue", "output=run"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("run").exists());
}

#[test]
fn two_well_cut_minimum_separates_basins() {
    let dir = tempfile::tempdir().unwrap();
    let (_, labels) = synth(dir.path(), 10_000, &["--seed", "3"]);
    ok(
        dir.path(),
        &["pipeline", "input=data.csv", "levels=6", "d_coarse=12", "d_fine=1.5", "labels=labels.csv", "output=run"],
    );
    let table = read_progress_csv(dir.path().join("run/progress.csv")).unwrap();
    let n = table.rows.len();
    assert_eq!(n, 10_000);
    let (labels, _) = read_labels_csv(&labels).unwrap();

    let (lo, hi) = (n / 10, 9 * n / 10);
    let p_min = (lo..hi).min_by_key(|&p| table.rows[p].cut.unwrap()).unwrap();
    // fraction of each state on the left of the split
    let mut left = [0usize; 2];
    let mut total = [0usize; 2];
    for (p, row) in table.rows.iter().enumerate() {
        let s = labels[row.snapshot as usize] as usize;
        total[s] += 1;
        if p <= p_min {
            left[s] += 1;
        }
    }
    let f: Vec<f64> = (0..2).map(|s| left[s] as f64 / total[s] as f64).collect();
    assert!(
        (f[0] > 0.95 && f[1] < 0.05) || (f[0] < 0.05 && f[1] > 0.95),
        "split at {p_min}: left fractions {f:?}"
    );
}

#[test]
fn exact_mode_matches_exhaustive_sst() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 500, &["--hop", "0.01"]);
    let common = ["input=data.csv", "levels=5", "d_coarse=12", "d_fine=1", "rho_f=2", "annotate=0,1"];
    let mut exact = vec!["pipeline", "tree=exact", "output=exact"];
    exact.extend_from_slice(&common);
    let mut sst = vec!["pipeline", "tree=sst", "n_guesses=100000", "sigma_max=5", "output=sst"];
    sst.extend_from_slice(&common);
    ok(dir.path(), &exact);
    ok(dir.path(), &sst);
    let a = std::fs::read(dir.path().join("exact/progress.csv")).unwrap();
    let b = std::fs::read(dir.path().join("sst/progress.csv")).unwrap();
    assert!(a == b, "progress tables differ");
    let ta = SpanningTree::read_csv(dir.path().join("exact/spanning_tree.csv")).unwrap();
    let tb = SpanningTree::read_csv(dir.path().join("sst/spanning_tree.csv")).unwrap();
    assert_eq!(ta.sorted_edges(), tb.sorted_edges());
}

#[test]
fn artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 800, &["--outlier-rate", "0.02"]);
    let stdout = ok(
        dir.path(),
        &["pipeline", "input=data.csv", "levels=4", "d_coarse=10", "d_fine=2", "eta_max=1", "annotate=0", "labels=labels.csv", "output=run"],
    );
    let run = dir.path().join("run");
    let summary = Summary::read(&run.join("summary.txt")).unwrap();
    assert_eq!((summary.n, summary.d), (800, 5));
    assert!(stdout.contains(&format!("evaluations = {}", summary.evaluations)));

    let clusters = read_cluster_csv(run.join("cluster_tree.csv")).unwrap();
    assert_eq!(clusters.iter().filter(|c| c.level == 0).count(), 1);
    for level in 0..=4 {
        let members: usize = clusters.iter().filter(|c| c.level == level).map(|c| c.members).sum();
        assert_eq!(members, 800);
    }

    let st = SpanningTree::read_csv(run.join("spanning_tree.csv")).unwrap();
    assert_eq!(st.edges().len(), 799);
    assert!((st.total_length() - summary.tree_length).abs() < 1e-9 * summary.tree_length);

    let table = read_progress_csv(run.join("progress.csv")).unwrap();
    assert_eq!(table.annotation_names, vec!["f0", "state"]);
    let copy = run.join("copy.csv");
    table.write_csv(&copy).unwrap();
    assert_eq!(read_progress_csv(&copy).unwrap(), table);
}

#[test]
fn stepwise_subcommands_agree_with_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 600, &[]);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "input = data.csv\nlevels = 5\nd_coarse = 12\nd_fine = 1\nseed = 9\nrho_f = 1\n",
    )
    .unwrap();
    ok(dir.path(), &["pipeline", "-c", "run.cfg", "output=whole"]);
    ok(dir.path(), &["cluster", "-c", "run.cfg", "output=steps"]);
    ok(dir.path(), &["sst", "-c", "run.cfg", "output=steps"]);
    ok(dir.path(), &["pindex", "--tree", "steps/spanning_tree.csv", "-c", "run.cfg", "output=steps"]);
    for file in ["cluster_tree.csv", "spanning_tree.csv", "progress.csv"] {
        let a = std::fs::read(dir.path().join("whole").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("steps").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }

    // the exact tree is never longer
    let out = ok(dir.path(), &["mst", "-c", "run.cfg", "output=mst"]);
    let mst = SpanningTree::read_csv(dir.path().join("mst/spanning_tree.csv")).unwrap();
    let sst = SpanningTree::read_csv(dir.path().join("steps/spanning_tree.csv")).unwrap();
    assert!(mst.total_length() <= sst.total_length() + 1e-9);
    assert!(out.contains("evaluations = 179700"));
}

#[test]
fn plot_strips_follow_labels() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 4000, &["--seed", "5"]);
    ok(
        dir.path(),
        &["pipeline", "input=data.csv", "levels=6", "d_coarse=12", "d_fine=1.5", "labels=labels.csv", "output=run"],
    );
    ok(dir.path(), &["plot", "run/progress.csv", "-o", "plot.svg"]);
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    let cut_points = sapphire_cli::plot::cut_points(&svg);
    assert_eq!(cut_points.len(), 3999);

    let mut runs = strip_runs(&svg, "state");
    assert!(!runs.is_empty());
    runs.sort_by_key(|r| std::cmp::Reverse(r.2 - r.1));
    let (a, b) = (&runs[0], &runs[1]);
    assert_ne!(a.0, b.0, "two largest blocks share a color");
    assert!(a.2 - a.1 + b.2 - b.1 >= 3800, "{:?} {:?}", a, b);
}

#[test]
fn raw_binary_input() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "-n", "300", "--dim", "3", "--format", "raw", "-o", "data.bin"]);
    assert_eq!(std::fs::metadata(dir.path().join("data.bin")).unwrap().len(), 300 * 3 * 8);
    let out = sapphire(dir.path(), &["pipeline", "input=data.bin", "format=raw", "output=run"]);
    assert!(!out.status.success(), "raw input without a feature spec must fail");
    ok(
        dir.path(),
        &["pipeline", "input=data.bin", "format=raw", "features=linear:3", "levels=4", "d_coarse=10", "d_fine=1", "output=run"],
    );
    assert_eq!(Summary::read(&dir.path().join("run/summary.txt")).unwrap().n, 300);
}

#[test]
fn bench_counts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 2000, &[]);
    let stdout = ok(
        dir.path(),
        &["bench", "--threads", "1,2", "--repeats", "3", "input=data.csv", "levels=5", "d_coarse=12", "d_fine=1", "output=b"],
    );
    assert!(stdout.starts_with("threads,t_min,t_max,evaluations,time_per_eval,efficiency"));
    let rows = read_bench_csv(&dir.path().join("b/bench.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].efficiency, 1.0);
    assert!(rows.iter().all(|r| r.reproducible && r.repeats == 3 && r.t_min <= r.t_max));
    assert_eq!(rows[0].evaluations, rows[1].evaluations);
}
