//! Multi-resolution tree-based clustering.
//!
//! Level 0 holds a single cluster with every snapshot. Levels `1..=H` use
//! decreasing size thresholds. Snapshots are inserted in time order: at each
//! level a snapshot joins the nearest child (by centroid distance) of the
//! cluster it joined one level up, provided that centroid lies within the
//! level threshold; otherwise it opens a new child. The first pass builds
//! levels `1..H-1` this way. The second pass routes every snapshot down the
//! finished upper levels, by nearest centroid, and fills the leaf level under
//! the route. [`refine_multipass`] repeats that pass for intermediate levels.

mod centroid;
mod ladder;
mod refine;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use centroid::Accumulator;
pub use ladder::threshold_ladder;
pub use refine::refine_multipass;

use crate::dataset::{Metric, SnapshotStore};
use crate::{Error, Result};

pub const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Cluster {
    /// Snapshot indices in time order.
    pub members: Vec<u32>,
    /// Cluster id one level up; [`NO_PARENT`] for the root.
    pub parent: u32,
    /// Cluster ids one level down, in creation order.
    pub children: Vec<u32>,
    pub centroid: Vec<f64>,
    acc: Accumulator,
}

impl Cluster {
    fn new(parent: u32) -> Self {
        Self {
            members: Vec::new(),
            parent,
            children: Vec::new(),
            centroid: Vec::new(),
            acc: Accumulator::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    /// Size threshold; infinite for the root level.
    pub threshold: f64,
    pub clusters: Vec<Cluster>,
    /// Cluster id of every snapshot at this level.
    pub assignment: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct ClusterTree {
    levels: Vec<Level>,
    metric: Metric,
}

impl ClusterTree {
    /// Number of non-root levels (H).
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn n_snapshots(&self) -> usize {
        self.levels[0].assignment.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, h: usize) -> &Level {
        &self.levels[h]
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.levels[1..].iter().map(|l| l.threshold).collect()
    }

    /// Verifies the partition and nesting properties at every level.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n_snapshots();
        let bad = |msg: String| Err(Error::InvalidParameter(format!("cluster tree: {msg}")));
        if self.levels[0].clusters.len() != 1 || self.levels[0].clusters[0].len() != n {
            return bad("root level must be one cluster holding everything".into());
        }
        for (h, level) in self.levels.iter().enumerate() {
            if level.assignment.len() != n {
                return bad(format!("level {h} assignment has wrong length"));
            }
            let mut seen = vec![false; n];
            for (id, c) in level.clusters.iter().enumerate() {
                if c.is_empty() {
                    return bad(format!("level {h} cluster {id} is empty"));
                }
                for &m in &c.members {
                    let m = m as usize;
                    if seen[m] || level.assignment[m] as usize != id {
                        return bad(format!("level {h}: snapshot {m} not uniquely assigned"));
                    }
                    seen[m] = true;
                }
                if h > 0 {
                    let parent = &self.levels[h - 1].clusters[c.parent as usize];
                    if !parent.children.contains(&(id as u32)) {
                        return bad(format!("level {h} cluster {id} missing from parent children"));
                    }
                    if c.members
                        .iter()
                        .any(|&m| self.levels[h - 1].assignment[m as usize] != c.parent)
                    {
                        return bad(format!("level {h} cluster {id} not nested in its parent"));
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return bad(format!("level {h} does not cover every snapshot"));
            }
            if h > 1 && level.threshold >= self.levels[h - 1].threshold {
                return bad("thresholds must strictly decrease".into());
            }
        }
        Ok(())
    }

    /// Inserts snapshot `i` at level `h` below `parent`, returning its cluster.
    fn insert(&mut self, store: &SnapshotStore, h: usize, parent: u32, i: usize) -> u32 {
        let x = store.row(i);
        let (upper, lower) = self.levels.split_at_mut(h);
        let parent_cluster = &mut upper[h - 1].clusters[parent as usize];
        let level = &mut lower[0];

        let mut best: Option<(f64, u32)> = None;
        for &child in &parent_cluster.children {
            let d = self.metric.eval(x, &level.clusters[child as usize].centroid);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, child));
            }
        }
        let id = match best {
            Some((d, child)) if d <= level.threshold => child,
            _ => {
                let id = level.clusters.len() as u32;
                level.clusters.push(Cluster::new(parent));
                parent_cluster.children.push(id);
                id
            }
        };
        let cluster = &mut level.clusters[id as usize];
        cluster.members.push(i as u32);
        cluster.acc.add(&self.metric, x, &mut cluster.centroid);
        level.assignment[i] = id;
        id
    }

    /// Rebuilds level `h` from scratch under the current levels `1..h`.
    ///
    /// The coarser clusters and their centroids stay fixed while every
    /// snapshot, in time order, is routed down them by nearest centroid among
    /// the children of its current cluster and then inserted at level `h`.
    /// Memberships along the route are reassigned; afterwards the coarser
    /// centroids are recomputed and clusters left empty are dropped.
    fn rebuild_level(&mut self, store: &SnapshotStore, h: usize) {
        let n = self.n_snapshots();
        for level in &mut self.levels[1..h] {
            for c in &mut level.clusters {
                c.members.clear();
            }
        }
        for c in &mut self.levels[h - 1].clusters {
            c.children.clear();
        }
        let level = &mut self.levels[h];
        level.clusters.clear();
        level.assignment.iter_mut().for_each(|a| *a = NO_PARENT);

        for i in 0..n {
            let x = store.row(i);
            let mut cur = 0u32;
            for l in 1..h {
                let (upper, lower) = self.levels.split_at_mut(l);
                let children = &upper[l - 1].clusters[cur as usize].children;
                let level = &mut lower[0];
                let mut best: Option<(f64, u32)> = None;
                for &child in children {
                    let d = self.metric.eval(x, &level.clusters[child as usize].centroid);
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, child));
                    }
                }
                cur = best.expect("routing cluster without children").1;
                level.clusters[cur as usize].members.push(i as u32);
                level.assignment[i] = cur;
            }
            self.insert(store, h, cur, i);
        }

        for l in 1..h {
            let metric = self.metric;
            for c in &mut self.levels[l].clusters {
                c.acc = Accumulator::default();
                c.centroid.clear();
                for &m in &c.members {
                    c.acc.add(&metric, store.row(m as usize), &mut c.centroid);
                }
            }
            self.drop_empty(l, h);
        }
    }

    /// Removes empty clusters at level `l` and renumbers the rest. Levels
    /// `l - 1` (children lists) and, up to `finest`, `l + 1` (parents) are
    /// updated accordingly.
    fn drop_empty(&mut self, l: usize, finest: usize) {
        if self.levels[l].clusters.iter().all(|c| !c.is_empty()) {
            return;
        }
        let mut remap = vec![NO_PARENT; self.levels[l].clusters.len()];
        let mut next = 0u32;
        for (id, c) in self.levels[l].clusters.iter().enumerate() {
            if !c.is_empty() {
                remap[id] = next;
                next += 1;
            }
        }
        self.levels[l].clusters.retain(|c| !c.is_empty());
        for a in &mut self.levels[l].assignment {
            *a = remap[*a as usize];
        }
        for c in &mut self.levels[l - 1].clusters {
            c.children.retain(|&k| remap[k as usize] != NO_PARENT);
            c.children.iter_mut().for_each(|k| *k = remap[*k as usize]);
        }
        if l < finest {
            for c in &mut self.levels[l + 1].clusters {
                c.parent = remap[c.parent as usize];
            }
        }
    }

    /// Fraction of members per level farther than the level threshold from
    /// their cluster's final centroid. Entry 0 (root) is always 0.
    pub fn threshold_violations(&self, store: &SnapshotStore) -> Vec<f64> {
        let n = self.n_snapshots() as f64;
        self.levels
            .iter()
            .map(|level| {
                if level.threshold.is_infinite() {
                    return 0.0;
                }
                let bad = level
                    .clusters
                    .iter()
                    .flat_map(|c| {
                        c.members
                            .iter()
                            .map(move |&m| (m, c.centroid.as_slice()))
                    })
                    .filter(|(m, centroid)| {
                        self.metric.eval(store.row(*m as usize), centroid) > level.threshold
                    })
                    .count();
                bad as f64 / n
            })
            .collect()
    }

    /// One CSV record per cluster: `level,id,parent,members,c0..c{D-1}`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let d = self.levels[0].clusters[0].centroid.len();
        let io = |e| Error::io(path, e);
        write!(w, "level,id,parent,members").map_err(io)?;
        for k in 0..d {
            write!(w, ",c{k}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
        for (h, level) in self.levels.iter().enumerate() {
            for (id, c) in level.clusters.iter().enumerate() {
                let parent = if c.parent == NO_PARENT {
                    String::new()
                } else {
                    c.parent.to_string()
                };
                write!(w, "{h},{id},{parent},{}", c.len()).map_err(io)?;
                for x in &c.centroid {
                    write!(w, ",{x}").map_err(io)?;
                }
                writeln!(w).map_err(io)?;
            }
        }
        w.flush().map_err(io)?;
        Ok(())
    }
}

/// One record of the cluster-tree CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRecord {
    pub level: usize,
    pub id: u32,
    pub parent: Option<u32>,
    pub members: usize,
    pub centroid: Vec<f64>,
}

impl ClusterTree {
    /// The records [`ClusterTree::write_csv`] writes.
    pub fn records(&self) -> Vec<ClusterRecord> {
        let mut out = Vec::new();
        for (h, level) in self.levels.iter().enumerate() {
            for (id, c) in level.clusters.iter().enumerate() {
                out.push(ClusterRecord {
                    level: h,
                    id: id as u32,
                    parent: (c.parent != NO_PARENT).then_some(c.parent),
                    members: c.len(),
                    centroid: c.centroid.clone(),
                });
            }
        }
        out
    }
}

pub fn read_cluster_csv(path: impl AsRef<Path>) -> Result<Vec<ClusterRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rd = csv::Reader::from_reader(std::io::BufReader::new(file));
    let header = rd.headers()?.clone();
    if header.len() < 4 || header.iter().take(4).ne(["level", "id", "parent", "members"]) {
        return Err(Error::param(format!(
            "{}: expected columns level,id,parent,members,c0..",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |column: usize| Error::NonNumeric {
            row: row + 1,
            column,
            value: rec.get(column).unwrap_or("").to_owned(),
        };
        let parent = match &rec[2] {
            "" => None,
            p => Some(p.parse().map_err(|_| bad(2))?),
        };
        let centroid = (4..rec.len())
            .map(|k| rec[k].parse().map_err(|_| bad(k)))
            .collect::<Result<_>>()?;
        out.push(ClusterRecord {
            level: rec[0].parse().map_err(|_| bad(0))?,
            id: rec[1].parse().map_err(|_| bad(1))?,
            parent,
            members: rec[3].parse().map_err(|_| bad(3))?,
            centroid,
        });
    }
    Ok(out)
}

/// Builds the cluster tree with an evenly spaced threshold ladder.
pub fn build_tree(
    store: &SnapshotStore,
    metric: &Metric,
    levels: usize,
    d_coarse: f64,
    d_fine: f64,
) -> Result<ClusterTree> {
    let ladder = threshold_ladder(levels, d_coarse, d_fine)?;
    build_tree_with_thresholds(store, metric, &ladder)
}

/// Two-pass construction from explicit thresholds (coarsest first).
pub fn build_tree_with_thresholds(
    store: &SnapshotStore,
    metric: &Metric,
    thresholds: &[f64],
) -> Result<ClusterTree> {
    metric.check(store)?;
    if thresholds.len() < 2 {
        return Err(Error::param("need at least 2 tree levels"));
    }
    if thresholds.windows(2).any(|w| !(w[0] > w[1])) || thresholds.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::param("thresholds must be positive and strictly decreasing"));
    }
    let n = store.len();
    let height = thresholds.len();

    let mut root = Cluster::new(NO_PARENT);
    root.members = (0..n as u32).collect();
    for i in 0..n {
        root.acc.add(metric, store.row(i), &mut root.centroid);
    }
    let mut levels = vec![Level {
        threshold: f64::INFINITY,
        clusters: vec![root],
        assignment: vec![0; n],
    }];
    for &t in thresholds {
        levels.push(Level {
            threshold: t,
            clusters: Vec::new(),
            assignment: vec![NO_PARENT; n],
        });
    }
    let mut tree = ClusterTree {
        levels,
        metric: *metric,
    };

    // first pass: levels 1..H-1 grow together, snapshot by snapshot
    for i in 0..n {
        let mut parent = 0u32;
        for h in 1..height {
            parent = tree.insert(store, h, parent, i);
        }
    }
    // second pass: leaf level under the now fixed upper tree
    tree.rebuild_level(store, height);
    Ok(tree)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub level: usize,
    pub threshold: f64,
    pub clusters: usize,
    pub max_size: usize,
    /// Ratio of mean cluster sizes between the previous level and this one
    /// (equivalently, of cluster counts); `None` at the root.
    pub size_ratio: Option<f64>,
}

pub fn tree_stats(tree: &ClusterTree) -> Vec<LevelStats> {
    let mut out: Vec<LevelStats> = Vec::with_capacity(tree.levels.len());
    for (h, level) in tree.levels.iter().enumerate() {
        let clusters = level.clusters.len();
        let size_ratio = out.last().map(|prev| clusters as f64 / prev.clusters as f64);
        out.push(LevelStats {
            level: h,
            threshold: level.threshold,
            clusters,
            max_size: level.clusters.iter().map(Cluster::len).max().unwrap_or(0),
            size_ratio,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureKind;

    fn store2d(points: &[[f64; 2]]) -> SnapshotStore {
        let rows: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        SnapshotStore::from_rows(&rows, vec![FeatureKind::Linear; 2]).unwrap()
    }

    #[test]
    fn single_snapshot() {
        let s = store2d(&[[1.0, 1.0]]);
        let tree = build_tree(&s, &Metric::euclidean(), 4, 8.0, 1.0).unwrap();
        tree.check_invariants().unwrap();
        for level in tree.levels() {
            assert_eq!(level.clusters.len(), 1);
            assert_eq!(level.clusters[0].members, vec![0]);
        }
        for st in tree_stats(&tree) {
            assert_eq!(st.clusters, 1);
            assert!(st.size_ratio.is_none_or(|r| r == 1.0));
        }
    }

    #[test]
    fn far_pair_splits_everywhere() {
        let s = store2d(&[[0.0, 0.0], [100.0, 0.0]]);
        let tree = build_tree(&s, &Metric::euclidean(), 3, 50.0, 1.0).unwrap();
        tree.check_invariants().unwrap();
        for level in &tree.levels()[1..] {
            assert_eq!(level.clusters.len(), 2);
        }
    }

    #[test]
    fn ties_go_to_the_older_cluster() {
        // third point is equidistant from the first two clusters' centroids
        let s = store2d(&[[0.0, 0.0], [10.0, 0.0], [5.0, 0.0]]);
        let tree = build_tree_with_thresholds(&s, &Metric::euclidean(), &[6.0, 5.5]).unwrap();
        assert_eq!(tree.level(1).assignment, vec![0, 1, 0]);
    }

    #[test]
    fn members_within_threshold_at_insertion() {
        let pts: Vec<[f64; 2]> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                [t.sin() * 10.0 + (i % 7) as f64, t.cos() * 10.0]
            })
            .collect();
        let s = store2d(&pts);
        let tree = build_tree(&s, &Metric::euclidean(), 4, 12.0, 1.5).unwrap();
        tree.check_invariants().unwrap();
        // the first member defines the centroid, so it is trivially inside
        for level in &tree.levels()[1..] {
            for c in &level.clusters {
                assert_eq!(c.centroid.len(), 2);
            }
        }
    }

    #[test]
    fn binary_split_ratio_two() {
        // 2^3 micro-clusters arranged so each level halves the groups
        let mut pts = Vec::new();
        for g in 0..8u32 {
            let x = (g & 1) as f64 * 1.0 + ((g >> 1) & 1) as f64 * 10.0 + ((g >> 2) & 1) as f64 * 100.0;
            for k in 0..5 {
                pts.push([x + k as f64 * 0.01, 0.0]);
            }
        }
        let s = store2d(&pts);
        let tree = build_tree_with_thresholds(&s, &Metric::euclidean(), &[30.0, 3.0, 0.3]).unwrap();
        tree.check_invariants().unwrap();
        let stats = tree_stats(&tree);
        assert_eq!(
            stats.iter().map(|s| s.clusters).collect::<Vec<_>>(),
            vec![1, 2, 4, 8]
        );
        for st in &stats[1..] {
            assert_eq!(st.size_ratio, Some(2.0));
        }
    }

    #[test]
    fn tree_csv_has_one_record_per_cluster() {
        let s = store2d(&[[0.0, 0.0], [100.0, 0.0], [0.5, 0.0]]);
        let tree = build_tree(&s, &Metric::euclidean(), 2, 50.0, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tree.csv");
        tree.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let total: usize = tree.levels().iter().map(|l| l.clusters.len()).sum();
        assert_eq!(text.lines().count(), total + 1);
        assert!(text.starts_with("level,id,parent,members,c0,c1"));
    }

    #[test]
    fn tree_csv_round_trip() {
        let s = store2d(&[[0.0, 0.0], [100.0, 0.0], [0.5, 0.0], [0.3, 1.0 / 3.0]]);
        let tree = build_tree(&s, &Metric::euclidean(), 3, 50.0, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tree.csv");
        tree.write_csv(&path).unwrap();
        assert_eq!(read_cluster_csv(&path).unwrap(), tree.records());
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_cluster_csv(&path).is_err());
    }
}
