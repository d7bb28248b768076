//! Short spanning tree construction.
//!
//! One Borůvka stage runs these phases, each split across `threads` workers
//! and closed by a join that acts as the barrier:
//!
//! 1. Sort the member list of every cluster at every level by subtree label.
//! 2. For each vertex, gather up to `n_guesses` guesses from the finest
//!    cluster with an eligible member, descending at most `sigma_max` extra
//!    levels to fill the quota. The best guess per subtree goes into a shared
//!    slot, one lock per subtree.
//! 3. A single worker merges subtrees along the slot edges, dropping
//!    duplicates and cycle-forming edges.
//! 4. Vertex labels are updated and cached guesses that became
//!    intra-subtree are purged.
//!
//! Every comparison uses the `(weight, u, v)` order and the default random
//! streams are keyed by `(seed, stage, vertex)`, so the edge list does not
//! depend on the thread count.

use std::collections::HashMap;
use std::sync::Mutex;
use std::thread;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cache::{GuessCache, NeighborRing};
use super::forest::DisjointSet;
use super::pick::{scheduled_pick, vertex_stream};
use super::pool::CandidatePool;
use super::{Edge, SpanningTree};
use crate::dataset::{Metric, SnapshotStore};
use crate::hcluster::ClusterTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngMode {
    /// One counter-based stream per `(stage, vertex)`; thread-count invariant.
    PerVertex,
    /// One generator shared by all workers behind a lock. Results depend on
    /// scheduling.
    Shared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SstParams {
    /// Guesses per vertex and stage (cached guesses count toward it).
    pub n_guesses: usize,
    /// Extra, coarser tree levels a vertex may use to fill its quota.
    pub sigma_max: usize,
    /// Length of one scheduled run of picks.
    pub schedule_span: usize,
    pub seed: u64,
    pub threads: usize,
    pub rng_mode: RngMode,
    /// Upper bound on Borůvka stages before giving up.
    pub stage_cap: usize,
}

impl Default for SstParams {
    fn default() -> Self {
        Self {
            n_guesses: 16,
            sigma_max: 2,
            schedule_span: 150,
            seed: 0,
            threads: 1,
            rng_mode: RngMode::PerVertex,
            stage_cap: 64,
        }
    }
}

impl SstParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_guesses == 0 {
            return Err(Error::param("n_guesses must be at least 1"));
        }
        if self.schedule_span == 0 {
            return Err(Error::param("schedule_span must be at least 1"));
        }
        if self.threads == 0 {
            return Err(Error::param("threads must be at least 1"));
        }
        if self.stage_cap == 0 {
            return Err(Error::param("stage_cap must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SstReport {
    pub tree: SpanningTree,
    pub stages: usize,
    /// Distance evaluations across all stages (cache hits excluded).
    pub evaluations: u64,
    /// Subtree count before the first stage and after each stage.
    pub subtree_counts: Vec<usize>,
    /// Largest number of cached guesses any vertex held after a purge.
    pub max_cache_len: usize,
    /// Whether any cached guess survived a purge inside its own subtree.
    pub cache_violation: bool,
}

/// Per-level copy of the cluster member lists, laid out cluster by cluster.
struct LevelLayout {
    offsets: Vec<usize>,
    members: Vec<u32>,
    /// Subtree label of `members[k]`, refreshed when sorting.
    keys: Vec<u32>,
}

impl LevelLayout {
    fn new(clusters: &[crate::hcluster::Cluster]) -> Self {
        let mut offsets = Vec::with_capacity(clusters.len() + 1);
        offsets.push(0);
        let mut members = Vec::new();
        for c in clusters {
            members.extend_from_slice(&c.members);
            offsets.push(members.len());
        }
        let keys = members.clone();
        Self {
            offsets,
            members,
            keys,
        }
    }

    #[inline]
    fn cluster(&self, id: u32) -> (usize, usize) {
        (self.offsets[id as usize], self.offsets[id as usize + 1])
    }
}

struct SharedRng<'a>(&'a Mutex<ChaCha8Rng>);

impl RngCore for SharedRng<'_> {
    fn next_u32(&mut self) -> u32 {
        self.0.lock().unwrap().next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.lock().unwrap().next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.lock().unwrap().fill_bytes(dst)
    }
}

struct StageCtx<'a> {
    store: &'a SnapshotStore,
    metric: &'a Metric,
    layouts: &'a [LevelLayout],
    assignments: Vec<&'a [u32]>,
    labels: &'a [u32],
    params: &'a SstParams,
    stage: usize,
    shared_rng: &'a Mutex<ChaCha8Rng>,
}

impl StageCtx<'_> {
    #[inline]
    fn pool(&self, h: usize, v: usize, label: u32) -> (usize, CandidatePool) {
        let layout = &self.layouts[h];
        let (start, end) = layout.cluster(self.assignments[h][v]);
        (start, CandidatePool::locate(&layout.keys[start..end], label))
    }

    /// Best eligible edge for `v` this stage plus the number of fresh
    /// distance evaluations spent on it.
    fn search(&self, v: usize, ring: &mut NeighborRing, picks: &mut Vec<usize>) -> (Option<Edge>, u64) {
        let label = self.labels[v];
        let row = self.store.row(v);
        let vu = v as u32;
        let mut best: Option<Edge> = None;
        for &(nb, w) in ring.entries() {
            let e = Edge::new(vu, nb, w);
            if best.is_none_or(|b| e.order(&b).is_lt()) {
                best = Some(e);
            }
        }
        let quota = self.params.n_guesses;
        let mut guesses = ring.len();
        let mut evals = 0u64;
        if guesses >= quota {
            return (best, evals);
        }

        // finest level whose cluster offers at least one eligible member
        let height = self.layouts.len() - 1;
        let mut h = height;
        loop {
            if self.pool(h, v, label).1.size() > 0 {
                break;
            }
            if h == 0 {
                return (best, evals);
            }
            h -= 1;
        }
        let finest = h;

        let mut rng: Option<ChaCha8Rng> = None;
        loop {
            let (start, pool) = self.pool(h, v, label);
            let members = &self.layouts[h].members;
            let mut consider = |pos: usize, ring: &mut NeighborRing| {
                let c = members[start + pos];
                let w = self.metric.eval(row, self.store.row(c as usize));
                let e = Edge::new(vu, c, w);
                if best.is_none_or(|b| e.order(&b).is_lt()) {
                    best = Some(e);
                    ring.push(c, w);
                }
            };
            let remaining = quota - guesses;
            if pool.size() > remaining {
                picks.clear();
                match self.params.rng_mode {
                    RngMode::PerVertex => {
                        let r = rng.get_or_insert_with(|| vertex_stream(self.params.seed, self.stage, v));
                        scheduled_pick(pool.size(), remaining, self.stage, self.params.schedule_span, r, picks);
                    }
                    RngMode::Shared => {
                        let mut r = SharedRng(self.shared_rng);
                        scheduled_pick(pool.size(), remaining, self.stage, self.params.schedule_span, &mut r, picks);
                    }
                }
                for &k in picks.iter() {
                    consider(pool.position(k), ring);
                }
                guesses += remaining;
                evals += remaining as u64;
            } else {
                for k in 0..pool.size() {
                    consider(pool.position(k), ring);
                }
                guesses += pool.size();
                evals += pool.size() as u64;
            }
            if guesses >= quota || h == 0 || finest - h >= self.params.sigma_max {
                break;
            }
            h -= 1;
        }
        (best, evals)
    }
}

fn chunk_bounds(n: usize, parts: usize) -> Vec<(usize, usize)> {
    (0..parts)
        .map(|t| (t * n / parts, (t + 1) * n / parts))
        .collect()
}

/// Runs `work` once per chunk, on scoped threads when there is more than one.
fn run_chunks<T, R, F>(items: Vec<T>, work: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, T) -> R + Sync,
{
    if items.len() == 1 {
        return items.into_iter().map(|it| work(0, it)).collect();
    }
    thread::scope(|s| {
        let handles: Vec<_> = items
            .into_iter()
            .enumerate()
            .map(|(t, it)| {
                let work = &work;
                s.spawn(move || work(t, it))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Step 1: sort every cluster's member list by subtree label. Clusters are
/// dealt to workers largest first, each to the least loaded worker.
fn sort_clusters(layouts: &mut [LevelLayout], labels: &[u32], threads: usize) {
    let mut items: Vec<(&mut [u32], &mut [u32])> = Vec::new();
    for layout in layouts.iter_mut() {
        let LevelLayout {
            offsets,
            members,
            keys,
        } = layout;
        let mut m: &mut [u32] = members;
        let mut k: &mut [u32] = keys;
        for w in offsets.windows(2) {
            let len = w[1] - w[0];
            let (mh, mt) = std::mem::take(&mut m).split_at_mut(len);
            let (kh, kt) = std::mem::take(&mut k).split_at_mut(len);
            m = mt;
            k = kt;
            if len > 1 {
                items.push((mh, kh));
            } else if len == 1 {
                kh[0] = labels[mh[0] as usize];
            }
        }
    }
    items.sort_by_key(|(m, _)| std::cmp::Reverse(m.len()));
    let mut buckets: Vec<Vec<(&mut [u32], &mut [u32])>> = (0..threads).map(|_| Vec::new()).collect();
    let mut load = vec![0usize; threads];
    for item in items {
        let t = (0..threads).min_by_key(|&t| (load[t], t)).unwrap();
        load[t] += item.0.len();
        buckets[t].push(item);
    }
    run_chunks(buckets, |_, bucket| {
        let mut buf: Vec<u64> = Vec::new();
        for (members, keys) in bucket {
            buf.clear();
            buf.extend(
                members
                    .iter()
                    .map(|&m| ((labels[m as usize] as u64) << 32) | m as u64),
            );
            buf.sort_unstable();
            for (i, &packed) in buf.iter().enumerate() {
                members[i] = packed as u32;
                keys[i] = (packed >> 32) as u32;
            }
        }
    });
}

/// Builds a short spanning tree guided by `tree`.
pub fn build_sst(
    store: &SnapshotStore,
    metric: &Metric,
    tree: &ClusterTree,
    params: &SstParams,
) -> Result<SstReport> {
    params.validate()?;
    metric.check(store)?;
    let n = store.len();
    if tree.n_snapshots() != n {
        return Err(Error::param(format!(
            "cluster tree covers {} snapshots, store has {n}",
            tree.n_snapshots()
        )));
    }
    if n == 1 {
        return Ok(SstReport {
            tree: SpanningTree::new(1, Vec::new())?,
            stages: 0,
            evaluations: 0,
            subtree_counts: vec![1],
            max_cache_len: 0,
            cache_violation: false,
        });
    }
    let threads = params.threads.min(n).max(1);
    let bounds = chunk_bounds(n, threads);

    let mut layouts: Vec<LevelLayout> = tree.levels().iter().map(|l| LevelLayout::new(&l.clusters)).collect();
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let mut relabel: Vec<u32> = (0..n as u32).collect();
    let mut cache = GuessCache::new(n);
    let slots: Vec<Mutex<Option<Edge>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let shared_rng = Mutex::new(ChaCha8Rng::seed_from_u64(params.seed));
    let mut dsu = DisjointSet::new(n);
    let mut active: Vec<u32> = (0..n as u32).collect();
    let mut edges: Vec<Edge> = Vec::with_capacity(n - 1);
    let mut evaluations = 0u64;
    let mut subtree_counts = vec![n];
    let mut max_cache_len = 0usize;
    let mut cache_violation = false;
    let mut stage = 0usize;

    while active.len() > 1 {
        stage += 1;
        if stage > params.stage_cap {
            return Err(Error::StageCap(params.stage_cap));
        }

        // sort members by label
        sort_clusters(&mut layouts, &labels, threads);

        // per-vertex search
        let ctx = StageCtx {
            store,
            metric,
            layouts: &layouts,
            assignments: tree.levels().iter().map(|l| l.assignment.as_slice()).collect(),
            labels: &labels,
            params,
            stage,
            shared_rng: &shared_rng,
        };
        let mut ring_chunks: Vec<(usize, &mut [NeighborRing])> = Vec::with_capacity(threads);
        let mut rest = cache.rings_mut();
        for &(lo, hi) in &bounds {
            let (head, tail) = rest.split_at_mut(hi - lo);
            ring_chunks.push((lo, head));
            rest = tail;
        }
        let counts = run_chunks(ring_chunks, |_, (lo, rings)| {
            let mut local: HashMap<u32, Edge> = HashMap::new();
            let mut picks = Vec::new();
            let mut evals = 0u64;
            for (off, ring) in rings.iter_mut().enumerate() {
                let v = lo + off;
                let (best, e) = ctx.search(v, ring, &mut picks);
                evals += e;
                if let Some(edge) = best {
                    local
                        .entry(ctx.labels[v])
                        .and_modify(|cur| {
                            if edge.order(cur).is_lt() {
                                *cur = edge;
                            }
                        })
                        .or_insert(edge);
                }
            }
            for (label, edge) in local {
                let mut slot = slots[label as usize].lock().unwrap();
                if slot.is_none_or(|cur| edge.order(&cur).is_lt()) {
                    *slot = Some(edge);
                }
            }
            evals
        });
        evaluations += counts.iter().sum::<u64>();
        drop(ctx);

        // merge on one worker
        let mut candidates: Vec<Edge> = active
            .iter()
            .filter_map(|&r| slots[r as usize].lock().unwrap().take())
            .collect();
        candidates.sort_by(Edge::order);
        candidates.dedup_by(|a, b| a.u == b.u && a.v == b.v);
        for e in candidates {
            let (a, b) = (labels[e.u as usize] as usize, labels[e.v as usize] as usize);
            if dsu.union(a, b) {
                edges.push(e);
            }
        }
        let before = active.len();
        for &r in &active {
            relabel[r as usize] = dsu.find(r as usize) as u32;
        }
        active.retain(|&r| relabel[r as usize] == r);
        if active.len() >= before {
            return Err(Error::StageCap(stage));
        }
        subtree_counts.push(active.len());

        // relabel
        let relabel_ref = &relabel;
        let label_chunks: Vec<&mut [u32]> = {
            let mut out = Vec::with_capacity(threads);
            let mut rest: &mut [u32] = &mut labels;
            for &(lo, hi) in &bounds {
                let (head, tail) = rest.split_at_mut(hi - lo);
                out.push(head);
                rest = tail;
            }
            out
        };
        run_chunks(label_chunks, |_, chunk| {
            for l in chunk.iter_mut() {
                *l = relabel_ref[*l as usize];
            }
        });

        // purge intra-subtree cache entries
        let labels_ref = &labels;
        let mut ring_chunks: Vec<(usize, &mut [NeighborRing])> = Vec::with_capacity(threads);
        let mut rest = cache.rings_mut();
        for &(lo, hi) in &bounds {
            let (head, tail) = rest.split_at_mut(hi - lo);
            ring_chunks.push((lo, head));
            rest = tail;
        }
        let purge = run_chunks(ring_chunks, |_, (lo, rings)| {
            let mut longest = 0usize;
            let mut violation = false;
            for (off, ring) in rings.iter_mut().enumerate() {
                let own = labels_ref[lo + off];
                ring.retain(|nb| labels_ref[nb as usize] != own);
                longest = longest.max(ring.len());
                violation |= ring.entries().iter().any(|(nb, _)| labels_ref[*nb as usize] == own);
            }
            (longest, violation)
        });
        for (longest, violation) in purge {
            max_cache_len = max_cache_len.max(longest);
            cache_violation |= violation;
        }
    }

    Ok(SstReport {
        tree: SpanningTree::new(n, edges)?,
        stages: stage,
        evaluations,
        subtree_counts,
        max_cache_len,
        cache_violation,
    })
}
