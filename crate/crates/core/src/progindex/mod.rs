//! Progress index: a greedy traversal of a spanning tree, with optional
//! leaf folding, plus the cut-based kinetic annotation.

mod cut;
mod table;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::dataset::SnapshotStore;
use crate::spantree::SpanningTree;
use crate::{Error, Result};

pub use cut::{cut_annotation, mfpt_sum, CutAnnotation, MfptSum};
pub use table::{read_progress_csv, write_progress_csv, ProgressRow, ProgressTable};

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressIndex {
    /// `order[p]` is the snapshot placed at position `p`.
    pub order: Vec<u32>,
    /// Weight of the tree edge that admitted `order[p]`; `None` at position 0.
    pub added_weight: Vec<Option<f64>>,
    /// Per snapshot: selected for early processing by leaf folding.
    pub leaf_class: Vec<bool>,
}

impl ProgressIndex {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Inverse permutation: position of each snapshot.
    pub fn positions(&self) -> Vec<u32> {
        let mut pos = vec![0u32; self.order.len()];
        for (p, &v) in self.order.iter().enumerate() {
            pos[v as usize] = p as u32;
        }
        pos
    }
}

/// Peel round of every vertex: round 1 takes all vertices of degree at most
/// one, round `r` those left with at most one unpeeled neighbor after
/// rounds `< r`. Every vertex of a tree is peeled eventually.
pub fn peel_rounds(tree: &SpanningTree) -> Vec<usize> {
    let n = tree.n_vertices();
    let (offsets, adj) = tree.adjacency();
    let mut degree: Vec<usize> = (0..n).map(|v| offsets[v + 1] - offsets[v]).collect();
    let mut round = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut r = 1;
    while !current.is_empty() {
        for &v in &current {
            round[v] = r;
        }
        let mut next = Vec::new();
        for &v in &current {
            for &(u, _) in &adj[offsets[v]..offsets[v + 1]] {
                let u = u as usize;
                if round[u] == 0 {
                    degree[u] -= 1;
                    if degree[u] == 1 {
                        next.push(u);
                    }
                }
            }
        }
        next.sort_unstable();
        current = next;
        r += 1;
    }
    round
}

/// Leaf-class flags for folding depth `rho_f`.
pub fn leaf_classify(tree: &SpanningTree, rho_f: usize) -> Vec<bool> {
    if rho_f == 0 {
        return vec![false; tree.n_vertices()];
    }
    peel_rounds(tree).into_iter().map(|r| r <= rho_f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier(f64, u32);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn build_progress_index(tree: &SpanningTree, start: usize, rho_f: usize) -> Result<ProgressIndex> {
    let n = tree.n_vertices();
    if start >= n {
        return Err(Error::IndexOutOfRange { index: start, n });
    }
    let leaf_class = leaf_classify(tree, rho_f);
    let (offsets, adj) = tree.adjacency();
    let mut placed = vec![false; n];
    let mut leaves: BinaryHeap<Reverse<Frontier>> = BinaryHeap::new();
    let mut others: BinaryHeap<Reverse<Frontier>> = BinaryHeap::new();
    let mut order = Vec::with_capacity(n);
    let mut added_weight = Vec::with_capacity(n);

    let mut next = Some((start as u32, None));
    while let Some((v, w)) = next {
        placed[v as usize] = true;
        order.push(v);
        added_weight.push(w);
        for &(u, weight) in &adj[offsets[v as usize]..offsets[v as usize + 1]] {
            if !placed[u as usize] {
                let heap = if leaf_class[u as usize] { &mut leaves } else { &mut others };
                heap.push(Reverse(Frontier(weight, u)));
            }
        }
        next = leaves
            .pop()
            .or_else(|| others.pop())
            .map(|Reverse(Frontier(w, u))| (u, Some(w)));
    }
    Ok(ProgressIndex {
        order,
        added_weight,
        leaf_class,
    })
}

/// Values of feature `feature` listed in progress-index order.
pub fn structural_track(store: &SnapshotStore, pi: &ProgressIndex, feature: usize) -> Result<Vec<f64>> {
    if feature >= store.dim() {
        return Err(Error::FeatureOutOfRange {
            index: feature,
            d: store.dim(),
        });
    }
    if pi.len() != store.len() {
        return Err(Error::TreeSizeMismatch(pi.len(), store.len()));
    }
    pi.order.iter().map(|&v| store.get(v as usize, feature)).collect()
}
