use std::collections::HashSet;

use super::SpanningTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeComparison {
    /// Shared edges over `N - 1`, comparing canonical `(u, v)` pairs.
    pub shared_fraction: f64,
    pub length_a: f64,
    pub length_b: f64,
}

pub fn compare_trees(a: &SpanningTree, b: &SpanningTree) -> Result<TreeComparison> {
    if a.n_vertices() != b.n_vertices() {
        return Err(Error::TreeSizeMismatch(a.n_vertices(), b.n_vertices()));
    }
    let set: HashSet<(u32, u32)> = a.edges().iter().map(|e| (e.u, e.v)).collect();
    let shared = b.edges().iter().filter(|e| set.contains(&(e.u, e.v))).count();
    let shared_fraction = if a.edges().is_empty() {
        1.0
    } else {
        shared as f64 / a.edges().len() as f64
    };
    Ok(TreeComparison {
        shared_fraction,
        length_a: a.total_length(),
        length_b: b.total_length(),
    })
}
