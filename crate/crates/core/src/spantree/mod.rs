//! Spanning trees of the complete snapshot graph.
//!
//! [`exact_mst`] is the quadratic reference. [`build_sst`] is the scalable
//! route: Borůvka stages in which every vertex makes a bounded number of
//! distance guesses drawn from the clusters that contain it.

mod cache;
mod compare;
mod forest;
mod mst;
mod pick;
mod pool;
mod sst;

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

pub use cache::{GuessCache, NeighborRing, CACHE_CAPACITY};
pub use compare::{compare_trees, TreeComparison};
pub use forest::DisjointSet;
pub use mst::exact_mst;
pub use pick::{scheduled_pick, vertex_stream};
pub use pool::CandidatePool;
pub use sst::{build_sst, RngMode, SstParams, SstReport};

use crate::{Error, Result};

/// Undirected weighted edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub weight: f64,
}

impl Edge {
    pub fn new(a: u32, b: u32, weight: f64) -> Self {
        debug_assert_ne!(a, b);
        Self {
            u: a.min(b),
            v: a.max(b),
            weight,
        }
    }

    /// Total order by `(weight, u, v)`; every tie-break in this crate uses it.
    #[inline]
    pub fn order(&self, other: &Edge) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }

    #[inline]
    pub fn other(&self, x: u32) -> u32 {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// `N - 1` edges forming a single connected, acyclic component.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    n: usize,
    edges: Vec<Edge>,
}

impl SpanningTree {
    /// Validates edge count, index range, acyclicity and connectivity.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges for {n} vertices",
                edges.len()
            )));
        }
        let mut dsu = DisjointSet::new(n);
        for e in &edges {
            if e.u == e.v || e.u as usize >= n || e.v as usize >= n {
                return Err(Error::InvalidTree(format!("bad edge ({}, {})", e.u, e.v)));
            }
            if !(e.weight >= 0.0) {
                return Err(Error::InvalidTree(format!("negative or NaN weight {}", e.weight)));
            }
            if !dsu.union(e.u as usize, e.v as usize) {
                return Err(Error::InvalidTree(format!("edge ({}, {}) closes a cycle", e.u, e.v)));
            }
        }
        // n - 1 acyclic edges over n vertices are necessarily connected
        Ok(Self { n, edges })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Compressed adjacency: `(offsets, neighbors)` where each neighbor is
    /// `(vertex, weight)`.
    pub fn adjacency(&self) -> (Vec<usize>, Vec<(u32, f64)>) {
        let mut degree = vec![0usize; self.n + 1];
        for e in &self.edges {
            degree[e.u as usize + 1] += 1;
            degree[e.v as usize + 1] += 1;
        }
        for i in 0..self.n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut nbrs = vec![(0u32, 0.0f64); 2 * self.edges.len()];
        for e in &self.edges {
            nbrs[fill[e.u as usize]] = (e.v, e.weight);
            fill[e.u as usize] += 1;
            nbrs[fill[e.v as usize]] = (e.u, e.weight);
            fill[e.v as usize] += 1;
        }
        (offsets, nbrs)
    }

    /// Edges sorted by `(weight, u, v)`.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut e = self.edges.clone();
        e.sort_by(Edge::order);
        e
    }

    /// CSV with header `u,v,weight`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "u,v,weight").map_err(io)?;
        for e in &self.edges {
            writeln!(w, "{},{},{}", e.u, e.v, e.weight).map_err(io)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    /// Reads a tree written by [`SpanningTree::write_csv`]. The vertex count
    /// is the edge count plus one.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(BufReader::new(file));
        let mut edges = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::RaggedRow {
                    row,
                    found: rec.len(),
                    expected: 3,
                });
            }
            let field = |c: usize| -> Result<&str> { Ok(&rec[c]) };
            let parse_idx = |c: usize| -> Result<u32> {
                let s = field(c)?;
                s.parse().map_err(|_| Error::NonNumeric {
                    row,
                    column: c,
                    value: s.to_string(),
                })
            };
            let (a, b) = (parse_idx(0)?, parse_idx(1)?);
            let w: f64 = rec[2].parse().map_err(|_| Error::NonNumeric {
                row,
                column: 2,
                value: rec[2].to_string(),
            })?;
            if a == b {
                return Err(Error::InvalidTree(format!("self loop at row {row}")));
            }
            edges.push(Edge::new(a, b, w));
        }
        Self::new(edges.len() + 1, edges)
    }
}
