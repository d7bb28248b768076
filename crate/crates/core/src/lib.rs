//! Progress-index construction for large time series.
//!
//! The pipeline runs in four steps:
//!
//! 1. [`dataset`] loads snapshots and evaluates pairwise distances.
//! 2. [`hcluster`] builds a multi-resolution cluster tree that preorganizes
//!    the snapshots for neighbor search.
//! 3. [`spantree`] builds either the exact minimum spanning tree of the
//!    complete snapshot graph or a short spanning tree (SST) via randomized,
//!    cluster-guided Borůvka merging on several threads.
//! 4. [`progindex`] turns a spanning tree into the progress index and
//!    computes the cut-based kinetic annotation.
//!
//! [`synthgen`] produces labeled Markov-chain data for testing the whole chain.

pub mod dataset;
pub mod error;
pub mod hcluster;
pub mod progindex;
pub mod spantree;
pub mod synthgen;

pub use error::{Error, Result};
