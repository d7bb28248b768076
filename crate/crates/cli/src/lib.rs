//! Command-line driver: configuration, the end-to-end pipeline, SAPPHIRE
//! plots and thread-scaling benchmarks.

pub mod bench;
pub mod config;
pub mod memory;
pub mod pipeline;
pub mod plot;

pub use bench::{read_bench_csv, run_bench, write_bench_csv, BenchRow};
pub use config::{RunConfig, TreeMode};
pub use memory::peak_rss_kib;
pub use pipeline::{run_pipeline, Artifacts, Summary};
pub use plot::{emit_sapphire_svg, render_svg};
