//! Command-line harness: config parsing, single-case runs, the benchmark
//! matrix, and machine-readable reports.

mod bench;
mod config;
mod runner;

pub use bench::{
    benchmark_problem, hgk_benchmark_kernel, in_band, run_table1_bench, srk_benchmark_kernel,
    BenchOutcome, BenchRow, HGK_NDA_REFERENCE, HGK_SI_REFERENCE, SMOOTH_COUNTS,
    SRK_NDA_REFERENCE, SRK_SI_REFERENCE,
};
pub use config::{parse_config, serialize_config, ConfigError, MethodSelector, RunConfig};
pub use runner::{emit_flux_profiles, run_case, CaseOutcome, HarnessError};
