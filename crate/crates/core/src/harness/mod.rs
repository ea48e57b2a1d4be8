//! Accuracy estimation, benchmarking, factor files and the `bfac` CLI.

mod bench;
mod cli;
mod eps;
mod serialize;

pub use bench::{
    run_bench, BenchConfig, BenchReport, BenchRow, Instance, KernelKind, OutputFormat,
    COMPOSITION_INNER_RANK,
};
pub use cli::cli_main;
pub use eps::{
    eps_a_with_input, estimate_eps_a, DirectSum, EpsEstimate, FullOperator, ReferenceOperator,
};
pub use serialize::{from_bytes, load_factors, load_vector, save_factors, save_vector, to_bytes};
