//! Butterfly factorization of complementary low-rank matrices.
//!
//! A matrix `K` whose blocks `K_{A,B}` are numerically low-rank whenever
//! `|A|·|B| ≈ N` is compressed into `L + 3` sparse factors with
//! `O(r² N log N)` nonzeros in total, which are then applied in
//! `O(r² N log N)` time.

pub mod butterfly;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod oracle;
pub mod partition;

pub use butterfly::{factorize, ButterflyFactors, Mode};
pub use error::{Error, OracleError, Result};
pub use linalg::{CMat, OversamplingParams, C64};
pub use oracle::{DenseOperator, EntryOracle, LinearOperator, MatrixOracle};
pub use partition::{make_partition, BlockId, DyadicPartition};
