//! Dense complex linear algebra and the rank-r approximation engines.
//!
//! Three engines produce a [`LowRankApprox`]: the deterministic
//! [`truncated_svd`], the matvec-driven [`randomized_svd`], and the
//! entry-sampling [`randomized_sampling_svd`]. The approximation can then be
//! regrouped into the factor forms used by the butterfly construction.

mod forms;
mod qr;
mod randomized;
mod svd;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub use forms::{FactorFormA, LowRankApprox, TwoFactorForm};
pub use qr::{pivoted_qr, PivotedQr};
pub use randomized::{
    low_rank_from_sketches, randomized_sampling_svd, randomized_svd, OversamplingParams,
};
pub use svd::{floored_inverse, pinv, svd_sorted, truncated_svd, truncated_svd_clamped, Svd};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Relative singular-value floor used by every pseudo-inversion.
pub const PINV_FLOOR: f64 = 1e-13;

/// Complex standard normal matrix: real and imaginary parts are independent
/// N(0, 1). Entries are drawn in column-major order.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let data: Vec<C64> = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect();
    CMat::from_vec(rows, cols, data)
}

/// Largest singular value, via a full SVD. Intended for tests and small
/// diagnostics.
pub fn spectral_norm(a: &CMat) -> f64 {
    svd_sorted(a)
        .ok()
        .and_then(|s| s.sigma.first().copied())
        .unwrap_or(0.0)
}

/// Copy of `a` widened to `cols` columns with trailing zero columns.
pub(crate) fn pad_cols(a: &CMat, cols: usize) -> CMat {
    debug_assert!(a.ncols() <= cols);
    let mut out = CMat::zeros(a.nrows(), cols);
    out.columns_mut(0, a.ncols()).copy_from(a);
    out
}

/// Copy of `a` extended to `rows` rows with trailing zero rows.
pub(crate) fn pad_rows(a: &CMat, rows: usize) -> CMat {
    debug_assert!(a.nrows() <= rows);
    let mut out = CMat::zeros(rows, a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out
}

/// Sorted union of two index sets.
pub(crate) fn index_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}
