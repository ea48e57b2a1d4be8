use rand::seq::index;
use rand::Rng;

use super::{complex_gaussian, index_union, pinv, pivoted_qr, svd_sorted, CMat, LowRankApprox};
use crate::error::{Error, Result};
use crate::oracle::{EntryOracle, LinearOperator};

/// Oversampling controls shared by both randomized engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OversamplingParams {
    /// Additive oversampling: probes are `r + p` wide.
    pub p: usize,
    /// Multiplicative oversampling: `r * q` random rows/columns per sweep.
    pub q: usize,
    /// Number of skeleton refinement sweeps.
    pub iters: usize,
}

impl Default for OversamplingParams {
    fn default() -> Self {
        OversamplingParams {
            p: 5,
            q: 3,
            iters: 3,
        }
    }
}

impl OversamplingParams {
    pub fn validate(&self) -> Result<()> {
        if self.q < 1 {
            return Err(Error::invalid("multiplicative oversampling q must be >= 1"));
        }
        if self.iters < 1 {
            return Err(Error::invalid("skeleton iterations must be >= 1"));
        }
        Ok(())
    }
}

fn assemble(q_col: &CMat, middle: &CMat, q_row: &CMat, r: usize) -> Result<LowRankApprox> {
    let s = svd_sorted(middle)?;
    let k = r.min(s.sigma.len());
    Ok(LowRankApprox {
        u0: q_col * s.u.columns(0, k),
        sigma0: s.sigma[..k].to_vec(),
        v0: q_row * s.v.columns(0, k),
    })
}

/// Randomized SVD from products with `Z` and `Z^*`.
///
/// Probes with Gaussian `R_col` (n × (r+p)) and `R_row` (m × (r+p)),
/// orthonormalizes both sketches by pivoted QR, forms the small middle
/// matrix `Q_col^* Z Q_row` (one extra application of `Z`), and lifts its
/// SVD back.
pub fn randomized_svd<R: Rng + ?Sized>(
    op: &dyn LinearOperator,
    r: usize,
    params: &OversamplingParams,
    rng: &mut R,
) -> Result<LowRankApprox> {
    let (m, n) = (op.nrows(), op.ncols());
    let width = r + params.p;
    if r == 0 || width > m.min(n) {
        return Err(Error::invalid(format!(
            "r + p = {width} probes do not fit a {m}x{n} operator (r = {r})"
        )));
    }
    let r_col = complex_gaussian(rng, n, width);
    let r_row = complex_gaussian(rng, m, width);
    let y = op.apply(&r_col)?;
    let w = op.apply_adjoint(&r_row)?;
    let q_col = pivoted_qr(&y, r).q;
    let q_row = pivoted_qr(&w, r).q;
    let z_q = op.apply(&q_row)?;
    let middle = q_col.ad_mul(&z_q);
    assemble(&q_col, &middle, &q_row, r)
}

/// Finishes a randomized SVD from sketches alone, without further access to
/// `Z`.
///
/// `y = Z·Ω` and `w = Z^*·Ψ` are the two sketches and `psi` is `Ψ`. Both
/// sketches are orthonormalized at their full width; the middle matrix is
/// the least-squares solution `(Ψ^* Q_col)^† (w^* Q_row)`, which equals
/// `Q_col^* Z Q_row` whenever `Q_col` captures the range of `Z`. Truncation
/// to rank `r` happens only in the SVD of that middle matrix.
pub fn low_rank_from_sketches(y: &CMat, w: &CMat, psi: &CMat, r: usize) -> Result<LowRankApprox> {
    if psi.nrows() != y.nrows() || psi.ncols() != w.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "sketch shapes y {:?}, w {:?}, psi {:?}",
            y.shape(),
            w.shape(),
            psi.shape()
        )));
    }
    let q_col = pivoted_qr(y, y.ncols()).q;
    let q_row = pivoted_qr(w, w.ncols()).q;
    let left = pinv(&psi.ad_mul(&q_col))?;
    let right = w.ad_mul(&q_row);
    let middle = left * right;
    assemble(&q_col, &middle, &q_row, r)
}

fn sample_indices<R: Rng + ?Sized>(rng: &mut R, len: usize, amount: usize) -> Vec<usize> {
    index::sample(rng, len, amount.min(len)).into_vec()
}

/// Randomized sampling SVD: touches only `O(r)` rows and columns of `Z`.
///
/// The skeleton sets `Π_col`/`Π_row` are refined by alternating pivoted QR on
/// sampled rows and pivoted LQ on sampled columns; the middle matrix is fit
/// by least squares on the skeleton plus `r·q` fresh random rows and columns.
/// An all-zero matrix yields all-zero singular values.
pub fn randomized_sampling_svd<R: Rng + ?Sized>(
    z: &dyn EntryOracle,
    r: usize,
    params: &OversamplingParams,
    rng: &mut R,
) -> Result<LowRankApprox> {
    params.validate()?;
    let (m, n) = (z.nrows(), z.ncols());
    if r == 0 || m == 0 || n == 0 {
        return Err(Error::invalid(format!("rank {r} for a {m}x{n} matrix")));
    }
    let k = r.min(m).min(n);
    let n_sample = r * params.q;
    let all_rows: Vec<usize> = (0..m).collect();
    let all_cols: Vec<usize> = (0..n).collect();

    let mut pi_col: Vec<usize> = Vec::new();
    let mut pi_row: Vec<usize> = Vec::new();
    let mut last_cols = CMat::zeros(0, 0);
    let mut last_j: Vec<usize> = Vec::new();
    for _ in 0..params.iters {
        let i_set = index_union(&sample_indices(rng, m, n_sample), &pi_row);
        let z_i = z.submatrix(&i_set, &all_cols)?;
        pi_col = pivoted_qr(&z_i, k).pivots;

        let j_set = index_union(&sample_indices(rng, n, n_sample), &pi_col);
        let z_j = z.submatrix(&all_rows, &j_set)?;
        pi_row = pivoted_qr(&z_j.adjoint(), k).pivots;
        last_cols = z_j;
        last_j = j_set;
    }

    // Z[:, Π_col] is a subset of the last column sample.
    let z_pc = CMat::from_fn(m, pi_col.len(), |a, b| {
        let pos = last_j.binary_search(&pi_col[b]).expect("Π_col ⊂ J");
        last_cols[(a, pos)]
    });
    let q_col = pivoted_qr(&z_pc, k).q;
    let z_pr = z.submatrix(&pi_row, &all_cols)?;
    let q_row = pivoted_qr(&z_pr.adjoint(), k).q;

    let i_set = index_union(&pi_row, &sample_indices(rng, m, n_sample));
    let j_set = index_union(&pi_col, &sample_indices(rng, n, n_sample));
    let z_ij = z.submatrix(&i_set, &j_set)?;
    let q_col_i = CMat::from_fn(i_set.len(), q_col.ncols(), |a, b| q_col[(i_set[a], b)]);
    let q_row_j = CMat::from_fn(j_set.len(), q_row.ncols(), |a, b| q_row[(j_set[a], b)]);
    // (Q_row^*)_{:,J} = (Q_row[J, :])^*, so its pseudo-inverse is pinv(Q_row[J, :])^*.
    let middle = pinv(&q_col_i)? * z_ij * pinv(&q_row_j)?.adjoint();
    assemble(&q_col, &middle, &q_row, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{spectral_norm, truncated_svd, C64};
    use crate::oracle::DenseOperator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SEEDS: [u64; 10] = [0, 1, 2, 3, 5, 8, 13, 21, 34, 55];

    fn exact_rank(m: usize, n: usize, k: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        complex_gaussian(&mut rng, m, k) * complex_gaussian(&mut rng, k, n)
    }

    fn prescribed(n: usize, seed: u64) -> (CMat, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q1 = pivoted_qr(&complex_gaussian(&mut rng, n, n), n).q;
        let q2 = pivoted_qr(&complex_gaussian(&mut rng, n, n), n).q;
        let sig: Vec<f64> = (0..n).map(|k| 10f64.powf(-(k as f64) / 2.0)).collect();
        let mut d = CMat::zeros(n, n);
        for k in 0..n {
            d[(k, k)] = C64::new(sig[k], 0.0);
        }
        (&q1 * d * q2.adjoint(), sig)
    }

    fn rel_err(z: &CMat, a: &LowRankApprox) -> f64 {
        spectral_norm(&(z - a.to_dense())) / spectral_norm(z).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_operator() {
        let op = DenseOperator::new(CMat::zeros(32, 32));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = randomized_svd(&op, 3, &OversamplingParams::default(), &mut rng).unwrap();
        assert_eq!(a.sigma0, vec![0.0; 3]);
        let a = randomized_sampling_svd(&op, 4, &OversamplingParams::default(), &mut rng).unwrap();
        assert_eq!(a.sigma0, vec![0.0; 4]);
    }

    #[test]
    fn exact_rank_is_recovered_for_every_seed() {
        let params = OversamplingParams::default();
        for &seed in &SEEDS {
            let z = exact_rank(32, 32, 3, 100 + seed);
            let op = DenseOperator::new(z.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = randomized_svd(&op, 3, &params, &mut rng).unwrap();
            assert!(rel_err(&z, &a) <= 1e-10, "rsvd seed {seed}");
            let a = randomized_sampling_svd(&op, 3, &params, &mut rng).unwrap();
            assert!(rel_err(&z, &a) <= 1e-10, "sampling seed {seed}");
            let a = truncated_svd(&z, 3).unwrap();
            assert!(rel_err(&z, &a) <= 1e-10);
        }
    }

    #[test]
    fn rank_one_outer_product_by_sampling() {
        let z = exact_rank(64, 64, 1, 77);
        let op = DenseOperator::new(z.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = randomized_sampling_svd(&op, 1, &OversamplingParams::default(), &mut rng).unwrap();
        assert!(rel_err(&z, &a) <= 1e-10);
    }

    #[test]
    fn prescribed_spectrum_within_ten_times_optimal() {
        let params = OversamplingParams::default();
        let r = 4;
        for &seed in &SEEDS {
            let (z, sig) = prescribed(24, 1000 + seed);
            let op = DenseOperator::new(z.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = randomized_svd(&op, r, &params, &mut rng).unwrap();
            let err = spectral_norm(&(&z - a.to_dense()));
            assert!(err <= 10.0 * sig[r], "seed {seed}: {err} vs {}", sig[r]);
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let z = exact_rank(20, 18, 5, 9);
        let op = DenseOperator::new(z);
        let params = OversamplingParams::default();
        let run = |s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            randomized_sampling_svd(&op, 4, &params, &mut rng).unwrap()
        };
        assert_eq!(run(3), run(3));
        let run2 = |s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            randomized_svd(&op, 4, &params, &mut rng).unwrap()
        };
        assert_eq!(run2(3), run2(3));
    }

    #[test]
    fn randomized_svd_rejects_oversized_probe() {
        let op = DenseOperator::new(CMat::zeros(6, 6));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(randomized_svd(&op, 2, &OversamplingParams::default(), &mut rng).is_err());
    }

    #[test]
    fn sketch_route_matches_exact_rank() {
        let z = exact_rank(16, 12, 3, 31);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let omega = complex_gaussian(&mut rng, 12, 8);
        let psi = complex_gaussian(&mut rng, 16, 8);
        let y = &z * omega;
        let w = z.ad_mul(&psi);
        let a = low_rank_from_sketches(&y, &w, &psi, 3).unwrap();
        assert!(rel_err(&z, &a) <= 1e-10);
    }
}
