use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::factors::{BlockDiagonalFactor, MiddleFactor};
use crate::error::{Error, Result};
use crate::linalg::{
    complex_gaussian, low_rank_from_sketches, pad_cols, randomized_sampling_svd, CMat, FactorFormA,
    OversamplingParams,
};
use crate::oracle::{EntryOracle, LinearOperator, SubBlock};
use crate::partition::{block_cols, block_rows, BlockId, DyadicPartition};

pub(crate) const STAGE_SAMPLING: u64 = 1;
pub(crate) const STAGE_PROBE_COL: u64 = 2;
pub(crate) const STAGE_PROBE_ROW: u64 = 3;

/// Independent generator for `(stage, a, b)` derived from the master seed.
pub fn substream(seed: u64, stage: u64, a: usize, b: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stage << 56) | ((a as u64) << 28) | b as u64);
    rng
}

/// Output of the middle-level factorization `K ≈ U^h M^h (V^h)^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct MiddleLevel {
    pub u_h: BlockDiagonalFactor,
    pub middle: MiddleFactor,
    pub v_h: BlockDiagonalFactor,
}

/// `K^h_{i,j} ≈ U_{i,j} S_{i,j} V_{j,i}^*`, zero-padded to rank `r`.
#[derive(Debug, Clone)]
pub(crate) struct BlockApprox {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

impl BlockApprox {
    fn from_form(f: FactorFormA, r: usize) -> Self {
        let mut s = f.s;
        s.resize(r, 0.0);
        BlockApprox {
            u: pad_cols(&f.u, r),
            s,
            v: pad_cols(&f.vstar.adjoint(), r),
        }
    }
}

pub(crate) fn check_rank(p: &DyadicPartition, r: usize) -> Result<()> {
    let side = p.n() / p.middle_nodes();
    if r == 0 || r > side {
        return Err(Error::invalid(format!(
            "rank {r} must lie in [1, {side}] (middle-level block side)"
        )));
    }
    Ok(())
}

fn middle_block(p: &DyadicPartition, i: usize, j: usize) -> BlockId {
    BlockId {
        level: p.half(),
        row_node: i,
        col_node: j,
    }
}

/// Approximates `K^h_{i,j}` from entries, using the block's own substream.
pub(crate) fn sampled_block(
    entry: &dyn EntryOracle,
    p: &DyadicPartition,
    r: usize,
    params: &OversamplingParams,
    seed: u64,
    i: usize,
    j: usize,
) -> Result<BlockApprox> {
    let id = middle_block(p, i, j);
    let view = SubBlock::new(entry, block_rows(p, &id)?, block_cols(p, &id)?);
    let mut rng = substream(seed, STAGE_SAMPLING, i, j);
    let approx = randomized_sampling_svd(&view, r, params, &mut rng).map_err(|e| match e {
        Error::Oracle { source, .. } => Error::oracle_at(id, source),
        other => other,
    })?;
    Ok(BlockApprox::from_form(approx.to_form_a(), r))
}

pub(crate) fn assemble(p: &DyadicPartition, r: usize, approx: &[BlockApprox]) -> MiddleLevel {
    let m = p.middle_nodes();
    let row_blocks = |i: usize, pick: &dyn Fn(&BlockApprox) -> &CMat, by_row: bool| {
        let parts: Vec<&CMat> = (0..m)
            .map(|k| pick(&approx[if by_row { i * m + k } else { k * m + i }]))
            .collect();
        let rows = parts[0].nrows();
        let mut out = CMat::zeros(rows, m * r);
        for (k, part) in parts.iter().enumerate() {
            out.columns_mut(k * r, r).copy_from(*part);
        }
        out
    };
    let u_h = BlockDiagonalFactor::from_diagonal(
        (0..m).map(|i| row_blocks(i, &|a| &a.u, true)).collect(),
    );
    let v_h = BlockDiagonalFactor::from_diagonal(
        (0..m).map(|j| row_blocks(j, &|a| &a.v, false)).collect(),
    );
    let middle = MiddleFactor {
        m,
        rank: r,
        weights: approx.iter().map(|a| a.s.clone()).collect(),
    };
    MiddleLevel { u_h, middle, v_h }
}

/// Middle-level factorization from entry evaluations: one randomized
/// sampling SVD per block `K^h_{i,j}`.
pub fn middle_factorization_sampling(
    entry: &dyn EntryOracle,
    p: &DyadicPartition,
    r: usize,
    params: &OversamplingParams,
    seed: u64,
) -> Result<MiddleLevel> {
    crate::oracle::check_square(entry.nrows(), entry.ncols(), p.n())?;
    check_rank(p, r)?;
    params.validate()?;
    let m = p.middle_nodes();
    let approx = (0..m * m)
        .into_par_iter()
        .map(|k| sampled_block(entry, p, r, params, seed, k / m, k % m))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(p, r, &approx))
}

/// Block-diagonal Gaussian probe with one `(N/m) × width` block per
/// middle-level node, drawn from that node's substream.
pub fn probe_matrix(p: &DyadicPartition, width: usize, seed: u64, stage: u64) -> CMat {
    let m = p.middle_nodes();
    let side = p.n() / m;
    let mut out = CMat::zeros(p.n(), m * width);
    for j in 0..m {
        let mut rng = substream(seed, stage, j, 0);
        out.view_mut((j * side, j * width), (side, width))
            .copy_from(&complex_gaussian(&mut rng, side, width));
    }
    out
}

/// Probe width used by the matvec middle factorization.
pub fn probe_width(p: &DyadicPartition, r: usize, params: &OversamplingParams) -> usize {
    (r + params.p).min(p.n() / p.middle_nodes())
}

/// Middle-level factorization from products with `K` and `K^*` against
/// block-diagonal Gaussian probes.
pub fn middle_factorization_matvec(
    op: &dyn LinearOperator,
    p: &DyadicPartition,
    r: usize,
    params: &OversamplingParams,
    seed: u64,
) -> Result<MiddleLevel> {
    crate::oracle::check_square(op.nrows(), op.ncols(), p.n())?;
    check_rank(p, r)?;
    let m = p.middle_nodes();
    let side = p.n() / m;
    let width = probe_width(p, r, params);
    let c = probe_matrix(p, width, seed, STAGE_PROBE_COL);
    let rr = probe_matrix(p, width, seed, STAGE_PROBE_ROW);
    let kc = op.apply(&c)?;
    let ks_r = op.apply_adjoint(&rr)?;
    if kc.shape() != c.shape() || ks_r.shape() != rr.shape() {
        return Err(Error::DimensionMismatch(
            "operator returned a product of the wrong shape".into(),
        ));
    }
    let approx = (0..m * m)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / m, k % m);
            let y = kc.view((i * side, j * width), (side, width)).into_owned();
            let w = ks_r.view((j * side, i * width), (side, width)).into_owned();
            let psi = rr.view((i * side, i * width), (side, width)).into_owned();
            let a = low_rank_from_sketches(&y, &w, &psi, r)?;
            Ok(BlockApprox::from_form(a.to_form_a(), r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(p, r, &approx))
}
