//! Butterfly factorization
//! `K ≈ U^L G^{L-1} ⋯ G^h M^h (H^h)^* ⋯ (H^{L-1})^* (V^L)^*`.
//!
//! Construction starts from rank-`r` approximations of every middle-level
//! block `K^h_{i,j}` ([`middle_factorization_sampling`] or
//! [`middle_factorization_matvec`]) and then recursively compresses the
//! block-diagonal outer factors ([`recursive_factor_u`],
//! [`recursive_factor_v`]). Every random draw comes from a substream keyed
//! by block, so results do not depend on scheduling or thread count.

mod factors;
mod middle;
mod recursive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use factors::{BlockDiagonalFactor, BlockSparse, DenseBlock, MiddleFactor, TransferFactor};
pub use middle::{
    middle_factorization_matvec, middle_factorization_sampling, probe_matrix, probe_width,
    substream, MiddleLevel,
};
pub use recursive::{recursive_factor_u, recursive_factor_v};

use crate::error::{Error, OracleError, Result};
use crate::linalg::{CMat, OversamplingParams, C64};
use crate::oracle::{check_square, EntryOracle, LinearOperator, MatrixOracle};
use crate::partition::DyadicPartition;
use middle::{check_rank, sampled_block, BlockApprox};
use recursive::{assemble_chain, factor_subtree};

/// Construction schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Entry oracle; all middle-level blocks held at once.
    Sampling,
    /// Operator oracle for `K` and `K^*`.
    Matvec,
    /// Entry oracle; one middle-level row (then column) at a time, so peak
    /// memory stays `O(N log N)`.
    Streaming,
}

/// The `L + 3` sparse factors of a butterfly factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyFactors {
    pub partition: DyadicPartition,
    pub rank: usize,
    pub u_outer: BlockDiagonalFactor,
    /// `[G^{L-1}, …, G^h]`.
    pub g_chain: Vec<TransferFactor>,
    pub middle: MiddleFactor,
    /// `[H^h, …, H^{L-1}]`.
    pub h_chain: Vec<TransferFactor>,
    pub v_outer: BlockDiagonalFactor,
}

/// Nonzero counts of every stored factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NnzReport {
    pub u_outer: usize,
    pub g_chain: Vec<usize>,
    pub middle: usize,
    pub h_chain: Vec<usize>,
    pub v_outer: usize,
    pub total: usize,
}

/// Builds the factorization of `oracle` on partition `p` at fixed rank `r`.
pub fn factorize(
    oracle: MatrixOracle<'_>,
    p: &DyadicPartition,
    r: usize,
    params: &OversamplingParams,
    seed: u64,
    mode: Mode,
) -> Result<ButterflyFactors> {
    let (middle, (u_outer, g_chain), (v_outer, h_chain)) = match (mode, oracle) {
        (Mode::Sampling, MatrixOracle::Entry(e)) => {
            let mid = middle_factorization_sampling(e, p, r, params, seed)?;
            let (u, v) = rayon::join(
                || recursive_factor_u(&mid.u_h, p, r),
                || recursive_factor_v(&mid.v_h, p, r),
            );
            (mid.middle, u?, v?)
        }
        (Mode::Matvec, MatrixOracle::Operator(op)) => {
            let mid = middle_factorization_matvec(op, p, r, params, seed)?;
            let (u, v) = rayon::join(
                || recursive_factor_u(&mid.u_h, p, r),
                || recursive_factor_v(&mid.v_h, p, r),
            );
            (mid.middle, u?, v?)
        }
        (Mode::Streaming, MatrixOracle::Entry(e)) => streaming(e, p, r, params, seed)?,
        (mode, _) => {
            return Err(Error::invalid(format!(
                "{mode:?} mode does not accept this oracle kind"
            )))
        }
    };
    let f = ButterflyFactors {
        partition: *p,
        rank: r,
        u_outer,
        g_chain,
        middle,
        h_chain,
        v_outer,
    };
    f.validate()?;
    Ok(f)
}

type Chain = (BlockDiagonalFactor, Vec<TransferFactor>);

fn streaming(
    e: &dyn EntryOracle,
    p: &DyadicPartition,
    r: usize,
    params: &OversamplingParams,
    seed: u64,
) -> Result<(MiddleFactor, Chain, Chain)> {
    check_square(e.nrows(), e.ncols(), p.n())?;
    check_rank(p, r)?;
    params.validate()?;
    let m = p.middle_nodes();
    let row_of = |i: usize, by_row: bool| -> Result<Vec<BlockApprox>> {
        (0..m)
            .into_par_iter()
            .map(|k| {
                let (a, b) = if by_row { (i, k) } else { (k, i) };
                sampled_block(e, p, r, params, seed, a, b)
            })
            .collect()
    };
    let mut weights = vec![Vec::new(); m * m];
    let mut u_trees = Vec::with_capacity(m);
    for i in 0..m {
        let blocks = row_of(i, true)?;
        for (j, b) in blocks.iter().enumerate() {
            weights[i * m + j] = b.s.clone();
        }
        let w = hstack(blocks.iter().map(|b| &b.u), r);
        u_trees.push(factor_subtree(p, r, i, w)?);
    }
    let mut v_trees = Vec::with_capacity(m);
    for j in 0..m {
        let blocks = row_of(j, false)?;
        let w = hstack(blocks.iter().map(|b| &b.v), r);
        v_trees.push(factor_subtree(p, r, j, w)?);
    }
    let (u_outer, mut g_chain) = assemble_chain(p, r, u_trees);
    g_chain.reverse();
    let v = assemble_chain(p, r, v_trees);
    let middle = MiddleFactor {
        m,
        rank: r,
        weights,
    };
    Ok((middle, (u_outer, g_chain), v))
}

fn hstack<'a>(parts: impl ExactSizeIterator<Item = &'a CMat>, r: usize) -> CMat {
    let parts: Vec<&CMat> = parts.collect();
    let mut out = CMat::zeros(parts[0].nrows(), parts.len() * r);
    for (k, part) in parts.iter().enumerate() {
        out.columns_mut(k * r, r).copy_from(*part);
    }
    out
}

impl ButterflyFactors {
    pub fn n(&self) -> usize {
        self.partition.n()
    }

    /// Checks that every factor is well formed and the chain dimensions
    /// compose.
    pub fn validate(&self) -> Result<()> {
        let (n, l, h, r) = (
            self.n(),
            self.partition.levels(),
            self.partition.half(),
            self.rank,
        );
        let dim = r << l;
        let bad = |what: &str| Err(Error::DimensionMismatch(what.to_string()));
        self.u_outer.validate()?;
        self.v_outer.validate()?;
        self.middle.validate()?;
        if self.u_outer.shape() != (n, dim) || self.v_outer.shape() != (n, dim) {
            return bad("outer factors must be N x 2^L r");
        }
        if self.middle.m != self.partition.middle_nodes() || self.middle.rank != r {
            return bad("middle factor does not match the partition");
        }
        if self.g_chain.len() != l - h || self.h_chain.len() != l - h {
            return bad("transfer chains must have L/2 factors");
        }
        for (k, g) in self.g_chain.iter().enumerate() {
            g.validate()?;
            if g.level != l - 1 - k || g.shape() != (dim, dim) || g.rank != r {
                return bad("G chain is out of order or mis-sized");
            }
        }
        for (k, hf) in self.h_chain.iter().enumerate() {
            hf.validate()?;
            if hf.level != h + k || hf.shape() != (dim, dim) || hf.rank != r {
                return bad("H chain is out of order or mis-sized");
            }
        }
        Ok(())
    }

    /// `K̂ x` for a block of column vectors.
    pub fn apply_block(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.n() {
            return Err(Error::invalid(format!(
                "input has {} rows, operator is {}x{}",
                x.nrows(),
                self.n(),
                self.n()
            )));
        }
        let mut t = self.v_outer.apply_adjoint(x)?;
        for hf in self.h_chain.iter().rev() {
            t = hf.apply_adjoint(&t)?;
        }
        t = self.middle.apply(&t)?;
        for g in self.g_chain.iter().rev() {
            t = g.apply(&t)?;
        }
        self.u_outer.apply(&t)
    }

    /// `K̂^* y` for a block of column vectors.
    pub fn apply_adjoint_block(&self, y: &CMat) -> Result<CMat> {
        if y.nrows() != self.n() {
            return Err(Error::invalid(format!(
                "input has {} rows, operator is {}x{}",
                y.nrows(),
                self.n(),
                self.n()
            )));
        }
        let mut t = self.u_outer.apply_adjoint(y)?;
        for g in &self.g_chain {
            t = g.apply_adjoint(&t)?;
        }
        t = self.middle.apply_adjoint(&t)?;
        for hf in &self.h_chain {
            t = hf.apply(&t)?;
        }
        self.v_outer.apply(&t)
    }

    pub fn apply(&self, g: &[C64]) -> Result<Vec<C64>> {
        let x = CMat::from_column_slice(g.len(), 1, g);
        Ok(self.apply_block(&x)?.as_slice().to_vec())
    }

    pub fn apply_adjoint(&self, g: &[C64]) -> Result<Vec<C64>> {
        let y = CMat::from_column_slice(g.len(), 1, g);
        Ok(self.apply_adjoint_block(&y)?.as_slice().to_vec())
    }

    pub fn nnz_report(&self) -> NnzReport {
        let g_chain: Vec<usize> = self.g_chain.iter().map(|g| g.nnz()).collect();
        let h_chain: Vec<usize> = self.h_chain.iter().map(|h| h.nnz()).collect();
        let u_outer = self.u_outer.nnz();
        let v_outer = self.v_outer.nnz();
        let middle = self.middle.nnz();
        let total = u_outer
            + v_outer
            + middle
            + g_chain.iter().sum::<usize>()
            + h_chain.iter().sum::<usize>();
        NnzReport {
            u_outer,
            g_chain,
            middle,
            h_chain,
            v_outer,
            total,
        }
    }

    /// Dense `N × N` matrix, obtained by applying the chain to the identity.
    pub fn to_dense(&self) -> CMat {
        let n = self.n();
        self.apply_block(&CMat::identity(n, n))
            .expect("identity has N rows")
    }
}

/// Random factorization with Gaussian blocks and positive middle weights.
/// Every complementary block of its product has rank at most `r`.
pub fn random_butterfly(p: &DyadicPartition, r: usize, seed: u64) -> ButterflyFactors {
    use rand::Rng;

    let (n, l, h) = (p.n(), p.levels(), p.half());
    let m = p.middle_nodes();
    let dim = r << l;
    let leaf = p.leaf_size();
    let mut rng = substream(seed, 0, 0, 0);
    let outer = |rng: &mut rand_chacha::ChaCha8Rng| {
        BlockDiagonalFactor::from_diagonal(
            (0..1usize << l)
                .map(|_| crate::linalg::complex_gaussian(rng, leaf, r))
                .collect(),
        )
    };
    let u_outer = outer(&mut rng);
    let v_outer = outer(&mut rng);
    let transfer = |level: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        let nc = 1usize << (l - level);
        let mut blocks = Vec::with_capacity(1 << l);
        for i in 0..1usize << level {
            for half in 0..2 {
                for j in 0..nc / 2 {
                    blocks.push(DenseBlock {
                        row_offset: (i * nc + half * nc / 2 + j) * r,
                        col_offset: (i * nc + 2 * j) * r,
                        data: crate::linalg::complex_gaussian(rng, r, 2 * r),
                    });
                }
            }
        }
        TransferFactor {
            level,
            rank: r,
            nrows: dim,
            ncols: dim,
            blocks,
        }
    };
    let g_chain = (h..l).rev().map(|lv| transfer(lv, &mut rng)).collect();
    let h_chain = (h..l).map(|lv| transfer(lv, &mut rng)).collect();
    let weights = (0..m * m)
        .map(|_| (0..r).map(|_| rng.random_range(0.5..2.0)).collect())
        .collect();
    debug_assert_eq!(n, leaf << l);
    ButterflyFactors {
        partition: *p,
        rank: r,
        u_outer,
        g_chain,
        middle: MiddleFactor {
            m,
            rank: r,
            weights,
        },
        h_chain,
        v_outer,
    }
}

impl LinearOperator for ButterflyFactors {
    fn nrows(&self) -> usize {
        self.n()
    }

    fn ncols(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &CMat) -> std::result::Result<CMat, OracleError> {
        self.apply_block(x).map_err(|e| OracleError(e.to_string()))
    }

    fn apply_adjoint(&self, y: &CMat) -> std::result::Result<CMat, OracleError> {
        self.apply_adjoint_block(y)
            .map_err(|e| OracleError(e.to_string()))
    }
}

#[cfg(test)]
mod tests;
