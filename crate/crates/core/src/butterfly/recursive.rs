use rayon::prelude::*;

use super::factors::{BlockDiagonalFactor, DenseBlock, TransferFactor};
use crate::error::{Error, Result};
use crate::linalg::{pad_cols, pad_rows, truncated_svd_clamped, CMat, PINV_FLOOR};
use crate::partition::DyadicPartition;

/// Leaves and transfer blocks produced by one middle-level node.
pub(crate) struct Subtree {
    /// `(leaf node, n₀ × r block)` in node order.
    pub leaves: Vec<(usize, CMat)>,
    /// Transfer blocks per level, index 0 being level `h`.
    pub transfer: Vec<Vec<DenseBlock>>,
}

/// One split: rank-`r` SVD of the `R × 2r` block in the scaled-left form,
/// both factors zero-padded to width `r`. Directions whose singular value
/// falls below the pseudo-inverse floor are dropped, so a zero block yields
/// zero factors.
fn split(z: CMat, r: usize) -> Result<(CMat, CMat)> {
    let mut a = truncated_svd_clamped(&z, r)?;
    let floor = PINV_FLOOR * a.sigma0.first().copied().unwrap_or(0.0);
    let keep = a.sigma0.iter().take_while(|&&s| s > floor).count();
    a.sigma0.truncate(keep);
    a.u0 = a.u0.columns(0, keep).into_owned();
    a.v0 = a.v0.columns(0, keep).into_owned();
    let f = a.to_form_scaled_u();
    Ok((pad_cols(&f.u, r), pad_rows(&f.vstar, r)))
}

/// Recursively factors the diagonal block `w` (node `i0` at level `h`,
/// `N/2^h × 2^h·r`) down to the leaves.
pub(crate) fn factor_subtree(p: &DyadicPartition, r: usize, i0: usize, w: CMat) -> Result<Subtree> {
    let (h, l) = (p.half(), p.levels());
    let expected = (p.n() >> h, r << (l - h));
    if w.shape() != expected {
        return Err(Error::DimensionMismatch(format!(
            "level-{h} diagonal block is {:?}, expected {expected:?}",
            w.shape()
        )));
    }
    let mut nodes = vec![(i0, w)];
    let mut transfer = Vec::with_capacity(l - h);
    for _level in h..l {
        let step = nodes
            .into_par_iter()
            .map(|(i, w)| split_node(i, w, r))
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::with_capacity(2 * step.len());
        let mut blocks = Vec::new();
        for (top, bottom, b) in step {
            next.push(top);
            next.push(bottom);
            blocks.extend(b);
        }
        transfer.push(blocks);
        nodes = next;
    }
    Ok(Subtree {
        leaves: nodes,
        transfer,
    })
}

type Child = (usize, CMat);

/// Splits node `i` with block matrix `w` (`R × nc·r`) into its two children.
fn split_node(i: usize, w: CMat, r: usize) -> Result<(Child, Child, Vec<DenseBlock>)> {
    let rows = w.nrows();
    let half = rows / 2;
    let nc = w.ncols() / r;
    let mut top = CMat::zeros(half, nc / 2 * r);
    let mut bottom = CMat::zeros(rows - half, nc / 2 * r);
    let mut blocks = Vec::with_capacity(nc);
    for j in 0..nc / 2 {
        let col_offset = (i * nc + 2 * j) * r;
        let (u, g) = split(w.view((0, 2 * j * r), (half, 2 * r)).into_owned(), r)?;
        top.columns_mut(j * r, r).copy_from(&u);
        blocks.push(DenseBlock {
            row_offset: (i * nc + j) * r,
            col_offset,
            data: g,
        });
        let (u, g) = split(
            w.view((half, 2 * j * r), (rows - half, 2 * r)).into_owned(),
            r,
        )?;
        bottom.columns_mut(j * r, r).copy_from(&u);
        blocks.push(DenseBlock {
            row_offset: (i * nc + nc / 2 + j) * r,
            col_offset,
            data: g,
        });
    }
    Ok(((2 * i, top), (2 * i + 1, bottom), blocks))
}

/// Merges per-node subtrees into the outer factor and the transfer chain
/// ordered by ascending level.
pub(crate) fn assemble_chain(
    p: &DyadicPartition,
    r: usize,
    subtrees: Vec<Subtree>,
) -> (BlockDiagonalFactor, Vec<TransferFactor>) {
    let (h, l) = (p.half(), p.levels());
    let dim = r << l;
    let mut leaves = Vec::with_capacity(1 << l);
    let mut levels: Vec<Vec<DenseBlock>> = vec![Vec::new(); l - h];
    for s in subtrees {
        leaves.extend(s.leaves);
        for (acc, blocks) in levels.iter_mut().zip(s.transfer) {
            acc.extend(blocks);
        }
    }
    leaves.sort_by_key(|(i, _)| *i);
    let outer = BlockDiagonalFactor::from_diagonal(leaves.into_iter().map(|(_, b)| b).collect());
    let chain = levels
        .into_iter()
        .enumerate()
        .map(|(k, mut blocks)| {
            blocks.sort_by_key(|b| b.row_offset);
            TransferFactor {
                level: h + k,
                rank: r,
                nrows: dim,
                ncols: dim,
                blocks,
            }
        })
        .collect();
    (outer, chain)
}

fn factor_diagonal(
    diag: &BlockDiagonalFactor,
    p: &DyadicPartition,
    r: usize,
) -> Result<(BlockDiagonalFactor, Vec<TransferFactor>)> {
    diag.validate()?;
    if diag.blocks.len() != p.middle_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} diagonal blocks, found {}",
            p.middle_nodes(),
            diag.blocks.len()
        )));
    }
    let subtrees = diag
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| factor_subtree(p, r, i, b.data.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_chain(p, r, subtrees))
}

/// `U^h ≈ U^L G^{L-1} ⋯ G^h`. The chain is returned as `[G^{L-1}, …, G^h]`.
pub fn recursive_factor_u(
    u_h: &BlockDiagonalFactor,
    p: &DyadicPartition,
    r: usize,
) -> Result<(BlockDiagonalFactor, Vec<TransferFactor>)> {
    let (outer, mut chain) = factor_diagonal(u_h, p, r)?;
    chain.reverse();
    Ok((outer, chain))
}

/// `V^h ≈ V^L H^{L-1} ⋯ H^h`. The chain is returned as `[H^h, …, H^{L-1}]`.
pub fn recursive_factor_v(
    v_h: &BlockDiagonalFactor,
    p: &DyadicPartition,
    r: usize,
) -> Result<(BlockDiagonalFactor, Vec<TransferFactor>)> {
    factor_diagonal(v_h, p, r)
}
