use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Dense block placed at `(row_offset, col_offset)` of a sparse factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    pub row_offset: usize,
    pub col_offset: usize,
    pub data: CMat,
}

impl DenseBlock {
    pub fn nnz(&self) -> usize {
        self.data.len()
    }
}

/// Block-diagonal factor (`U^ℓ`, `V^ℓ`). Consecutive blocks tile both the
/// row and the column range.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonalFactor {
    pub nrows: usize,
    pub ncols: usize,
    pub blocks: Vec<DenseBlock>,
}

/// Transfer factor `G^ℓ` or `H^ℓ`: one `r × 2r` block per output row group,
/// sorted by row offset.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFactor {
    pub level: usize,
    pub rank: usize,
    pub nrows: usize,
    pub ncols: usize,
    pub blocks: Vec<DenseBlock>,
}

/// Operations shared by every factor stored as a list of dense blocks.
pub trait BlockSparse: Sync {
    fn shape(&self) -> (usize, usize);
    fn blocks(&self) -> &[DenseBlock];

    fn nnz(&self) -> usize {
        self.blocks().iter().map(DenseBlock::nnz).sum()
    }

    fn to_dense(&self) -> CMat {
        let (m, n) = self.shape();
        let mut out = CMat::zeros(m, n);
        for b in self.blocks() {
            let (r, c) = b.data.shape();
            let mut view = out.view_mut((b.row_offset, b.col_offset), (r, c));
            view += &b.data;
        }
        out
    }

    /// Every block lies inside the factor's shape.
    fn check_bounds(&self) -> Result<()> {
        let (m, n) = self.shape();
        for b in self.blocks() {
            let (r, c) = b.data.shape();
            if b.row_offset + r > m || b.col_offset + c > n {
                return Err(Error::DimensionMismatch(format!(
                    "block {r}x{c} at ({}, {}) exceeds a {m}x{n} factor",
                    b.row_offset, b.col_offset
                )));
            }
        }
        Ok(())
    }

    fn apply(&self, x: &CMat) -> Result<CMat> {
        let (m, n) = self.shape();
        check_rows(x, n)?;
        Ok(per_column(x, m, |xs, os| {
            for b in self.blocks() {
                block_mul(b, xs, os);
            }
        }))
    }

    fn apply_adjoint(&self, y: &CMat) -> Result<CMat> {
        let (m, n) = self.shape();
        check_rows(y, m)?;
        Ok(per_column(y, n, |ys, os| {
            for b in self.blocks() {
                block_mul_adjoint(b, ys, os);
            }
        }))
    }
}

impl BlockSparse for BlockDiagonalFactor {
    fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    fn blocks(&self) -> &[DenseBlock] {
        &self.blocks
    }
}

impl BlockSparse for TransferFactor {
    fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    fn blocks(&self) -> &[DenseBlock] {
        &self.blocks
    }
}

impl BlockDiagonalFactor {
    /// Stacks `blocks` along the diagonal in order.
    pub fn from_diagonal(blocks: Vec<CMat>) -> Self {
        let mut out = Vec::with_capacity(blocks.len());
        let (mut ro, mut co) = (0, 0);
        for data in blocks {
            let (r, c) = data.shape();
            out.push(DenseBlock {
                row_offset: ro,
                col_offset: co,
                data,
            });
            ro += r;
            co += c;
        }
        BlockDiagonalFactor {
            nrows: ro,
            ncols: co,
            blocks: out,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (mut ro, mut co) = (0, 0);
        for b in &self.blocks {
            if b.row_offset != ro || b.col_offset != co {
                return Err(Error::DimensionMismatch(format!(
                    "diagonal block at ({}, {}) does not continue the tiling at ({ro}, {co})",
                    b.row_offset, b.col_offset
                )));
            }
            ro += b.data.nrows();
            co += b.data.ncols();
        }
        if ro != self.nrows || co != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "diagonal blocks cover {ro}x{co} of a {}x{} factor",
                self.nrows, self.ncols
            )));
        }
        Ok(())
    }
}

impl TransferFactor {
    pub fn validate(&self) -> Result<()> {
        self.check_bounds()?;
        let r = self.rank;
        for w in self.blocks.windows(2) {
            if w[0].row_offset + r > w[1].row_offset {
                return Err(Error::DimensionMismatch(format!(
                    "transfer blocks at rows {} and {} overlap or are unsorted",
                    w[0].row_offset, w[1].row_offset
                )));
            }
        }
        if self.blocks.iter().any(|b| b.data.shape() != (r, 2 * r)) {
            return Err(Error::DimensionMismatch(format!(
                "level-{} transfer block is not {r}x{}",
                self.level,
                2 * r
            )));
        }
        Ok(())
    }
}

/// Block permutation `M^h` with a diagonal weight block `S_{i,j}` mapping
/// column group `j·m+i` to row group `i·m+j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MiddleFactor {
    pub m: usize,
    pub rank: usize,
    /// `weights[i*m + j]` is the diagonal of `S_{i,j}`.
    pub weights: Vec<Vec<f64>>,
}

impl MiddleFactor {
    pub fn dim(&self) -> usize {
        self.m * self.m * self.rank
    }

    pub fn nnz(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.m * self.m
            || self.weights.iter().any(|w| w.len() != self.rank)
        {
            return Err(Error::DimensionMismatch(format!(
                "middle factor needs {} weight vectors of length {}",
                self.m * self.m,
                self.rank
            )));
        }
        if self
            .weights
            .iter()
            .flatten()
            .any(|&w| !(w >= 0.0 && w.is_finite()))
        {
            return Err(Error::Numerical(
                "middle weights must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }

    fn permute(&self, x: &CMat, forward: bool) -> Result<CMat> {
        let (m, r) = (self.m, self.rank);
        check_rows(x, self.dim())?;
        Ok(per_column(x, self.dim(), |xs, os| {
            for i in 0..m {
                for j in 0..m {
                    let w = &self.weights[i * m + j];
                    let (to, from) = if forward {
                        ((i * m + j) * r, (j * m + i) * r)
                    } else {
                        ((j * m + i) * r, (i * m + j) * r)
                    };
                    for t in 0..r {
                        os[to + t] = xs[from + t] * w[t];
                    }
                }
            }
        }))
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        self.permute(x, true)
    }

    pub fn apply_adjoint(&self, y: &CMat) -> Result<CMat> {
        self.permute(y, false)
    }

    pub fn to_dense(&self) -> CMat {
        let (m, r) = (self.m, self.rank);
        let mut out = CMat::zeros(self.dim(), self.dim());
        for i in 0..m {
            for j in 0..m {
                for t in 0..r {
                    out[((i * m + j) * r + t, (j * m + i) * r + t)] =
                        C64::new(self.weights[i * m + j][t], 0.0);
                }
            }
        }
        out
    }
}

fn check_rows(x: &CMat, expected: usize) -> Result<()> {
    if x.nrows() != expected {
        return Err(Error::DimensionMismatch(format!(
            "input has {} rows, factor expects {expected}",
            x.nrows()
        )));
    }
    Ok(())
}

/// Runs `kernel(input_column, output_column)` for every column of `x`,
/// in parallel when there is more than one.
fn per_column<F>(x: &CMat, out_rows: usize, kernel: F) -> CMat
where
    F: Fn(&[C64], &mut [C64]) + Sync,
{
    let in_rows = x.nrows();
    let k = x.ncols();
    let mut out = CMat::zeros(out_rows, k);
    if in_rows == 0 || out_rows == 0 {
        return out;
    }
    let xs = x.as_slice();
    let os = out.as_mut_slice();
    if k == 1 {
        kernel(xs, os);
    } else {
        os.par_chunks_mut(out_rows)
            .zip(xs.par_chunks(in_rows))
            .for_each(|(o, xcol)| kernel(xcol, o));
    }
    out
}

#[inline]
fn block_mul(b: &DenseBlock, xs: &[C64], os: &mut [C64]) {
    let (rows, cols) = b.data.shape();
    let d = b.data.as_slice();
    let out = &mut os[b.row_offset..b.row_offset + rows];
    for c in 0..cols {
        let xv = xs[b.col_offset + c];
        for (o, a) in out.iter_mut().zip(&d[c * rows..(c + 1) * rows]) {
            *o += a * xv;
        }
    }
}

#[inline]
fn block_mul_adjoint(b: &DenseBlock, ys: &[C64], os: &mut [C64]) {
    let (rows, cols) = b.data.shape();
    let d = b.data.as_slice();
    let y = &ys[b.row_offset..b.row_offset + rows];
    for c in 0..cols {
        let mut acc = C64::new(0.0, 0.0);
        for (a, yv) in d[c * rows..(c + 1) * rows].iter().zip(y) {
            acc += a.conj() * yv;
        }
        os[b.col_offset + c] += acc;
    }
}
