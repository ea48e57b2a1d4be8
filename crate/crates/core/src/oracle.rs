//! Access models for the matrix being factorized.
//!
//! An [`EntryOracle`] evaluates individual entries `K[i, j]`; a
//! [`LinearOperator`] applies `K` and `K^*` to blocks of column vectors.
//! Both must be callable concurrently from several threads.

use std::ops::Range;

use crate::error::{OracleError, Result};
use crate::linalg::{CMat, C64};

pub trait EntryOracle: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    fn entry(&self, i: usize, j: usize) -> std::result::Result<C64, OracleError>;

    /// Dense submatrix `K[rows, cols]`. Implementations with cheaper
    /// row- or column-wise evaluation should override this.
    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> std::result::Result<CMat, OracleError> {
        let mut out = CMat::zeros(rows.len(), cols.len());
        for (b, &j) in cols.iter().enumerate() {
            for (a, &i) in rows.iter().enumerate() {
                out[(a, b)] = self.entry(i, j)?;
            }
        }
        Ok(out)
    }
}

pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `K * x` for a block of column vectors `x` (ncols × k).
    fn apply(&self, x: &CMat) -> std::result::Result<CMat, OracleError>;

    /// `K^* * y` for a block of column vectors `y` (nrows × k).
    fn apply_adjoint(&self, y: &CMat) -> std::result::Result<CMat, OracleError>;
}

/// Either access model, as accepted by [`crate::butterfly::factorize`].
#[derive(Clone, Copy)]
pub enum MatrixOracle<'a> {
    Entry(&'a dyn EntryOracle),
    Operator(&'a dyn LinearOperator),
}

/// View of a rectangular window of another entry oracle.
pub struct SubBlock<'a> {
    parent: &'a dyn EntryOracle,
    rows: Range<usize>,
    cols: Range<usize>,
}

impl<'a> SubBlock<'a> {
    pub fn new(parent: &'a dyn EntryOracle, rows: Range<usize>, cols: Range<usize>) -> Self {
        debug_assert!(rows.end <= parent.nrows() && cols.end <= parent.ncols());
        SubBlock { parent, rows, cols }
    }
}

impl EntryOracle for SubBlock<'_> {
    fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn entry(&self, i: usize, j: usize) -> std::result::Result<C64, OracleError> {
        self.parent.entry(self.rows.start + i, self.cols.start + j)
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> std::result::Result<CMat, OracleError> {
        let rows: Vec<usize> = rows.iter().map(|&i| i + self.rows.start).collect();
        let cols: Vec<usize> = cols.iter().map(|&j| j + self.cols.start).collect();
        self.parent.submatrix(&rows, &cols)
    }
}

/// Dense matrix exposed through both access models.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: CMat,
}

impl DenseOperator {
    pub fn new(matrix: CMat) -> Self {
        DenseOperator { matrix }
    }
}

impl EntryOracle for DenseOperator {
    fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    fn entry(&self, i: usize, j: usize) -> std::result::Result<C64, OracleError> {
        Ok(self.matrix[(i, j)])
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> std::result::Result<CMat, OracleError> {
        Ok(CMat::from_fn(rows.len(), cols.len(), |a, b| {
            self.matrix[(rows[a], cols[b])]
        }))
    }
}

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    fn apply(&self, x: &CMat) -> std::result::Result<CMat, OracleError> {
        if x.nrows() != self.matrix.ncols() {
            return Err(OracleError(format!(
                "input has {} rows, operator has {} columns",
                x.nrows(),
                self.matrix.ncols()
            )));
        }
        Ok(&self.matrix * x)
    }

    fn apply_adjoint(&self, y: &CMat) -> std::result::Result<CMat, OracleError> {
        if y.nrows() != self.matrix.nrows() {
            return Err(OracleError(format!(
                "input has {} rows, operator has {} rows",
                y.nrows(),
                self.matrix.nrows()
            )));
        }
        Ok(self.matrix.ad_mul(y))
    }
}

/// Applies an entry oracle by direct summation, `O(nrows * ncols)` per vector.
pub struct DirectOperator<'a> {
    pub entries: &'a dyn EntryOracle,
}

impl LinearOperator for DirectOperator<'_> {
    fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    fn apply(&self, x: &CMat) -> std::result::Result<CMat, OracleError> {
        let cols: Vec<usize> = (0..self.entries.ncols()).collect();
        let mut out = CMat::zeros(self.entries.nrows(), x.ncols());
        for i in 0..self.entries.nrows() {
            let row = self.entries.submatrix(&[i], &cols)?;
            let prod = row * x;
            out.row_mut(i).copy_from(&prod.row(0));
        }
        Ok(out)
    }

    fn apply_adjoint(&self, y: &CMat) -> std::result::Result<CMat, OracleError> {
        let rows: Vec<usize> = (0..self.entries.nrows()).collect();
        let mut out = CMat::zeros(self.entries.ncols(), y.ncols());
        for j in 0..self.entries.ncols() {
            let col = self.entries.submatrix(&rows, &[j])?;
            let prod = col.ad_mul(y);
            out.row_mut(j).copy_from(&prod.row(0));
        }
        Ok(out)
    }
}

pub(crate) fn check_square(n_rows: usize, n_cols: usize, n: usize) -> Result<()> {
    if n_rows != n || n_cols != n {
        return Err(crate::error::Error::DimensionMismatch(format!(
            "oracle is {n_rows}x{n_cols}, partition expects {n}x{n}"
        )));
    }
    Ok(())
}
