//! Concrete operators: the FIO and Hankel kernels, the centered DFT, and the
//! composition `K F K`.

mod bessel;
mod composed;
mod dft;
mod fio;
mod hankel;

pub use bessel::bessel_jy;
pub use composed::{composed_matvec, ComposedOperator};
pub use dft::{dft_apply, Dft, DftEntries, Direction};
pub use fio::{fio_entry, FioKernel};
pub use hankel::{hankel1, hankel_entry, HankelKernel};

use crate::error::{Error, OracleError, Result};
use crate::linalg::{CMat, C64};
use crate::oracle::EntryOracle;

/// Largest matrix [`dense_matrix`] builds unless told otherwise.
pub const DENSE_CAP: usize = 4096;

/// Every entry of an `n × n` oracle.
pub fn dense_matrix(entry: &dyn EntryOracle, n: usize) -> Result<CMat> {
    dense_matrix_capped(entry, n, DENSE_CAP)
}

pub fn dense_matrix_capped(entry: &dyn EntryOracle, n: usize, cap: usize) -> Result<CMat> {
    if n > cap {
        return Err(Error::invalid(format!(
            "dense enumeration of n = {n} exceeds the cap {cap}"
        )));
    }
    if entry.nrows() != n || entry.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "oracle is {}x{}, requested {n}x{n}",
            entry.nrows(),
            entry.ncols()
        )));
    }
    let all: Vec<usize> = (0..n).collect();
    Ok(entry.submatrix(&all, &all)?)
}

/// The `n × n` identity as an entry oracle.
#[derive(Debug, Clone, Copy)]
pub struct Identity {
    pub n: usize,
}

impl EntryOracle for Identity {
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn entry(&self, i: usize, j: usize) -> std::result::Result<C64, OracleError> {
        Ok(if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        })
    }
}
