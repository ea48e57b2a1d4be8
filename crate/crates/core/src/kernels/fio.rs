use std::f64::consts::PI;

use crate::error::OracleError;
use crate::linalg::{CMat, C64};
use crate::oracle::EntryOracle;

/// One-dimensional Fourier integral operator kernel
/// `K[i, j] = exp(2πi (x_i ξ_j + c(x_i) |ξ_j|))` with `x_i = i/N`,
/// `ξ_j = j - N/2` and `c(x) = (2 + sin 2πx) / 8`.
#[derive(Debug, Clone)]
pub struct FioKernel {
    n: usize,
    speed: Vec<f64>,
}

impl FioKernel {
    pub fn new(n: usize) -> Self {
        let speed = (0..n)
            .map(|i| (2.0 + (2.0 * PI * i as f64 / n as f64).sin()) / 8.0)
            .collect();
        FioKernel { n, speed }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn value(&self, i: usize, j: usize) -> C64 {
        unimodular(self.n, self.speed[i], i, j)
    }
}

/// The phase is taken in turns and reduced to `[0, 1)`; the `x·ξ` term is
/// reduced with integer arithmetic before any rounding.
#[inline]
fn unimodular(n: usize, speed: f64, i: usize, j: usize) -> C64 {
    let n_i = n as i64;
    let xi = j as i64 - n_i / 2;
    let linear = (i as i64 * xi).rem_euclid(n_i) as f64 / n as f64;
    let radial = (speed * xi.unsigned_abs() as f64).fract();
    let (s, c) = (2.0 * PI * (linear + radial).fract()).sin_cos();
    C64::new(c, s)
}

/// Entry of the FIO kernel on an `n`-point grid.
pub fn fio_entry(n: usize, i: usize, j: usize) -> C64 {
    let speed = (2.0 + (2.0 * PI * i as f64 / n as f64).sin()) / 8.0;
    unimodular(n, speed, i, j)
}

impl EntryOracle for FioKernel {
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn entry(&self, i: usize, j: usize) -> Result<C64, OracleError> {
        if i >= self.n || j >= self.n {
            return Err(OracleError(format!("index ({i}, {j}) outside {}", self.n)));
        }
        Ok(self.value(i, j))
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<CMat, OracleError> {
        if rows.iter().chain(cols).any(|&k| k >= self.n) {
            return Err(OracleError(format!("index outside {}", self.n)));
        }
        Ok(CMat::from_fn(rows.len(), cols.len(), |a, b| {
            self.value(rows[a], cols[b])
        }))
    }
}
