use std::f64::consts::PI;
use std::sync::OnceLock;

use super::bessel::bessel_jy;
use crate::error::OracleError;
use crate::linalg::{CMat, C64};
use crate::oracle::EntryOracle;

/// Rows are cached up to this size; larger kernels recompute each row.
const CACHE_LIMIT: usize = 4096;

/// Hankel-sum kernel `K[i, j] = H^{(1)}_j(x_i)` with `x_i = N + (2π/3) i`.
#[derive(Debug)]
pub struct HankelKernel {
    n: usize,
    rows: Vec<OnceLock<Vec<C64>>>,
}

impl HankelKernel {
    pub fn new(n: usize) -> Self {
        let cached = if n <= CACHE_LIMIT { n } else { 0 };
        HankelKernel {
            n,
            rows: (0..cached).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn point(&self, i: usize) -> f64 {
        self.n as f64 + 2.0 * PI / 3.0 * i as f64
    }

    fn compute_row(&self, i: usize) -> Vec<C64> {
        let (j, y) = bessel_jy(self.point(i), self.n);
        j.into_iter().zip(y).map(|(a, b)| C64::new(a, b)).collect()
    }

    fn with_row<T>(&self, i: usize, f: impl FnOnce(&[C64]) -> T) -> T {
        match self.rows.get(i) {
            Some(cell) => f(cell.get_or_init(|| self.compute_row(i))),
            None => f(&self.compute_row(i)),
        }
    }
}

/// `H^{(1)}_j(x_i)` on an `n`-point grid.
pub fn hankel_entry(n: usize, i: usize, j: usize) -> C64 {
    let x = n as f64 + 2.0 * PI / 3.0 * i as f64;
    let (jv, yv) = bessel_jy(x, j + 1);
    C64::new(jv[j], yv[j])
}

/// `H^{(1)}_m(x) = J_m(x) + i Y_m(x)`.
pub fn hankel1(m: usize, x: f64) -> C64 {
    let (jv, yv) = bessel_jy(x, m + 1);
    C64::new(jv[m], yv[m])
}

impl EntryOracle for HankelKernel {
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
        Ok(self.with_row(i, |row| row[j]))
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<CMat, OracleError> {
        if rows.iter().chain(cols).any(|&k| k >= self.n) {
            return Err(OracleError(format!("index outside {}", self.n)));
        }
        let mut out = CMat::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            self.with_row(i, |row| {
                for (b, &j) in cols.iter().enumerate() {
                    out[(a, b)] = row[j];
                }
            });
        }
        Ok(out)
    }
}
