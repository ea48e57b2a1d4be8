use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, OracleError, Result};
use crate::linalg::{CMat, C64};
use crate::oracle::{EntryOracle, LinearOperator};

/// Which of `F`, `F^{-1} = F^*/n` or `F^*` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
    Adjoint,
}

/// Centered unnormalized transform `F[j, k] = exp(-2πi ξ_j x_k)` with
/// `ξ_j = j - n/2` and `x_k = k/n`, applied through an FFT.
///
/// Since `exp(-2πi (j - n/2) k / n) = (-1)^k exp(-2πi jk/n)`, `F` is a plain
/// DFT of the input with alternating signs.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!("DFT size must be even, got {n}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Dft {
            n,
            forward: planner.plan_fft_forward(n),
            backward: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Applies the transform in place to one vector.
    pub fn apply_in_place(&self, g: &mut [C64], direction: Direction) -> Result<()> {
        if g.len() != self.n {
            return Err(Error::invalid(format!(
                "vector has length {}, transform has size {}",
                g.len(),
                self.n
            )));
        }
        match direction {
            Direction::Forward => {
                alternate(g);
                self.forward.process(g);
            }
            Direction::Inverse | Direction::Adjoint => {
                self.backward.process(g);
                alternate(g);
                if direction == Direction::Inverse {
                    let scale = 1.0 / self.n as f64;
                    g.iter_mut().for_each(|v| *v *= scale);
                }
            }
        }
        Ok(())
    }

    pub fn apply_columns(&self, x: &CMat, direction: Direction) -> Result<CMat> {
        let mut out = x.clone();
        for mut col in out.column_iter_mut() {
            let slice = col.as_mut_slice();
            self.apply_in_place(slice, direction)?;
        }
        Ok(out)
    }
}

fn alternate(g: &mut [C64]) {
    g.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
}

/// Applies `F`, `F^{-1}` or `F^*` of size `n` to `g`.
pub fn dft_apply(n: usize, g: &[C64], direction: Direction) -> Result<Vec<C64>> {
    let mut out = g.to_vec();
    Dft::new(n)?.apply_in_place(&mut out, direction)?;
    Ok(out)
}

impl LinearOperator for Dft {
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &CMat) -> std::result::Result<CMat, OracleError> {
        self.apply_columns(x, Direction::Forward)
            .map_err(|e| OracleError(e.to_string()))
    }

    fn apply_adjoint(&self, y: &CMat) -> std::result::Result<CMat, OracleError> {
        self.apply_columns(y, Direction::Adjoint)
            .map_err(|e| OracleError(e.to_string()))
    }
}

/// Entries of the same `F`, for dense comparisons.
#[derive(Debug, Clone, Copy)]
pub struct DftEntries {
    pub n: usize,
}

impl EntryOracle for DftEntries {
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn entry(&self, j: usize, k: usize) -> std::result::Result<C64, OracleError> {
        let n = self.n as i64;
        let turns = ((j as i64 - n / 2) * k as i64).rem_euclid(n) as f64 / n as f64;
        let (s, c) = (-2.0 * PI * turns).sin_cos();
        Ok(C64::new(c, s))
    }
}
