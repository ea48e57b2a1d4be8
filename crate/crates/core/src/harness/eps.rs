use std::time::Instant;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, CMat, C64};
use crate::oracle::{EntryOracle, LinearOperator};

/// Ground truth evaluated on a subset of output indices.
pub trait ReferenceOperator: Sync {
    fn n(&self) -> usize;

    /// `(K g)[rows]`.
    fn apply_rows(&self, g: &[C64], rows: &[usize]) -> Result<Vec<C64>>;

    /// Seconds one full product would take, given the time spent on
    /// `sampled` output rows.
    fn extrapolate(&self, seconds: f64, sampled: usize) -> f64;
}

/// Direct summation `Σ_j K[i, j] g[j]`, row by row.
pub struct DirectSum<'a> {
    pub entries: &'a dyn EntryOracle,
}

impl ReferenceOperator for DirectSum<'_> {
    fn n(&self) -> usize {
        self.entries.nrows()
    }

    fn apply_rows(&self, g: &[C64], rows: &[usize]) -> Result<Vec<C64>> {
        let cols: Vec<usize> = (0..self.entries.ncols()).collect();
        let x = CMat::from_column_slice(g.len(), 1, g);
        rows.iter()
            .map(|&i| Ok((self.entries.submatrix(&[i], &cols)? * &x)[(0, 0)]))
            .collect()
    }

    fn extrapolate(&self, seconds: f64, sampled: usize) -> f64 {
        seconds * self.n() as f64 / sampled.max(1) as f64
    }
}

/// A full operator, of which only the sampled rows are compared.
pub struct FullOperator<'a> {
    pub op: &'a dyn LinearOperator,
}

impl ReferenceOperator for FullOperator<'_> {
    fn n(&self) -> usize {
        self.op.nrows()
    }

    fn apply_rows(&self, g: &[C64], rows: &[usize]) -> Result<Vec<C64>> {
        let y = self.op.apply(&CMat::from_column_slice(g.len(), 1, g))?;
        Ok(rows.iter().map(|&i| y[(i, 0)]).collect())
    }

    fn extrapolate(&self, seconds: f64, _sampled: usize) -> f64 {
        seconds
    }
}

/// Result of one `ε^a` estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsEstimate {
    /// Relative error, or the absolute error when `absolute` is set.
    pub value: f64,
    /// The reference was zero on every sampled index.
    pub absolute: bool,
    /// Sorted sample set `S`.
    pub rows: Vec<usize>,
    /// Reference cost for one full product, in seconds.
    pub reference_seconds: f64,
}

/// `ε^a = sqrt(Σ_{i∈S} |u^a_i − u^d_i|² / Σ_{i∈S} |u^d_i|²)` for a uniformly
/// drawn `S` of `sample_count` indices (clamped to `N`) and one shared
/// complex Gaussian input.
pub fn estimate_eps_a<R: Rng + ?Sized>(
    approx: &dyn LinearOperator,
    reference: &dyn ReferenceOperator,
    sample_count: usize,
    rng: &mut R,
) -> Result<EpsEstimate> {
    let n = reference.n();
    let mut rows = index::sample(rng, n, sample_count.min(n)).into_vec();
    rows.sort_unstable();
    let g = complex_gaussian(rng, n, 1);
    eps_a_with_input(approx, reference, rows, g.as_slice())
}

/// `ε^a` for a given sample set and input vector.
pub fn eps_a_with_input(
    approx: &dyn LinearOperator,
    reference: &dyn ReferenceOperator,
    rows: Vec<usize>,
    g: &[C64],
) -> Result<EpsEstimate> {
    let n = reference.n();
    if approx.nrows() != n || approx.ncols() != n || g.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "approximation is {}x{}, reference is {n}x{n}, input has length {}",
            approx.nrows(),
            approx.ncols(),
            g.len()
        )));
    }
    if let Some(&bad) = rows.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!("sample index {bad} out of range")));
    }
    let ua = approx.apply(&CMat::from_column_slice(n, 1, g))?;
    let start = Instant::now();
    let ud = reference.apply_rows(g, &rows)?;
    let reference_seconds = reference.extrapolate(start.elapsed().as_secs_f64(), rows.len());
    let (mut num, mut den) = (0.0, 0.0);
    for (&i, d) in rows.iter().zip(&ud) {
        num += (ua[(i, 0)] - d).norm_sqr();
        den += d.norm_sqr();
    }
    let absolute = den == 0.0;
    let value = if absolute {
        num.sqrt()
    } else {
        (num / den).sqrt()
    };
    Ok(EpsEstimate {
        value,
        absolute,
        rows,
        reference_seconds,
    })
}
