use crate::butterfly::ButterflyFactors;
use crate::error::{Error, OracleError, Result};
use crate::kernels::dft::{Dft, Direction};
use crate::linalg::{CMat, C64};
use crate::oracle::LinearOperator;

/// `K̃ = K F K`, applied with a butterfly factorization of `K` and the FFT.
#[derive(Debug, Clone)]
pub struct ComposedOperator {
    pub k_factors: ButterflyFactors,
    pub dft: Dft,
}

impl ComposedOperator {
    pub fn new(k_factors: ButterflyFactors) -> Result<Self> {
        let dft = Dft::new(k_factors.n())?;
        Ok(ComposedOperator { k_factors, dft })
    }

    pub fn n(&self) -> usize {
        self.dft.n()
    }

    pub fn apply_block(&self, x: &CMat) -> Result<CMat> {
        let t = self.k_factors.apply_block(x)?;
        let t = self.dft.apply_columns(&t, Direction::Forward)?;
        self.k_factors.apply_block(&t)
    }

    pub fn apply_adjoint_block(&self, y: &CMat) -> Result<CMat> {
        let t = self.k_factors.apply_adjoint_block(y)?;
        let t = self.dft.apply_columns(&t, Direction::Adjoint)?;
        self.k_factors.apply_adjoint_block(&t)
    }
}

/// `K(F(K g))`, or `K^*(F^*(K^* g))` when `adjoint` is set.
pub fn composed_matvec(c: &ComposedOperator, g: &[C64], adjoint: bool) -> Result<Vec<C64>> {
    if g.len() != c.n() {
        return Err(Error::invalid(format!(
            "vector has length {}, operator has size {}",
            g.len(),
            c.n()
        )));
    }
    let x = CMat::from_column_slice(g.len(), 1, g);
    let y = if adjoint {
        c.apply_adjoint_block(&x)?
    } else {
        c.apply_block(&x)?
    };
    Ok(y.as_slice().to_vec())
}

impl LinearOperator for ComposedOperator {
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
