use super::{floored_inverse, CMat};

/// Rank-r approximate SVD `Z ≈ U₀ Σ₀ V₀^*`.
///
/// `u0` and `v0` have orthonormal columns and `sigma0` is non-increasing.
/// The stored rank may be below the requested one when the matrix has fewer
/// rows or columns; consumers that need a fixed width zero-pad.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankApprox {
    pub u0: CMat,
    pub sigma0: Vec<f64>,
    pub v0: CMat,
}

/// `Z ≈ U S V^*` with `U = U₀Σ₀`, `S = Σ₀⁻¹` (floored), `V^* = Σ₀V₀^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorFormA {
    pub u: CMat,
    /// Diagonal of `S`.
    pub s: Vec<f64>,
    pub vstar: CMat,
}

/// Two-factor regrouping `Z ≈ U V^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFactorForm {
    pub u: CMat,
    pub vstar: CMat,
}

fn scale_columns(a: &CMat, w: &[f64]) -> CMat {
    let mut out = a.clone();
    for (j, &s) in w.iter().enumerate() {
        out.column_mut(j).scale_mut(s);
    }
    out
}

impl LowRankApprox {
    pub fn rank(&self) -> usize {
        self.sigma0.len()
    }

    pub fn nrows(&self) -> usize {
        self.u0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v0.nrows()
    }

    /// `U₀ diag(σ₀) V₀^*` as a dense matrix.
    pub fn to_dense(&self) -> CMat {
        scale_columns(&self.u0, &self.sigma0) * self.v0.adjoint()
    }

    pub fn to_form_a(&self) -> FactorFormA {
        let u = scale_columns(&self.u0, &self.sigma0);
        let vstar = scale_columns(&self.v0, &self.sigma0).adjoint();
        FactorFormA {
            u,
            s: floored_inverse(&self.sigma0),
            vstar,
        }
    }

    /// Singular values folded into the left factor: `U = U₀Σ₀`, `V^* = V₀^*`.
    pub fn to_form_scaled_u(&self) -> TwoFactorForm {
        TwoFactorForm {
            u: scale_columns(&self.u0, &self.sigma0),
            vstar: self.v0.adjoint(),
        }
    }

    /// Singular values folded into the right factor: `U = U₀`, `V^* = Σ₀V₀^*`.
    pub fn to_form_scaled_v(&self) -> TwoFactorForm {
        TwoFactorForm {
            u: self.u0.clone(),
            vstar: scale_columns(&self.v0, &self.sigma0).adjoint(),
        }
    }
}

impl FactorFormA {
    pub fn to_dense(&self) -> CMat {
        let mut us = self.u.clone();
        for (j, &s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * &self.vstar
    }
}

impl TwoFactorForm {
    pub fn to_dense(&self) -> CMat {
        &self.u * &self.vstar
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, pivoted_qr, truncated_svd, C64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_rank2(seed: u64) -> LowRankApprox {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = complex_gaussian(&mut rng, 12, 2) * complex_gaussian(&mut rng, 2, 9);
        truncated_svd(&z, 2).unwrap()
    }

    #[test]
    fn form_a_inverts_sigma() {
        let a = LowRankApprox {
            u0: CMat::identity(2, 2),
            sigma0: vec![2.0, 1.0],
            v0: CMat::identity(2, 2),
        };
        assert_eq!(a.to_form_a().s, vec![0.5, 1.0]);
        let b = LowRankApprox {
            sigma0: vec![1.0, 0.0],
            ..a
        };
        assert_eq!(b.to_form_a().s, vec![1.0, 0.0]);
    }

    #[test]
    fn all_forms_reproduce_the_product() {
        for seed in 0..4 {
            let a = random_rank2(seed);
            let dense = a.to_dense();
            let scale = dense.norm();
            assert!((a.to_form_a().to_dense() - &dense).norm() <= 1e-13 * scale);
            assert!((a.to_form_scaled_u().to_dense() - &dense).norm() <= 1e-13 * scale);
            assert!((a.to_form_scaled_v().to_dense() - &dense).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn identity_scaled_u_form() {
        let a = truncated_svd(&CMat::identity(4, 4), 4).unwrap();
        let f = a.to_form_scaled_u();
        // U₀ and V₀ may differ from I by a common unitary; the product may not.
        assert!((f.to_dense() - CMat::identity(4, 4)).norm() < 1e-14);
        for j in 0..4 {
            assert!((f.u.column(j).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn scaled_u_columns_carry_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = pivoted_qr(&complex_gaussian(&mut rng, 6, 1), 1).q;
        let v = pivoted_qr(&complex_gaussian(&mut rng, 5, 1), 1).q;
        let z = (&u * v.adjoint()) * C64::new(5.0, 0.0);
        let f = truncated_svd(&z, 1).unwrap().to_form_scaled_u();
        assert!((f.u.column(0).norm() - 5.0).abs() < 1e-13);
        assert!((f.vstar.row(0).norm() - 1.0).abs() < 1e-14);

        let a = random_rank2(7);
        let f = a.to_form_scaled_u();
        for j in 0..2 {
            let rel = (f.u.column(j).norm() - a.sigma0[j]).abs() / a.sigma0[j];
            assert!(rel < 1e-12);
        }
    }
}
