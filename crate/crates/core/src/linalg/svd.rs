use super::{CMat, LowRankApprox, C64, PINV_FLOOR};
use crate::error::{Error, Result};

/// Thin SVD with singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns (n × k), i.e. `V`, not `V^*`.
    pub v: CMat,
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Columns of a working copy of `z` are rotated pairwise until they are
/// mutually orthogonal to working precision; their norms are the singular
/// values. Left singular vectors belonging to zero singular values are
/// completed to an orthonormal set.
pub fn svd_sorted(z: &CMat) -> Result<Svd> {
    let (m, n) = z.shape();
    if m < n {
        let t = svd_sorted(&z.adjoint())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    if n == 0 {
        return Ok(Svd {
            u: CMat::zeros(m, 0),
            sigma: Vec::new(),
            v: CMat::zeros(0, 0),
        });
    }
    if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite entry in a {m}x{n} SVD input"
        )));
    }
    let mut w = z.clone();
    let mut v = CMat::identity(n, n);
    let tol = f64::EPSILON * m as f64;
    // Columns this small are rounding residue of a null direction; rotating
    // them against each other never satisfies the relative test.
    let null = (NULL_COLUMN * f64::EPSILON).powi(2) * z.norm_squared();
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0
                    || alpha <= null
                    || beta <= null
                    || g <= tol * alpha.sqrt() * beta.sqrt()
                {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, phase.conj());
                rotate(&mut v, p, q, c, s, phase.conj());
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD of a {m}x{n} block did not converge"
        )));
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u = CMat::zeros(m, n);
    let mut filled = 0;
    for (k, &j) in order.iter().enumerate() {
        if sigma[k] > 0.0 {
            u.column_mut(k)
                .copy_from(&(w.column(j) / C64::new(sigma[k], 0.0)));
            filled = k + 1;
        }
    }
    complete_orthonormal(&mut u, filled);
    let v_sorted = CMat::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Svd {
        u,
        sigma,
        v: v_sorted,
    })
}

const MAX_SWEEPS: usize = 80;

/// Relative column norm, in units of machine epsilon, below which a column
/// counts as null.
const NULL_COLUMN: f64 = 1e-4;

/// `(a_p, a_q) ← (c a_p − s e a_q, s a_p + c e a_q)`.
fn rotate(a: &mut CMat, p: usize, q: usize, c: f64, s: f64, e: C64) {
    for i in 0..a.nrows() {
        let x = a[(i, p)];
        let y = a[(i, q)] * e;
        a[(i, p)] = x * c - y * s;
        a[(i, q)] = x * s + y * c;
    }
}

/// Replaces columns `from..` of `u` with unit vectors orthogonal to all
/// earlier columns, drawn from the standard basis.
fn complete_orthonormal(u: &mut CMat, from: usize) {
    let (m, n) = u.shape();
    let mut k = from;
    let mut e = 0;
    while k < n && e < m {
        let mut x = CMat::zeros(m, 1);
        x[(e, 0)] = C64::new(1.0, 0.0);
        for _pass in 0..2 {
            for j in 0..k {
                let proj = u.column(j).dotc(&x.column(0));
                let col = u.column(j).into_owned();
                x.column_mut(0).axpy(-proj, &col, C64::new(1.0, 0.0));
            }
        }
        let norm = x.norm();
        if norm > 0.5 {
            u.column_mut(k)
                .copy_from(&(x.column(0) / C64::new(norm, 0.0)));
            k += 1;
        }
        e += 1;
    }
}

/// The `r` dominant singular triplets of `z`.
pub fn truncated_svd(z: &CMat, r: usize) -> Result<LowRankApprox> {
    let (m, n) = z.shape();
    if r == 0 || r > m.min(n) {
        return Err(Error::invalid(format!(
            "rank {r} out of range for a {m}x{n} matrix"
        )));
    }
    truncated_svd_clamped(z, r)
}

/// Like [`truncated_svd`] but silently clamps the rank to `min(m, n)`.
pub fn truncated_svd_clamped(z: &CMat, r: usize) -> Result<LowRankApprox> {
    let s = svd_sorted(z)?;
    let k = r.min(s.sigma.len());
    Ok(LowRankApprox {
        u0: s.u.columns(0, k).into_owned(),
        sigma0: s.sigma[..k].to_vec(),
        v0: s.v.columns(0, k).into_owned(),
    })
}

/// Elementwise inverse of a descending singular-value list, with entries
/// below `PINV_FLOOR * max` mapped to zero.
pub fn floored_inverse(sigma: &[f64]) -> Vec<f64> {
    let max = sigma.iter().cloned().fold(0.0, f64::max);
    let floor = PINV_FLOOR * max;
    sigma
        .iter()
        .map(|&s| if max > 0.0 && s > floor { 1.0 / s } else { 0.0 })
        .collect()
}

/// Moore-Penrose pseudo-inverse with the relative singular-value floor.
pub fn pinv(a: &CMat) -> Result<CMat> {
    let s = svd_sorted(a)?;
    let inv = floored_inverse(&s.sigma);
    let mut v_scaled = s.v.clone();
    for (j, w) in inv.iter().enumerate() {
        v_scaled.column_mut(j).scale_mut(*w);
    }
    Ok(v_scaled * s.u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, pivoted_qr, spectral_norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn low_rank_inputs_reconstruct_in_every_shape() {
        let shapes = [
            (8, 4),
            (4, 4),
            (2, 4),
            (1, 4),
            (16, 8),
            (32, 24),
            (4, 8),
            (5, 1),
        ];
        for seed in 0..700u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (m, n) = shapes[seed as usize % shapes.len()];
            let k = 1 + (seed as usize / shapes.len()) % m.min(n);
            let scale = 10f64.powi((seed % 9) as i32 - 4);
            let z = complex_gaussian(&mut rng, m, k)
                * complex_gaussian(&mut rng, k, n)
                * C64::new(scale, 0.0);
            let s = svd_sorted(&z).unwrap();
            let mut us = s.u.clone();
            for (c, &sv) in s.sigma.iter().enumerate() {
                us.column_mut(c).scale_mut(sv);
            }
            assert!(
                (us * s.v.adjoint() - &z).norm() <= 1e-13 * z.norm(),
                "seed {seed}"
            );
            let d = s.u.ncols();
            assert!((s.u.adjoint() * &s.u - CMat::identity(d, d)).norm() <= 1e-13);
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn zero_matrix_has_zero_singular_values() {
        let z = CMat::zeros(8, 8);
        let a = truncated_svd(&z, 2).unwrap();
        assert_eq!(a.sigma0, vec![0.0, 0.0]);
    }

    #[test]
    fn exact_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = pivoted_qr(&complex_gaussian(&mut rng, 10, 1), 1).q;
        let v = pivoted_qr(&complex_gaussian(&mut rng, 7, 1), 1).q;
        let z = (&u * v.adjoint()) * C64::new(3.0, 0.0);
        let a = truncated_svd(&z, 1).unwrap();
        assert!((a.sigma0[0] - 3.0).abs() < 1e-14);
        assert!((a.to_dense() - &z).norm() <= 1e-14 * 3.0);
    }

    #[test]
    fn prescribed_spectrum_error_is_next_singular_value() {
        // z = Q1 diag(10^0..10^-15) Q2^*; the optimal rank-4 2-norm error is
        // exactly sigma_5 = 1e-4 by construction.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q1 = pivoted_qr(&complex_gaussian(&mut rng, 16, 16), 16).q;
        let q2 = pivoted_qr(&complex_gaussian(&mut rng, 16, 16), 16).q;
        let mut d = CMat::zeros(16, 16);
        for k in 0..16 {
            d[(k, k)] = C64::new(10f64.powi(-(k as i32)), 0.0);
        }
        let z = &q1 * d * q2.adjoint();
        let a = truncated_svd(&z, 4).unwrap();
        let err = spectral_norm(&(&z - a.to_dense()));
        assert!((err - 1e-4).abs() < 1e-12, "err = {err}");
    }

    #[test]
    fn rank_out_of_range() {
        let z = CMat::zeros(4, 3);
        assert!(truncated_svd(&z, 0).is_err());
        assert!(truncated_svd(&z, 4).is_err());
    }

    #[test]
    fn floored_inverse_examples() {
        assert_eq!(floored_inverse(&[2.0, 1.0]), vec![0.5, 1.0]);
        assert_eq!(floored_inverse(&[1.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(floored_inverse(&[1.0, 1e-14]), vec![1.0, 0.0]);
        assert_eq!(floored_inverse(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn pinv_of_full_column_rank_is_left_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = complex_gaussian(&mut rng, 9, 4);
        let p = pinv(&a).unwrap();
        assert!((&p * &a - CMat::identity(4, 4)).norm() < 1e-13);
    }
}
