use super::{CMat, C64};

/// Leading part of a column-pivoted Householder QR.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// First `k` columns of the orthogonal factor (m × k).
    pub q: CMat,
    /// Original indices of the first `k` pivot columns, in selection order.
    pub pivots: Vec<usize>,
    /// |R[s, s]| for the computed steps.
    pub r_diag: Vec<f64>,
}

/// Relative window inside which two pivot candidates count as tied.
const PIVOT_TIE: f64 = 1e-14;

/// Column-pivoted QR truncated after `k` steps (clamped to `min(m, n)`).
///
/// Ties between candidate column norms (equal within 1e-14 relative) go to
/// the lower original column index, so the selection is reproducible.
pub fn pivoted_qr(a: &CMat, k: usize) -> PivotedQr {
    let m = a.nrows();
    let n = a.ncols();
    let steps = k.min(m).min(n);
    let mut w: Vec<C64> = a.as_slice().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<(Vec<C64>, f64)> = Vec::with_capacity(steps);
    let mut r_diag = Vec::with_capacity(steps);
    let mut norms = vec![0.0f64; n];

    for s in 0..steps {
        for c in s..n {
            norms[c] = w[c * m + s..(c + 1) * m]
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
        }
        let max = norms[s..n].iter().cloned().fold(0.0, f64::max);
        let threshold = max * (1.0 - PIVOT_TIE);
        let mut best = s;
        for c in s..n {
            if norms[c] >= threshold && (perm[c] < perm[best] || norms[best] < threshold) {
                best = c;
            }
        }
        if best != s {
            for i in 0..m {
                w.swap(s * m + i, best * m + i);
            }
            perm.swap(s, best);
            norms.swap(s, best);
        }

        let col = &w[s * m + s..(s + 1) * m];
        let norm_x = norms[s];
        if norm_x == 0.0 {
            reflectors.push((Vec::new(), 0.0));
            r_diag.push(0.0);
            continue;
        }
        let x0 = col[0];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<C64> = col.to_vec();
        v[0] -= alpha;
        let v_norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / v_norm_sq;
        for c in s + 1..n {
            let tail = &mut w[c * m + s..(c + 1) * m];
            let dot: C64 = v
                .iter()
                .zip(tail.iter())
                .map(|(vi, ti)| vi.conj() * ti)
                .sum();
            let scale = dot * tau;
            for (ti, vi) in tail.iter_mut().zip(v.iter()) {
                *ti -= scale * vi;
            }
        }
        w[s * m + s] = alpha;
        for i in s + 1..m {
            w[s * m + i] = C64::new(0.0, 0.0);
        }
        r_diag.push(norm_x);
        reflectors.push((v, tau));
    }

    // Q = H_0 H_1 ... H_{steps-1} applied to the leading identity columns.
    let mut q = vec![C64::new(0.0, 0.0); m * steps];
    for c in 0..steps {
        q[c * m + c] = C64::new(1.0, 0.0);
    }
    for s in (0..steps).rev() {
        let (v, tau) = &reflectors[s];
        if *tau == 0.0 {
            continue;
        }
        for c in s..steps {
            let tail = &mut q[c * m + s..(c + 1) * m];
            let dot: C64 = v
                .iter()
                .zip(tail.iter())
                .map(|(vi, ti)| vi.conj() * ti)
                .sum();
            let scale = dot * *tau;
            for (ti, vi) in tail.iter_mut().zip(v.iter()) {
                *ti -= scale * vi;
            }
        }
    }

    PivotedQr {
        q: CMat::from_vec(m, steps, q),
        pivots: perm[..steps].to_vec(),
        r_diag,
    }
}
