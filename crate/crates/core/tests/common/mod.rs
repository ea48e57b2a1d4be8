#![allow(dead_code)]

use std::f64::consts::PI;

use butterfly::{CMat, DyadicPartition, C64};

/// FIO kernel evaluated directly from its phase, without any reduction.
pub fn fio_dense(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        let x = i as f64 / n as f64;
        let xi = j as f64 - (n / 2) as f64;
        let c = (2.0 + (2.0 * PI * x).sin()) / 8.0;
        C64::from_polar(1.0, 2.0 * PI * (x * xi + c * xi.abs()))
    })
}

/// Centered DFT `F[j, k] = exp(-2πi (j - n/2) k / n)`.
pub fn dft_dense(n: usize) -> CMat {
    CMat::from_fn(n, n, |j, k| {
        let xi = j as f64 - (n / 2) as f64;
        C64::from_polar(1.0, -2.0 * PI * xi * k as f64 / n as f64)
    })
}

pub fn rel(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm()
}

/// Relative Frobenius error of the best rank-`r` approximation of every
/// middle-level block, a lower bound for any factorization of that rank.
pub fn optimal_middle_error(p: &DyadicPartition, dense: &CMat, r: usize) -> f64 {
    let side = p.n() / p.middle_nodes();
    let mut tail = 0.0;
    for i in 0..p.middle_nodes() {
        for j in 0..p.middle_nodes() {
            let block = dense.view((i * side, j * side), (side, side)).into_owned();
            let s = block.singular_values();
            let mut s: Vec<f64> = s.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            tail += s.iter().skip(r).map(|v| v * v).sum::<f64>();
        }
    }
    tail.sqrt() / dense.norm()
}
