use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::kernels::{dense_matrix, FioKernel, Identity};
use crate::linalg::complex_gaussian;
use crate::oracle::DenseOperator;
use crate::partition::{block_cols, block_rows, make_partition};

fn rel(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm()
}

fn params() -> OversamplingParams {
    OversamplingParams::default()
}

/// Error of the best rank-`r` approximation of every middle-level block.
fn optimal_middle_error(p: &DyadicPartition, dense: &CMat, r: usize) -> f64 {
    let mut tail = 0.0;
    for id in p.blocks_at(p.half()) {
        let rows = block_rows(p, &id).unwrap();
        let cols = block_cols(p, &id).unwrap();
        let b = dense
            .view((rows.start, cols.start), (rows.len(), cols.len()))
            .into_owned();
        let s = crate::linalg::svd_sorted(&b).unwrap().sigma;
        tail += s.iter().skip(r).map(|v| v * v).sum::<f64>();
    }
    tail.sqrt() / dense.norm()
}

#[test]
fn zero_kernel_gives_zero_factors() {
    let p = make_partition(64, 1).unwrap();
    let zero = DenseOperator::new(CMat::zeros(64, 64));
    let f = factorize(
        MatrixOracle::Entry(&zero),
        &p,
        2,
        &params(),
        0,
        Mode::Sampling,
    )
    .unwrap();
    assert!(f.middle.weights.iter().flatten().all(|&w| w == 0.0));
    for g in f.g_chain.iter().chain(&f.h_chain) {
        assert!(g
            .blocks
            .iter()
            .all(|b| b.data.iter().all(|v| v.norm() == 0.0)));
    }
    assert!(f.to_dense().iter().all(|v| v.norm() == 0.0));
    let mid = middle_factorization_sampling(&zero, &p, 2, &params(), 0).unwrap();
    assert!(mid.u_h.to_dense().iter().all(|v| v.re.is_finite()));
}

#[test]
fn identity_through_matvec_mode() {
    let p = make_partition(64, 1).unwrap();
    let eye = DenseOperator::new(CMat::identity(64, 64));
    // Diagonal middle blocks of the identity are 8×8 identities, so rank 8
    // is the smallest exact one.
    let f = factorize(
        MatrixOracle::Operator(&eye),
        &p,
        8,
        &params(),
        4,
        Mode::Matvec,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = complex_gaussian(&mut rng, 64, 16);
    let y = f.apply_block(&x).unwrap();
    assert!(rel(&y, &x) <= 1e-10);
}

#[test]
fn identity_entry_oracle_at_full_rank() {
    let p = make_partition(64, 1).unwrap();
    let f = factorize(
        MatrixOracle::Entry(&Identity { n: 64 }),
        &p,
        8,
        &params(),
        1,
        Mode::Sampling,
    )
    .unwrap();
    assert!(rel(&f.to_dense(), &CMat::identity(64, 64)) <= 1e-10);
}

#[test]
fn probe_matrix_is_block_diagonal() {
    let p = make_partition(256, 1).unwrap();
    let (r, pp) = (4, params().p);
    let c = probe_matrix(&p, probe_width(&p, r, &params()), 3, 2);
    let m = p.middle_nodes();
    assert_eq!(c.ncols(), m * (r + pp));
    let nnz = c.iter().filter(|v| v.norm() != 0.0).count();
    assert_eq!(nnz, 256 * (r + pp));
    let side = 256 / m;
    for (k, v) in c.iter().enumerate() {
        let (row, col) = (k % 256, k / 256);
        if row / side != col / (r + pp) {
            assert_eq!(v.norm(), 0.0);
        }
    }
}

#[test]
fn middle_factor_structure_at_rank_one() {
    let p = make_partition(64, 1).unwrap();
    let k = FioKernel::new(64);
    let mid = middle_factorization_sampling(&k, &p, 1, &params(), 0).unwrap();
    assert_eq!(mid.middle.m, 8);
    let d = mid.middle.to_dense();
    assert_eq!(d.shape(), (64, 64));
    for i in 0..8 {
        for j in 0..8 {
            let block = d.view((i * 8, j * 8), (8, 8));
            let nz: Vec<(usize, usize)> = (0..64)
                .filter(|&t| block[(t % 8, t / 8)].norm() != 0.0)
                .map(|t| (t % 8, t / 8))
                .collect();
            assert_eq!(nz, vec![(j, i)], "block ({i}, {j})");
        }
    }
}

#[test]
fn middle_product_matches_blockwise_outer_products() {
    let p = make_partition(64, 1).unwrap();
    let k = FioKernel::new(64);
    let r = 4;
    let mid = middle_factorization_sampling(&k, &p, r, &params(), 2).unwrap();
    let prod = mid.u_h.to_dense() * mid.middle.to_dense() * mid.v_h.to_dense().adjoint();
    let m = p.middle_nodes();
    for i in 0..m {
        for j in 0..m {
            let id = p.block(p.half(), i, j).unwrap();
            let rows = block_rows(&p, &id).unwrap();
            let cols = block_cols(&p, &id).unwrap();
            let u = mid.u_h.blocks[i].data.columns(j * r, r).into_owned();
            let v = mid.v_h.blocks[j].data.columns(i * r, r).into_owned();
            let s = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                r,
                mid.middle.weights[i * m + j]
                    .iter()
                    .map(|&w| C64::new(w, 0.0)),
            ));
            let expected = u * s * v.adjoint();
            let got = prod.view((rows.start, cols.start), (rows.len(), cols.len()));
            assert!((got - &expected).norm() <= 1e-13 * expected.norm().max(1.0));
        }
    }
    let dense = dense_matrix(&k, 64).unwrap();
    let err = rel(&prod, &dense);
    let best = optimal_middle_error(&p, &dense, r);
    assert!(err <= 1e-2 && err <= 2.0 * best, "{err} vs optimum {best}");
}

#[test]
fn exact_butterfly_is_reproduced() {
    let p = make_partition(256, 1).unwrap();
    let r = 3;
    let truth = random_butterfly(&p, r, 17);
    truth.validate().unwrap();
    let dense = truth.to_dense();
    let oracle = DenseOperator::new(dense.clone());
    for mode in [Mode::Sampling, Mode::Streaming] {
        let f = factorize(MatrixOracle::Entry(&oracle), &p, r, &params(), 5, mode).unwrap();
        assert!(rel(&f.to_dense(), &dense) <= 1e-10, "{mode:?}");
    }
    let f = factorize(
        MatrixOracle::Operator(&oracle),
        &p,
        r,
        &params(),
        5,
        Mode::Matvec,
    )
    .unwrap();
    assert!(rel(&f.to_dense(), &dense) <= 1e-10);
}

#[test]
fn exact_butterflies_across_ranks_and_seeds() {
    let p = make_partition(256, 1).unwrap();
    for r in 1..=5 {
        for seed in [0, 7, 99, 1234] {
            let dense = random_butterfly(&p, r, seed).to_dense();
            let oracle = DenseOperator::new(dense.clone());
            let f = factorize(
                MatrixOracle::Entry(&oracle),
                &p,
                r,
                &params(),
                5,
                Mode::Sampling,
            )
            .unwrap();
            assert!(
                rel(&f.to_dense(), &dense) <= 1e-10,
                "r = {r}, seed = {seed}"
            );
        }
    }
}

#[test]
fn recursion_reproduces_exact_rank_diagonal() {
    let p = make_partition(256, 1).unwrap();
    let r = 2;
    let truth = random_butterfly(&p, r, 23);
    let oracle = DenseOperator::new(truth.to_dense());
    let mid = middle_factorization_sampling(&oracle, &p, r, &params(), 1).unwrap();
    let (u_l, g_chain) = recursive_factor_u(&mid.u_h, &p, r).unwrap();
    let mut prod = u_l.to_dense();
    for g in &g_chain {
        prod *= g.to_dense();
    }
    let u_h = mid.u_h.to_dense();
    assert!(rel(&prod, &u_h) <= 1e-10);
    let nnz: Vec<usize> = g_chain.iter().map(|g| g.nnz()).collect();
    assert!(nnz.iter().all(|&c| c == (2 << p.levels()) * r * r));
}

#[test]
fn streaming_matches_sampling_bitwise() {
    let p = make_partition(256, 1).unwrap();
    let k = FioKernel::new(256);
    let a = factorize(
        MatrixOracle::Entry(&k),
        &p,
        4,
        &params(),
        42,
        Mode::Sampling,
    )
    .unwrap();
    let b = factorize(
        MatrixOracle::Entry(&k),
        &p,
        4,
        &params(),
        42,
        Mode::Streaming,
    )
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn thread_count_does_not_change_factors() {
    let p = make_partition(256, 1).unwrap();
    let k = FioKernel::new(256);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| factorize(MatrixOracle::Entry(&k), &p, 4, &params(), 8, Mode::Sampling))
            .unwrap()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn adjoint_and_counts() {
    let p = make_partition(256, 1).unwrap();
    let k = FioKernel::new(256);
    let r = 4;
    let f = factorize(MatrixOracle::Entry(&k), &p, r, &params(), 0, Mode::Sampling).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let x = complex_gaussian(&mut rng, 256, 1);
        let y = complex_gaussian(&mut rng, 256, 1);
        let lhs = f.apply_block(&x).unwrap().dotc(&y);
        let rhs = x.dotc(&f.apply_adjoint_block(&y).unwrap());
        assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
    }
    let rep = f.nnz_report();
    assert_eq!(rep.middle, (1 << p.levels()) * r);
    assert_eq!(rep.u_outer, 256 * r);
    assert_eq!(rep.v_outer, 256 * r);
    assert!(rep
        .g_chain
        .iter()
        .chain(&rep.h_chain)
        .all(|&c| c == rep.g_chain[0]));
    assert!(f.apply(&[C64::new(0.0, 0.0); 3]).is_err());
    let zero = f.apply(&vec![C64::new(0.0, 0.0); 256]).unwrap();
    assert!(zero.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn mode_and_oracle_must_agree() {
    let p = make_partition(64, 1).unwrap();
    let k = FioKernel::new(64);
    let d = DenseOperator::new(CMat::zeros(64, 64));
    assert!(matches!(
        factorize(MatrixOracle::Entry(&k), &p, 2, &params(), 0, Mode::Matvec),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        factorize(
            MatrixOracle::Operator(&d),
            &p,
            2,
            &params(),
            0,
            Mode::Streaming
        ),
        Err(Error::InvalidArgument(_))
    ));
    assert!(factorize(MatrixOracle::Entry(&k), &p, 9, &params(), 0, Mode::Sampling).is_err());
}
