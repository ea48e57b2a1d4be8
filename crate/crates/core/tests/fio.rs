mod common;

use butterfly::kernels::FioKernel;
use butterfly::oracle::DirectOperator;
use butterfly::{factorize, make_partition, MatrixOracle, Mode, OversamplingParams};
use common::{fio_dense, optimal_middle_error, rel};

fn params() -> OversamplingParams {
    OversamplingParams::default()
}

#[test]
fn sampling_error_tracks_the_optimal_truncation() {
    let n = 256;
    let p = make_partition(n, 1).unwrap();
    let dense = fio_dense(n);
    let k = FioKernel::new(n);
    for r in [4, 6] {
        let f = factorize(MatrixOracle::Entry(&k), &p, r, &params(), 0, Mode::Sampling).unwrap();
        let err = rel(&f.to_dense(), &dense);
        let best = optimal_middle_error(&p, &dense, r);
        assert!(err <= 5.0 * best, "r = {r}: {err} vs optimum {best}");
    }
}

#[test]
fn error_decreases_with_rank() {
    let n = 256;
    let p = make_partition(n, 1).unwrap();
    let dense = fio_dense(n);
    let k = FioKernel::new(n);
    let errs: Vec<f64> = [2, 4, 6, 8]
        .iter()
        .map(|&r| {
            let f =
                factorize(MatrixOracle::Entry(&k), &p, r, &params(), 3, Mode::Sampling).unwrap();
            rel(&f.to_dense(), &dense)
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn matvec_mode_reaches_sampling_accuracy() {
    let n = 256;
    let p = make_partition(n, 1).unwrap();
    let dense = fio_dense(n);
    let k = FioKernel::new(n);
    let op = DirectOperator { entries: &k };
    let r = 6;
    let f = factorize(
        MatrixOracle::Operator(&op),
        &p,
        r,
        &params(),
        1,
        Mode::Matvec,
    )
    .unwrap();
    let err = rel(&f.to_dense(), &dense);
    let best = optimal_middle_error(&p, &dense, r);
    assert!(err <= 5.0 * best, "{err} vs optimum {best}");
}

#[test]
fn kernel_matches_direct_phase_evaluation() {
    let n = 1024;
    let dense = fio_dense(n);
    let k = FioKernel::new(n);
    for (i, j) in [(0, 0), (1, 1023), (511, 512), (1000, 3), (700, 700)] {
        let v = butterfly::EntryOracle::entry(&k, i, j).unwrap();
        assert!((v - dense[(i, j)]).norm() <= 1e-11, "({i}, {j})");
    }
}
