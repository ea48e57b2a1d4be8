use butterfly::harness::{
    from_bytes, load_factors, load_vector, save_factors, save_vector, to_bytes,
};
use butterfly::kernels::FioKernel;
use butterfly::{
    butterfly::random_butterfly, factorize, make_partition, Error, MatrixOracle, Mode,
    OversamplingParams, C64,
};

fn fio_factors() -> butterfly::ButterflyFactors {
    let p = make_partition(256, 1).unwrap();
    factorize(
        MatrixOracle::Entry(&FioKernel::new(256)),
        &p,
        4,
        &OversamplingParams::default(),
        9,
        Mode::Sampling,
    )
    .unwrap()
}

fn format_offset(e: Error) -> u64 {
    match e {
        Error::Format { offset, .. } => offset,
        other => panic!("expected a format error, got {other}"),
    }
}

#[test]
fn save_load_save_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.bfac"), dir.path().join("b.bfac"));
    let f = fio_factors();
    save_factors(&f, &a).unwrap();
    let g = load_factors(&a).unwrap();
    assert_eq!(f, g);
    save_factors(&g, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn loaded_factors_apply_bitwise_identically() {
    let f = fio_factors();
    let g = from_bytes(&to_bytes(&f)).unwrap();
    let x: Vec<C64> = (0..256)
        .map(|k| C64::new(k as f64, 1.0 / (k + 1) as f64))
        .collect();
    let (y1, y2) = (f.apply(&x).unwrap(), g.apply(&x).unwrap());
    assert!(y1
        .iter()
        .zip(&y2)
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
}

#[test]
fn header_layout() {
    let p = make_partition(64, 1).unwrap();
    let bytes = to_bytes(&random_butterfly(&p, 2, 1));
    assert_eq!(&bytes[..4], b"BFAC");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 64);
    assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 6);
    assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 2);
    assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 9);
    // First factor is U^L at level L with N blocks.
    assert_eq!(bytes[28], 0);
    assert_eq!(u32::from_le_bytes(bytes[29..33].try_into().unwrap()), 6);
    assert_eq!(u64::from_le_bytes(bytes[33..41].try_into().unwrap()), 64);
}

#[test]
fn truncation_is_reported_with_its_offset() {
    let bytes = to_bytes(&fio_factors());
    for cut in [0, 3, 10, 27, 40, 1000, bytes.len() / 2, bytes.len() - 1] {
        let offset = format_offset(from_bytes(&bytes[..cut]).unwrap_err());
        assert!(offset <= cut as u64, "cut {cut}, offset {offset}");
    }
}

#[test]
fn bad_magic_version_and_trailing_bytes() {
    let mut bytes = to_bytes(&fio_factors());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert_eq!(format_offset(from_bytes(&bad).unwrap_err()), 0);
    let mut bad = bytes.clone();
    bad[4] = 2;
    assert_eq!(format_offset(from_bytes(&bad).unwrap_err()), 4);
    let len = bytes.len() as u64;
    bytes.push(0);
    assert_eq!(format_offset(from_bytes(&bytes).unwrap_err()), len);
}

#[test]
fn corrupted_factor_kind_is_rejected() {
    let mut bytes = to_bytes(&fio_factors());
    bytes[28] = 3;
    assert_eq!(format_offset(from_bytes(&bytes).unwrap_err()), 28);
}

#[test]
fn vector_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.bin");
    let v: Vec<C64> = (0..10).map(|k| C64::new(k as f64, -(k as f64))).collect();
    save_vector(&v, &path).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 8 + 160);
    assert_eq!(load_vector(&path).unwrap(), v);
    let mut raw = std::fs::read(&path).unwrap();
    raw.pop();
    std::fs::write(&path, raw).unwrap();
    assert_eq!(format_offset(load_vector(&path).unwrap_err()), 0);
}
