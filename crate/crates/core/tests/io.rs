mod common;

use common::bits;
use portwave::io::{
    read_field_file, read_manifest, read_snapshot, read_velocity_model, write_field_file,
    write_snapshot, write_velocity_model, SnapshotWriter, VelocityModel, MANIFEST_FILE,
};
use portwave::Error;
use proptest::prelude::*;

#[test]
fn two_by_two_velocity_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.ppvm");
    let model = VelocityModel {
        nz: 2,
        nx: 2,
        dh: 12.5,
        data: vec![1500.0, 1500.0, 2000.0, 2000.0],
    };
    write_velocity_model(&path, &model).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 24 + 16);
    assert_eq!(read_velocity_model(&path).unwrap(), model);
}

#[test]
fn corrupted_velocity_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.ppvm");
    write_velocity_model(&path, &VelocityModel::constant(3, 3, 5.0, 1800.0)).unwrap();
    let good = std::fs::read(&path).unwrap();

    let mut bad_magic = good.clone();
    bad_magic[..4].copy_from_slice(b"XXXX");
    std::fs::write(&path, &bad_magic).unwrap();
    assert!(matches!(
        read_velocity_model(&path),
        Err(Error::Format { .. })
    ));

    std::fs::write(&path, &good[..good.len() - 4]).unwrap();
    assert!(matches!(
        read_velocity_model(&path),
        Err(Error::Length { .. })
    ));

    let mut negative = good.clone();
    let last = negative.len() - 4;
    negative[last..].copy_from_slice(&(-1.0f32).to_le_bytes());
    std::fs::write(&path, &negative).unwrap();
    assert!(matches!(read_velocity_model(&path), Err(Error::Domain(_))));

    match read_velocity_model(dir.path().join("missing.ppvm")) {
        Err(Error::Io { path, .. }) => assert!(path.ends_with("missing.ppvm")),
        other => panic!("expected i/o error, got {other:?}"),
    }
}

#[test]
fn snapshot_set_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let mut w = SnapshotWriter::create(dir.path()).unwrap();
    for step in [10, 20, 30] {
        let field: Vec<f64> = (0..12).map(|k| (k as f64 - 5.0) * step as f64).collect();
        w.write(step, step as f64 * 1e-3, &field, 3, 4).unwrap();
    }
    let rows = read_manifest(dir.path()).unwrap();
    assert_eq!(rows, w.rows());
    for row in &rows {
        let data = read_snapshot(dir.path(), row).unwrap();
        let lo = data.iter().copied().fold(f32::INFINITY, f32::min);
        let hi = data.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        assert_eq!((row.min, row.max), (lo, hi));
    }
    let mut files: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != MANIFEST_FILE)
        .collect();
    files.sort();
    assert_eq!(
        files,
        rows.iter().map(|r| r.file.clone()).collect::<Vec<_>>()
    );
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![
        Just((1, 1)),
        (1usize..300).prop_map(|n| (1, n)),
        (1usize..300).prop_map(|n| (n, 1)),
        Just((173, 211)),
        (1usize..40, 1usize..40),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn velocity_round_trip((nz, nx) in shape(), seed in any::<u64>(), dh in 0.1f64..100.0) {
        let mut r = common::rng(seed);
        let data: Vec<f32> = (0..nz * nx).map(|_| rand::Rng::random_range(&mut r, 1.0f32..6000.0)).collect();
        let model = VelocityModel { nz, nx, dh, data };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ppvm");
        write_velocity_model(&path, &model).unwrap();
        let back = read_velocity_model(&path).unwrap();
        prop_assert_eq!(back.dh.to_bits(), dh.to_bits());
        prop_assert_eq!(bits(&back.data), bits(&model.data));
        prop_assert_eq!((back.nz, back.nx), (nz, nx));
    }

    #[test]
    fn snapshot_round_trip((nz, nx) in shape(), data in prop::collection::vec(any::<f32>(), 1..2)) {
        // arbitrary bit patterns, NaNs included, survive unchanged
        let field: Vec<f32> = (0..nz * nx).map(|k| f32::from_bits((k as u32).wrapping_mul(2654435761) ^ data[0].to_bits())).collect();
        let dir = tempfile::tempdir().unwrap();
        let row = write_snapshot(dir.path(), 1, 0.5, &field, nz, nx).unwrap();
        prop_assert_eq!(bits(&read_snapshot(dir.path(), &row).unwrap()), bits(&field));
        let p = dir.path().join("final.bin");
        write_field_file(&p, &field).unwrap();
        prop_assert_eq!(bits(&read_field_file(&p, Some(nz * nx)).unwrap()), bits(&field));
    }
}
