use std::fs;
use std::path::{Path, PathBuf};

use sparsekit::io::{read_matrix, write_matrix, Position, ReadError};
use sparsekit_core::CsrMatrix;

fn fixtures(kind: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(kind)
}

fn valid_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(fixtures("valid"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("mtx" | "smtx")))
        .collect();
    files.sort();
    files
}

fn assert_same(a: &CsrMatrix<f32>, b: &CsrMatrix<f32>, what: &str) {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()), "{what}");
    assert_eq!(a.row_offsets(), b.row_offsets(), "{what}");
    assert_eq!(a.col_indices(), b.col_indices(), "{what}");
    let bits = |m: &CsrMatrix<f32>| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(a), bits(b), "{what}");
}

#[test]
fn twenty_valid_fixtures_round_trip_through_both_formats() {
    let files = valid_files();
    assert_eq!(files.len(), 20);
    let dir = tempfile::tempdir().unwrap();
    for f in &files {
        let m = read_matrix(f).unwrap_or_else(|e| panic!("{e}"));
        assert!(m.validate().is_ok());
        for ext in ["mtx", "smtx"] {
            let out = dir.path().join(format!("copy.{ext}"));
            write_matrix(&out, &m).unwrap();
            let back = read_matrix(&out).unwrap();
            assert_same(&m, &back, &format!("{} via {ext}", f.display()));
        }
    }
}

#[test]
fn sidecar_values_are_loaded() {
    let m = read_matrix(&fixtures("valid").join("dense_4x4_vals.smtx")).unwrap();
    assert_eq!(m.nnz(), 16);
    assert!(m.values().iter().any(|&v| v != 1.0));
    let plain = read_matrix(&fixtures("valid").join("identity_6.smtx")).unwrap();
    assert_eq!(plain.values(), &[1.0; 6]);
}

#[test]
fn hand_checked_contents() {
    let m = read_matrix(&fixtures("valid").join("empty_rows.smtx")).unwrap();
    assert_eq!(m.row_offsets(), &[0, 0, 2, 2, 2, 3]);
    assert_eq!(m.col_indices(), &[1, 2, 4]);
    let d = read_matrix(&fixtures("valid").join("dense_8x8.mtx")).unwrap();
    assert_eq!(d.nnz(), 64);
    assert!(d.row_lengths().all(|l| l == 8));
}

#[test]
fn malformed_fixtures_report_positions() {
    let dir = fixtures("malformed");
    let mut rdr = csv::Reader::from_path(dir.join("expected.csv")).unwrap();
    let mut checked = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let want = Position {
            line: rec[1].parse().unwrap(),
            column: rec[2].parse().unwrap(),
        };
        let err = read_matrix(&dir.join(&rec[0])).expect_err(&rec[0]);
        assert!(matches!(err, ReadError::Parse { .. }), "{}: {err}", &rec[0]);
        assert_eq!(err.position(), Some(want), "{}: {err}", &rec[0]);
        assert!(err
            .to_string()
            .contains(&format!("line {}, column {}", want.line, want.column)));
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn sidecar_length_mismatch_and_unknown_extension() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.smtx");
    fs::write(&p, "1, 2, 1\n0 1\n1\n").unwrap();
    fs::write(dir.path().join("m.vals"), [0u8; 3]).unwrap();
    assert!(matches!(
        read_matrix(&p),
        Err(ReadError::Sidecar {
            expected: 4,
            found: 3,
            ..
        })
    ));
    assert!(matches!(
        read_matrix(&dir.path().join("m.txt")),
        Err(ReadError::UnknownFormat { .. })
    ));
    assert!(matches!(
        read_matrix(&dir.path().join("missing.mtx")),
        Err(ReadError::Io { .. })
    ));
}
