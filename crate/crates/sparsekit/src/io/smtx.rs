use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sparsekit_core::matrix::{validate_parts, Violation};
use sparsekit_core::CsrMatrix;

use super::{tokens, ParseError, ReadError};

/// Structure arrays of an SMTX file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtxStructure {
    pub rows: usize,
    pub cols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<u32>,
}

/// `m.smtx` keeps its values in `m.vals`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("vals")
}

fn numbers(line_no: usize, line: &str, what: &str) -> Result<Vec<(usize, usize)>, ParseError> {
    tokens(line)
        .map(|(col, tok)| {
            tok.parse::<usize>()
                .map(|v| (col, v))
                .map_err(|_| ParseError::at(line_no, col, format!("invalid {what} `{tok}`")))
        })
        .collect()
}

pub fn parse_smtx(text: &str) -> Result<SmtxStructure, ParseError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| ParseError::at(1, 1, "empty file"))?;
    let dims = numbers(1, header, "dimension")?;
    let [(_, rows), (_, cols), (_, nnz)] = dims[..] else {
        return Err(ParseError::at(
            1,
            1,
            format!("expected `rows, cols, nnz`, found {} fields", dims.len()),
        ));
    };

    let offsets = numbers(2, lines.next().unwrap_or(""), "row offset")?;
    if offsets.len() != rows + 1 {
        let col = offsets.get(rows + 1).map_or(1, |t| t.0);
        return Err(ParseError::at(
            2,
            col,
            format!("expected {} row offsets, found {}", rows + 1, offsets.len()),
        ));
    }
    let indices = numbers(3, lines.next().unwrap_or(""), "column index")?;
    if indices.len() != nnz {
        let col = indices.get(nnz).map_or(1, |t| t.0);
        return Err(ParseError::at(
            3,
            col,
            format!("expected {nnz} column indices, found {}", indices.len()),
        ));
    }
    for (i, rest) in lines.enumerate() {
        if !rest.trim().is_empty() {
            return Err(ParseError::at(4 + i, 1, "unexpected content after column indices"));
        }
    }
    let mut col_indices = Vec::with_capacity(nnz);
    for &(col, v) in &indices {
        let v = u32::try_from(v).map_err(|_| ParseError::at(3, col, format!("column index {v} too large")))?;
        col_indices.push(v);
    }
    let row_offsets: Vec<usize> = offsets.iter().map(|t| t.1).collect();

    let report = validate_parts(rows, cols, &row_offsets, &col_indices, nnz);
    if let Some(v) = report.violations.first() {
        let (line, col) = match *v {
            Violation::FirstOffsetNonZero { .. } => (2, offsets[0].0),
            Violation::DecreasingOffsets { row } => (2, offsets[row + 1].0),
            Violation::FinalOffset { .. } => (2, offsets[rows].0),
            Violation::IndexOutOfRange { position, .. }
            | Violation::NotAscending { position, .. }
            | Violation::DuplicateIndex { position, .. } => (3, indices[position].0),
            _ => (1, 1),
        };
        return Err(ParseError::at(line, col, v.to_string()));
    }
    Ok(SmtxStructure {
        rows,
        cols,
        row_offsets,
        col_indices,
    })
}

/// Reads an SMTX file plus its values sidecar if present.
pub fn read_smtx(path: &Path) -> Result<CsrMatrix<f32>, ReadError> {
    let text = fs::read_to_string(path).map_err(|e| ReadError::io(path, e))?;
    let s = parse_smtx(&text).map_err(|e| ReadError::parse(path, e))?;
    let nnz = s.col_indices.len();
    let side = sidecar_path(path);
    let values = match fs::read(&side) {
        Ok(bytes) => {
            if bytes.len() != 4 * nnz {
                return Err(ReadError::Sidecar {
                    path: side,
                    expected: 4 * nnz,
                    found: bytes.len(),
                });
            }
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect()
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => vec![1.0; nnz],
        Err(e) => return Err(ReadError::io(&side, e)),
    };
    Ok(
        CsrMatrix::from_parts(s.rows, s.cols, s.row_offsets, s.col_indices, values)
            .expect("structure validated while parsing"),
    )
}

/// Writes the structure, and a values sidecar unless every value is 1.0.
/// A stale sidecar is removed so it cannot be picked up on read.
pub fn write_smtx(path: &Path, m: &CsrMatrix<f32>) -> Result<(), ReadError> {
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    out.push_str(&format!("{}, {}, {}\n", m.rows(), m.cols(), m.nnz()));
    out.push_str(&join(&mut m.row_offsets().iter().copied()));
    out.push('\n');
    out.push_str(&join(&mut m.col_indices().iter().map(|&c| c as usize)));
    out.push('\n');
    fs::write(path, out).map_err(|e| ReadError::io(path, e))?;

    let side = sidecar_path(path);
    if m.values().iter().all(|&v| v.to_bits() == 1.0f32.to_bits()) {
        match fs::remove_file(&side) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(ReadError::io(&side, e)),
        }
    } else {
        let mut f = fs::File::create(&side).map_err(|e| ReadError::io(&side, e))?;
        let bytes: Vec<u8> = m.values().iter().flat_map(|v| v.to_le_bytes()).collect();
        f.write_all(&bytes).map_err(|e| ReadError::io(&side, e))
    }
}
