use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use sparsekit_core::CsrMatrix;

use super::{tokens, ParseError, ReadError};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

fn parse_header(line: &str) -> Result<Field, ParseError> {
    let toks: Vec<(usize, String)> = tokens(line).map(|(c, t)| (c, t.to_ascii_lowercase())).collect();
    let word = |i: usize| toks.get(i).map(|(c, t)| (*c, t.as_str()));
    match word(0) {
        Some((_, "%%matrixmarket")) => {}
        _ => return Err(ParseError::at(1, 1, "missing `%%MatrixMarket` banner")),
    }
    match word(1) {
        Some((_, "matrix")) => {}
        Some((c, other)) => return Err(ParseError::at(1, c, format!("unsupported object `{other}`"))),
        None => return Err(ParseError::at(1, line.len() + 1, "banner is missing the object")),
    }
    match word(2) {
        Some((_, "coordinate")) => {}
        Some((c, other)) => {
            return Err(ParseError::at(
                1,
                c,
                format!("unsupported storage `{other}`, only coordinate"),
            ))
        }
        None => {
            return Err(ParseError::at(
                1,
                line.len() + 1,
                "banner is missing the storage format",
            ))
        }
    }
    let field = match word(3) {
        Some((_, "real")) => Field::Real,
        Some((_, "integer")) => Field::Integer,
        Some((_, "pattern")) => Field::Pattern,
        Some((c, other)) => return Err(ParseError::at(1, c, format!("unsupported field `{other}`"))),
        None => return Err(ParseError::at(1, line.len() + 1, "banner is missing the field")),
    };
    match word(4) {
        Some((_, "general")) => {}
        Some((c, other)) => {
            return Err(ParseError::at(
                1,
                c,
                format!("unsupported symmetry `{other}`, only general"),
            ))
        }
        None => return Err(ParseError::at(1, line.len() + 1, "banner is missing the symmetry")),
    }
    if let Some((c, _)) = word(5) {
        return Err(ParseError::at(1, c, "unexpected banner field"));
    }
    Ok(field)
}

fn number<T: std::str::FromStr>(line: usize, col: usize, tok: &str, what: &str) -> Result<T, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::at(line, col, format!("invalid {what} `{tok}`")))
}

/// Parses MatrixMarket text. Entries may appear in any order; duplicates
/// and out-of-range coordinates are errors.
pub fn parse_mtx(text: &str) -> Result<CsrMatrix<f32>, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| ParseError::at(1, 1, "empty file"))?;
    let field = parse_header(banner)?;
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));

    let (size_line, size) = body.next().ok_or_else(|| ParseError::at(2, 1, "missing size line"))?;
    let size: Vec<_> = tokens(size).collect();
    if size.len() != 3 {
        let col = size.get(3).map_or(1, |t| t.0);
        return Err(ParseError::at(size_line, col, "expected `rows cols entries`"));
    }
    let rows: usize = number(size_line, size[0].0, size[0].1, "row count")?;
    let cols: usize = number(size_line, size[1].0, size[1].1, "column count")?;
    let nnz: usize = number(size_line, size[2].0, size[2].1, "entry count")?;
    if cols > 0 && u32::try_from(cols - 1).is_err() {
        return Err(ParseError::at(
            size_line,
            size[1].0,
            "too many columns for 32-bit indices",
        ));
    }
    if nnz > rows.saturating_mul(cols) {
        return Err(ParseError::at(size_line, size[2].0, "more entries than positions"));
    }

    let want = if field == Field::Pattern { 2 } else { 3 };
    // (row, col, value, line, column of the row token)
    let mut entries: Vec<(usize, u32, f32, usize, usize)> = Vec::with_capacity(nnz);
    let mut last_line = size_line;
    for (line_no, line) in body {
        last_line = line_no;
        let toks: Vec<_> = tokens(line).collect();
        if toks.len() != want {
            let col = toks.get(want).map_or(line.len() + 1, |t| t.0);
            return Err(ParseError::at(
                line_no,
                col,
                format!("expected {want} fields, found {}", toks.len()),
            ));
        }
        if entries.len() == nnz {
            return Err(ParseError::at(
                line_no,
                1,
                format!("more than the declared {nnz} entries"),
            ));
        }
        let r: usize = number(line_no, toks[0].0, toks[0].1, "row index")?;
        let c: usize = number(line_no, toks[1].0, toks[1].1, "column index")?;
        if r == 0 || r > rows {
            return Err(ParseError::at(
                line_no,
                toks[0].0,
                format!("row index {r} outside 1..={rows}"),
            ));
        }
        if c == 0 || c > cols {
            return Err(ParseError::at(
                line_no,
                toks[1].0,
                format!("column index {c} outside 1..={cols}"),
            ));
        }
        let v = match field {
            Field::Pattern => 1.0,
            Field::Integer => number::<i64>(line_no, toks[2].0, toks[2].1, "integer value")? as f32,
            Field::Real => number::<f32>(line_no, toks[2].0, toks[2].1, "value")?,
        };
        entries.push((r - 1, (c - 1) as u32, v, line_no, toks[0].0));
    }
    if entries.len() != nnz {
        return Err(ParseError::at(
            last_line + 1,
            1,
            format!("expected {nnz} entries, found {}", entries.len()),
        ));
    }

    entries.sort_by_key(|e| (e.0, e.1, e.3));
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
        let dup = &w[1];
        return Err(ParseError::at(
            dup.3,
            dup.4,
            format!(
                "duplicate entry ({}, {}), first seen on line {}",
                dup.0 + 1,
                dup.1 + 1,
                w[0].3
            ),
        ));
    }
    let mut offsets = vec![0usize; rows + 1];
    for e in &entries {
        offsets[e.0 + 1] += 1;
    }
    for r in 0..rows {
        offsets[r + 1] += offsets[r];
    }
    let indices = entries.iter().map(|e| e.1).collect();
    let values = entries.iter().map(|e| e.2).collect();
    Ok(CsrMatrix::from_parts(rows, cols, offsets, indices, values).expect("entries sorted and deduplicated"))
}

pub fn read_mtx(path: &Path) -> Result<CsrMatrix<f32>, ReadError> {
    let text = fs::read_to_string(path).map_err(|e| ReadError::io(path, e))?;
    parse_mtx(&text).map_err(|e| ReadError::parse(path, e))
}

/// Writes `coordinate real general`; values use the shortest text that
/// parses back to the same `f32`.
pub fn write_mtx_to<W: Write>(mut out: W, m: &CsrMatrix<f32>) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (r, c, v) in m.triplets() {
        writeln!(out, "{} {} {:?}", r + 1, c + 1, v)?;
    }
    out.flush()
}

pub fn write_mtx(path: &Path, m: &CsrMatrix<f32>) -> Result<(), ReadError> {
    let f = fs::File::create(path).map_err(|e| ReadError::io(path, e))?;
    write_mtx_to(BufWriter::new(f), m).map_err(|e| ReadError::io(path, e))
}
