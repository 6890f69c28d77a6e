//! Sparse matrix file formats.
//!
//! - SMTX: three text lines (`rows, cols, nnz`, then row offsets, then
//!   column indices). Values are read from an optional `.vals` sidecar of
//!   little-endian `f32`; without one every value is 1.0.
//! - MatrixMarket: `coordinate` storage with `real`, `integer` or `pattern`
//!   fields and `general` symmetry.

mod mtx;
mod smtx;

use std::fmt;
use std::path::{Path, PathBuf};

use sparsekit_core::CsrMatrix;
use thiserror::Error;

pub use mtx::{parse_mtx, read_mtx, write_mtx, write_mtx_to};
pub use smtx::{parse_smtx, read_smtx, sidecar_path, write_smtx, SmtxStructure};

/// Location of a problem in a text file, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{position}: {message}")]
pub struct ParseError {
    pub position: Position,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            position: Position { line, column },
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{}: values sidecar holds {found} bytes, expected {expected}", path.display())]
    Sidecar {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{}: unknown matrix format (expected .smtx or .mtx)", path.display())]
    UnknownFormat { path: PathBuf },
}

impl ReadError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, source: ParseError) -> Self {
        Self::Parse {
            path: path.to_owned(),
            source,
        }
    }

    /// Line/column of a parse failure, when there is one.
    pub fn position(&self) -> Option<Position> {
        match self {
            Self::Parse { source, .. } => Some(source.position),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Smtx,
    MatrixMarket,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "smtx" => Some(Self::Smtx),
            "mtx" => Some(Self::MatrixMarket),
            _ => None,
        }
    }
}

/// Reads a matrix, picking the format from the file extension.
pub fn read_matrix(path: &Path) -> Result<CsrMatrix<f32>, ReadError> {
    match Format::from_path(path) {
        Some(Format::Smtx) => read_smtx(path),
        Some(Format::MatrixMarket) => read_mtx(path),
        None => Err(ReadError::UnknownFormat { path: path.to_owned() }),
    }
}

/// Writes a matrix, picking the format from the file extension.
pub fn write_matrix(path: &Path, m: &CsrMatrix<f32>) -> Result<(), ReadError> {
    match Format::from_path(path) {
        Some(Format::Smtx) => write_smtx(path, m),
        Some(Format::MatrixMarket) => write_mtx(path, m),
        None => Err(ReadError::UnknownFormat { path: path.to_owned() }),
    }
}

/// Whitespace-separated tokens of a line with their 1-based columns.
pub(crate) fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let start = rest.find(|c: char| !c.is_whitespace() && c != ',')?;
        let tail = &rest[start..];
        let len = tail.find(|c: char| c.is_whitespace() || c == ',').unwrap_or(tail.len());
        let tok = &tail[..len];
        let column = line[..offset + start].chars().count() + 1;
        offset += start + len;
        rest = &tail[len..];
        Some((column, tok))
    })
}
