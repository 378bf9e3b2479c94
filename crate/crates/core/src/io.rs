//! File formats.
//!
//! * Real matrices: CSV, one row per line, comma-separated decimals.
//! * Complex matrices: JSON `{"re": [[...]], "im": [[...]]}`.
//! * Shape databases: JSON lines. The first line is the header
//!   `{"group": "E", "n": 2, "l": 3, "feature_map": "full"}`; each following
//!   line is `{"id": "...", "matrix": [[...]]}` (or `{"re": .., "im": ..}`).
//!
//! Decimals are written with 17 significant digits so doubles round-trip.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcore::{Complex, ComplexMatrix, RealMatrix};
use crate::metrics::{Configuration, GroupAction, GroupKind};
use crate::search::{FeatureMap, ShapeDatabase};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Domain(#[from] crate::Error),
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> FileError {
    FileError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest decimal that parses back to `x`; scientific outside `[1e-5, 1e16)`.
pub fn format_shortest(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn parse_real_csv(text: &str) -> Result<RealMatrix, FileError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, field)| {
                let field = field.trim();
                let x: f64 = field
                    .parse()
                    .map_err(|_| parse_err(lineno + 1, col + 1, format!("not a number: {field:?}")))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(parse_err(lineno + 1, col + 1, "non-finite value"))
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    lineno + 1,
                    row.len().min(first.len()) + 1,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    matrix_from_rows(&rows, 1)
}

fn matrix_from_rows(rows: &[Vec<f64>], line: usize) -> Result<RealMatrix, FileError> {
    let Some(first) = rows.first() else {
        return Err(parse_err(line, 1, "empty matrix"));
    };
    if first.is_empty() {
        return Err(parse_err(line, 1, "empty matrix"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != first.len() {
            return Err(parse_err(line, 1, format!("row {} has {} entries, expected {}", i + 1, r.len(), first.len())));
        }
        if let Some(j) = r.iter().position(|x| !x.is_finite()) {
            return Err(parse_err(line, j + 1, format!("non-finite entry in row {}", i + 1)));
        }
    }
    Ok(RealMatrix::from_fn(rows.len(), first.len(), |i, j| rows[i][j]))
}

pub fn format_real_csv(m: &RealMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_f64(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// JSON shape of a matrix: nested rows, or separate real and imaginary rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Real(Vec<Vec<f64>>),
    Complex { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl MatrixJson {
    pub fn from_configuration(c: &Configuration) -> Self {
        let rows = |m: &RealMatrix| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        match c {
            Configuration::Real(m) => MatrixJson::Real(rows(m)),
            Configuration::Complex(m) => MatrixJson::Complex {
                re: rows(&m.map(|z| z.re)),
                im: rows(&m.map(|z| z.im)),
            },
        }
    }

    /// `line` is used for error positions.
    pub fn into_configuration(self, line: usize) -> Result<Configuration, FileError> {
        match self {
            MatrixJson::Real(rows) => Ok(Configuration::Real(matrix_from_rows(&rows, line)?)),
            MatrixJson::Complex { re, im } => {
                let re = matrix_from_rows(&re, line)?;
                let im = matrix_from_rows(&im, line)?;
                if re.shape() != im.shape() {
                    return Err(parse_err(line, 1, "re and im shapes differ"));
                }
                Ok(Configuration::Complex(ComplexMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
                    Complex::new(re[(i, j)], im[(i, j)])
                })))
            }
        }
    }
}

fn json_err(line: usize, e: serde_json::Error) -> FileError {
    parse_err(line + e.line().saturating_sub(1), e.column(), e.to_string())
}

pub fn parse_complex_json(text: &str) -> Result<ComplexMatrix, FileError> {
    match serde_json::from_str::<MatrixJson>(text).map_err(|e| json_err(1, e))? {
        m @ MatrixJson::Complex { .. } => match m.into_configuration(1)? {
            Configuration::Complex(z) => Ok(z),
            Configuration::Real(_) => unreachable!(),
        },
        MatrixJson::Real(_) => Err(parse_err(1, 1, "expected an object with \"re\" and \"im\"")),
    }
}

pub fn format_complex_json(m: &ComplexMatrix) -> String {
    let json = MatrixJson::from_configuration(&Configuration::Complex(m.clone()));
    serde_json::to_string(&json).expect("matrix serializes") + "\n"
}

/// CSV for real matrices; JSON (first non-blank character `{`) for complex ones.
pub fn parse_matrix(text: &str) -> Result<Configuration, FileError> {
    if text.trim_start().starts_with('{') {
        parse_complex_json(text).map(Configuration::Complex)
    } else {
        parse_real_csv(text).map(Configuration::Real)
    }
}

pub fn format_matrix(c: &Configuration) -> String {
    match c {
        Configuration::Real(m) => format_real_csv(m),
        Configuration::Complex(m) => format_complex_json(m),
    }
}

pub fn read_text(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn read_matrix(path: &Path) -> Result<Configuration, FileError> {
    parse_matrix(&read_text(path)?)
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), FileError> {
    let io = |source| FileError::Io {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatabaseHeader {
    pub group: GroupKind,
    pub n: usize,
    pub l: usize,
    pub feature_map: FeatureMap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatabaseLine {
    id: String,
    matrix: MatrixJson,
}

pub fn format_database(db: &ShapeDatabase) -> String {
    let (n, l) = db.shape();
    let header = DatabaseHeader {
        group: db.group().kind,
        n,
        l,
        feature_map: db.feature_map(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for rec in db.records() {
        let line = DatabaseLine {
            id: rec.id.clone(),
            matrix: MatrixJson::from_configuration(&rec.matrix),
        };
        out.push_str(&serde_json::to_string(&line).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parse a database file and recompute all features.
pub fn parse_database(text: &str) -> Result<ShapeDatabase, FileError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, 1, "missing header line"))?;
    let header: DatabaseHeader = serde_json::from_str(header).map_err(|e| json_err(hl + 1, e))?;
    let mut entries = Vec::new();
    for (i, line) in lines {
        let rec: DatabaseLine = serde_json::from_str(line).map_err(|e| json_err(i + 1, e))?;
        let m = rec.matrix.into_configuration(i + 1)?;
        if m.shape() != (header.n, header.l) {
            return Err(parse_err(
                i + 1,
                1,
                format!("record {:?} is {:?}, header says {}x{}", rec.id, m.shape(), header.n, header.l),
            ));
        }
        entries.push((rec.id, m));
    }
    let group = GroupAction::new(header.group, header.n);
    Ok(ShapeDatabase::build(group, header.l, header.feature_map, entries)?)
}

pub fn read_database(path: &Path) -> Result<ShapeDatabase, FileError> {
    parse_database(&read_text(path)?)
}
