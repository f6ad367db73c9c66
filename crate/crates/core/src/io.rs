//! Reading and writing dense matrices as CSV or Matrix Market text.
//!
//! Values are written in the shortest decimal form that parses back to the
//! same `f64` (never more than 17 significant digits), so `read ∘ write` is
//! the identity.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFileFormat {
    /// `%%MatrixMarket matrix array real general`, column-major values.
    MatrixMarketArray,
    /// `%%MatrixMarket matrix coordinate real general`, 1-based triplets.
    MatrixMarketCoordinate,
    Csv,
}

impl MatrixFileFormat {
    /// `.mtx` selects Matrix Market array output; anything else is CSV.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") => Self::MatrixMarketArray,
            _ => Self::Csv,
        }
    }
}

/// Shortest round-trip decimal text for `v`.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn read_matrix(path: &Path, format: Option<MatrixFileFormat>) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(&text, format, path)
}

/// Parses matrix text. `origin` is only used in error messages.
pub fn parse_matrix(text: &str, format: Option<MatrixFileFormat>, origin: &Path) -> Result<DenseMatrix> {
    let is_mm = text.trim_start().starts_with("%%MatrixMarket");
    match format {
        Some(MatrixFileFormat::Csv) => parse_csv(text, origin),
        Some(_) => parse_matrix_market(text, origin),
        None if is_mm => parse_matrix_market(text, origin),
        None => parse_csv(text, origin),
    }
}

pub fn write_matrix(m: &DenseMatrix, path: &Path, format: MatrixFileFormat) -> Result<()> {
    fs::write(path, render_matrix(m, format)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn render_matrix(m: &DenseMatrix, format: MatrixFileFormat) -> String {
    let mut out = String::new();
    match format {
        MatrixFileFormat::Csv => {
            for i in 0..m.rows() {
                let cells: Vec<String> = m.row(i).iter().map(|&v| format_value(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        MatrixFileFormat::MatrixMarketArray => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            let _ = writeln!(out, "{} {}", m.rows(), m.cols());
            for j in 0..m.cols() {
                for i in 0..m.rows() {
                    out.push_str(&format_value(m.get(i, j)));
                    out.push('\n');
                }
            }
        }
        MatrixFileFormat::MatrixMarketCoordinate => {
            let nnz = m.as_slice().iter().filter(|&&v| v != 0.0).count();
            out.push_str("%%MatrixMarket matrix coordinate real general\n");
            let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), nnz);
            for j in 0..m.cols() {
                for i in 0..m.rows() {
                    let v = m.get(i, j);
                    if v != 0.0 {
                        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, format_value(v));
                    }
                }
            }
        }
    }
    out
}

/// Reads a vector stored as a single row or a single column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path, None)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(Error::invalid(
            "vector",
            format!("{} is {}x{}, expected a single row or column", path.display(), m.rows(), m.cols()),
        ));
    }
    Ok(m.into_vec())
}

fn parse_err(origin: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_number(cell: &str, origin: &Path, line: usize) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| parse_err(origin, line, format!("not a number: {cell:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(origin, line, format!("non-finite value {cell:?}")));
    }
    Ok(v)
}

fn parse_csv(text: &str, origin: &Path) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut cols = None;
    let mut rows = 0;
    let mut data = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(parse_err(origin, line, format!("expected {c} columns, found {}", rec.len())));
            }
            _ => {}
        }
        for cell in rec.iter() {
            data.push(parse_number(cell, origin, line)?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(origin, 1, "empty matrix"))?;
    DenseMatrix::new(rows, cols, data)
}

fn parse_matrix_market(text: &str, origin: &Path) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(origin, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(origin, 1, format!("malformed header {header:?}")));
    }
    let coordinate = match tokens[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(parse_err(origin, 1, format!("unsupported layout {other:?}"))),
    };
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(origin, 1, format!("unsupported field {:?}, expected real", tokens[3])));
    }
    if tokens[4] != "general" {
        return Err(parse_err(origin, 1, format!("unsupported symmetry {:?}, expected general", tokens[4])));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| parse_err(origin, 2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(origin, size_line, format!("bad size entry {t:?}"))))
        .collect::<Result<_>>()?;
    let expected = if coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(parse_err(origin, size_line, format!("expected {expected} size fields, found {}", dims.len())));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows == 0 || cols == 0 {
        return Err(parse_err(origin, size_line, "dimensions must be positive"));
    }
    let mut data = vec![0.0; rows * cols];

    if coordinate {
        let nnz = dims[2];
        let mut seen = 0;
        for (line, l) in body {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(parse_err(origin, line, "expected `row col value`"));
            }
            let idx = |s: &str, max: usize| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(v) if (1..=max).contains(&v) => Ok(v - 1),
                    _ => Err(parse_err(origin, line, format!("index {s:?} out of range 1..={max}"))),
                }
            };
            let (i, j) = (idx(t[0], rows)?, idx(t[1], cols)?);
            data[i * cols + j] += parse_number(t[2], origin, line)?;
            seen += 1;
        }
        if seen != nnz {
            return Err(parse_err(origin, size_line, format!("declared {nnz} entries, found {seen}")));
        }
    } else {
        let mut k = 0;
        for (line, l) in body {
            for t in l.split_whitespace() {
                if k >= rows * cols {
                    return Err(parse_err(origin, line, "more values than declared"));
                }
                let v = parse_number(t, origin, line)?;
                let (i, j) = (k % rows, k / rows);
                data[i * cols + j] = v;
                k += 1;
            }
        }
        if k != rows * cols {
            return Err(parse_err(origin, size_line, format!("declared {} values, found {k}", rows * cols)));
        }
    }
    DenseMatrix::new(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<DenseMatrix> {
        parse_matrix(text, None, Path::new("<test>"))
    }

    #[test]
    fn csv_basic() {
        let m = parse("1,2\n3,4\n").unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
    }

    #[test]
    fn matrix_market_array_is_column_major() {
        let m = parse("%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n3\n2\n4\n").unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
    }

    #[test]
    fn matrix_market_coordinate_defaults_to_zero() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n2 3 2\n1 1 5\n2 3 -1.5\n").unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[vec![5.0, 0.0, 0.0], vec![0.0, 0.0, -1.5]]).unwrap());
    }

    #[test]
    fn writer_text() {
        assert_eq!(render_matrix(&DenseMatrix::zeros(1, 1), MatrixFileFormat::Csv), "0\n");
        assert_eq!(render_matrix(&DenseMatrix::identity(2), MatrixFileFormat::Csv), "1,0\n0,1\n");
        assert_eq!(format_value(1e-9), "1e-9");
        assert_eq!(format_value(0.25), "0.25");
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("1,2\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse("1,2\n3,abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse("1,inf\n").is_err());
        assert!(parse("1,NaN\n").is_err());
        assert!(parse("%%MatrixMarket matrix array complex general\n1 1\n1\n").is_err());
        assert!(parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n").is_err());
        assert!(parse("").is_err());
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            rows in 1usize..6,
            cols in 1usize..6,
            seed in proptest::collection::vec(-1e6f64..1e6, 36),
            scale in -40i32..40,
            fmt in 0usize..3,
        ) {
            let m = DenseMatrix::from_fn(rows, cols, |i, j| seed[i * 6 + j] * 10f64.powi(scale)).unwrap();
            let format = [MatrixFileFormat::Csv, MatrixFileFormat::MatrixMarketArray, MatrixFileFormat::MatrixMarketCoordinate][fmt];
            let text = render_matrix(&m, format);
            prop_assert_eq!(parse(&text).unwrap(), m);
        }
    }
}
