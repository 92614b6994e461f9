//! Plain-text matrix files.
//!
//! The first line is `n m`, followed by `n` lines of `m` whitespace-separated
//! entries. Rational entries are written as `p/q` (or `p`), floats as shortest
//! round-trip decimals. Blank lines and lines starting with `#` are ignored on
//! input.

use std::io::{BufRead, Write};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::numerics::{format_f64, format_rational, parse_rational, Matrix, Scalar};

fn write_with<T: Scalar>(
    out: &mut impl Write,
    a: &Matrix<T>,
    fmt: impl Fn(&T) -> String,
) -> Result<()> {
    writeln!(out, "{} {}", a.rows(), a.cols())?;
    for r in 0..a.rows() {
        let line: Vec<String> = a.row(r).iter().map(&fmt).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_rational_matrix(out: &mut impl Write, a: &Matrix<BigRational>) -> Result<()> {
    write_with(out, a, format_rational)
}

pub fn write_f64_matrix(out: &mut impl Write, a: &Matrix<f64>) -> Result<()> {
    write_with(out, a, |v| format_f64(*v))
}

/// Reads a matrix exactly; decimal entries are parsed as binary64 and then
/// promoted without rounding.
pub fn read_matrix(input: impl BufRead) -> Result<Matrix<BigRational>> {
    let mut lines = input.lines().map(|l| l.map_err(Error::from)).filter(|l| {
        l.as_ref()
            .map(|s| {
                let t = s.trim();
                !t.is_empty() && !t.starts_with('#')
            })
            .unwrap_or(true)
    });
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Parse(format!("bad header {header:?}")))
        })
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!(
            "header must be `n m`, got {header:?}"
        )));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {}", r + 1)))??;
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(parse_rational(tok)?);
        }
        if data.len() - before != cols {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {cols}",
                r + 1,
                data.len() - before
            )));
        }
    }
    if let Some(extra) = lines.next() {
        return Err(Error::Parse(format!("trailing content {:?}", extra?)));
    }
    Matrix::new(rows, cols, data)
}

pub fn read_matrix_file(path: &std::path::Path) -> Result<Matrix<BigRational>> {
    let f = std::fs::File::open(path)?;
    read_matrix(std::io::BufReader::new(f))
}
