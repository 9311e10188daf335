//! Dataset CSV: header `y,x1,...,xp`, one observation per row, LF endings.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};

use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn write_csv<T: Real, W: Write>(d: &Dataset<T>, mut out: W) -> Result<()> {
    let p = d.p();
    let mut header = String::from("y");
    for j in 1..=p {
        header.push_str(&format!(",x{j}"));
    }
    header.push('\n');
    out.write_all(header.as_bytes())?;
    let mut line = String::new();
    for (i, row) in d.x().rows().into_iter().enumerate() {
        line.clear();
        // Display for floats is positional and round-trips exactly.
        line.push_str(&d.y()[i].to_string());
        for v in row {
            line.push(',');
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a dataset. Rows and columns in diagnostics are 1-based, with the
/// header as row 1.
pub fn read_csv<T: Real, R: Read>(input: R) -> Result<Dataset<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| csv_err(1, 0, e.to_string()))?
        .clone();
    let cols = headers.len();
    if cols < 2 {
        return Err(csv_err(1, cols, "expected header y,x1,...,xp".into()));
    }
    if &headers[0] != "y" {
        return Err(csv_err(
            1,
            1,
            format!("expected 'y', found '{}'", &headers[0]),
        ));
    }
    for j in 1..cols {
        let want = format!("x{j}");
        if headers[j] != want {
            return Err(csv_err(
                1,
                j + 1,
                format!("expected '{want}', found '{}'", &headers[j]),
            ));
        }
    }
    let p = cols - 1;
    let mut y = Vec::new();
    let mut x = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let row = r + 2;
        let rec = rec.map_err(|e| csv_err(row, 0, e.to_string()))?;
        if rec.len() != cols {
            return Err(csv_err(
                row,
                rec.len().min(cols) + 1,
                format!("expected {cols} fields, found {}", rec.len()),
            ));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| csv_err(row, c + 1, format!("not a number: '{field}'")))?;
            if !v.is_finite() {
                return Err(csv_err(row, c + 1, format!("non-finite value '{field}'")));
            }
            if c == 0 {
                y.push(T::lit(v));
            } else {
                x.push(T::lit(v));
            }
        }
    }
    let n = y.len();
    let x = Array2::from_shape_vec((n, p), x).map_err(|e| Error::Dimension(e.to_string()))?;
    Dataset::new(Array1::from(y), x)
}

fn csv_err(row: usize, column: usize, message: String) -> Error {
    Error::Csv {
        row,
        column,
        message,
    }
}
