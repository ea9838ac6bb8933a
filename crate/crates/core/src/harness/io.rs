//! Plain-text matrices and the CSV/JSON report files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::TrialRecord;
use crate::error::{Error, Result};
use crate::matcore::Matrix;

/// Parses a matrix: a header line `rows cols`, then the entries in
/// column-major order separated by whitespace.
pub fn parse_matrix(text: &str) -> Result<Matrix<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad dimension {t:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("header must be `rows cols`, got {header:?}")));
    };
    let data: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad entry {t:?}"))))
        .collect::<Result<_>>()?;
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries for a {rows}x{cols} matrix, found {}",
            rows * cols,
            data.len()
        )));
    }
    Matrix::from_col_major(rows, cols, data)
}

/// Formats a matrix so that [`parse_matrix`] recovers it exactly.
pub fn format_matrix(a: &Matrix<f64>) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for v in a.as_slice() {
        out.push_str(&format!("{v:?}\n"));
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<Matrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn write_matrix(path: &Path, a: &Matrix<f64>) -> Result<()> {
    fs::write(path, format_matrix(a)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// One output row. Failed trials produce a single row named `error` with
/// empty numeric fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub trial: usize,
    pub name: String,
    pub norm: Option<String>,
    pub i: Option<usize>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub satisfied: bool,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub q: usize,
    pub gamma: f64,
    pub guess: String,
    pub seed: u64,
    pub wall_ms: f64,
}

pub fn rows(records: &[TrialRecord]) -> Vec<Row> {
    let mut out = Vec::new();
    for rec in records {
        let c = &rec.context;
        let base = Row {
            trial: rec.trial,
            name: String::new(),
            norm: None,
            i: None,
            lhs: None,
            rhs: None,
            slack: None,
            satisfied: false,
            m: c.m,
            n: c.n,
            k: c.k,
            s: c.s,
            q: c.q,
            gamma: c.gamma,
            guess: c.guess.clone(),
            seed: c.seed,
            wall_ms: rec.wall_ms,
        };
        if let Some(err) = &rec.error {
            out.push(Row { name: format!("error: {err}"), ..base });
            continue;
        }
        for r in &rec.reports {
            out.push(Row {
                name: r.name.clone(),
                norm: r.norm.map(|n| n.as_str().to_string()),
                i: r.index,
                lhs: Some(r.lhs),
                rhs: Some(r.rhs),
                slack: Some(r.slack),
                satisfied: r.satisfied,
                ..base.clone()
            });
        }
    }
    out
}

pub fn write_csv<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for row in rows(records) {
        writer.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[TrialRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_json<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &rows(records)).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_csv(text: &str) -> Result<Vec<Row>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_text_round_trip() {
        let a = Matrix::from_rows(&[&[1.0, 0.1 + 0.2], &[-3e-300, 7.0], &[f64::MAX, 2.5]]);
        let b = parse_matrix(&format_matrix(&a)).unwrap();
        assert_eq!(a, b);
        let c = parse_matrix("2 2\n1 2\n3 4\n").unwrap();
        assert_eq!(c[(0, 1)], 3.0);
        assert_eq!(c[(1, 0)], 2.0);
    }

    #[test]
    fn malformed_matrices() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2\n1 2").is_err());
        assert!(parse_matrix("2 2\n1 2 3").is_err());
        assert!(parse_matrix("1 1\nx").is_err());
    }
}
