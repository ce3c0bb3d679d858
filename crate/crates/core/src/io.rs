//! Instance JSON files and the per-step solution CSV (`j,t,x,phi`, 1-based).

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;

use crate::model::{BinaryMatrix, CandidateSolution, Instance, ModelError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String, IoError> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    Ok(Instance::from_json(&read_text(path)?)?)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), IoError> {
    let mut text = inst.to_json();
    text.push('\n');
    write_text(path, &text)
}

pub fn solution_to_csv(z: &CandidateSolution) -> String {
    let mut out = String::from("j,t,x,phi\n");
    for j in 0..z.n_jobs() {
        for s in 0..z.horizon() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                j + 1,
                s + 1,
                z.x.get(j, s),
                z.phi.get(j, s)
            );
        }
    }
    out
}

/// Reads a CSV whose header must be exactly `header`. Blank lines and lines
/// starting with `#` are skipped. Rows come back with their 1-based line.
pub fn read_csv<T: DeserializeOwned>(
    text: &str,
    header: &[&str],
) -> Result<Vec<(usize, T)>, IoError> {
    // Positions point at where the reader started, before any blank or
    // comment lines it skipped.
    let line_of = |pos: Option<&csv::Position>| {
        let mut start = pos.map_or(0, |p| p.byte() as usize).min(text.len());
        loop {
            let rest = &text[start..];
            let len = rest.find('\n').map_or(rest.len(), |i| i + 1);
            let line = &rest[..len];
            if len == 0 || !(line == "\n" || line == "\r\n" || line.starts_with('#')) {
                break;
            }
            start += len;
        }
        text[..start].matches('\n').count() + 1
    };
    let csv_err = |e: csv::Error| IoError::Csv {
        line: line_of(e.position()),
        msg: match e.kind() {
            csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
            _ => e.to_string(),
        },
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_err)?.clone();
    if !headers.iter().eq(header.iter().copied()) {
        return Err(IoError::Csv {
            line: line_of(headers.position()),
            msg: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let row = record.deserialize(Some(&headers)).map_err(csv_err)?;
        rows.push((line_of(record.position()), row));
    }
    Ok(rows)
}

/// `z` as a string of `0`/`1` characters.
pub fn bits_to_string(z: &[u8]) -> String {
    z.iter().map(|&b| char::from(b'0' + b)).collect()
}

/// Inverse of [`bits_to_string`]; `None` on any other character.
pub fn bits_from_str(s: &str) -> Option<Vec<u8>> {
    s.bytes()
        .map(|b| match b {
            b'0' => Some(0),
            b'1' => Some(1),
            _ => None,
        })
        .collect()
}

#[derive(Deserialize)]
struct CellRow {
    j: usize,
    t: usize,
    x: u8,
    phi: u8,
}

/// Parses a solution CSV for an instance with `n_jobs x horizon` cells. Every
/// `(j, t)` pair must appear exactly once.
pub fn solution_from_csv(
    text: &str,
    n_jobs: usize,
    horizon: usize,
) -> Result<CandidateSolution, IoError> {
    let mut x = BinaryMatrix::zeros(n_jobs, horizon);
    let mut phi = BinaryMatrix::zeros(n_jobs, horizon);
    let mut seen = vec![false; n_jobs * horizon];
    for (line, row) in read_csv::<CellRow>(text, &["j", "t", "x", "phi"])? {
        let err = |msg: String| IoError::Csv { line, msg };
        let CellRow {
            j,
            t,
            x: xv,
            phi: pv,
        } = row;
        if j == 0 || j > n_jobs || t == 0 || t > horizon {
            return Err(err(format!("cell ({j}, {t}) outside {n_jobs}x{horizon}")));
        }
        if xv > 1 || pv > 1 {
            return Err(err("values must be 0 or 1".into()));
        }
        let k = (j - 1) * horizon + (t - 1);
        if seen[k] {
            return Err(err(format!("duplicate cell ({j}, {t})")));
        }
        seen[k] = true;
        x.set(j - 1, t - 1, xv == 1);
        phi.set(j - 1, t - 1, pv == 1);
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(IoError::Csv {
            line: text.lines().count(),
            msg: format!("missing cell ({}, {})", k / horizon + 1, k % horizon + 1),
        });
    }
    Ok(CandidateSolution { x, phi })
}
