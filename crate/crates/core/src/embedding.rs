//! Dense row-major node embedding matrix and its text file format.
//!
//! File format: a header line `N d`, then `N` lines holding an external id
//! followed by `d` space-separated decimal floats.

use std::io::{BufRead, Write};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_vec(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::DimensionMismatch {
                expected: rows * dim,
                got: data.len(),
            });
        }
        Ok(EmbeddingMatrix { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get_row(&self, i: usize) -> Option<&[f64]> {
        (i < self.rows).then(|| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn cosine(&self, a: usize, b: usize) -> f64 {
        cosine(self.row(a), self.row(b))
    }

    /// Write with one row per external id; `ids.len()` must equal `rows()`.
    pub fn write<W: Write, S: AsRef<str>>(&self, ids: &[S], mut out: W) -> Result<()> {
        if ids.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: ids.len(),
            });
        }
        writeln!(out, "{} {}", self.rows, self.dim)?;
        for (i, id) in ids.iter().enumerate() {
            write!(out, "{}", id.as_ref())?;
            for x in self.row(i) {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Read a matrix and the external id of each row.
    pub fn read<R: BufRead>(reader: R) -> Result<(Vec<String>, Self)> {
        let mut lines = reader.lines().enumerate();
        let (rows, dim) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::Parse {
                    line: 1,
                    reason: "missing header".into(),
                });
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse {
                    line: i + 1,
                    reason: format!("header: {e}"),
                })
            };
            if parts.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: "header must be `N d`".into(),
                });
            }
            break (parse(parts[0])?, parse(parts[1])?);
        };
        let mut ids = Vec::with_capacity(rows);
        let mut data = Vec::with_capacity(rows * dim);
        for (i, line) in lines {
            let line = line?;
            let mut toks = line.split_whitespace();
            let Some(id) = toks.next() else { continue };
            let before = data.len();
            for t in toks {
                data.push(t.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    reason: format!("{t:?}: {e}"),
                })?);
            }
            if data.len() - before != dim {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!("expected {dim} values, found {}", data.len() - before),
                });
            }
            ids.push(id.to_string());
        }
        if ids.len() != rows {
            return Err(Error::Parse {
                line: 1,
                reason: format!("header announces {rows} rows, found {}", ids.len()),
            });
        }
        Ok((ids, EmbeddingMatrix { rows, dim, data }))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    // sqrt of the product keeps cosine(a, a) exactly 1
    let norms = dot(a, a) * dot(b, b);
    if norms == 0.0 {
        0.0
    } else {
        dot(a, b) / norms.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_roundtrip_is_exact() {
        let m = EmbeddingMatrix::from_vec(2, 3, vec![0.1, -2.5e-9, 3.0, 1.0 / 3.0, 0.0, -7.25]).unwrap();
        let mut buf = Vec::new();
        m.write(&["alice", "bob"], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2 3\nalice 0.1 "));
        let (ids, back) = EmbeddingMatrix::read(buf.as_slice()).unwrap();
        assert_eq!(ids, vec!["alice", "bob"]);
        assert_eq!(back, m);
    }

    #[test]
    fn read_rejects_short_rows() {
        let err = EmbeddingMatrix::read("1 2\na 0.5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(EmbeddingMatrix::read("2 1\na 0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn cosine_of_parallel_rows() {
        let m = EmbeddingMatrix::from_vec(3, 2, vec![1.0, 2.0, 2.0, 4.0, 0.0, 0.0]).unwrap();
        assert!((m.cosine(0, 1) - 1.0).abs() < 1e-15);
        assert_eq!(m.cosine(0, 2), 0.0);
    }
}
