//! Sample matrices, deterministic random streams, and their file formats.
//!
//! Binary layout (little endian): 4-byte magic `ERBS`, `u32` dimension `n`,
//! `u64` draw count, then `n · count` `f64` values in column-major order
//! (all draws of coordinate 0 first).

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"ERBS";

/// Where a sample matrix came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub seed: u64,
}

/// `count` draws of an `n`-vector, stored row-major (one draw per row).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    count: usize,
    values: Vec<f64>,
    pub provenance: Provenance,
}

impl SampleMatrix {
    pub fn new(n: usize, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if n == 0 {
            return Err(crate::error::invalid("n", "dimension must be positive"));
        }
        if !values.len().is_multiple_of(n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: values.len() % n,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::invalid("values", "sample entries must be finite"));
        }
        Ok(Self {
            n,
            count: values.len() / n,
            values,
            provenance,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], provenance: Provenance) -> Result<Self> {
        let n = rows.first().map_or(1, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.len(),
            });
        }
        Self::new(n, rows.concat(), provenance)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Elementwise map, keeping provenance.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            count: self.count,
            values: self.values.iter().map(|v| f(*v)).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Keeps only the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.n);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self {
            n: self.n,
            count: idx.len(),
            values,
            provenance: self.provenance.clone(),
        }
    }

    /// Empirical covariance between coordinates `a` and `b` and its standard
    /// error (from the variance of the centered products).
    pub fn covariance_with_error(&self, a: usize, b: usize) -> (f64, f64) {
        let xa = self.column(a);
        let xb = self.column(b);
        let ma = crate::numeric::mean(&xa);
        let mb = crate::numeric::mean(&xb);
        let prods: Vec<f64> = xa.iter().zip(&xb).map(|(x, y)| (x - ma) * (y - mb)).collect();
        let c = crate::numeric::mean(&prods);
        let se = (crate::numeric::variance(&prods) / self.count as f64).sqrt();
        (c, se)
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&MAGIC)?;
        out.write_all(&(self.n as u32).to_le_bytes())?;
        out.write_all(&(self.count as u64).to_le_bytes())?;
        for j in 0..self.n {
            for r in self.rows() {
                out.write_all(&r[j].to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R, provenance: Provenance) -> Result<Self> {
        let mut header = [0u8; 16];
        input.read_exact(&mut header)?;
        if header[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let count = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let mut values = vec![0.0; n * count];
        let mut buf = [0u8; 8];
        for j in 0..n {
            for i in 0..count {
                input.read_exact(&mut buf)?;
                values[i * n + j] = f64::from_le_bytes(buf);
            }
        }
        Ok(Self {
            n,
            count,
            values,
            provenance,
        })
    }

    /// CSV with header `x1,…,xn`, one draw per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.n).map(|j| format!("x{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for r in self.rows() {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Independent stream for draw `row` under master `seed`. Each row has its
/// own ChaCha stream, so rows can be generated in any order or in parallel.
pub fn row_rng(seed: u64, row: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row);
    rng
}
