//! Binary embedding container (`.emb`).
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                    |
//! |--------|------|--------------------------|
//! | 0      | 4    | magic `PEMB`             |
//! | 4      | 4    | version (u32, = 1)       |
//! | 8      | 4    | dtype (u32, 1 = f32)     |
//! | 12     | 8    | rows (u64)               |
//! | 20     | 8    | cols (u64)               |
//! | 28     | 4·rows·cols | f32 payload, row-major |
//!
//! Grid embeddings use row index `gy * grid_w + gx`.

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"PEMB";
pub const VERSION: u32 = 1;
pub const DTYPE_F32: u32 = 1;
pub const HEADER_LEN: usize = 28;

/// Tolerance on row norms for containers flagged as normalized.
pub const UNIT_NORM_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingContainer {
    rows: usize,
    cols: usize,
    values: Vec<f32>,
    normalized: bool,
}

impl EmbeddingContainer {
    pub fn new(rows: usize, cols: usize, values: Vec<f32>, normalized: bool) -> Result<Self> {
        let expected = rows.checked_mul(cols).ok_or(Error::DimensionOverflow {
            rows: rows as u64,
            cols: cols as u64,
        })?;
        if expected != values.len() {
            return Err(Error::Shape(format!(
                "{rows} x {cols} container needs {expected} values, got {}",
                values.len()
            )));
        }
        let c = Self {
            rows,
            cols,
            values,
            normalized,
        };
        c.validate()?;
        Ok(c)
    }

    /// Builds a container from equally sized rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R], normalized: bool) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    left: cols,
                    right: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values, normalized)
    }

    fn validate(&self) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: i / self.cols.max(1),
                    col: i % self.cols.max(1),
                });
            }
        }
        if self.normalized {
            for row in 0..self.rows {
                let norm = row_norm(self.row(row));
                if (norm - 1.0).abs() > UNIT_NORM_TOL {
                    return Err(Error::NotNormalized { row, norm });
                }
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// Indices of all-zero rows. These are only legal in unnormalized containers.
    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .filter(|&i| self.row(i).iter().all(|&v| v == 0.0))
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.values.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&DTYPE_F32.to_le_bytes());
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses a container. The normalized flag is not stored on disk; it is
    /// set on load exactly when every row is unit-norm within tolerance.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            let mut found = [0u8; 4];
            let n = bytes.len().min(4);
            found[..n].copy_from_slice(&bytes[..n]);
            return Err(Error::BadMagic { found });
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Truncated {
                expected: HEADER_LEN as u64,
                found: bytes.len() as u64,
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::VersionMismatch(version));
        }
        let dtype = u32_at(8);
        if dtype != DTYPE_F32 {
            return Err(Error::UnsupportedDtype(dtype));
        }
        let (rows, cols) = (u64_at(12), u64_at(20));
        let payload_len = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .filter(|&n| usize::try_from(n).is_ok() && n <= (isize::MAX as u64))
            .ok_or(Error::DimensionOverflow { rows, cols })?;
        let found = (bytes.len() - HEADER_LEN) as u64;
        if found < payload_len {
            return Err(Error::Truncated {
                expected: payload_len,
                found,
            });
        }
        if found > payload_len {
            return Err(Error::TrailingBytes(found - payload_len));
        }
        let values: Vec<f32> = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut c = Self::new(rows as usize, cols as usize, values, false)?;
        c.normalized = c.rows > 0
            && c.iter_rows()
                .all(|r| (row_norm(r) - 1.0).abs() <= UNIT_NORM_TOL);
        Ok(c)
    }
}

fn row_norm(row: &[f32]) -> f64 {
    row.iter()
        .map(|&v| f64::from(v) * f64::from(v))
        .sum::<f64>()
        .sqrt()
}

pub fn write_container(container: &EmbeddingContainer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, container.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_container(path: impl AsRef<Path>) -> Result<EmbeddingContainer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    EmbeddingContainer::from_bytes(&bytes)
}
