//! File formats shared by all drivers: the matrix JSON record and the run
//! manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{QuantError, Result};
use crate::fock::FockOperator;

/// Row-major complex matrix as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub label: String,
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    pub metadata: BTreeMap<String, Value>,
}

impl MatrixRecord {
    pub fn from_operator(op: &FockOperator, metadata: BTreeMap<String, Value>) -> Self {
        let m = op.matrix();
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let v = m[(i, j)];
                entries.push([v.re, v.im]);
            }
        }
        Self {
            label: op.label().to_string(),
            dim,
            entries,
            metadata,
        }
    }

    pub fn to_operator(&self) -> Result<FockOperator> {
        if self.entries.len() != self.dim * self.dim {
            return Err(QuantError::GridMismatch {
                expected: self.dim * self.dim,
                got: self.entries.len(),
            });
        }
        let m = nalgebra::DMatrix::from_row_iterator(
            self.dim,
            self.dim,
            self.entries.iter().map(|&[re, im]| num_complex::Complex64::new(re, im)),
        );
        FockOperator::new(self.label.clone(), m)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}

/// Config echo, crate version, tolerances and the list of files written.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, config: Value) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            tolerances: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

/// Writes serializable rows to a CSV file with a header row.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
