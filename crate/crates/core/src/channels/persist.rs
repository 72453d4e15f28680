//! JSON persistence for Choi matrices.
//!
//! ```json
//! {"d_in": 4, "d_out": 4,
//!  "choi": [[[re, im], ...], ...],
//!  "meta": {"family": "depolarizing", "alpha": 0.5, "objective": 0.25, "residuals": {...}}}
//! ```
//!
//! Numbers are written with shortest round-trip formatting, so a
//! write/read cycle reproduces every entry bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::linalg::{DenseMatrix, C64};

use super::choi::{ChoiMatrix, CptpReport};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<CptpReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub d_in: usize,
    pub d_out: usize,
    pub choi: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub meta: ChannelMeta,
}

impl ChannelFile {
    pub fn from_choi(j: &ChoiMatrix, meta: ChannelMeta) -> Self {
        let m = j.matrix();
        let choi = (0..m.rows())
            .map(|r| {
                (0..m.cols())
                    .map(|c| [m[(r, c)].re, m[(r, c)].im])
                    .collect()
            })
            .collect();
        Self {
            d_in: j.d_in(),
            d_out: j.d_out(),
            choi,
            meta,
        }
    }

    /// Rebuilds the Choi matrix, validating it as a channel within `tol`.
    pub fn to_choi(&self, tol: f64) -> Result<ChoiMatrix> {
        let n = self.d_in * self.d_out;
        if self.choi.len() != n {
            return Err(mismatch("channel file rows", n, self.choi.len()));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in &self.choi {
            if row.len() != n {
                return Err(mismatch("channel file columns", n, row.len()));
            }
            data.extend(row.iter().map(|&[re, im]| C64::new(re, im)));
        }
        ChoiMatrix::with_tolerance(
            self.d_out,
            self.d_in,
            DenseMatrix::from_vec(n, n, data)?,
            tol,
        )
    }
}

pub fn write_channel(path: &Path, j: &ChoiMatrix, meta: ChannelMeta) -> Result<()> {
    let text = serde_json::to_string(&ChannelFile::from_choi(j, meta))?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a channel file; the matrix must pass the CPTP checks at `tol`.
pub fn read_channel(path: &Path, tol: f64) -> Result<(ChoiMatrix, ChannelMeta)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ChannelFile = serde_json::from_str(&text)?;
    let j = file.to_choi(tol)?;
    Ok((j, file.meta))
}
