//! MVF1 binary snapshots.
//!
//! Layout (little endian): `b"MVF1"`, `u32 n`, `f64 l`, `f64 t`, `u8 kind`
//! (0 scalar, 1 vector), then one or two planes of `n*n` `f64` in
//! row-major order (`j*n + i`).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{Grid2D, ScalarField, VectorField};

pub const MAGIC: &[u8; 4] = b"MVF1";

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotData {
    Scalar(ScalarField),
    Vector(VectorField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub data: SnapshotData,
}

impl Snapshot {
    pub fn scalar(t: f64, f: ScalarField) -> Self {
        Snapshot {
            t,
            data: SnapshotData::Scalar(f),
        }
    }

    pub fn vector(t: f64, v: VectorField) -> Self {
        Snapshot {
            t,
            data: SnapshotData::Vector(v),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        match &self.data {
            SnapshotData::Scalar(f) => f.grid(),
            SnapshotData::Vector(v) => v.grid(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.grid();
        let planes: Vec<&[f64]> = match &self.data {
            SnapshotData::Scalar(f) => vec![f.data()],
            SnapshotData::Vector(v) => vec![&v.x, &v.y],
        };
        let mut out = Vec::with_capacity(25 + 8 * g.len() * planes.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(g.n() as u32).to_le_bytes());
        out.extend_from_slice(&g.l().to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.push(planes.len() as u8 - 1);
        for p in planes {
            for x in p {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < 25 || &bytes[..4] != MAGIC {
            return Err("not an MVF1 file".into());
        }
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let l = f64_at(8);
        let t = f64_at(16);
        let kind = bytes[24];
        let grid = Grid2D::new(n, l).map_err(|e| e.to_string())?;
        let planes = match kind {
            0 => 1,
            1 => 2,
            k => return Err(format!("unknown kind {k}")),
        };
        let len = grid.len();
        if bytes.len() != 25 + 8 * len * planes {
            return Err(format!(
                "expected {} bytes, found {}",
                25 + 8 * len * planes,
                bytes.len()
            ));
        }
        let plane = |p: usize| -> Vec<f64> { (0..len).map(|k| f64_at(25 + 8 * (p * len + k))).collect() };
        let data = if planes == 1 {
            SnapshotData::Scalar(ScalarField::from_raw(grid, plane(0)))
        } else {
            SnapshotData::Vector(VectorField::from_raw(grid, plane(0), plane(1)))
        };
        Ok(Snapshot { t, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::Snapshot {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::Snapshot {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_bytes(&bytes).map_err(|reason| Error::Snapshot {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn into_scalar(self) -> Option<ScalarField> {
        match self.data {
            SnapshotData::Scalar(f) => Some(f),
            SnapshotData::Vector(_) => None,
        }
    }

    pub fn into_vector(self) -> Option<VectorField> {
        match self.data {
            SnapshotData::Vector(v) => Some(v),
            SnapshotData::Scalar(_) => None,
        }
    }
}
