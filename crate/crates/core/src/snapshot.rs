//! Field snapshots: `<stem>.bin` holds little-endian `f64` samples in
//! row-major order (last axis fastest), `<stem>.json` the metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FchError, Result};
use crate::field::ScalarField;
use crate::grid::{Boundary, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub dim: usize,
    pub counts: Vec<usize>,
    pub lengths: Vec<f64>,
    pub bc: Boundary,
    pub time: f64,
    pub label: String,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

pub fn encode(u: &ScalarField) -> Vec<u8> {
    u.values().iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode(bytes: &[u8], grid: &std::sync::Arc<Grid>) -> Result<ScalarField> {
    if bytes.len() != 8 * grid.len() {
        return Err(FchError::Shape(format!(
            "snapshot holds {} bytes, grid needs {}",
            bytes.len(),
            8 * grid.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    ScalarField::new(grid.clone(), values)
}

/// Writes both files; returns their paths.
pub fn write(stem: &Path, u: &ScalarField, time: f64, label: &str) -> Result<(PathBuf, PathBuf)> {
    let g = u.grid();
    let meta = SnapshotMeta {
        dim: g.dim(),
        counts: g.counts().to_vec(),
        lengths: g.lengths().to_vec(),
        bc: g.bc(),
        time,
        label: label.to_string(),
    };
    let (bin, json) = paths(stem);
    fs::write(&bin, encode(u))?;
    fs::write(&json, serde_json::to_string_pretty(&meta)?)?;
    Ok((bin, json))
}

pub fn read(stem: &Path) -> Result<(ScalarField, SnapshotMeta)> {
    let (bin, json) = paths(stem);
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(json)?)?;
    if meta.dim != meta.counts.len() || meta.dim != meta.lengths.len() {
        return Err(FchError::Shape("snapshot metadata is inconsistent".into()));
    }
    let grid = Grid::new(&meta.lengths, &meta.counts, meta.bc)?;
    let u = decode(&fs::read(bin)?, &grid)?;
    Ok((u, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::smooth_field;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join(format!("fch-snap-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let g = Grid::new(&[2.0, 3.0], &[8, 12], Boundary::PeriodicFourier).unwrap();
        let u = smooth_field(&g, 1, 4, 3, 0.1, 0.5);
        let stem = dir.join("state_000001");
        write(&stem, &u, 0.25, "test").unwrap();
        let (v, meta) = read(&stem).unwrap();
        assert_eq!(u, v);
        assert_eq!(meta.time, 0.25);
        assert_eq!(meta.counts, vec![8, 12]);
        // row-major: second sample is the next point along the last axis
        let bytes = fs::read(stem.with_extension("bin")).unwrap();
        let second = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let expect = u.values()[1];
        assert_eq!(second, expect);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn size_mismatch() {
        let g = Grid::new(&[1.0], &[8], Boundary::NeumannCosine).unwrap();
        assert!(decode(&[0u8; 63], &g).is_err());
        assert!(decode(&[0u8; 64], &g).is_ok());
    }
}
