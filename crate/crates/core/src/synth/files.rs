//! On-disk formats for simulation outputs.
//!
//! Density file: one ASCII header line `n_r n_z d_r d_z\n`, then
//! `n_r·n_z` little-endian `f64` values in row-major order (rows are
//! radial). Feature file: two lines per time step, shock coefficients then
//! edge coefficients, space-separated decimals.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EnsembleConfig, SynthError};
use crate::model::{SimulationRecord, Validate};
use crate::{CylGrid, DensityField, FeatureSet};

fn malformed(path: &Path, reason: impl Into<String>) -> SynthError {
    SynthError::MalformedFile {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn write_density(field: &DensityField, path: impl AsRef<Path>) -> Result<(), SynthError> {
    let g = &field.grid;
    let mut buf = format!("{} {} {} {}\n", g.n_r, g.n_z, g.d_r, g.d_z).into_bytes();
    buf.reserve(field.values.len() * 8);
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_density(path: impl AsRef<Path>) -> Result<DensityField, SynthError> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let newline = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| malformed(path, "missing header line"))?;
    let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| malformed(path, "header is not text"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n_r, n_z, d_r, d_z] = fields[..] else {
        return Err(malformed(path, format!("header needs 4 fields, got {}", fields.len())));
    };
    let n_r: usize = n_r.parse().map_err(|_| malformed(path, "bad n_r"))?;
    let n_z: usize = n_z.parse().map_err(|_| malformed(path, "bad n_z"))?;
    let d_r: f64 = d_r.parse().map_err(|_| malformed(path, "bad d_r"))?;
    let d_z: f64 = d_z.parse().map_err(|_| malformed(path, "bad d_z"))?;
    let grid = CylGrid::new(n_r, n_z, d_r, d_z).map_err(|e| malformed(path, e.to_string()))?;
    let payload = &bytes[newline + 1..];
    if payload.len() != grid.len() * 8 {
        return Err(malformed(
            path,
            format!(
                "header declares {} values but payload holds {} bytes",
                grid.len(),
                payload.len()
            ),
        ));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    DensityField::new(grid, values).map_err(|e| malformed(path, e.to_string()))
}

pub fn write_features(steps: &[FeatureSet], path: impl AsRef<Path>) -> Result<(), SynthError> {
    let mut out = Vec::new();
    for f in steps {
        for coeffs in [&f.shock, &f.edge] {
            let line: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Feature sets in time order (index 0 is time step 1).
pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<FeatureSet>, SynthError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().collect();
    if lines.is_empty() {
        return Err(malformed(path, "empty feature file"));
    }
    if !lines.len().is_multiple_of(2) {
        return Err(malformed(path, format!("odd number of lines ({})", lines.len())));
    }
    let parse_line = |i: usize| -> Result<Vec<f64>, SynthError> {
        lines[i]
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| malformed(path, format!("line {}: bad number `{t}`", i + 1)))
            })
            .collect()
    };
    let mut steps = Vec::with_capacity(lines.len() / 2);
    for i in (0..lines.len()).step_by(2) {
        let f = FeatureSet {
            shock: parse_line(i)?,
            edge: parse_line(i + 1)?,
        };
        f.validate()
            .map_err(|e| malformed(path, format!("line {}: {e}", i + 1)))?;
        if let Some(first) = steps.first().map(|s: &FeatureSet| s.shock.len()) {
            if f.shock.len() != first {
                return Err(malformed(path, format!("line {}: coefficient count changes", i + 1)));
            }
        }
        steps.push(f);
    }
    Ok(steps)
}

/// Listing of a generated ensemble; paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: EnsembleConfig,
    pub simulations: Vec<SimulationRecord>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl Manifest {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SynthError> {
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    /// Read a manifest and make every file path absolute.
    pub fn read(path: impl AsRef<Path>) -> Result<Self, SynthError> {
        let path = path.as_ref();
        let mut manifest: Manifest =
            serde_json::from_slice(&fs::read(path)?).map_err(|e| malformed(path, e.to_string()))?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
            .canonicalize()?;
        let resolve = |p: &str| -> String {
            let p = PathBuf::from(p);
            if p.is_absolute() { p } else { base.join(p) }
                .to_string_lossy()
                .into_owned()
        };
        for s in &mut manifest.simulations {
            s.density_path = resolve(&s.density_path);
            s.feature_path = resolve(&s.feature_path);
        }
        Ok(manifest)
    }
}
