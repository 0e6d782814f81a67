//! On-disk dataset layout: `manifest.json` next to `data.bin`.
//!
//! The payload is raw little-endian `f64` in `[trajectory][time][component][cell]`
//! order; the manifest carries shape, metadata and a SHA-256 of the payload.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{BoundaryCondition, Dataset, Grid1D, IcParams, Provenance, StateField, Trajectory};
use crate::physics::SystemSpec;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PAYLOAD_FILE: &str = "data.bin";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub a: f64,
    pub b: f64,
    pub n_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub t0: f64,
    pub ic_params: IcParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub system: SystemSpec,
    pub bc: BoundaryCondition,
    pub grid: GridInfo,
    /// `[n_traj, snapshots, n_comp, n_cells]`.
    pub dims: [usize; 4],
    pub dt: f64,
    pub seed: u64,
    pub noise_level: f64,
    pub config_hash: String,
    pub endianness: String,
    pub checksum: String,
    pub trajectories: Vec<TrajectoryMeta>,
}

fn payload(dataset: &Dataset) -> Vec<u8> {
    let mut bytes = Vec::new();
    for traj in dataset.trajectories() {
        for s in traj.snapshots() {
            for v in s.values().iter() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    bytes
}

fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `dataset` into directory `dir` (created if missing).
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<DatasetManifest> {
    fs::create_dir_all(dir)?;
    let bytes = payload(dataset);
    let g = dataset.grid();
    let prov = dataset.provenance();
    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        system: dataset.system(),
        bc: dataset.bc(),
        grid: GridInfo { a: g.a(), b: g.b(), n_cells: g.n_cells() },
        dims: [dataset.trajectories().len(), dataset.len_steps() + 1, dataset.n_comp(), g.n_cells()],
        dt: dataset.dt(),
        seed: prov.seed,
        noise_level: prov.noise_level,
        config_hash: prov.config_hash.clone(),
        endianness: "little".into(),
        checksum: checksum(&bytes),
        trajectories: dataset
            .trajectories()
            .iter()
            .map(|t| TrajectoryMeta { t0: t.initial().time(), ic_params: t.ic_params().clone() })
            .collect(),
    };
    fs::write(dir.join(PAYLOAD_FILE), &bytes)?;
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::format(format!("unsupported dataset format version {}", manifest.format_version)));
    }
    if manifest.endianness != "little" {
        return Err(Error::format(format!("payload endianness '{}' is not little-endian", manifest.endianness)));
    }
    Ok(manifest)
}

/// Reads a dataset written by [`write_dataset`], verifying shape and checksum.
pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let m = read_manifest(dir)?;
    let bytes = fs::read(dir.join(PAYLOAD_FILE))?;
    let [n_traj, n_snap, n_comp, n_cells] = m.dims;
    let expected = n_traj * n_snap * n_comp * n_cells * 8;
    if bytes.len() != expected {
        return Err(Error::format(format!(
            "payload holds {} bytes but dims {:?} need {expected}",
            bytes.len(),
            m.dims
        )));
    }
    if checksum(&bytes) != m.checksum {
        return Err(Error::format("payload checksum mismatch"));
    }
    if m.trajectories.len() != n_traj || n_comp != m.system.n_comp() || n_cells != m.grid.n_cells || n_snap == 0 {
        return Err(Error::format("manifest metadata disagrees with its dims"));
    }
    let grid = Grid1D::new(m.grid.a, m.grid.b, m.grid.n_cells)?;
    let mut values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let mut trajectories = Vec::with_capacity(n_traj);
    for meta in &m.trajectories {
        let mut snaps = Vec::with_capacity(n_snap);
        for l in 0..n_snap {
            let v: Vec<f64> = values.by_ref().take(n_comp * n_cells).collect();
            let arr = ndarray::Array2::from_shape_vec((n_comp, n_cells), v).expect("payload length checked");
            snaps.push(StateField::new(grid, arr, meta.t0 + l as f64 * m.dt)?);
        }
        trajectories.push(Trajectory::new(snaps, m.dt, meta.ic_params.clone())?);
    }
    let prov = Provenance { config_hash: m.config_hash, seed: m.seed, noise_level: m.noise_level };
    Dataset::new(trajectories, m.system, m.bc, prov)
}
