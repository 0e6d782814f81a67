//! Synthetic observation data: generation, windowing, noise and storage.

mod io;
mod sampler;

pub use io::{read_dataset, read_manifest, write_dataset, DatasetManifest, GridInfo, TrajectoryMeta, FORMAT_VERSION, MANIFEST_FILE, PAYLOAD_FILE};
pub use sampler::{fixed_ic, sample_ic, IcSamplerSpec};

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{BoundaryCondition, Dataset, Grid1D, Provenance, Trajectory};
use crate::physics::SystemSpec;
use crate::solver::{solve_reference, CflPolicy, NumericalFlux};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

const STREAM_WINDOWS: u64 = 1 << 40;
const STREAM_NOISE: u64 = 2 << 40;

/// Deterministic generator for one purpose/trajectory of a seeded run.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Gaussian observation noise with per-component standard deviation
/// `level * mean(|u_c|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level: f64,
}

impl NoiseSpec {
    pub fn new(level: f64) -> Result<Self> {
        if !(level >= 0.0 && level.is_finite()) {
            return Err(Error::invalid(format!("noise level must be >= 0, got {level}")));
        }
        Ok(Self { level })
    }
}

/// Everything needed to regenerate a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub n_cells: usize,
    pub dt: f64,
    pub n_traj: usize,
    /// Transitions per training trajectory.
    pub l: usize,
    /// Recorded transitions before windowing; `None` records `l` directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default)]
    pub noise: f64,
    pub bc: BoundaryCondition,
    /// Numerical flux of the data solver; defaults per system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<NumericalFlux>,
    /// CFL number for adaptive solver steps; `None` steps at `dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    pub system: SystemSpec,
    pub sampler: IcSamplerSpec,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported config schema version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.system.validate()?;
        self.sampler.validate()?;
        if !self.sampler.fits(self.system) {
            return Err(Error::invalid(format!("sampler {:?} does not fit system {:?}", self.sampler, self.system)));
        }
        if self.n_traj == 0 || self.l == 0 {
            return Err(Error::invalid("n_traj and l must be at least 1"));
        }
        if let Some(m) = self.m {
            if self.l > m {
                return Err(Error::invalid(format!("window length l = {} exceeds m = {m}", self.l)));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        NoiseSpec::new(self.noise)?;
        self.flux().check_compatible(self.system)?;
        self.policy().validate()?;
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        let (a, b) = self.sampler.domain();
        Grid1D::new(a, b, self.n_cells)
    }

    pub fn flux(&self) -> NumericalFlux {
        self.flux.unwrap_or_else(|| NumericalFlux::default_for(self.system))
    }

    pub fn policy(&self) -> CflPolicy {
        match self.cfl {
            Some(cfl) => CflPolicy::Number { cfl },
            None => CflPolicy::FixedDt { dt: self.dt },
        }
    }

    /// Transitions recorded by the solver.
    pub fn recorded_steps(&self) -> usize {
        self.m.unwrap_or(self.l)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::format(format!("config serialization: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    fn provenance(&self, noise_level: f64) -> Result<Provenance> {
        Ok(Provenance { config_hash: self.hash()?, seed: self.seed, noise_level })
    }
}

/// Solves one reference trajectory per sampled initial condition, recording
/// `m` (or `l`) transitions. Trajectory `k` draws from its own stream, so the
/// result does not depend on the thread count.
pub fn generate_dataset(config: &RunConfig) -> Result<Dataset> {
    config.validate()?;
    let grid = config.grid()?;
    let steps = config.recorded_steps();
    let t_end = steps as f64 * config.dt;
    let trajectories: Vec<Trajectory> = (0..config.n_traj)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(config.seed, k as u64);
            let (ic, params) = sample_ic(&config.sampler, &grid, &mut rng)?;
            let traj = solve_reference(&ic, config.system, config.bc, config.flux(), t_end, config.policy(), config.dt)
                .map_err(|e| match e {
                    Error::BlowUp { time, reason } => {
                        Error::BlowUp { time, reason: format!("trajectory {k} ({params:?}): {reason}") }
                    }
                    other => other,
                })?;
            Ok(traj.with_ic_params(params))
        })
        .collect::<Result<_>>()?;
    log::info!(
        "generated {} trajectories x {} snapshots of {} on {} cells",
        trajectories.len(),
        steps + 1,
        config.system.name(),
        grid.n_cells()
    );
    Dataset::new(trajectories, config.system, config.bc, config.provenance(0.0)?)
}

/// One random window of `l` transitions per trajectory. The start index is
/// uniform on `0..=M-l` and is recorded as the `window_start` parameter.
pub fn subsample_windows<R: Rng + ?Sized>(dataset: &Dataset, l: usize, rng: &mut R) -> Result<Dataset> {
    let m = dataset.len_steps();
    if l == 0 || l > m {
        return Err(Error::invalid(format!("window length {l} must lie in 1..={m}")));
    }
    let dt = dataset.dt();
    let mut out = Vec::with_capacity(dataset.trajectories().len());
    for traj in dataset.trajectories() {
        let start = rng.random_range(0..=m - l);
        let t0 = traj.initial().time() + start as f64 * dt;
        let snapshots = traj.snapshots()[start..=start + l]
            .iter()
            .enumerate()
            .map(|(i, s)| s.with_values(s.values().clone(), t0 + i as f64 * dt))
            .collect::<Result<Vec<_>>>()?;
        let mut params = traj.ic_params().clone();
        params.insert("window_start".into(), start as f64);
        out.push(Trajectory::new(snapshots, dt, params)?);
    }
    dataset.with_trajectories(out)
}

/// Per-component `level * mean(|u_c|)` over every trajectory, snapshot and cell.
pub fn noise_sigma(dataset: &Dataset, spec: NoiseSpec) -> Vec<f64> {
    let n_comp = dataset.n_comp();
    let mut sum = vec![0.0; n_comp];
    let mut count = 0usize;
    for traj in dataset.trajectories() {
        for s in traj.snapshots() {
            for (c, row) in s.values().outer_iter().enumerate() {
                sum[c] += row.iter().map(|v| v.abs()).sum::<f64>();
            }
            count += s.n_cells();
        }
    }
    sum.into_iter().map(|s| spec.level * s / count as f64).collect()
}

/// Adds i.i.d. Gaussian noise to every stored value, including `t = 0`.
/// Level zero returns an exact copy without touching `rng`.
pub fn add_noise<R: Rng + ?Sized>(dataset: &Dataset, spec: NoiseSpec, rng: &mut R) -> Result<Dataset> {
    NoiseSpec::new(spec.level)?;
    let mut prov = dataset.provenance().clone();
    prov.noise_level = spec.level;
    if spec.level == 0.0 {
        return Ok(dataset.clone().with_provenance(prov));
    }
    let normals = noise_sigma(dataset, spec)
        .into_iter()
        .map(|s| Normal::new(0.0, s).map_err(|e| Error::invalid(format!("noise distribution: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(dataset.trajectories().len());
    for traj in dataset.trajectories() {
        let mut snaps = Vec::with_capacity(traj.snapshots().len());
        for s in traj.snapshots() {
            let mut v = s.values().clone();
            for (c, mut row) in v.outer_iter_mut().enumerate() {
                for x in row.iter_mut() {
                    *x += normals[c].sample(rng);
                }
            }
            snaps.push(s.with_values(v, s.time())?);
        }
        out.push(Trajectory::new(snaps, traj.dt(), traj.ic_params().clone())?);
    }
    Ok(dataset.with_trajectories(out)?.with_provenance(prov))
}

/// The full pipeline: solve, window to `l` when `m` is set, then add noise.
pub fn build_dataset(config: &RunConfig) -> Result<Dataset> {
    let mut data = generate_dataset(config)?;
    if config.m.is_some() {
        data = subsample_windows(&data, config.l, &mut stream_rng(config.seed, STREAM_WINDOWS))?;
    }
    add_noise(&data, NoiseSpec::new(config.noise)?, &mut stream_rng(config.seed, STREAM_NOISE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::StateField;
    use std::f64::consts::PI;

    fn burgers(n_traj: usize, l: usize, m: Option<usize>) -> RunConfig {
        RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 3,
            n_cells: 32,
            dt: 0.01,
            n_traj,
            l,
            m,
            noise: 0.0,
            bc: BoundaryCondition::Periodic,
            flux: None,
            cfl: None,
            system: SystemSpec::Burgers,
            sampler: IcSamplerSpec::burgers_sine(),
        }
    }

    fn sine_dataset(n: usize, n_snap: usize) -> Dataset {
        let g = Grid1D::new(0.0, 2.0 * PI, n).unwrap();
        let snaps = (0..n_snap)
            .map(|l| StateField::from_fn(g, 1, l as f64 * 0.01, |x| vec![x.sin()]).unwrap())
            .collect();
        let traj = Trajectory::new(snaps, 0.01, Default::default()).unwrap();
        let prov = Provenance { config_hash: String::new(), seed: 0, noise_level: 0.0 };
        Dataset::new(vec![traj], SystemSpec::Burgers, BoundaryCondition::Periodic, prov).unwrap()
    }

    #[test]
    fn single_pair_dataset() {
        let d = generate_dataset(&burgers(1, 1, None)).unwrap();
        assert_eq!(d.trajectories().len(), 1);
        assert_eq!(d.trajectories()[0].snapshots().len(), 2);
    }

    #[test]
    fn generation_is_deterministic_and_seed_sensitive() {
        let cfg = burgers(3, 4, Some(6));
        let a = build_dataset(&cfg).unwrap();
        assert_eq!(a, build_dataset(&cfg).unwrap());
        assert_eq!(a.len_steps(), 4);
        let mut other = cfg.clone();
        other.seed = 4;
        assert_ne!(a.trajectories()[0].initial(), build_dataset(&other).unwrap().trajectories()[0].initial());
        assert_eq!(a.provenance().config_hash, cfg.hash().unwrap());
    }

    #[test]
    fn coarse_config_solves_on_coarse_grid() {
        let mut cfg = burgers(1, 2, None);
        cfg.n_cells = 16;
        assert_eq!(generate_dataset(&cfg).unwrap().grid().n_cells(), 16);
    }

    #[test]
    fn config_validation() {
        let mut cfg = burgers(1, 5, Some(4));
        assert!(cfg.validate().is_err());
        cfg.m = Some(5);
        assert!(cfg.validate().is_ok());
        cfg.flux = Some(NumericalFlux::EngquistOsher);
        cfg.system = SystemSpec::shallow_water(1.0).unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = burgers(0, 1, None);
        assert!(cfg.validate().is_err());
        cfg.n_traj = 1;
        cfg.schema_version = 99;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = burgers(2, 3, Some(10));
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn window_bounds() {
        let d = sine_dataset(8, 301);
        let mut rng = stream_rng(1, 0);
        for _ in 0..50 {
            let w = subsample_windows(&d, 20, &mut rng).unwrap();
            let start = w.trajectories()[0].ic_params()["window_start"];
            assert!((0.0..=280.0).contains(&start));
            assert_eq!(w.len_steps(), 20);
            assert!((w.trajectories()[0].initial().time() - start * 0.01).abs() < 1e-12);
        }
        let same = subsample_windows(&d, 300, &mut rng).unwrap();
        assert_eq!(same.trajectories()[0].ic_params()["window_start"], 0.0);
        for (a, b) in same.trajectories()[0].snapshots().iter().zip(d.trajectories()[0].snapshots()) {
            assert_eq!(a.values(), b.values());
        }
        assert!(subsample_windows(&d, 301, &mut rng).is_err());
    }

    #[test]
    fn noise_sigma_of_sine() {
        let d = sine_dataset(4096, 2);
        let s = noise_sigma(&d, NoiseSpec { level: 1.0 });
        assert!((s[0] - 2.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn zero_noise_is_bit_identical() {
        let d = sine_dataset(64, 3);
        let n = add_noise(&d, NoiseSpec { level: 0.0 }, &mut stream_rng(0, 0)).unwrap();
        assert_eq!(n, d);
    }

    #[test]
    fn noise_statistics_and_purity() {
        let d = sine_dataset(1024, 100);
        let before = d.clone();
        let n = add_noise(&d, NoiseSpec { level: 1.0 }, &mut stream_rng(5, 0)).unwrap();
        assert_eq!(d, before);
        let sigma = noise_sigma(&d, NoiseSpec { level: 1.0 })[0];
        let diffs: Vec<f64> = n.trajectories()[0]
            .snapshots()
            .iter()
            .zip(d.trajectories()[0].snapshots())
            .flat_map(|(a, b)| (a.values() - b.values()).into_iter())
            .collect();
        assert!(diffs.len() >= 100_000);
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
        assert!((var.sqrt() / sigma - 1.0).abs() < 0.02);
        assert_eq!(n.provenance().noise_level, 1.0);
    }
}
