//! Command-line front end: `generate`, `train`, `predict`, `evaluate` and `reference`.
//!
//! Every command writes its resolved configuration into `--out` next to its
//! results. Input files are identified there by checksum, not by path.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checkpoint::Checkpoint;
use crate::data::{build_dataset, fixed_ic, read_dataset, read_manifest, write_dataset, RunConfig};
use crate::diagnostics::{emit_report, evaluate, Report};
use crate::error::{Error, Result};
use crate::field::{Dataset, Grid1D, IcParams, Provenance, StateField, Trajectory};
use crate::model::ModelForm;
use crate::nn::AdamConfig;
use crate::presets::{figure_setup, preset, sampler_for};
use crate::solver::{solve_reference, CflPolicy, NumericalFlux};
use crate::train::{select_lambda2, train, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "consflux", version, about = "Learn flux functions of 1-D conservation laws from snapshot data")]
pub struct Cli {
    /// Worker threads for trajectory-parallel work (results do not depend on it).
    #[arg(long, global = true, env = "CONSFLUX_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve, window and perturb a training dataset.
    Generate(GenerateArgs),
    /// Train a CFN, nCFN or nCFN-reg model on a dataset.
    Train(TrainArgs),
    /// Roll a trained model out from an initial condition.
    Predict(PredictArgs),
    /// Compare a prediction with a reference trajectory.
    Evaluate(EvaluateArgs),
    /// Solve a fine-grid reference trajectory for evaluation.
    Reference(ReferenceArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Named experiment, e.g. burgers-caseI or euler-caseIII.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub preset: Option<String>,
    /// TOML run configuration (such as the config.toml echoed by a previous run).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_traj: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Noise level a (standard deviation a * mean|u|).
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// cfn, ncfn or ncfn-reg.
    #[arg(long)]
    pub model: Option<ModelForm>,
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Training configuration echoed by a previous run; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Regularization weight for ncfn-reg, or `auto` to select it.
    #[arg(long)]
    pub lambda2: Option<Lambda2>,
    #[arg(long)]
    pub hidden_layers: Option<usize>,
    #[arg(long)]
    pub hidden_width: Option<usize>,
    /// Trajectories per optimizer step (default: all).
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Epochs per candidate when `--lambda2 auto`.
    #[arg(long)]
    pub probe_epochs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lambda2 {
    Value(f64),
    Auto,
}

impl std::str::FromStr for Lambda2 {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Lambda2::Auto);
        }
        s.parse::<f64>().map(Lambda2::Value).map_err(|e| format!("expected a number or 'auto': {e}"))
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset directory, or one of burgers-figure, swe-figure, euler-figure.
    #[arg(long)]
    pub ic: String,
    /// Trajectory of the dataset whose first snapshot is the initial state.
    #[arg(long, default_value_t = 0)]
    pub traj: usize,
    /// Rollout duration; must be a multiple of the checkpoint's dt.
    #[arg(long)]
    pub t_end: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Prediction directory written by `predict`.
    #[arg(long)]
    pub prediction: PathBuf,
    /// Reference dataset directory, typically written by `reference`.
    #[arg(long)]
    pub reference: PathBuf,
    /// Trajectory of the reference dataset to compare against.
    #[arg(long, default_value_t = 0)]
    pub traj: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    /// Dataset directory, or one of burgers-figure, swe-figure, euler-figure.
    #[arg(long)]
    pub ic: String,
    #[arg(long, default_value_t = 0)]
    pub traj: usize,
    /// Cells of the reference grid (default: four times the dataset grid, or 2048).
    #[arg(long)]
    pub n: Option<usize>,
    /// Final time, measured from t = 0.
    #[arg(long)]
    pub t_end: f64,
    /// Snapshot spacing (default: the dataset dt, or the preset dt).
    #[arg(long)]
    pub record_dt: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    pub cfl: f64,
    /// engquist_osher or hlle (default per system).
    #[arg(long)]
    pub flux: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    if cli.threads == 0 {
        return Err(Error::InvalidInput("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Reference(a) => cmd_reference(&a),
    })
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn to_toml<T: Serialize>(v: &T) -> Result<String> {
    toml::to_string(v).map_err(|e| Error::Format(format!("config serialization: {e}")))
}

fn from_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    toml::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn resolve_run_config(a: &GenerateArgs) -> Result<RunConfig> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => RunConfig::load(path)?,
        _ => return Err(Error::InvalidInput("give exactly one of --preset and --config".into())),
    };
    if let Some(n) = a.n {
        cfg.n_cells = n;
    }
    if let Some(n) = a.n_traj {
        cfg.n_traj = n;
    }
    if let Some(l) = a.l {
        cfg.l = l;
    }
    if let Some(m) = a.m {
        cfg.m = Some(m);
    }
    if let Some(noise) = a.noise {
        cfg.noise = noise;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let cfg = resolve_run_config(a)?;
    let data = build_dataset(&cfg)?;
    let manifest = write_dataset(&data, &a.out)?;
    fs::write(a.out.join("config.toml"), cfg.to_toml()?)?;
    log::info!(
        "wrote {} trajectories ({} snapshots each) to {} (sha256 {})",
        manifest.dims[0],
        manifest.dims[1],
        a.out.display(),
        manifest.checksum
    );
    Ok(())
}

/// Resolved training configuration as echoed to `train_config.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainEcho {
    /// Checksum of the training data payload.
    pub data_checksum: String,
    /// `auto` when the weight was selected by probe runs.
    pub lambda2_mode: String,
    pub train: TrainConfig,
}

pub fn resolve_train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(path) => from_toml::<TrainEcho>(path)?.train,
        None => TrainConfig::default(),
    };
    if let Some(form) = a.model {
        cfg.form = form;
    }
    match (cfg.form, a.lambda2) {
        (ModelForm::NcfnReg { .. }, Some(Lambda2::Value(l))) => cfg.form = ModelForm::NcfnReg { lambda2: l },
        (ModelForm::NcfnReg { .. }, None) if a.model.is_some() => cfg.form = ModelForm::NcfnReg { lambda2: 1e-2 },
        (ModelForm::NcfnReg { .. }, _) => {}
        (form, Some(_)) => {
            return Err(Error::InvalidInput(format!("--lambda2 only applies to ncfn-reg, not {form}")));
        }
        (_, None) => {}
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = a.epochs {
        cfg.epochs = epochs;
    }
    if let Some(lr) = a.lr {
        cfg.adam = AdamConfig { lr, ..cfg.adam };
    }
    if a.hidden_layers.is_some() || a.hidden_width.is_some() {
        let layers = a.hidden_layers.unwrap_or(cfg.hidden.len());
        let width = a.hidden_width.or(cfg.hidden.first().copied()).unwrap_or(64);
        cfg.hidden = vec![width; layers];
    }
    if let Some(b) = a.batch_size {
        cfg.batch_size = Some(b);
    }
    if let Some(c) = a.checkpoint_every {
        cfg.checkpoint_every = Some(c);
    }
    if let Some(p) = a.probe_epochs {
        cfg.probe_epochs = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mut cfg = resolve_train_config(a)?;
    let manifest = read_manifest(&a.data)?;
    let data = read_dataset(&a.data)?;
    fs::create_dir_all(&a.out)?;
    let auto = a.lambda2 == Some(Lambda2::Auto);
    if auto {
        let (best, probes) = select_lambda2(&cfg, &data)?;
        let mut csv = String::from("lambda2,held_out_residual\n");
        for (l, r) in &probes {
            csv.push_str(&format!("{l:.16e},{r:.16e}\n"));
        }
        fs::write(a.out.join("lambda2_probes.csv"), csv)?;
        log::info!("selected lambda2 = {best}");
        cfg.form = ModelForm::NcfnReg { lambda2: best };
    }
    let echo = TrainEcho {
        data_checksum: manifest.checksum,
        lambda2_mode: if auto { "auto".into() } else { "fixed".into() },
        train: cfg.clone(),
    };
    fs::write(a.out.join("train_config.toml"), to_toml(&echo)?)?;
    let outcome = train(&cfg, &data, Some(&a.out))?;
    if outcome.skipped_steps > 0 {
        log::warn!("{} optimizer steps were skipped", outcome.skipped_steps);
    }
    log::info!("final loss {:?}", outcome.final_loss);
    Ok(())
}

/// Resolved prediction request as echoed to `predict.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictEcho {
    pub checkpoint_checksum: String,
    /// Preset name, or `dataset:<checksum>`.
    pub ic: String,
    pub traj: usize,
    pub t_end: f64,
    pub steps: usize,
}

fn is_dir(s: &str) -> bool {
    Path::new(s).is_dir()
}

/// Initial state and its parameters from a dataset directory or a figure preset.
fn initial_state(ic: &str, traj: usize, grid_hint: Option<&Grid1D>) -> Result<(StateField, IcParams, String)> {
    if is_dir(ic) {
        let manifest = read_manifest(Path::new(ic))?;
        let data = read_dataset(Path::new(ic))?;
        let t = data.trajectories().get(traj).ok_or_else(|| {
            Error::InvalidInput(format!("dataset has {} trajectories, --traj {traj} is out of range", manifest.dims[0]))
        })?;
        return Ok((t.initial().clone(), t.ic_params().clone(), format!("dataset:{}", manifest.checksum)));
    }
    let (_, _, spec, params) = figure_setup(ic)?;
    let grid = match grid_hint {
        Some(g) => *g,
        None => {
            let (a, b) = spec.domain();
            Grid1D::new(a, b, 512)?
        }
    };
    Ok((fixed_ic(&spec, &grid, &params)?, params, ic.to_string()))
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("--t-end must be >= 0, got {t_end}")));
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::InvalidInput(format!("--t-end {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

pub fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let model = &ck.model;
    let steps = step_count(a.t_end, ck.dt)?;
    let (u0, params, ic_id) = if is_dir(&a.ic) {
        let data = read_manifest(Path::new(&a.ic))?;
        if data.system != ck.system || data.bc != model.bc() {
            return Err(Error::InvalidInput("initial-condition dataset and checkpoint disagree in system or boundary condition".into()));
        }
        initial_state(&a.ic, a.traj, None)?
    } else {
        let (sys, bc, _, _) = figure_setup(&a.ic)?;
        if sys != ck.system || bc != model.bc() {
            return Err(Error::InvalidInput(format!("preset {} does not match the checkpoint's system", a.ic)));
        }
        initial_state(&a.ic, a.traj, Some(model.grid()))?
    };
    if !u0.grid().same_as(model.grid()) {
        return Err(Error::InvalidInput(format!(
            "initial condition has {} cells on ({}, {}) but the checkpoint expects {} cells on ({}, {})",
            u0.n_cells(),
            u0.grid().a(),
            u0.grid().b(),
            model.grid().n_cells(),
            model.grid().a(),
            model.grid().b()
        )));
    }
    let echo = PredictEcho {
        checkpoint_checksum: sha256_file(&a.checkpoint)?,
        ic: ic_id,
        traj: a.traj,
        t_end: a.t_end,
        steps,
    };
    let echo_text = to_toml(&echo)?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("predict.toml"), &echo_text)?;

    let mut snaps = vec![u0.clone()];
    let mut failure = None;
    let mut u = u0.values().clone();
    for step in 1..=steps {
        let next = model
            .step_values(&u, ck.dt)
            .and_then(|v| u0.with_values(v, u0.time() + step as f64 * ck.dt));
        match next {
            Ok(field) => {
                u = field.values().clone();
                snaps.push(field);
            }
            Err(e) => {
                failure = Some(Error::RolloutFailed { step, reason: e.to_string() });
                break;
            }
        }
    }
    let prov = Provenance {
        config_hash: hex::encode(Sha256::digest(echo_text.as_bytes())),
        seed: ck.meta.seed,
        noise_level: 0.0,
    };
    let traj = Trajectory::new(snaps, ck.dt, params)?;
    let data = Dataset::new(vec![traj], ck.system, model.bc(), prov)?;
    write_dataset(&data, &a.out)?;
    match failure {
        Some(e) => {
            eprintln!("partial trajectory ({} snapshots) written to {}", data.len_steps() + 1, a.out.display());
            Err(e)
        }
        None => Ok(()),
    }
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let pm = read_manifest(&a.prediction)?;
    let rm = read_manifest(&a.reference)?;
    let pred = read_dataset(&a.prediction)?;
    let reference = read_dataset(&a.reference)?;
    if pm.system != rm.system {
        return Err(Error::InvalidInput("prediction and reference are for different systems".into()));
    }
    let ref_traj = reference.trajectories().get(a.traj).ok_or_else(|| {
        Error::InvalidInput(format!("reference has {} trajectories, --traj {} is out of range", rm.dims[0], a.traj))
    })?;
    let mut report: Report = evaluate(&pred.trajectories()[0], ref_traj, pred.system(), pred.bc())?;
    report.config.insert("prediction_checksum".into(), pm.checksum);
    report.config.insert("reference_checksum".into(), rm.checksum);
    report.config.insert("reference_traj".into(), a.traj.to_string());
    report.config.insert("system".into(), pred.system().name().into());
    report.config.insert("bc".into(), pred.bc().as_str().into());
    emit_report(&report, &a.out)?;
    fs::write(a.out.join("evaluate.toml"), to_toml(&report.config)?)?;
    Ok(())
}

/// Resolved reference request as echoed to `reference.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEcho {
    pub ic: String,
    pub traj: usize,
    pub n_cells: usize,
    pub t_end: f64,
    pub record_dt: f64,
    pub cfl: f64,
    pub flux: NumericalFlux,
}

pub fn cmd_reference(a: &ReferenceArgs) -> Result<()> {
    let (sys, bc, spec, params, n_default, dt_default, ic_id) = if is_dir(&a.ic) {
        let m = read_manifest(Path::new(&a.ic))?;
        let meta = m.trajectories.get(a.traj).ok_or_else(|| {
            Error::InvalidInput(format!("dataset has {} trajectories, --traj {} is out of range", m.dims[0], a.traj))
        })?;
        let mut params = meta.ic_params.clone();
        params.remove("window_start");
        (m.system, m.bc, sampler_for(m.system), params, 4 * m.grid.n_cells, m.dt, format!("dataset:{}", m.checksum))
    } else {
        let (sys, bc, spec, params) = figure_setup(&a.ic)?;
        let dt = preset(&format!("{}-caseI", a.ic.trim_end_matches("-figure")))?.dt;
        (sys, bc, spec, params, 2048, dt, a.ic.clone())
    };
    let flux = match &a.flux {
        Some(name) => serde_json::from_value::<NumericalFlux>(serde_json::Value::String(name.clone()))
            .map_err(|_| Error::InvalidInput(format!("unknown numerical flux '{name}'")))?,
        None => NumericalFlux::default_for(sys),
    };
    let (lo, hi) = spec.domain();
    let n = a.n.unwrap_or(n_default);
    let record_dt = a.record_dt.unwrap_or(dt_default);
    let ic = fixed_ic(&spec, &Grid1D::new(lo, hi, n)?, &params)?;
    let echo = ReferenceEcho { ic: ic_id, traj: a.traj, n_cells: n, t_end: a.t_end, record_dt, cfl: a.cfl, flux };
    let echo_text = to_toml(&echo)?;
    let traj = solve_reference(&ic, sys, bc, flux, a.t_end, CflPolicy::Number { cfl: a.cfl }, record_dt)?;
    let prov = Provenance { config_hash: hex::encode(Sha256::digest(echo_text.as_bytes())), seed: 0, noise_level: 0.0 };
    let data = Dataset::new(vec![traj.with_ic_params(params)], sys, bc, prov)?;
    write_dataset(&data, &a.out)?;
    fs::write(a.out.join("reference.toml"), echo_text)?;
    Ok(())
}
