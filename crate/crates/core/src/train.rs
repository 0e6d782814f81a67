//! Recurrent-loss training with an optional conservation penalty.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, TrainingMeta};
use crate::data::stream_rng;
use crate::error::{Error, Result};
use crate::field::{BoundaryCondition, Dataset, StateField, Trajectory};
use crate::model::{rollout, rollout_tape, ModelForm, ModelSpec, DEFAULT_HIDDEN};
use crate::nn::{adam_step, grad_scalar, AdamConfig, AdamState, GradientBundle, MlpVars, Tape, Var};
use crate::physics::{physical_flux, SystemSpec};
use crate::solver::lin_comb;

const STREAM_INIT: u64 = 3 << 40;
const STREAM_BATCHES: u64 = 4 << 40;

/// Default penalty weights tried by [`select_lambda2`].
pub const DEFAULT_LAMBDA2_GRID: [f64; 5] = [1.0, 1e-2, 1e-4, 1e-6, 5e-2];

/// Time-averaged physical fluxes through the two domain ends, one row per interval.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFluxSeries {
    /// `[L, n_comp]`, flux entering at `a`.
    pub fa: Array2<f64>,
    /// `[L, n_comp]`, flux leaving at `b`.
    pub fb: Array2<f64>,
}

impl BoundaryFluxSeries {
    pub fn zeros(len: usize, n_comp: usize) -> Self {
        Self { fa: Array2::zeros((len, n_comp)), fb: Array2::zeros((len, n_comp)) }
    }

    pub fn len(&self) -> usize {
        self.fa.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum_{k<l} (F_a - F_b) dt` for `l = 1..=L`, shape `[L, n_comp]`.
    fn cumulative(&self, dt: f64) -> Array2<f64> {
        let mut out = Array2::zeros(self.fa.raw_dim());
        let mut acc = vec![0.0; self.fa.ncols()];
        for l in 0..self.len() {
            for c in 0..acc.len() {
                acc[c] += (self.fa[[l, c]] - self.fb[[l, c]]) * dt;
                out[[l, c]] = acc[c];
            }
        }
        out
    }
}

/// Boundary fluxes from the observed first/last cells, trapezoid rule in time.
/// Periodic problems get zeros (the two ends cancel).
pub fn boundary_flux_series(traj: &Trajectory, sys: SystemSpec, bc: BoundaryCondition) -> Result<BoundaryFluxSeries> {
    let len = traj.len_steps();
    let n_comp = traj.n_comp();
    let mut series = BoundaryFluxSeries::zeros(len, n_comp);
    if bc == BoundaryCondition::Periodic {
        return Ok(series);
    }
    let last = traj.grid().n_cells() - 1;
    let flux_at = |s: &StateField, j: usize| {
        physical_flux(&s.cell(j), sys).map_err(|e| match e {
            Error::Inadmissible(m) => Error::Inadmissible(format!("boundary state at t = {}: {m}", s.time())),
            other => other,
        })
    };
    let snaps = traj.snapshots();
    let mut left = flux_at(&snaps[0], 0)?;
    let mut right = flux_at(&snaps[0], last)?;
    for l in 0..len {
        let (nl, nr) = (flux_at(&snaps[l + 1], 0)?, flux_at(&snaps[l + 1], last)?);
        for c in 0..n_comp {
            series.fa[[l, c]] = 0.5 * (left[c] + nl[c]);
            series.fb[[l, c]] = 0.5 * (right[c] + nr[c]);
        }
        (left, right) = (nl, nr);
    }
    Ok(series)
}

/// Per-component target totals `dx * sum(u_0) + sum_{k<l} (F_a - F_b) dt`, one `[n_comp, 1]` per `l`.
fn remainder_targets(initial: &Array2<f64>, dx: f64, series: &BoundaryFluxSeries, dt: f64) -> Vec<Array2<f64>> {
    let base = initial.sum_axis(Axis(1)).insert_axis(Axis(1)).mapv(|v| v * dx);
    let cum = series.cumulative(dt);
    (0..series.len())
        .map(|l| {
            let mut t = base.clone();
            for c in 0..t.nrows() {
                t[[c, 0]] += cum[[l, c]];
            }
            t
        })
        .collect()
}

fn signed_remainder(state: &Array2<f64>, dx: f64, target: &Array2<f64>) -> Array2<f64> {
    let rs = state.sum_axis(Axis(1)).insert_axis(Axis(1));
    lin_comb(&[(dx, &rs), (-1.0, target)])
}

/// Conserved-quantity remainder `|sum_j (u_j(t_l) - u_j(t_0)) dx - sum_{k<=l} (F_a - F_b) dt|`
/// for each prediction `l = 1..`, shape `[n_comp, len]`.
pub fn conserved_remainder(
    prediction: &[StateField],
    initial: &StateField,
    series: &BoundaryFluxSeries,
    dt: f64,
) -> Result<Array2<f64>> {
    if prediction.len() > series.len() {
        return Err(Error::invalid(format!(
            "{} predictions but only {} boundary-flux intervals",
            prediction.len(),
            series.len()
        )));
    }
    let dx = initial.grid().dx();
    let targets = remainder_targets(initial.values(), dx, series, dt);
    let mut out = Array2::zeros((initial.n_comp(), prediction.len()));
    for (l, p) in prediction.iter().enumerate() {
        if p.n_comp() != initial.n_comp() || !p.grid().same_as(initial.grid()) {
            return Err(Error::invalid("prediction and initial state live on different grids"));
        }
        let r = signed_remainder(p.values(), dx, &targets[l]);
        for c in 0..initial.n_comp() {
            out[[c, l]] = r[[c, 0]].abs();
        }
    }
    Ok(out)
}

fn check_batch(model: &ModelSpec, batch: &[Trajectory]) -> Result<usize> {
    let first = batch.first().ok_or_else(|| Error::invalid("empty trajectory batch"))?;
    let len = first.len_steps();
    for t in batch {
        if t.len_steps() != len || !t.grid().same_as(model.grid()) || t.n_comp() != model.n_comp() {
            return Err(Error::invalid("trajectory does not match the model grid or the batch length"));
        }
        if len == 0 {
            return Err(Error::invalid("trajectories need at least one transition"));
        }
    }
    Ok(len)
}

/// Plain evaluation of one trajectory's data misfit `sum_l |u_NN - u|^2` and penalty `sum_l sum_c C^2`.
fn trajectory_terms(
    model: &ModelSpec,
    traj: &Trajectory,
    series: Option<&BoundaryFluxSeries>,
    weight: f64,
) -> Result<(f64, f64)> {
    let snaps = traj.snapshots();
    let pred = rollout(model, &snaps[0], traj.len_steps(), traj.dt())?;
    let mut data: Option<Array2<f64>> = None;
    for (l, p) in pred.iter().enumerate() {
        let d = lin_comb(&[(1.0, p.values()), (-1.0, snaps[l + 1].values())]);
        let s = Array2::from_elem((1, 1), d.mapv(|v| v * v).sum());
        data = Some(match data {
            None => s.mapv(|v| weight * v),
            Some(acc) => lin_comb(&[(1.0, &acc), (weight, &s)]),
        });
    }
    let reg = match series {
        Some(series) => {
            let targets = remainder_targets(snaps[0].values(), model.dx(), series, traj.dt());
            pred.iter()
                .enumerate()
                .map(|(l, p)| signed_remainder(p.values(), model.dx(), &targets[l]).mapv(|v| v * v).sum())
                .sum()
        }
        None => 0.0,
    };
    Ok((data.map_or(0.0, |d| d[[0, 0]]), reg))
}

/// `L_RNN = 1/(N_traj L) sum_k sum_l |u_NN^(k)(t_l) - u^(k)(t_l)|^2`, norms summed over components and cells.
pub fn recurrent_loss(model: &ModelSpec, batch: &[Trajectory]) -> Result<f64> {
    let len = check_batch(model, batch)?;
    let w = 1.0 / (batch.len() * len) as f64;
    let mut total = 0.0;
    for t in batch {
        total += trajectory_terms(model, t, None, w)?.0;
    }
    Ok(total)
}

/// `R = sum_k sum_c sum_l C^2` on the model's rollouts.
pub fn regularizer(model: &ModelSpec, batch: &[Trajectory], series: &[BoundaryFluxSeries]) -> Result<f64> {
    check_batch(model, batch)?;
    if series.len() != batch.len() {
        return Err(Error::invalid("one boundary-flux series per trajectory is required"));
    }
    let mut total = 0.0;
    for (t, s) in batch.iter().zip(series) {
        total += trajectory_terms(model, t, Some(s), 0.0)?.1;
    }
    Ok(total)
}

/// `L_RNN + lambda2 * R`.
pub fn regularized_loss(
    model: &ModelSpec,
    batch: &[Trajectory],
    series: &[BoundaryFluxSeries],
    lambda2: f64,
) -> Result<f64> {
    if !(lambda2 >= 0.0) {
        return Err(Error::invalid(format!("lambda2 must be >= 0, got {lambda2}")));
    }
    let l = recurrent_loss(model, batch)?;
    if lambda2 == 0.0 {
        return Ok(l);
    }
    Ok(l + lambda2 * regularizer(model, batch, series)?)
}

/// Records one trajectory's weighted misfit and (with targets) its penalty on `tape`.
fn record_terms(
    model: &ModelSpec,
    tape: &mut Tape,
    vars: &MlpVars,
    traj: &Trajectory,
    targets: Option<&[Array2<f64>]>,
    weight: f64,
) -> (Var, Option<Var>) {
    let snaps = traj.snapshots();
    let u0 = tape.constant(snaps[0].values().clone());
    let states = rollout_tape(model, tape, vars, u0, traj.len_steps(), traj.dt());
    let mut data = Vec::with_capacity(states.len());
    for (l, &s) in states.iter().enumerate() {
        let obs = tape.constant(snaps[l + 1].values().clone());
        let d = tape.sub(s, obs);
        let sq = tape.square(d);
        data.push((weight, tape.sum(sq)));
    }
    let data = tape.lin_comb(&data);
    let reg = targets.map(|targets| {
        let mut terms = Vec::with_capacity(states.len());
        for (l, &s) in states.iter().enumerate() {
            let rs = tape.row_sum(s);
            let target = tape.constant(targets[l].clone());
            let c = tape.lin_comb(&[(model.dx(), rs), (-1.0, target)]);
            let sq = tape.square(c);
            terms.push((1.0, tape.sum(sq)));
        }
        tape.lin_comb(&terms)
    });
    (data, reg)
}

struct TrajGrad {
    data: f64,
    reg: f64,
    grad: GradientBundle,
}

fn trajectory_gradient(
    model: &ModelSpec,
    traj: &Trajectory,
    series: Option<&BoundaryFluxSeries>,
    weight: f64,
    lambda2: f64,
) -> Result<TrajGrad> {
    let targets = series.map(|s| remainder_targets(traj.initial().values(), model.dx(), s, traj.dt()));
    let mut values = (0.0, 0.0);
    let (_, grad) = grad_scalar(model.mlp(), |tape, vars| {
        let (data, reg) = record_terms(model, tape, vars, traj, targets.as_deref(), weight);
        values = (tape.scalar(data), reg.map_or(0.0, |r| tape.scalar(r)));
        Ok(match reg {
            Some(r) if lambda2 > 0.0 => tape.lin_comb(&[(1.0, data), (lambda2, r)]),
            _ => data,
        })
    })?;
    Ok(TrajGrad { data: values.0, reg: values.1, grad })
}

/// Value and gradient of `L_RNN + lambda2 R` over `batch`.
pub fn loss_and_gradient(
    model: &ModelSpec,
    batch: &[Trajectory],
    series: Option<&[BoundaryFluxSeries]>,
    lambda2: f64,
) -> Result<(f64, f64, GradientBundle)> {
    let len = check_batch(model, batch)?;
    if lambda2 > 0.0 && series.is_none() {
        return Err(Error::invalid("a positive lambda2 needs boundary-flux series"));
    }
    let weight = 1.0 / (batch.len() * len) as f64;
    let parts: Vec<Result<TrajGrad>> = batch
        .par_iter()
        .enumerate()
        .map(|(k, t)| trajectory_gradient(model, t, series.map(|s| &s[k]), weight, lambda2))
        .collect();
    let mut data = 0.0;
    let mut reg = 0.0;
    let mut grad = GradientBundle::zeros_like(model.mlp());
    for (k, p) in parts.into_iter().enumerate() {
        let p = p.map_err(|e| match e {
            Error::NonFinite(m) => Error::NonFinite(format!("trajectory {k}: {m}")),
            other => other,
        })?;
        data += p.data;
        reg += p.reg;
        grad.add_assign(&p.grad);
    }
    Ok((data, reg, grad))
}

/// Training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub form: ModelForm,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub adam: AdamConfig,
    /// Trajectories per Adam step; `None` is full batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub lambda2_grid: Vec<f64>,
    /// Epochs per probe run in [`select_lambda2`].
    pub probe_epochs: usize,
    /// Write `checkpoint_<epoch>.json` every this many epochs.
    pub checkpoint_every: Option<usize>,
    /// Consecutive failed steps tolerated before aborting.
    pub max_failures: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            form: ModelForm::Cfn,
            hidden: DEFAULT_HIDDEN.to_vec(),
            epochs: 10_000,
            adam: AdamConfig::default(),
            batch_size: None,
            seed: 0,
            lambda2_grid: DEFAULT_LAMBDA2_GRID.to_vec(),
            probe_epochs: 200,
            checkpoint_every: None,
            max_failures: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.adam.lr > 0.0) {
            return Err(Error::invalid(format!("learning rate must be positive, got {}", self.adam.lr)));
        }
        if self.hidden.iter().any(|h| *h == 0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        if self.batch_size == Some(0) || self.checkpoint_every == Some(0) {
            return Err(Error::invalid("batch_size and checkpoint_every must be positive"));
        }
        if self.max_failures == 0 {
            return Err(Error::invalid("max_failures must be at least 1"));
        }
        if let ModelForm::NcfnReg { lambda2 } = self.form {
            if !(lambda2 >= 0.0 && lambda2.is_finite()) {
                return Err(Error::invalid(format!("lambda2 must be >= 0, got {lambda2}")));
            }
        }
        Ok(())
    }
}

/// One row of the loss history.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    /// Objective `L_RNN + lambda2 R` at the start of the epoch (mean over batches).
    pub loss: f64,
    pub reg_term: f64,
    pub lambda2: f64,
    pub wall_time_s: f64,
}

pub fn history_csv(history: &[HistoryRow]) -> String {
    let mut s = String::from("epoch,loss,reg_term,lambda2,wall_time_s\n");
    for r in history {
        let _ = writeln!(s, "{},{},{},{},{:.3}", r.epoch, r.loss, r.reg_term, r.lambda2, r.wall_time_s);
    }
    s
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: ModelSpec,
    pub history: Vec<HistoryRow>,
    pub skipped_steps: usize,
    /// Objective of the returned parameters on the full dataset.
    pub final_loss: Option<f64>,
}

impl TrainOutcome {
    pub fn checkpoint(&self, dataset: &Dataset, seed: u64) -> Checkpoint {
        Checkpoint {
            model: self.model.clone(),
            system: dataset.system(),
            dt: dataset.dt(),
            meta: TrainingMeta { epoch: self.history.len(), seed, loss: self.final_loss },
        }
    }
}

/// Boundary series for every trajectory of `dataset`.
pub fn dataset_flux_series(dataset: &Dataset) -> Result<Vec<BoundaryFluxSeries>> {
    dataset.trajectories().iter().map(|t| boundary_flux_series(t, dataset.system(), dataset.bc())).collect()
}

/// Fresh model for `dataset` as configured.
pub fn init_model(config: &TrainConfig, dataset: &Dataset) -> Result<ModelSpec> {
    let mut rng = stream_rng(config.seed, STREAM_INIT);
    ModelSpec::init(config.form, dataset.n_comp(), dataset.bc(), *dataset.grid(), &config.hidden, &mut rng)
}

fn objective(model: &ModelSpec, dataset: &Dataset, series: Option<&[BoundaryFluxSeries]>) -> Result<(f64, f64)> {
    let lambda2 = model.form().lambda2();
    let l = recurrent_loss(model, dataset.trajectories())?;
    let r = match series {
        Some(s) => regularizer(model, dataset.trajectories(), s)?,
        None => f64::NAN,
    };
    Ok((if lambda2 > 0.0 { l + lambda2 * r } else { l }, r))
}

/// Trains a model on `dataset`. With `out_dir` set, writes `history.csv`,
/// periodic checkpoints and the final `checkpoint.json` there.
pub fn train(config: &TrainConfig, dataset: &Dataset, out_dir: Option<&Path>) -> Result<TrainOutcome> {
    config.validate()?;
    let model = init_model(config, dataset)?;
    train_from(config, dataset, model, out_dir)
}

/// As [`train`], starting from `model`.
pub fn train_from(config: &TrainConfig, dataset: &Dataset, mut model: ModelSpec, out_dir: Option<&Path>) -> Result<TrainOutcome> {
    config.validate()?;
    if !model.grid().same_as(dataset.grid()) || model.n_comp() != dataset.n_comp() || model.bc() != dataset.bc() {
        return Err(Error::invalid("model and dataset disagree in grid, components or boundary condition"));
    }
    let lambda2 = model.form().lambda2();
    let series = match dataset_flux_series(dataset) {
        Ok(s) => Some(s),
        Err(e) if lambda2 == 0.0 => {
            log::warn!("boundary fluxes unavailable, reg_term not reported: {e}");
            None
        }
        Err(e) => return Err(e),
    };
    let n = dataset.trajectories().len();
    let batch = config.batch_size.unwrap_or(n).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch_rng = stream_rng(config.seed, STREAM_BATCHES);
    let mut adam = AdamState::new(model.mlp());
    let mut history = Vec::with_capacity(config.epochs);
    let mut failures = 0usize;
    let mut skipped = 0usize;
    let clock = Instant::now();
    let save = |m: &ModelSpec, epoch: usize, loss: Option<f64>, name: &str| -> Result<()> {
        if let Some(dir) = out_dir {
            let ck = Checkpoint {
                model: m.clone(),
                system: dataset.system(),
                dt: dataset.dt(),
                meta: TrainingMeta { epoch, seed: config.seed, loss },
            };
            ck.save(&dir.join(name))?;
        }
        Ok(())
    };

    for epoch in 1..=config.epochs {
        if batch < n {
            order.shuffle(&mut batch_rng);
        }
        let (mut loss_sum, mut reg_sum, mut n_batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(batch) {
            let trajs: Vec<Trajectory> = chunk.iter().map(|&k| dataset.trajectories()[k].clone()).collect();
            let sub: Option<Vec<BoundaryFluxSeries>> =
                series.as_ref().map(|s| chunk.iter().map(|&k| s[k].clone()).collect());
            let step = loss_and_gradient(&model, &trajs, sub.as_deref(), lambda2).and_then(|(data, reg, grad)| {
                if !grad.is_finite() {
                    return Err(Error::NonFinite("gradient".into()));
                }
                adam_step(model.mlp_mut(), &grad, &mut adam, &config.adam)?;
                Ok((data, reg))
            });
            match step {
                Ok((data, reg)) => {
                    failures = 0;
                    let reg = if series.is_some() { reg } else { f64::NAN };
                    loss_sum += if lambda2 > 0.0 { data + lambda2 * reg } else { data };
                    reg_sum += reg;
                    n_batches += 1;
                }
                Err(e) if e.is_numerical() => {
                    failures += 1;
                    skipped += 1;
                    log::warn!("epoch {epoch}: step skipped ({e})");
                    if failures >= config.max_failures {
                        let hist = history_csv(&history);
                        if let Some(dir) = out_dir {
                            std::fs::create_dir_all(dir)?;
                            std::fs::write(dir.join("history.csv"), hist)?;
                        }
                        return Err(Error::TrainingAborted { failures, last: e.to_string() });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        let denom = n_batches.max(1) as f64;
        let row = HistoryRow {
            epoch,
            loss: if n_batches > 0 { loss_sum / denom } else { f64::NAN },
            reg_term: if n_batches > 0 { reg_sum / denom } else { f64::NAN },
            lambda2,
            wall_time_s: clock.elapsed().as_secs_f64(),
        };
        if epoch == 1 || epoch % 100 == 0 || epoch == config.epochs {
            log::info!("epoch {epoch}: loss {:.6e} reg {:.3e}", row.loss, row.reg_term);
        }
        history.push(row);
        if let Some(every) = config.checkpoint_every {
            if epoch % every == 0 {
                save(&model, epoch, None, &format!("checkpoint_{epoch:06}.json"))?;
            }
        }
    }
    let final_loss = objective(&model, dataset, series.as_deref()).ok().map(|(l, _)| l);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("history.csv"), history_csv(&history))?;
    }
    save(&model, config.epochs, final_loss, "checkpoint.json")?;
    Ok(TrainOutcome { model, history, skipped_steps: skipped, final_loss })
}

/// Mean one-step squared residual `|N(u_0) - u_1|^2` over `trajs`.
pub fn one_step_residual(model: &ModelSpec, trajs: &[Trajectory]) -> Result<f64> {
    let mut total = 0.0;
    for t in trajs {
        let snaps = t.snapshots();
        let next = rollout(model, &snaps[0], 1, t.dt())?;
        total += (next[0].values() - snaps[1].values()).mapv(|v| v * v).sum();
    }
    Ok(total / trajs.len() as f64)
}

/// Probe results of [`select_lambda2`]: `(lambda2, residual)` in grid order.
pub type LambdaProbe = Vec<(f64, f64)>;

/// Trains one short nCFN-reg probe per candidate (same seed and settings) and
/// returns the weight with the smallest one-step residual on held-out
/// trajectories; ties go to the smaller weight.
pub fn select_lambda2(config: &TrainConfig, dataset: &Dataset) -> Result<(f64, LambdaProbe)> {
    let grid = &config.lambda2_grid;
    if grid.is_empty() {
        return Err(Error::invalid("empty lambda2 grid"));
    }
    if grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::invalid(format!("lambda2 grid has invalid entries: {grid:?}")));
    }
    if grid.len() == 1 {
        return Ok((grid[0], vec![(grid[0], f64::NAN)]));
    }
    let n = dataset.trajectories().len();
    let (train_set, held_out) = if n >= 2 {
        let hold = (n / 5).max(1);
        (
            dataset.with_trajectories(dataset.trajectories()[..n - hold].to_vec())?,
            dataset.trajectories()[n - hold..].to_vec(),
        )
    } else {
        (dataset.clone(), dataset.trajectories().to_vec())
    };
    let mut probes = Vec::with_capacity(grid.len());
    for &lambda2 in grid {
        let probe_cfg =
            TrainConfig { form: ModelForm::NcfnReg { lambda2 }, epochs: config.probe_epochs, checkpoint_every: None, ..config.clone() };
        let residual = train(&probe_cfg, &train_set, None)
            .and_then(|o| one_step_residual(&o.model, &held_out))
            .unwrap_or_else(|e| {
                log::warn!("lambda2 = {lambda2}: probe failed ({e})");
                f64::INFINITY
            });
        log::info!("lambda2 = {lambda2}: held-out one-step residual {residual:.6e}");
        probes.push((lambda2, if residual.is_nan() { f64::INFINITY } else { residual }));
    }
    pick_lambda2(&probes).map(|best| (best, probes))
}

/// Argmin of the residuals, ties toward the smaller weight.
pub fn pick_lambda2(probes: &[(f64, f64)]) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &(l, r) in probes {
        if !r.is_finite() {
            continue;
        }
        best = match best {
            None => Some((l, r)),
            Some((bl, br)) if r < br || (r == br && l < bl) => Some((l, r)),
            keep => keep,
        };
    }
    best.map(|(l, _)| l).ok_or_else(|| Error::NonFinite("every lambda2 probe failed".into()))
}

/// Path of the final checkpoint written by [`train`].
pub fn checkpoint_path(dir: &Path) -> PathBuf {
    dir.join("checkpoint.json")
}
