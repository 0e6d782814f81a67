//! Model checkpoints as JSON.
//!
//! Weights and biases are written with 17 significant digits so every `f64`
//! survives the round trip. Nothing time-dependent is stored, so equal
//! models give byte-identical files.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::data::GridInfo;
use crate::error::{Error, Result};
use crate::field::{BoundaryCondition, Grid1D};
use crate::model::{ModelForm, ModelSpec, Stencil};
use crate::nn::{Activation, MlpParams};
use crate::physics::SystemSpec;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Training bookkeeping stored next to the weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epoch: usize,
    pub seed: u64,
    /// Loss of the stored parameters, if evaluated.
    pub loss: Option<f64>,
}

/// A model plus what is needed to roll it out.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: ModelSpec,
    pub system: SystemSpec,
    /// Time step the model was trained on.
    pub dt: f64,
    pub meta: TrainingMeta,
}

#[derive(Serialize)]
struct Out<'a> {
    format_version: u32,
    form: &'a str,
    lambda2: f64,
    p: usize,
    q: usize,
    n_comp: usize,
    system: SystemSpec,
    bc: BoundaryCondition,
    grid: GridInfo,
    dx: f64,
    dt: f64,
    layer_dims: &'a [usize],
    activation: Activation,
    weights: Box<RawValue>,
    biases: Box<RawValue>,
    training: &'a TrainingMeta,
}

#[derive(Deserialize)]
struct In {
    format_version: u32,
    form: String,
    lambda2: f64,
    p: usize,
    q: usize,
    n_comp: usize,
    system: SystemSpec,
    bc: BoundaryCondition,
    grid: GridInfo,
    dt: f64,
    layer_dims: Vec<usize>,
    activation: Activation,
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
    training: TrainingMeta,
}

fn number(v: f64) -> Result<String> {
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("cannot store parameter value {v}")));
    }
    Ok(format!("{v:.16e}"))
}

fn matrix_json(m: &Array2<f64>) -> Result<String> {
    let rows = m
        .outer_iter()
        .map(|row| Ok(format!("[{}]", row.iter().map(|v| number(*v)).collect::<Result<Vec<_>>>()?.join(","))))
        .collect::<Result<Vec<_>>>()?;
    Ok(format!("[{}]", rows.join(",")))
}

fn raw(text: String) -> Result<Box<RawValue>> {
    RawValue::from_string(text).map_err(Error::from)
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        let mlp = self.model.mlp();
        let weights = mlp.weights().iter().map(matrix_json).collect::<Result<Vec<_>>>()?;
        let biases = mlp
            .biases()
            .iter()
            .map(|b| Ok(format!("[{}]", b.iter().map(|v| number(*v)).collect::<Result<Vec<_>>>()?.join(","))))
            .collect::<Result<Vec<_>>>()?;
        let g = self.model.grid();
        let stencil = self.model.stencil();
        let out = Out {
            format_version: CHECKPOINT_VERSION,
            form: self.model.form().tag(),
            lambda2: self.model.form().lambda2(),
            p: stencil.p,
            q: stencil.q,
            n_comp: self.model.n_comp(),
            system: self.system,
            bc: self.model.bc(),
            grid: GridInfo { a: g.a(), b: g.b(), n_cells: g.n_cells() },
            dx: g.dx(),
            dt: self.dt,
            layer_dims: mlp.layer_dims(),
            activation: mlp.activation(),
            weights: raw(format!("[{}]", weights.join(",")))?,
            biases: raw(format!("[{}]", biases.join(",")))?,
            training: &self.meta,
        };
        Ok(serde_json::to_string_pretty(&out)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: In = serde_json::from_str(text)?;
        if c.format_version != CHECKPOINT_VERSION {
            return Err(Error::format(format!("unsupported checkpoint version {}", c.format_version)));
        }
        let form = match c.form.parse::<ModelForm>()? {
            ModelForm::NcfnReg { .. } => ModelForm::NcfnReg { lambda2: c.lambda2 },
            f => f,
        };
        let to_matrix = |rows: Vec<Vec<f64>>| -> Result<Array2<f64>> {
            let (r, k) = (rows.len(), rows.first().map_or(0, Vec::len));
            Array2::from_shape_vec((r, k), rows.into_iter().flatten().collect())
                .map_err(|e| Error::format(format!("ragged weight matrix: {e}")))
        };
        let weights = c.weights.into_iter().map(to_matrix).collect::<Result<Vec<_>>>()?;
        let biases = c
            .biases
            .into_iter()
            .map(|b| {
                let n = b.len();
                Array2::from_shape_vec((1, n), b).map_err(|e| Error::format(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mlp = MlpParams::from_parts(weights, biases)?;
        if mlp.layer_dims() != c.layer_dims.as_slice() || mlp.activation() != c.activation {
            return Err(Error::format("layer_dims or activation disagree with the stored matrices"));
        }
        let grid = Grid1D::new(c.grid.a, c.grid.b, c.grid.n_cells)?;
        let model = ModelSpec::new(form, Stencil { p: c.p, q: c.q }, c.n_comp, c.bc, grid, mlp)?;
        if c.system.n_comp() != c.n_comp {
            return Err(Error::format("system and n_comp disagree"));
        }
        Ok(Self { model, system: c.system, dt: c.dt, meta: c.training })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
