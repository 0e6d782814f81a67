//! Fully connected ReLU network and its parameter/gradient containers.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::tape::{self, Tape, Var};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
}

/// Weights and biases of a feed-forward network.
///
/// Layer `i` maps `dims[i] -> dims[i+1]`; weights are stored `[fan_in, fan_out]`
/// and biases as `[1, fan_out]` rows, so a batch of inputs (one per row) is
/// mapped by `x . W + b`. Hidden layers apply ReLU; the output layer is affine.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    layer_dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array2<f64>>,
    activation: Activation,
}

/// Per-parameter partial derivatives, shaped like [`MlpParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradientBundle {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array2<f64>>,
}

/// Parameter leaves of an [`MlpParams`] registered on a tape.
#[derive(Clone, Debug)]
pub struct MlpVars {
    weights: Vec<Var>,
    biases: Vec<Var>,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::invalid(format!("layer dims must have >= 2 positive entries, got {dims:?}")));
    }
    Ok(())
}

/// Glorot-uniform bound `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        check_dims(dims)?;
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let limit = glorot_limit(w[0], w[1]);
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite Glorot bound");
            weights.push(Array2::from_shape_simple_fn((w[0], w[1]), || dist.sample(rng)));
            biases.push(Array2::zeros((1, w[1])));
        }
        Ok(Self { layer_dims: dims.to_vec(), weights, biases, activation: Activation::Relu })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self {
            layer_dims: dims.to_vec(),
            weights: dims.windows(2).map(|w| Array2::zeros((w[0], w[1]))).collect(),
            biases: dims.windows(2).map(|w| Array2::zeros((1, w[1]))).collect(),
            activation: Activation::Relu,
        })
    }

    /// Builds parameters from explicit matrices, validating the shape chain.
    pub fn from_parts(weights: Vec<Array2<f64>>, biases: Vec<Array2<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::invalid("need one bias per weight matrix"));
        }
        let mut dims = vec![weights[0].nrows()];
        for (i, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.nrows() != *dims.last().unwrap() || b.dim() != (1, w.ncols()) {
                return Err(Error::invalid(format!("layer {i} shapes do not chain")));
            }
            if w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {i} parameters")));
            }
            dims.push(w.ncols());
        }
        check_dims(&dims)?;
        Ok(Self { layer_dims: dims, weights, biases, activation: Activation::Relu })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array2<f64>] {
        &self.biases
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(|a| a.len()).sum()
    }

    /// All parameters in a fixed order: layer by layer, weights then bias.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::invalid("flat parameter vector has the wrong length"));
        }
        let mut it = flat.iter();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut().chain(b.iter_mut()).for_each(|v| *v = *it.next().unwrap());
        }
        Ok(())
    }

    pub(crate) fn layers_mut(&mut self) -> impl Iterator<Item = (&mut Array2<f64>, &mut Array2<f64>)> {
        self.weights.iter_mut().zip(self.biases.iter_mut())
    }

    /// Scales every parameter of layer `layer` by `factor`.
    pub fn scale_layer(&mut self, layer: usize, factor: f64) {
        self.weights[layer].mapv_inplace(|v| v * factor);
        self.biases[layer].mapv_inplace(|v| v * factor);
    }

    /// Evaluates one input vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::invalid(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        let batch = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row vector");
        Ok(self.forward_batch(&batch)?.into_raw_vec_and_offset().0)
    }

    /// Evaluates every row of `x` (shape `[batch, d_in]`).
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::invalid(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                x.ncols()
            )));
        }
        let last = self.weights.len() - 1;
        let mut h = tape::affine(x, &self.weights[0], &self.biases[0]);
        if last > 0 {
            h = tape::relu(&h);
        }
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate().skip(1) {
            h = tape::affine(&h, w, b);
            if i < last {
                h = tape::relu(&h);
            }
        }
        Ok(h)
    }

    /// Registers every weight and bias as a parameter leaf (slots `2i`, `2i+1`).
    pub fn register(&self, tape: &mut Tape) -> MlpVars {
        let mut weights = Vec::with_capacity(self.weights.len());
        let mut biases = Vec::with_capacity(self.biases.len());
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            weights.push(tape.param(2 * i, w.clone()));
            biases.push(tape.param(2 * i + 1, b.clone()));
        }
        MlpVars { weights, biases }
    }

    /// Recorded counterpart of [`MlpParams::forward_batch`]; bit-identical values.
    pub fn forward_tape(vars: &MlpVars, tape: &mut Tape, x: Var) -> Var {
        let last = vars.weights.len() - 1;
        let mut h = x;
        for (i, (&w, &b)) in vars.weights.iter().zip(&vars.biases).enumerate() {
            h = tape.affine(h, w, b);
            if i < last {
                h = tape.relu(h);
            }
        }
        h
    }

    /// Collects tape adjoints into a bundle; untouched parameters get zero.
    pub fn gradients_from(&self, slots: Vec<Option<Array2<f64>>>) -> GradientBundle {
        let mut slots = slots.into_iter();
        let mut grads = GradientBundle::zeros_like(self);
        for (gw, gb) in grads.weights.iter_mut().zip(grads.biases.iter_mut()) {
            if let Some(Some(w)) = slots.next() {
                *gw = w;
            }
            if let Some(Some(b)) = slots.next() {
                *gb = b;
            }
        }
        grads
    }
}

impl GradientBundle {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            weights: params.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: params.biases.iter().map(|b| Array2::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GradientBundle) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            a.mapv_inplace(|v| v * factor);
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|a| a.iter().all(|v| v.is_finite()))
    }

    pub fn matches(&self, params: &MlpParams) -> bool {
        self.weights.len() == params.weights.len()
            && self.weights.iter().zip(&params.weights).all(|(a, b)| a.dim() == b.dim())
            && self.biases.iter().zip(&params.biases).all(|(a, b)| a.dim() == b.dim())
    }
}

/// Value and exact gradient of a scalar program built on a fresh tape.
pub fn grad_scalar<F>(params: &MlpParams, program: F) -> Result<(f64, GradientBundle)>
where
    F: FnOnce(&mut Tape, &MlpVars) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars = params.register(&mut tape);
    let out = program(&mut tape, &vars)?;
    let slots = tape.backward(out)?;
    Ok((tape.scalar(out), params.gradients_from(slots)))
}
