//! Reverse-mode differentiation over a recorded sequence of matrix operations.
//!
//! Every node stores its forward value; [`Tape::backward`] walks the nodes in
//! reverse and accumulates adjoints. Nodes that do not depend on any parameter
//! are never differentiated.

use std::sync::Arc;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(usize),
    /// `x . w + b`, with `b` a `1 x cols` row broadcast over rows.
    Affine { x: Var, w: Var, b: Var },
    MatMul(Var, Var),
    Relu(Var),
    /// `out.flat[i] = src.flat[index[i]]`
    Gather { src: Var, index: Arc<[usize]> },
    LinComb(Vec<(f64, Var)>),
    Mul(Var, Var),
    Square(Var),
    SumAll(Var),
    /// Sum along each row, giving a `rows x 1` column.
    RowSum(Var),
}

#[derive(Debug)]
struct Node {
    value: Array2<f64>,
    op: Op,
    needs_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    n_params: usize,
    non_finite: Option<String>,
}

fn rows(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("tape values are row-major")
}

/// `a . b` for the small row-major matrices seen here.
pub(crate) fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (n, k) = a.dim();
    let m = b.ncols();
    let (av, bv) = (rows(a), rows(b));
    let mut out = vec![0.0; n * m];
    for (o, ar) in out.chunks_exact_mut(m).zip(av.chunks_exact(k)) {
        for (&x, br) in ar.iter().zip(bv.chunks_exact(m)) {
            for (y, &w) in o.iter_mut().zip(br) {
                *y += x * w;
            }
        }
    }
    Array2::from_shape_vec((n, m), out).expect("shape")
}

/// `a . b^T`
fn matmul_bt(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let k = a.ncols();
    let m = b.nrows();
    let (av, bv) = (rows(a), rows(b));
    let out = av
        .chunks_exact(k)
        .flat_map(|ar| bv.chunks_exact(k).map(move |br| ar.iter().zip(br).map(|(x, y)| x * y).sum::<f64>()))
        .collect();
    Array2::from_shape_vec((a.nrows(), m), out).expect("shape")
}

/// `a^T . b`
fn matmul_at(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let k = a.ncols();
    let m = b.ncols();
    let (av, bv) = (rows(a), rows(b));
    let mut out = vec![0.0; k * m];
    for (ar, br) in av.chunks_exact(k).zip(bv.chunks_exact(m)) {
        for (&x, o) in ar.iter().zip(out.chunks_exact_mut(m)) {
            for (y, &w) in o.iter_mut().zip(br) {
                *y += x * w;
            }
        }
    }
    Array2::from_shape_vec((k, m), out).expect("shape")
}

pub(crate) fn affine(x: &Array2<f64>, w: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let mut y = matmul(x, w);
    y += b;
    y
}

pub(crate) fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| if v > 0.0 { v } else { 0.0 })
}

pub(crate) fn gather(src: &Array2<f64>, index: &[usize], shape: (usize, usize)) -> Array2<f64> {
    let flat = src.as_slice().expect("tape values are row-major");
    let data: Vec<f64> = index.iter().map(|&k| flat[k]).collect();
    Array2::from_shape_vec(shape, data).expect("gather index length matches shape")
}

fn accumulate(slot: &mut Option<Array2<f64>>, scale: f64, g: &Array2<f64>) {
    match slot {
        Some(acc) => acc.zip_mut_with(g, |a, &v| *a += scale * v),
        None => *slot = Some(if scale == 1.0 { g.clone() } else { g.mapv(|v| scale * v) }),
    }
}

fn accumulate_owned(slot: &mut Option<Array2<f64>>, g: Array2<f64>) {
    match slot {
        Some(acc) => *acc += &g,
        None => *slot = Some(g),
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<f64>, op: Op, needs_grad: bool, tag: &str) -> Var {
        if self.non_finite.is_none() && value.iter().any(|v| !v.is_finite()) {
            self.non_finite = Some(format!("tape node {} ({tag})", self.nodes.len()));
        }
        self.nodes.push(Node { value, op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.value(v)[[0, 0]]
    }

    /// First non-finite intermediate recorded so far.
    pub fn check_finite(&self) -> Result<()> {
        match &self.non_finite {
            Some(loc) => Err(Error::NonFinite(loc.clone())),
            None => Ok(()),
        }
    }

    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Constant, false, "constant")
    }

    /// Leaf whose adjoint is reported in slot `slot` by [`Tape::backward`].
    pub fn param(&mut self, slot: usize, value: Array2<f64>) -> Var {
        self.n_params = self.n_params.max(slot + 1);
        self.push(value, Op::Param(slot), true, "param")
    }

    pub fn affine(&mut self, x: Var, w: Var, b: Var) -> Var {
        let value = affine(self.value(x), self.value(w), self.value(b));
        let ng = self.needs(x) || self.needs(w) || self.needs(b);
        self.push(value, Op::Affine { x, w, b }, ng, "affine")
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = matmul(self.value(a), self.value(b));
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::MatMul(a, b), ng, "matmul")
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let value = relu(self.value(x));
        let ng = self.needs(x);
        self.push(value, Op::Relu(x), ng, "relu")
    }

    pub fn gather(&mut self, src: Var, index: Arc<[usize]>, shape: (usize, usize)) -> Var {
        let value = gather(self.value(src), &index, shape);
        let ng = self.needs(src);
        self.push(value, Op::Gather { src, index }, ng, "gather")
    }

    /// `sum_i c_i * v_i`, accumulated left to right.
    pub fn lin_comb(&mut self, terms: &[(f64, Var)]) -> Var {
        let refs: Vec<(f64, &Array2<f64>)> = terms.iter().map(|&(c, v)| (c, self.value(v))).collect();
        let value = crate::solver::lin_comb(&refs);
        let ng = terms.iter().any(|&(_, v)| self.needs(v));
        self.push(value, Op::LinComb(terms.to_vec()), ng, "lin_comb")
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.lin_comb(&[(1.0, a), (-1.0, b)])
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.lin_comb(&[(c, a)])
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) * self.value(b);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::Mul(a, b), ng, "mul")
    }

    pub fn square(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(|v| v * v);
        let ng = self.needs(a);
        self.push(value, Op::Square(a), ng, "square")
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Array2::from_elem((1, 1), self.value(a).sum());
        let ng = self.needs(a);
        self.push(value, Op::SumAll(a), ng, "sum")
    }

    pub fn row_sum(&mut self, a: Var) -> Var {
        let value = self.value(a).sum_axis(Axis(1)).insert_axis(Axis(1));
        let ng = self.needs(a);
        self.push(value, Op::RowSum(a), ng, "row_sum")
    }

    /// Adjoints of the scalar `output` with respect to every parameter slot.
    ///
    /// Slots never touched by `output` come back as `None`.
    pub fn backward(&self, output: Var) -> Result<Vec<Option<Array2<f64>>>> {
        self.check_finite()?;
        if self.value(output).len() != 1 {
            return Err(Error::invalid("backward needs a scalar output"));
        }
        let mut params: Vec<Option<Array2<f64>>> = vec![None; self.n_params];
        let mut adj: Vec<Option<Array2<f64>>> = vec![None; output.0 + 1];
        adj[output.0] = Some(Array2::ones((1, 1)));

        for i in (0..=output.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Constant => {}
                Op::Param(slot) => accumulate_owned(&mut params[*slot], g),
                Op::Affine { x, w, b } => {
                    if self.needs(*x) {
                        let dx = matmul_bt(&g, self.value(*w));
                        accumulate_owned(&mut adj[x.0], dx);
                    }
                    if self.needs(*w) {
                        let dw = matmul_at(self.value(*x), &g);
                        accumulate_owned(&mut adj[w.0], dw);
                    }
                    if self.needs(*b) {
                        let db = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                        accumulate_owned(&mut adj[b.0], db);
                    }
                }
                Op::MatMul(a, b) => {
                    if self.needs(*a) {
                        let da = matmul_bt(&g, self.value(*b));
                        accumulate_owned(&mut adj[a.0], da);
                    }
                    if self.needs(*b) {
                        let db = matmul_at(self.value(*a), &g);
                        accumulate_owned(&mut adj[b.0], db);
                    }
                }
                Op::Relu(x) => {
                    let mut dx = g;
                    dx.zip_mut_with(&node.value, |d, &out| {
                        if out <= 0.0 {
                            *d = 0.0;
                        }
                    });
                    accumulate_owned(&mut adj[x.0], dx);
                }
                Op::Gather { src, index } => {
                    let src_val = self.value(*src);
                    let slot = adj[src.0].get_or_insert_with(|| Array2::zeros(src_val.raw_dim()));
                    let flat = slot.as_slice_mut().expect("row-major adjoint");
                    for (gi, &k) in g.iter().zip(index.iter()) {
                        flat[k] += gi;
                    }
                }
                Op::LinComb(terms) => {
                    for &(c, v) in terms {
                        if self.needs(v) {
                            accumulate(&mut adj[v.0], c, &g);
                        }
                    }
                }
                Op::Mul(a, b) => {
                    if self.needs(*a) {
                        accumulate_owned(&mut adj[a.0], &g * self.value(*b));
                    }
                    if self.needs(*b) {
                        accumulate_owned(&mut adj[b.0], &g * self.value(*a));
                    }
                }
                Op::Square(a) => {
                    let mut da = self.value(*a).mapv(|v| 2.0 * v);
                    da *= &g;
                    accumulate_owned(&mut adj[a.0], da);
                }
                Op::SumAll(a) => {
                    let s = g[[0, 0]];
                    accumulate_owned(&mut adj[a.0], Array2::from_elem(self.value(*a).raw_dim(), s));
                }
                Op::RowSum(a) => {
                    let da = Array2::from_shape_fn(self.value(*a).raw_dim(), |(r, _)| g[[r, 0]]);
                    accumulate_owned(&mut adj[a.0], da);
                }
            }
        }
        Ok(params)
    }
}
