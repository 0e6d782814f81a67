//! Learned evolution models and their TVD-RK3 rollout.
//!
//! * CFN: a network maps the cell averages around each edge to the edge flux;
//!   cells are updated by flux differences, so totals telescope exactly.
//! * nCFN: a network maps the cell stencil straight to `f(u)_x`.
//! * nCFN-reg: nCFN dynamics, trained with a conservation penalty.
//!
//! Both the plain (`rhs_values`, [`rollout`]) and the recorded
//! (`rhs_tape`, [`rollout_tape`]) paths share the same kernels, so their
//! forward values agree bit for bit.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BoundaryCondition, Grid1D, StateField};
use crate::nn::{MlpParams, MlpVars, Tape, Var};
use crate::solver::{rk3_stage, RK3_STAGES};

/// Network form. `lambda2` weights the conservation penalty of nCFN-reg.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ModelForm {
    Cfn,
    Ncfn,
    NcfnReg { lambda2: f64 },
}

impl ModelForm {
    pub fn is_conservative(&self) -> bool {
        matches!(self, ModelForm::Cfn)
    }

    /// Default `(p, q)` stencil: (2, 3) for CFN, (3, 3) for the non-conservative forms.
    pub fn default_stencil(&self) -> Stencil {
        match self {
            ModelForm::Cfn => Stencil { p: 2, q: 3 },
            ModelForm::Ncfn | ModelForm::NcfnReg { .. } => Stencil { p: 3, q: 3 },
        }
    }

    pub fn lambda2(&self) -> f64 {
        match self {
            ModelForm::NcfnReg { lambda2 } => *lambda2,
            _ => 0.0,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ModelForm::Cfn => "cfn",
            ModelForm::Ncfn => "ncfn",
            ModelForm::NcfnReg { .. } => "ncfn-reg",
        }
    }
}

impl fmt::Display for ModelForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for ModelForm {
    type Err = Error;

    /// Parses `cfn`, `ncfn` or `ncfn-reg` (the latter with `lambda2 = 0` until set).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cfn" => Ok(ModelForm::Cfn),
            "ncfn" => Ok(ModelForm::Ncfn),
            "ncfn-reg" | "ncfn_reg" => Ok(ModelForm::NcfnReg { lambda2: 0.0 }),
            other => Err(Error::invalid(format!("unknown model form '{other}'"))),
        }
    }
}

/// Cells `j-p ..= j+q` feed the network. For CFN the anchor `j` is the cell
/// left of the edge, so edge `e` (at `a + e*dx`) reads cells `e-1-p ..= e-1+q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stencil {
    pub p: usize,
    pub q: usize,
}

impl Stencil {
    pub fn width(&self) -> usize {
        self.p + self.q + 1
    }
}

/// Gather tables from a flat `[n_comp, n_cells]` state.
#[derive(Clone, Debug, PartialEq)]
struct Plan {
    /// Network input rows, component-major over the stencil.
    input: Arc<[usize]>,
    input_shape: (usize, usize),
    /// RHS from network output: flux at the right edge (CFN) or G (nCFN).
    right: Arc<[usize]>,
    /// CFN only: flux at the left edge.
    left: Option<Arc<[usize]>>,
}

impl Plan {
    fn build(form: ModelForm, stencil: Stencil, n_comp: usize, bc: BoundaryCondition, n_cells: usize) -> Self {
        let width = stencil.width();
        let (rows, anchor_shift) = if form.is_conservative() { (n_cells + 1, 1) } else { (n_cells, 0) };
        let mut input = Vec::with_capacity(rows * width * n_comp);
        for r in 0..rows {
            let first = r as isize - anchor_shift - stencil.p as isize;
            for c in 0..n_comp {
                for m in 0..width {
                    input.push(c * n_cells + bc.source_cell(first + m as isize, n_cells));
                }
            }
        }
        // network output is [rows, n_comp]; the RHS is laid out [n_comp, n_cells]
        let mut right = Vec::with_capacity(n_comp * n_cells);
        let mut left = Vec::with_capacity(n_comp * n_cells);
        for c in 0..n_comp {
            for j in 0..n_cells {
                if form.is_conservative() {
                    right.push((j + 1) * n_comp + c);
                    left.push(j * n_comp + c);
                } else {
                    right.push(j * n_comp + c);
                }
            }
        }
        Plan {
            input: input.into(),
            input_shape: (rows, width * n_comp),
            right: right.into(),
            left: form.is_conservative().then(|| left.into()),
        }
    }
}

/// A learned evolution operator on a fixed grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    form: ModelForm,
    stencil: Stencil,
    n_comp: usize,
    bc: BoundaryCondition,
    grid: Grid1D,
    mlp: MlpParams,
    plan: Plan,
}

/// Hidden layer widths of the reference architecture (5 layers of 64).
pub const DEFAULT_HIDDEN: [usize; 5] = [64; 5];

impl ModelSpec {
    pub fn new(
        form: ModelForm,
        stencil: Stencil,
        n_comp: usize,
        bc: BoundaryCondition,
        grid: Grid1D,
        mlp: MlpParams,
    ) -> Result<Self> {
        if let ModelForm::NcfnReg { lambda2 } = form {
            if !(lambda2 >= 0.0 && lambda2.is_finite()) {
                return Err(Error::invalid(format!("lambda2 must be >= 0, got {lambda2}")));
            }
        }
        if grid.n_cells() < stencil.p + stencil.q {
            return Err(Error::StencilTooWide { width: stencil.p + stencil.q, n_cells: grid.n_cells() });
        }
        if mlp.input_dim() != stencil.width() * n_comp || mlp.output_dim() != n_comp {
            return Err(Error::invalid(format!(
                "network dims {:?} do not fit a {}-cell stencil of {n_comp} components",
                mlp.layer_dims(),
                stencil.width()
            )));
        }
        let plan = Plan::build(form, stencil, n_comp, bc, grid.n_cells());
        Ok(Self { form, stencil, n_comp, bc, grid, mlp, plan })
    }

    /// Fresh model with Glorot-initialized network `[width*n_comp, hidden.., n_comp]`.
    pub fn init<R: Rng + ?Sized>(
        form: ModelForm,
        n_comp: usize,
        bc: BoundaryCondition,
        grid: Grid1D,
        hidden: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        let stencil = form.default_stencil();
        let mut dims = vec![stencil.width() * n_comp];
        dims.extend_from_slice(hidden);
        dims.push(n_comp);
        let mlp = MlpParams::init(&dims, rng)?;
        Self::new(form, stencil, n_comp, bc, grid, mlp)
    }

    pub fn form(&self) -> ModelForm {
        self.form
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn n_comp(&self) -> usize {
        self.n_comp
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    pub fn mlp(&self) -> &MlpParams {
        &self.mlp
    }

    pub fn mlp_mut(&mut self) -> &mut MlpParams {
        &mut self.mlp
    }

    pub fn with_mlp(&self, mlp: MlpParams) -> Result<Self> {
        Self::new(self.form, self.stencil, self.n_comp, self.bc, self.grid, mlp)
    }

    pub fn with_form(&self, form: ModelForm) -> Result<Self> {
        if form.is_conservative() != self.form.is_conservative() {
            return Err(Error::invalid("cannot switch between conservative and non-conservative forms"));
        }
        Self::new(form, self.stencil, self.n_comp, self.bc, self.grid, self.mlp.clone())
    }

    fn check_field(&self, field: &StateField) -> Result<()> {
        if !field.grid().same_as(&self.grid) || field.n_comp() != self.n_comp {
            return Err(Error::invalid(format!(
                "field ({} components, {} cells) does not match model ({} components, {} cells)",
                field.n_comp(),
                field.n_cells(),
                self.n_comp,
                self.grid.n_cells()
            )));
        }
        Ok(())
    }

    fn network_input(&self, u: &Array2<f64>) -> Array2<f64> {
        crate::nn::gather(u, &self.plan.input, self.plan.input_shape)
    }

    fn shape(&self) -> (usize, usize) {
        (self.n_comp, self.grid.n_cells())
    }

    /// Network output per edge (CFN) or per cell (nCFN), shape `[rows, n_comp]`.
    fn network_output(&self, u: &Array2<f64>) -> Result<Array2<f64>> {
        self.mlp.forward_batch(&self.network_input(u))
    }

    /// Right-hand side on raw `[n_comp, n_cells]` values.
    pub fn rhs_values(&self, u: &Array2<f64>) -> Result<Array2<f64>> {
        let out = self.network_output(u)?;
        let shape = self.shape();
        let right = crate::nn::gather(&out, &self.plan.right, shape);
        Ok(match &self.plan.left {
            Some(left) => {
                let left = crate::nn::gather(&out, left, shape);
                let inv_dx = 1.0 / self.dx();
                crate::solver::lin_comb(&[(-inv_dx, &right), (inv_dx, &left)])
            }
            None => crate::solver::lin_comb(&[(-1.0, &right)]),
        })
    }

    /// Recorded right-hand side; same arithmetic as [`ModelSpec::rhs_values`].
    pub fn rhs_tape(&self, tape: &mut Tape, vars: &MlpVars, u: Var) -> Var {
        let x = tape.gather(u, self.plan.input.clone(), self.plan.input_shape);
        let out = MlpParams::forward_tape(vars, tape, x);
        let shape = self.shape();
        let right = tape.gather(out, self.plan.right.clone(), shape);
        match &self.plan.left {
            Some(left) => {
                let left = tape.gather(out, left.clone(), shape);
                let inv_dx = 1.0 / self.dx();
                tape.lin_comb(&[(-inv_dx, right), (inv_dx, left)])
            }
            None => tape.lin_comb(&[(-1.0, right)]),
        }
    }

    /// Semi-discrete right-hand side of the model.
    pub fn rhs(&self, field: &StateField) -> Result<StateField> {
        self.check_field(field)?;
        field.with_values(self.rhs_values(field.values())?, field.time())
    }

    /// Neural edge fluxes, shape `[n_comp, n_cells + 1]`. CFN only.
    pub fn edge_fluxes(&self, field: &StateField) -> Result<Array2<f64>> {
        if !self.form.is_conservative() {
            return Err(Error::invalid("edge fluxes are only defined for the conservative form"));
        }
        self.check_field(field)?;
        Ok(self.network_output(field.values())?.reversed_axes().as_standard_layout().into_owned())
    }

    /// One TVD-RK3 step on raw values.
    pub fn step_values(&self, u: &Array2<f64>, dt: f64) -> Result<Array2<f64>> {
        let mut prev = u.clone();
        for stage in 0..RK3_STAGES.len() {
            let r = self.rhs_values(&prev)?;
            prev = rk3_stage(stage, u, &prev, &r, dt);
        }
        Ok(prev)
    }

    /// Recorded TVD-RK3 step.
    pub fn step_tape(&self, tape: &mut Tape, vars: &MlpVars, u: Var, dt: f64) -> Var {
        let mut prev = u;
        for (stage, &(cp, cr)) in RK3_STAGES.iter().enumerate() {
            let r = self.rhs_tape(tape, vars, prev);
            prev = if stage == 0 {
                tape.lin_comb(&[(1.0, u), (cr * dt, r)])
            } else {
                let diff = tape.lin_comb(&[(1.0, prev), (-1.0, u)]);
                tape.lin_comb(&[(1.0, u), (cp, diff), (cr * dt, r)])
            };
        }
        prev
    }
}

/// CFN edge fluxes (see [`ModelSpec::edge_fluxes`]).
pub fn cfn_edge_fluxes(field: &StateField, model: &ModelSpec) -> Result<Array2<f64>> {
    model.edge_fluxes(field)
}

/// CFN right-hand side `-(F_{j+1/2} - F_{j-1/2}) / dx`.
pub fn cfn_rhs(field: &StateField, model: &ModelSpec) -> Result<StateField> {
    if !model.form().is_conservative() {
        return Err(Error::invalid("cfn_rhs needs a conservative-form model"));
    }
    model.rhs(field)
}

/// nCFN right-hand side `-G(stencil)`.
pub fn ncfn_rhs(field: &StateField, model: &ModelSpec) -> Result<StateField> {
    if model.form().is_conservative() {
        return Err(Error::invalid("ncfn_rhs needs a non-conservative model"));
    }
    model.rhs(field)
}

/// Repeated TVD-RK3 steps from `u0`; returns the `steps` states after `u0`.
pub fn rollout(model: &ModelSpec, u0: &StateField, steps: usize, dt: f64) -> Result<Vec<StateField>> {
    model.check_field(u0)?;
    if steps == 0 {
        return Err(Error::invalid("rollout needs at least one step"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let mut out = Vec::with_capacity(steps);
    let mut u = u0.values().clone();
    for step in 0..steps {
        u = model.step_values(&u, dt)?;
        let t = u0.time() + (step + 1) as f64 * dt;
        let field = u0.with_values(u.clone(), t).map_err(|e| Error::RolloutFailed {
            step: step + 1,
            reason: e.to_string(),
        })?;
        out.push(field);
    }
    Ok(out)
}

/// Recorded rollout; returns one node per step. Non-finite values surface from
/// [`Tape::check_finite`] / [`Tape::backward`].
pub fn rollout_tape(model: &ModelSpec, tape: &mut Tape, vars: &MlpVars, u0: Var, steps: usize, dt: f64) -> Vec<Var> {
    let mut out = Vec::with_capacity(steps);
    let mut u = u0;
    for _ in 0..steps {
        u = model.step_tape(tape, vars, u, dt);
        out.push(u);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::total_conserved;
    use crate::nn::grad_scalar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(0.0, 2.0 * PI, n).unwrap()
    }

    fn model(form: ModelForm, n: usize, bc: BoundaryCondition, n_comp: usize, seed: u64) -> ModelSpec {
        ModelSpec::init(form, n_comp, bc, grid(n), &[16, 16], &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn wavy(n: usize, n_comp: usize) -> StateField {
        StateField::from_fn(grid(n), n_comp, 0.0, |x| (0..n_comp).map(|c| 1.0 + 0.5 * (x + c as f64).sin()).collect())
            .unwrap()
    }

    #[test]
    fn cfn_stencil_reads_wrapped_cells() {
        let m = model(ModelForm::Cfn, 8, BoundaryCondition::Periodic, 1, 0);
        let row: Vec<usize> = m.plan.input[6..12].iter().map(|i| i + 1).collect();
        assert_eq!(row, vec![7, 8, 1, 2, 3, 4]);
        let row0: Vec<usize> = m.plan.input[0..6].iter().map(|i| i + 1).collect();
        assert_eq!(row0, vec![6, 7, 8, 1, 2, 3]);
        assert_eq!(m.plan.input_shape, (9, 6));
    }

    #[test]
    fn stencil_matches_ghost_padding() {
        let f = wavy(12, 2);
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::ZerothOrder] {
            let m = model(ModelForm::Cfn, 12, bc, 2, 0);
            let x = m.network_input(f.values());
            let padded = crate::field::ghost_pad(&f, bc, 3, 3).unwrap();
            for e in 0..=12 {
                for c in 0..2 {
                    for k in 0..6 {
                        assert_eq!(x[[e, c * 6 + k]], padded[[c, e + k]]);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_field_gives_equal_fluxes_and_zero_rhs() {
        let g = grid(16);
        let f = StateField::from_fn(g, 2, 0.0, |_| vec![1.3, -0.4]).unwrap();
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::ZerothOrder] {
            let m = model(ModelForm::Cfn, 16, bc, 2, 4);
            let fl = m.edge_fluxes(&f).unwrap();
            for e in 0..=16 {
                assert_eq!(fl[[0, e]], fl[[0, 0]]);
                assert_eq!(fl[[1, e]], fl[[1, 0]]);
            }
            assert!(cfn_rhs(&f, &m).unwrap().values().iter().all(|v| *v == 0.0));
            let n = model(ModelForm::Ncfn, 16, bc, 2, 4);
            let r = ncfn_rhs(&f, &n).unwrap();
            assert!(r.values().row(0).iter().all(|v| *v == r.values()[[0, 0]]));
        }
    }

    #[test]
    fn zero_network_is_inert() {
        let f = wavy(16, 1);
        for form in [ModelForm::Cfn, ModelForm::Ncfn] {
            let mut m = model(form, 16, BoundaryCondition::Periodic, 1, 2);
            let zero = MlpParams::zeros(m.mlp().layer_dims()).unwrap();
            m = m.with_mlp(zero).unwrap();
            assert!(m.rhs(&f).unwrap().values().iter().all(|v| *v == 0.0));
            for s in rollout(&m, &f, 20, 0.005).unwrap() {
                assert_eq!(s.values(), f.values());
            }
        }
    }

    #[test]
    fn periodic_cfn_rhs_sums_to_zero() {
        let f = wavy(32, 2);
        let m = model(ModelForm::Cfn, 32, BoundaryCondition::Periodic, 2, 9);
        let r = m.rhs(&f).unwrap();
        for c in 0..2 {
            assert!((r.values().row(c).sum() * m.dx()).abs() < 1e-12);
        }
    }

    #[test]
    fn ncfn_does_not_conserve_in_general() {
        let f = wavy(32, 1);
        let m = model(ModelForm::Ncfn, 32, BoundaryCondition::Periodic, 1, 9);
        let r = m.rhs(&f).unwrap();
        assert!((r.values().sum() * m.dx()).abs() > 1e-6);
    }

    #[test]
    fn cfn_rollout_conserves_totals() {
        let f = wavy(64, 1);
        let mut m = model(ModelForm::Cfn, 64, BoundaryCondition::Periodic, 1, 5);
        m.mlp_mut().scale_layer(2, 0.1);
        let t0 = total_conserved(&f)[0];
        for s in rollout(&m, &f, 100, 0.005).unwrap() {
            assert!((total_conserved(&s)[0] - t0).abs() < 1e-10);
        }
    }

    #[test]
    fn zeroth_order_cfn_change_equals_boundary_fluxes() {
        let f = wavy(24, 2);
        let m = model(ModelForm::Cfn, 24, BoundaryCondition::ZerothOrder, 2, 8);
        let dt = 0.01;
        // replay the three stages and book-keep the boundary edge fluxes
        let u = f.values().clone();
        let mut prev = u.clone();
        let mut boundary = [0.0; 2];
        let weights = [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0];
        for stage in 0..3 {
            let sf = f.with_values(prev.clone(), 0.0).unwrap();
            let fl = m.edge_fluxes(&sf).unwrap();
            for c in 0..2 {
                boundary[c] += weights[stage] * (fl[[c, 24]] - fl[[c, 0]]);
            }
            let r = m.rhs_values(&prev).unwrap();
            prev = rk3_stage(stage, &u, &prev, &r, dt);
        }
        let after = f.with_values(prev, dt).unwrap();
        let (t0, t1) = (total_conserved(&f), total_conserved(&after));
        for c in 0..2 {
            assert!(((t1[c] - t0[c]) + dt * boundary[c]).abs() < 1e-13, "component {c}");
        }
    }

    #[test]
    fn periodic_shift_equivariance() {
        let f = wavy(20, 1);
        let m = model(ModelForm::Cfn, 20, BoundaryCondition::Periodic, 1, 3);
        let r = m.rhs(&f).unwrap();
        let shift = 7;
        let shifted = Array2::from_shape_fn((1, 20), |(c, j)| f.values()[[c, (j + 20 - shift) % 20]]);
        let rs = m.rhs(&f.with_values(shifted, 0.0).unwrap()).unwrap();
        for j in 0..20 {
            assert_eq!(rs.values()[[0, j]].to_bits(), r.values()[[0, (j + 20 - shift) % 20]].to_bits());
        }
    }

    #[test]
    fn single_step_rollout_is_one_rk3_step() {
        let f = wavy(16, 1);
        let m = model(ModelForm::Cfn, 16, BoundaryCondition::Periodic, 1, 1);
        let one = rollout(&m, &f, 1, 0.01).unwrap();
        let direct = crate::solver::tvd_rk3_step(&f, |s| m.rhs_values(s.values()), 0.01).unwrap();
        assert_eq!(one[0].values(), direct.values());
    }

    #[test]
    fn tape_rollout_matches_plain() {
        let f = wavy(16, 2);
        let m = model(ModelForm::Ncfn, 16, BoundaryCondition::ZerothOrder, 2, 6);
        let plain = rollout(&m, &f, 3, 0.01).unwrap();
        let mut t = Tape::new();
        let vars = m.mlp().register(&mut t);
        let u0 = t.constant(f.values().clone());
        let states = rollout_tape(&m, &mut t, &vars, u0, 3, 0.01);
        for (p, v) in plain.iter().zip(states) {
            assert_eq!(p.values(), t.value(v));
        }
    }

    #[test]
    fn rollout_gradient_matches_finite_differences() {
        let f = wavy(12, 1);
        let m = model(ModelForm::Cfn, 12, BoundaryCondition::Periodic, 1, 21);
        let target = f.values().mapv(|v| 0.9 * v);
        let loss_plain = |mm: &ModelSpec| {
            let out = rollout(mm, &f, 2, 0.02).unwrap();
            out.iter().map(|s| (s.values() - &target).mapv(|v| v * v).sum()).sum::<f64>()
        };
        let (loss, g) = grad_scalar(m.mlp(), |t, vars| {
            let u0 = t.constant(f.values().clone());
            let tg = t.constant(target.clone());
            let states = rollout_tape(&m, t, vars, u0, 2, 0.02);
            let mut terms = Vec::new();
            for s in states {
                let d = t.sub(s, tg);
                let sq = t.square(d);
                terms.push((1.0, t.sum(sq)));
            }
            Ok(t.lin_comb(&terms))
        })
        .unwrap();
        assert!((loss - loss_plain(&m)).abs() < 1e-13);
        let flat = m.mlp().flatten();
        let grad = g.flatten();
        let scale = grad.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..flat.len() {
            let eval = |delta: f64| {
                let mut p = m.mlp().clone();
                let mut v = flat.clone();
                v[i] += delta;
                p.set_flat(&v).unwrap();
                loss_plain(&m.with_mlp(p).unwrap())
            };
            let fd = (eval(1e-6) - eval(-1e-6)) / 2e-6;
            let denom = fd.abs().max(grad[i].abs()).max(1e-3 * scale);
            assert!((fd - grad[i]).abs() / denom < 1e-5, "param {i}: fd {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn bad_dims_rejected() {
        let mlp = MlpParams::zeros(&[5, 4, 1]).unwrap();
        let r = ModelSpec::new(ModelForm::Cfn, Stencil { p: 2, q: 3 }, 1, BoundaryCondition::Periodic, grid(16), mlp);
        assert!(r.is_err());
        let mlp = MlpParams::zeros(&[7, 4, 1]).unwrap();
        let r = ModelSpec::new(ModelForm::Ncfn, Stencil { p: 3, q: 3 }, 1, BoundaryCondition::Periodic, grid(5), mlp);
        assert!(matches!(r, Err(Error::StencilTooWide { .. })));
    }
}
