//! Grids, cell-average state fields, boundary padding and trajectory containers.
//!
//! Cells are 0-indexed internally: cell `j` covers `[a + j*dx, a + (j+1)*dx]`
//! and edge `e` (for `e = 0..=n_cells`) sits at `a + e*dx`, between cells
//! `e-1` and `e`.

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::SystemSpec;

/// Uniform cell-centered 1-D grid on `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_cells: usize,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 4;

    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::invalid(format!("grid endpoints must satisfy a < b, got ({a}, {b})")));
        }
        if n_cells < Self::MIN_CELLS {
            return Err(Error::invalid(format!(
                "grid needs at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self { a, b, n_cells })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.n_cells as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        self.a + (j as f64 + 0.5) * self.dx()
    }

    pub fn edge(&self, e: usize) -> f64 {
        self.a + e as f64 * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// True when both grids describe the same cells, up to round-off in the endpoints.
    pub fn same_as(&self, other: &Grid1D) -> bool {
        let tol = 1e-12 * self.length().abs().max(1.0);
        self.n_cells == other.n_cells
            && (self.a - other.a).abs() <= tol
            && (self.b - other.b).abs() <= tol
    }
}

/// How ghost cells are filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Ghost cells wrap around modulo `n_cells`.
    Periodic,
    /// Left ghosts copy the first cell and right ghosts copy the last one.
    ZerothOrder,
}

impl BoundaryCondition {
    /// Maps a possibly out-of-range cell index onto the interior cell it copies.
    pub fn source_cell(self, i: isize, n_cells: usize) -> usize {
        let n = n_cells as isize;
        match self {
            BoundaryCondition::Periodic => i.rem_euclid(n) as usize,
            BoundaryCondition::ZerothOrder => i.clamp(0, n - 1) as usize,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::ZerothOrder => "zeroth_order",
        }
    }
}

/// Cell averages of every conserved component at one instant.
///
/// `values` has shape `[n_comp, n_cells]`; components follow the fixed order
/// `u` (Burgers), `h, hv` (shallow water), `rho, rho*u, E` (Euler).
#[derive(Clone, Debug, PartialEq)]
pub struct StateField {
    grid: Grid1D,
    values: Array2<f64>,
    time: f64,
}

impl StateField {
    pub fn new(grid: Grid1D, values: Array2<f64>, time: f64) -> Result<Self> {
        if values.ncols() != grid.n_cells() || values.nrows() == 0 {
            return Err(Error::invalid(format!(
                "state shape {:?} does not match grid with {} cells",
                values.dim(),
                grid.n_cells()
            )));
        }
        if let Some((idx, _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("state value (component {}, cell {}) at t = {time}", idx.0, idx.1)));
        }
        let values = if values.is_standard_layout() { values } else { values.as_standard_layout().into_owned() };
        Ok(Self { grid, values, time })
    }

    /// Evaluates `f` at every cell center; `f` returns one value per component.
    pub fn from_fn(grid: Grid1D, n_comp: usize, time: f64, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Array2::zeros((n_comp, grid.n_cells()));
        for j in 0..grid.n_cells() {
            let point = f(grid.center(j));
            if point.len() != n_comp {
                return Err(Error::invalid("initial-condition closure returned wrong component count"));
            }
            for (c, v) in point.into_iter().enumerate() {
                values[[c, j]] = v;
            }
        }
        Self::new(grid, values, time)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n_comp(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cells(&self) -> usize {
        self.grid.n_cells()
    }

    /// State vector of one cell across components.
    pub fn cell(&self, j: usize) -> Vec<f64> {
        self.values.column(j).to_vec()
    }

    pub fn with_values(&self, values: Array2<f64>, time: f64) -> Result<Self> {
        Self::new(self.grid, values, time)
    }
}

/// Pads the field with `left`/`right` ghost cells according to `bc`.
pub fn ghost_pad(field: &StateField, bc: BoundaryCondition, left: usize, right: usize) -> Result<Array2<f64>> {
    let n = field.n_cells();
    if left > n || right > n {
        return Err(Error::StencilTooWide { width: left.max(right), n_cells: n });
    }
    let mut out = Array2::zeros((field.n_comp(), n + left + right));
    for (i, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let src = bc.source_cell(i as isize - left as isize, n);
        col.assign(&field.values().column(src));
    }
    Ok(out)
}

/// Block-averages `factor` fine cells into each coarse cell.
pub fn restrict_to_coarse(fine: &StateField, factor: usize) -> Result<StateField> {
    let n = fine.n_cells();
    if factor == 0 || n % factor != 0 {
        return Err(Error::invalid(format!("restriction factor {factor} does not divide {n} cells")));
    }
    if factor == 1 {
        return Ok(fine.clone());
    }
    let coarse_grid = Grid1D::new(fine.grid().a(), fine.grid().b(), n / factor)?;
    let mut values = Array2::zeros((fine.n_comp(), n / factor));
    for c in 0..fine.n_comp() {
        let row = fine.values().row(c);
        for (jc, chunk) in row.as_slice().expect("row-major state").chunks_exact(factor).enumerate() {
            values[[c, jc]] = chunk.iter().sum::<f64>() / factor as f64;
        }
    }
    StateField::new(coarse_grid, values, fine.time())
}

/// Discrete integral `sum_j u_j * dx` of every component.
pub fn total_conserved(field: &StateField) -> Vec<f64> {
    let dx = field.grid().dx();
    field
        .values()
        .rows()
        .into_iter()
        .map(|row| row.iter().sum::<f64>() * dx)
        .collect()
}

/// Sampled initial-condition parameters, keyed by name.
pub type IcParams = BTreeMap<String, f64>;

/// Consecutive snapshots evolved from one initial condition, spaced `dt` apart.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    snapshots: Vec<StateField>,
    dt: f64,
    ic_params: IcParams,
}

impl Trajectory {
    pub fn new(snapshots: Vec<StateField>, dt: f64, ic_params: IcParams) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::invalid("trajectory needs at least one snapshot"))?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("trajectory dt must be positive, got {dt}")));
        }
        for (l, s) in snapshots.iter().enumerate() {
            if !s.grid().same_as(first.grid()) || s.n_comp() != first.n_comp() {
                return Err(Error::invalid(format!("snapshot {l} has a different grid or component count")));
            }
            let expected = first.time() + l as f64 * dt;
            if (s.time() - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(Error::invalid(format!(
                    "snapshot {l} at t = {} breaks the constant spacing dt = {dt}",
                    s.time()
                )));
            }
        }
        Ok(Self { snapshots, dt, ic_params })
    }

    pub fn snapshots(&self) -> &[StateField] {
        &self.snapshots
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn ic_params(&self) -> &IcParams {
        &self.ic_params
    }

    pub fn with_ic_params(mut self, ic_params: IcParams) -> Self {
        self.ic_params = ic_params;
        self
    }

    /// Number of transitions (snapshots minus one).
    pub fn len_steps(&self) -> usize {
        self.snapshots.len() - 1
    }

    pub fn grid(&self) -> &Grid1D {
        self.snapshots[0].grid()
    }

    pub fn n_comp(&self) -> usize {
        self.snapshots[0].n_comp()
    }

    pub fn initial(&self) -> &StateField {
        &self.snapshots[0]
    }
}

/// Where a dataset came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub noise_level: f64,
}

/// A collection of trajectories of one system on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    trajectories: Vec<Trajectory>,
    system: SystemSpec,
    bc: BoundaryCondition,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(
        trajectories: Vec<Trajectory>,
        system: SystemSpec,
        bc: BoundaryCondition,
        provenance: Provenance,
    ) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or_else(|| Error::invalid("dataset needs at least one trajectory"))?;
        for (k, t) in trajectories.iter().enumerate() {
            if !t.grid().same_as(first.grid())
                || t.n_comp() != system.n_comp()
                || (t.dt() - first.dt()).abs() > 1e-12 * first.dt()
                || t.snapshots().len() != first.snapshots().len()
            {
                return Err(Error::invalid(format!(
                    "trajectory {k} disagrees with the dataset in grid, dt, length or components"
                )));
            }
        }
        Ok(Self { trajectories, system, bc, provenance })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn system(&self) -> SystemSpec {
        self.system
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn grid(&self) -> &Grid1D {
        self.trajectories[0].grid()
    }

    pub fn dt(&self) -> f64 {
        self.trajectories[0].dt()
    }

    pub fn n_comp(&self) -> usize {
        self.system.n_comp()
    }

    /// Transitions per trajectory.
    pub fn len_steps(&self) -> usize {
        self.trajectories[0].len_steps()
    }

    pub fn with_trajectories(&self, trajectories: Vec<Trajectory>) -> Result<Self> {
        Self::new(trajectories, self.system, self.bc, self.provenance.clone())
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn field(vals: &[f64], a: f64, b: f64) -> StateField {
        let grid = Grid1D::new(a, b, vals.len()).unwrap();
        StateField::new(grid, Array2::from_shape_vec((1, vals.len()), vals.to_vec()).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid1D::new(1.0, 0.0, 8).is_err());
        assert!(Grid1D::new(0.0, 1.0, 3).is_err());
        let g = Grid1D::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.center(0), 0.25);
        assert_eq!(g.edge(4), 2.0);
    }

    #[test]
    fn periodic_padding_wraps() {
        let f = field(&[1.0, 2.0, 3.0, 4.0], 0.0, 4.0);
        let p = ghost_pad(&f, BoundaryCondition::Periodic, 2, 3).unwrap();
        assert_eq!(p, array![[3.0, 4.0, 1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0]]);
    }

    #[test]
    fn zeroth_order_padding_replicates() {
        let f = field(&[1.0, 2.0, 3.0, 4.0], 0.0, 4.0);
        let p = ghost_pad(&f, BoundaryCondition::ZerothOrder, 2, 3).unwrap();
        assert_eq!(p, array![[1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 4.0, 4.0, 4.0]]);
    }

    #[test]
    fn padding_wider_than_domain_fails() {
        let f = field(&[1.0, 2.0, 3.0, 4.0], 0.0, 4.0);
        assert!(matches!(
            ghost_pad(&f, BoundaryCondition::Periodic, 5, 0),
            Err(Error::StencilTooWide { .. })
        ));
    }

    #[test]
    fn restriction_averages_blocks() {
        let f = field(&[1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0], 0.0, 8.0);
        let c = restrict_to_coarse(&f, 2).unwrap();
        assert_eq!(c.values().row(0).to_vec(), vec![2.0, 6.0, 10.0, 14.0]);
        assert_eq!(c.grid().b(), 8.0);
        assert_eq!(restrict_to_coarse(&f, 1).unwrap(), f);
        assert!(restrict_to_coarse(&f, 3).is_err());
    }

    #[test]
    fn restriction_of_four_cells_by_two() {
        // A 2-cell coarse grid is below the minimum grid size, so check the arithmetic directly.
        let f = field(&[1.0, 3.0, 5.0, 7.0], 0.0, 4.0);
        assert!(restrict_to_coarse(&f, 2).is_err());
        let f8 = field(&[1.0, 3.0, 5.0, 7.0, 1.0, 3.0, 5.0, 7.0], 0.0, 8.0);
        assert_eq!(restrict_to_coarse(&f8, 2).unwrap().values().row(0).to_vec(), vec![2.0, 6.0, 2.0, 6.0]);
    }

    #[test]
    fn totals() {
        assert_eq!(total_conserved(&field(&[1.0, 1.0, 1.0, 1.0], 0.0, 2.0)), vec![2.0]);
        assert_eq!(total_conserved(&field(&[1.0, -1.0, 1.0, -1.0], 0.0, 4.0)), vec![0.0]);
        assert_eq!(total_conserved(&field(&[1.0, 2.0, 3.0, 5.0], 0.0, 2.0)), vec![5.5]);
    }

    #[test]
    fn state_rejects_non_finite() {
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let vals = array![[0.0, f64::NAN, 0.0, 0.0]];
        assert!(matches!(StateField::new(grid, vals, 0.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn trajectory_checks_spacing() {
        let f0 = field(&[1.0, 2.0, 3.0, 4.0], 0.0, 4.0);
        let f1 = f0.with_values(f0.values().clone(), 0.1).unwrap();
        let f2 = f0.with_values(f0.values().clone(), 0.25).unwrap();
        assert!(Trajectory::new(vec![f0.clone(), f1.clone()], 0.1, IcParams::new()).is_ok());
        assert!(Trajectory::new(vec![f0, f1, f2], 0.1, IcParams::new()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn padding_preserves_interior(vals in prop::collection::vec(-10.0f64..10.0, 4..24),
                                          left in 0usize..4, right in 0usize..4, periodic: bool) {
                let f = field(&vals, 0.0, 1.0);
                let bc = if periodic { BoundaryCondition::Periodic } else { BoundaryCondition::ZerothOrder };
                let p = ghost_pad(&f, bc, left, right).unwrap();
                let n = vals.len();
                for j in 0..n {
                    prop_assert_eq!(p[[0, j + left]].to_bits(), vals[j].to_bits());
                }
                if periodic {
                    for i in 0..p.ncols() {
                        let src = (i as isize - left as isize).rem_euclid(n as isize) as usize;
                        prop_assert_eq!(p[[0, i]], vals[src]);
                    }
                }
            }

            #[test]
            fn restriction_keeps_totals(vals in prop::collection::vec(-10.0f64..10.0, 1..16), factor in 1usize..5) {
                let n = 4 * factor * vals.len().div_ceil(1);
                let fine_vals: Vec<f64> = (0..n).map(|i| vals[i % vals.len()] + i as f64 * 0.01).collect();
                let f = field(&fine_vals, -1.0, 3.0);
                let c = restrict_to_coarse(&f, factor).unwrap();
                let (tf, tc) = (total_conserved(&f)[0], total_conserved(&c)[0]);
                prop_assert!((tf - tc).abs() <= 1e-13 * tf.abs().max(1.0));
            }
        }
    }
}
