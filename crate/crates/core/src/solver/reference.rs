//! First-order finite-volume reference solver.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::numflux::NumericalFlux;
use super::rk3::tvd_rk3_step;
use crate::error::{Error, Result};
use crate::field::{ghost_pad, BoundaryCondition, IcParams, StateField, Trajectory};
use crate::physics::{max_wave_speed, SystemSpec};

/// Time-step control for [`solve_reference`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CflPolicy {
    FixedDt { dt: f64 },
    /// `dt = cfl * dx / max_wave_speed`, recomputed every step.
    Number { cfl: f64 },
}

impl CflPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CflPolicy::FixedDt { dt } if dt > 0.0 && dt.is_finite() => Ok(()),
            CflPolicy::Number { cfl } if cfl > 0.0 && cfl <= 1.0 => Ok(()),
            other => Err(Error::invalid(format!("invalid time-step policy {other:?}"))),
        }
    }
}

/// Semi-discrete right-hand side `-(F_{e+1} - F_e) / dx` with edge fluxes
/// from adjacent (ghost-padded) cell averages.
pub fn fv_rhs(field: &StateField, sys: SystemSpec, bc: BoundaryCondition, flux: NumericalFlux) -> Result<StateField> {
    let values = fv_rhs_values(field, sys, bc, flux)?;
    field.with_values(values, field.time())
}

pub(crate) fn fv_rhs_values(
    field: &StateField,
    sys: SystemSpec,
    bc: BoundaryCondition,
    flux: NumericalFlux,
) -> Result<Array2<f64>> {
    flux.check_compatible(sys)?;
    if field.n_comp() != sys.n_comp() {
        return Err(Error::invalid("field component count does not match system"));
    }
    let n = field.n_cells();
    let nc = field.n_comp();
    let padded = ghost_pad(field, bc, 1, 1)?;
    let mut edge_flux = Array2::<f64>::zeros((nc, n + 1));
    let mut left = vec![0.0; nc];
    let mut right = vec![0.0; nc];
    for e in 0..=n {
        for c in 0..nc {
            left[c] = padded[[c, e]];
            right[c] = padded[[c, e + 1]];
        }
        let f = flux.eval(&left, &right, sys)?;
        for c in 0..nc {
            edge_flux[[c, e]] = f[c];
        }
    }
    let inv_dx = 1.0 / field.grid().dx();
    let mut rhs = Array2::zeros((nc, n));
    for c in 0..nc {
        for j in 0..n {
            rhs[[c, j]] = -(edge_flux[[c, j + 1]] - edge_flux[[c, j]]) * inv_dx;
        }
    }
    Ok(rhs)
}

fn integer_ratio(numer: f64, denom: f64, what: &str) -> Result<usize> {
    let ratio = numer / denom;
    let k = ratio.round();
    if k < 0.0 || (ratio - k).abs() > 1e-9 * ratio.abs().max(1.0) {
        return Err(Error::invalid(format!("{what}: {numer} is not an integer multiple of {denom}")));
    }
    Ok(k as usize)
}

/// Marches `ic` to `t_end`, recording a snapshot every `record_dt`.
///
/// Snapshots land exactly on `t0 + l * record_dt`. Blow-up and loss of
/// positivity are reported as [`Error::BlowUp`] with the failing time.
pub fn solve_reference(
    ic: &StateField,
    sys: SystemSpec,
    bc: BoundaryCondition,
    flux: NumericalFlux,
    t_end: f64,
    policy: CflPolicy,
    record_dt: f64,
) -> Result<Trajectory> {
    sys.validate()?;
    policy.validate()?;
    flux.check_compatible(sys)?;
    if !(t_end > 0.0) || !(record_dt > 0.0) {
        return Err(Error::invalid("t_end and record_dt must be positive"));
    }
    let n_records = integer_ratio(t_end, record_dt, "t_end")?;
    let substeps = match policy {
        CflPolicy::FixedDt { dt } => Some(integer_ratio(record_dt, dt, "record_dt")?.max(1)),
        CflPolicy::Number { .. } => None,
    };

    let t0 = ic.time();
    let dx = ic.grid().dx();
    let rhs = |s: &StateField| fv_rhs_values(s, sys, bc, flux);
    let blow_up = |t: f64, e: Error| match e {
        Error::NonFinite(reason) | Error::Inadmissible(reason) => Error::BlowUp { time: t, reason },
        other => other,
    };

    let mut snapshots = Vec::with_capacity(n_records + 1);
    snapshots.push(ic.clone());
    let mut state = ic.clone();
    for l in 1..=n_records {
        let target = t0 + l as f64 * record_dt;
        match (policy, substeps) {
            (CflPolicy::FixedDt { .. }, Some(k)) => {
                let dt = record_dt / k as f64;
                for _ in 0..k {
                    state = tvd_rk3_step(&state, rhs, dt).map_err(|e| blow_up(state.time(), e))?;
                }
            }
            (CflPolicy::Number { cfl }, _) => {
                while state.time() < target {
                    let speed = max_wave_speed(&state, sys).map_err(|e| blow_up(state.time(), e))?;
                    let remaining = target - state.time();
                    let mut dt = if speed > 0.0 { cfl * dx / speed } else { remaining };
                    if state.time() + dt >= target - 1e-12 * target.abs().max(1.0) {
                        dt = remaining;
                    }
                    let t_here = state.time();
                    state = tvd_rk3_step(&state, rhs, dt).map_err(|e| blow_up(t_here, e))?;
                    if dt == remaining {
                        break;
                    }
                }
            }
            _ => unreachable!(),
        }
        state = state.with_values(state.values().clone(), target)?;
        // the watchdog catches loss of positivity even if every stage stayed finite
        if !matches!(sys, SystemSpec::Burgers) {
            max_wave_speed(&state, sys).map_err(|e| blow_up(target, e))?;
        }
        snapshots.push(state.clone());
    }
    Trajectory::new(snapshots, record_dt, IcParams::new())
}
