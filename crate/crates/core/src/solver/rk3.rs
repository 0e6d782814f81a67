//! Three-stage TVD (SSP) Runge-Kutta time stepping.
//!
//! ```text
//! u1    = u + dt L(u)
//! u2    = 3/4 u + 1/4 u1 + 1/4 dt L(u1)
//! u_new = 1/3 u + 2/3 u2 + 2/3 dt L(u2)
//! ```
//!
//! Stages are evaluated in increment form, `u + c (prev - u) + c' dt L(prev)`,
//! so a vanishing right-hand side returns `u` bit-for-bit.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::StateField;

/// Coefficients `(c_prev, c_rhs)` of stage `k`:
/// `u + c_prev * (previous_stage - u) + c_rhs * dt * L(previous_stage)`.
pub(crate) const RK3_STAGES: [(f64, f64); 3] = [(0.0, 1.0), (0.25, 0.25), (2.0 / 3.0, 2.0 / 3.0)];

/// Linear combination `sum_i c_i x_i`, accumulated left to right.
pub(crate) fn lin_comb(terms: &[(f64, &Array2<f64>)]) -> Array2<f64> {
    let (c0, x0) = terms[0];
    let mut out = x0.mapv(|v| c0 * v);
    for &(c, x) in &terms[1..] {
        out.zip_mut_with(x, |o, &v| *o += c * v);
    }
    out
}

/// Stage value from `u`, the previous stage and the right-hand side at the previous stage.
pub(crate) fn rk3_stage(stage: usize, u: &Array2<f64>, prev: &Array2<f64>, rhs: &Array2<f64>, dt: f64) -> Array2<f64> {
    let (cp, cr) = RK3_STAGES[stage];
    if stage == 0 {
        lin_comb(&[(1.0, u), (cr * dt, rhs)])
    } else {
        let diff = lin_comb(&[(1.0, prev), (-1.0, u)]);
        lin_comb(&[(1.0, u), (cp, &diff), (cr * dt, rhs)])
    }
}

/// Advances `field` by one TVD-RK3 step of size `dt` under `rhs`.
///
/// Any non-finite stage value is reported as [`Error::NonFinite`].
pub fn tvd_rk3_step<F>(field: &StateField, mut rhs: F, dt: f64) -> Result<StateField>
where
    F: FnMut(&StateField) -> Result<Array2<f64>>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let u = field.values();
    let stage_times = [field.time() + dt, field.time() + 0.5 * dt, field.time() + dt];
    let mut current = field.clone();
    for (stage, &t) in stage_times.iter().enumerate() {
        let r = rhs(&current)?;
        if r.shape() != u.shape() {
            return Err(Error::invalid("right-hand side has the wrong shape"));
        }
        let next = rk3_stage(stage, u, current.values(), &r, dt);
        current = field.with_values(next, t).map_err(|e| match e {
            Error::NonFinite(msg) => Error::NonFinite(format!("RK3 stage {}: {msg}", stage + 1)),
            other => other,
        })?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid1D;
    use ndarray::array;

    fn scalar_field(v: f64) -> StateField {
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        StateField::new(g, Array2::from_elem((1, 4), v), 0.0).unwrap()
    }

    #[test]
    fn zero_rhs_is_identity() {
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        let f = StateField::new(g, array![[1.0, -2.0, 3.5, 0.25]], 0.0).unwrap();
        let out = tvd_rk3_step(&f, |s| Ok(Array2::zeros(s.values().dim())), 0.1).unwrap();
        assert_eq!(out.values(), f.values());
        assert!((out.time() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn decay_matches_stability_polynomial() {
        let out = tvd_rk3_step(&scalar_field(1.0), |s| Ok(s.values().mapv(|v| -v)), 0.1).unwrap();
        // 1 - z + z^2/2 - z^3/6 at z = 0.1
        assert!((out.values()[[0, 0]] - 0.9048333333333334).abs() < 1e-15);
    }

    #[test]
    fn constant_rhs_is_exact() {
        let out = tvd_rk3_step(&scalar_field(2.0), |s| Ok(Array2::from_elem(s.values().dim(), 3.0)), 0.25).unwrap();
        assert!((out.values()[[0, 0]] - 2.75).abs() < 1e-15);
    }

    #[test]
    fn blow_up_detected() {
        let r = tvd_rk3_step(&scalar_field(1.0), |s| Ok(s.values().mapv(|_| f64::INFINITY)), 0.1);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn third_order_convergence() {
        let err = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let mut f = scalar_field(1.0);
            for _ in 0..steps {
                f = tvd_rk3_step(&f, |s| Ok(s.values().mapv(|v| -v)), dt).unwrap();
            }
            (f.values()[[0, 0]] - (-1.0f64).exp()).abs()
        };
        let (e1, e2, e3) = (err(0.1), err(0.05), err(0.025));
        for order in [(e1 / e2).log2(), (e2 / e3).log2()] {
            assert!((order - 3.0).abs() <= 0.2, "observed order {order}");
        }
    }
}
