//! Physical fluxes and wave speeds of the three benchmark systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::StateField;

/// Conservation law being simulated. Component order is fixed per system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    /// `u_t + (u^2/2)_x = 0`
    Burgers,
    /// `(h, hv)` with gravity `g`.
    ShallowWater { g: f64 },
    /// `(rho, rho*u, E)` with ratio of specific heats `gamma`.
    Euler { gamma: f64 },
}

impl SystemSpec {
    pub fn shallow_water(g: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::invalid(format!("gravity must be positive, got {g}")));
        }
        Ok(SystemSpec::ShallowWater { g })
    }

    pub fn euler(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(SystemSpec::Euler { gamma })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SystemSpec::Burgers => Ok(()),
            SystemSpec::ShallowWater { g } => Self::shallow_water(g).map(|_| ()),
            SystemSpec::Euler { gamma } => Self::euler(gamma).map(|_| ()),
        }
    }

    pub fn n_comp(&self) -> usize {
        match self {
            SystemSpec::Burgers => 1,
            SystemSpec::ShallowWater { .. } => 2,
            SystemSpec::Euler { .. } => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Burgers => "burgers",
            SystemSpec::ShallowWater { .. } => "shallow_water",
            SystemSpec::Euler { .. } => "euler",
        }
    }

    pub fn component_names(&self) -> &'static [&'static str] {
        match self {
            SystemSpec::Burgers => &["u"],
            SystemSpec::ShallowWater { .. } => &["h", "hv"],
            SystemSpec::Euler { .. } => &["rho", "rho_u", "E"],
        }
    }
}

/// Primitive quantities needed by the wave-speed estimates.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Primitive {
    pub velocity: f64,
    pub sound_speed: f64,
}

fn check_len(w: &[f64], sys: SystemSpec) -> Result<()> {
    if w.len() != sys.n_comp() {
        return Err(Error::invalid(format!(
            "{} state needs {} components, got {}",
            sys.name(),
            sys.n_comp(),
            w.len()
        )));
    }
    Ok(())
}

fn euler_pressure(w: &[f64], gamma: f64) -> Result<f64> {
    let (rho, mom, energy) = (w[0], w[1], w[2]);
    if !(rho > 0.0) {
        return Err(Error::Inadmissible(format!("density {rho} <= 0")));
    }
    let p = (gamma - 1.0) * (energy - 0.5 * mom * mom / rho);
    if !(p > 0.0) {
        return Err(Error::Inadmissible(format!("pressure {p} <= 0")));
    }
    Ok(p)
}

pub(crate) fn primitive(w: &[f64], sys: SystemSpec) -> Result<Primitive> {
    check_len(w, sys)?;
    match sys {
        SystemSpec::Burgers => Ok(Primitive { velocity: w[0], sound_speed: 0.0 }),
        SystemSpec::ShallowWater { g } => {
            let h = w[0];
            if !(h > 0.0) {
                return Err(Error::Inadmissible(format!("water height {h} <= 0")));
            }
            Ok(Primitive { velocity: w[1] / h, sound_speed: (g * h).sqrt() })
        }
        SystemSpec::Euler { gamma } => {
            let p = euler_pressure(w, gamma)?;
            Ok(Primitive { velocity: w[1] / w[0], sound_speed: (gamma * p / w[0]).sqrt() })
        }
    }
}

/// Exact flux `f(w)` of a single state.
pub fn physical_flux(w: &[f64], sys: SystemSpec) -> Result<Vec<f64>> {
    check_len(w, sys)?;
    match sys {
        SystemSpec::Burgers => Ok(vec![0.5 * w[0] * w[0]]),
        SystemSpec::ShallowWater { g } => {
            let (h, hv) = (w[0], w[1]);
            if !(h > 0.0) {
                return Err(Error::Inadmissible(format!("water height {h} <= 0")));
            }
            Ok(vec![hv, hv * hv / h + 0.5 * g * h * h])
        }
        SystemSpec::Euler { gamma } => {
            let p = euler_pressure(w, gamma)?;
            let u = w[1] / w[0];
            Ok(vec![w[1], w[1] * u + p, u * (w[2] + p)])
        }
    }
}

/// Largest characteristic speed `|u| + c` over the field, reduced in cell order.
pub fn max_wave_speed(field: &StateField, sys: SystemSpec) -> Result<f64> {
    if field.n_comp() != sys.n_comp() {
        return Err(Error::invalid("field component count does not match system"));
    }
    let mut speed: f64 = 0.0;
    for j in 0..field.n_cells() {
        let w = field.cell(j);
        let prim = primitive(&w, sys).map_err(|e| match e {
            Error::Inadmissible(msg) => Error::Inadmissible(format!("cell {j}: {msg}")),
            other => other,
        })?;
        speed = speed.max(prim.velocity.abs() + prim.sound_speed);
    }
    Ok(speed)
}
