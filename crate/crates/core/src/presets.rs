//! Named experiment configurations and the fixed initial conditions used for figures.
//!
//! | preset        | N   | dt    | N_traj | L  | M   | noise |
//! |---------------|-----|-------|--------|----|-----|-------|
//! | burgers-caseI | 512 | 0.005 | 200    | 20 | 300 | 0     |
//! | swe-caseI     | 512 | 0.005 | 200    | 20 | -   | 0     |
//! | euler-caseI   | 512 | 0.002 | 300    | 20 | 300 | 0     |
//!
//! Case II uses a coarse grid (128 for Burgers and shallow water, 256 for
//! Euler). Case III adds noise at level 1.0. Both are meant to be tuned with
//! the generate overrides.

use crate::data::{fixed_ic, IcSamplerSpec, RunConfig, CONFIG_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::field::{BoundaryCondition, Grid1D, IcParams, StateField};
use crate::physics::SystemSpec;

pub const PRESETS: [&str; 9] = [
    "burgers-caseI",
    "burgers-caseII",
    "burgers-caseIII",
    "swe-caseI",
    "swe-caseII",
    "swe-caseIII",
    "euler-caseI",
    "euler-caseII",
    "euler-caseIII",
];

pub const FIGURE_ICS: [&str; 3] = ["burgers-figure", "swe-figure", "euler-figure"];

/// Expands a preset name into a full [`RunConfig`].
pub fn preset(name: &str) -> Result<RunConfig> {
    let (family, case) = name
        .split_once("-case")
        .ok_or_else(|| Error::invalid(format!("unknown preset '{name}' (expected one of {PRESETS:?})")))?;
    let mut cfg = match family {
        "burgers" => RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 0,
            n_cells: 512,
            dt: 0.005,
            n_traj: 200,
            l: 20,
            m: Some(300),
            noise: 0.0,
            bc: BoundaryCondition::Periodic,
            flux: None,
            cfl: None,
            system: SystemSpec::Burgers,
            sampler: IcSamplerSpec::burgers_sine(),
        },
        "swe" => RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 0,
            n_cells: 512,
            dt: 0.005,
            n_traj: 200,
            l: 20,
            m: None,
            noise: 0.0,
            bc: BoundaryCondition::ZerothOrder,
            flux: None,
            cfl: None,
            system: SystemSpec::shallow_water(1.0)?,
            sampler: IcSamplerSpec::dam_break(),
        },
        "euler" => RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 0,
            n_cells: 512,
            dt: 0.002,
            n_traj: 300,
            l: 20,
            m: Some(300),
            noise: 0.0,
            bc: BoundaryCondition::ZerothOrder,
            flux: None,
            cfl: None,
            system: SystemSpec::euler(1.4)?,
            sampler: IcSamplerSpec::shu_osher(),
        },
        _ => return Err(Error::invalid(format!("unknown preset '{name}'"))),
    };
    match case {
        "I" => {}
        "II" => cfg.n_cells = if family == "euler" { 256 } else { 128 },
        "III" => cfg.noise = 1.0,
        _ => return Err(Error::invalid(format!("unknown preset '{name}'"))),
    }
    cfg.validate()?;
    Ok(cfg)
}

/// System, boundary condition, sampler family and parameters of a figure IC.
pub fn figure_setup(name: &str) -> Result<(SystemSpec, BoundaryCondition, IcSamplerSpec, IcParams)> {
    let params = |kv: &[(&str, f64)]| kv.iter().map(|(k, v)| (k.to_string(), *v)).collect::<IcParams>();
    match name {
        "burgers-figure" => Ok((
            SystemSpec::Burgers,
            BoundaryCondition::Periodic,
            IcSamplerSpec::burgers_sine(),
            params(&[("alpha", 0.06342), ("beta", 1.17322)]),
        )),
        "swe-figure" => Ok((
            SystemSpec::shallow_water(1.0)?,
            BoundaryCondition::ZerothOrder,
            IcSamplerSpec::dam_break(),
            params(&[
                ("h_l", 3.5691196),
                ("h_r", 1.17867352),
                ("v_l", -0.06466697),
                ("v_r", -0.04519738),
                ("x0", 0.00383271),
            ]),
        )),
        "euler-figure" => Ok((
            SystemSpec::euler(1.4)?,
            BoundaryCondition::ZerothOrder,
            IcSamplerSpec::shu_osher(),
            params(&[
                ("rho_l", 3.857135),
                ("amplitude", 0.2),
                ("p_l", 10.33333),
                ("p_r", 1.0),
                ("u_l", 2.62936),
                ("x0", -4.0),
            ]),
        )),
        _ => Err(Error::invalid(format!("unknown initial-condition preset '{name}' (expected one of {FIGURE_ICS:?})"))),
    }
}

/// A figure IC evaluated on `n_cells` cells of its family's domain.
pub fn figure_ic(name: &str, n_cells: usize) -> Result<(StateField, SystemSpec, BoundaryCondition)> {
    let (sys, bc, spec, params) = figure_setup(name)?;
    let (a, b) = spec.domain();
    let field = fixed_ic(&spec, &Grid1D::new(a, b, n_cells)?, &params)?;
    Ok((field, sys, bc))
}

/// The sampler family that seeds `sys`.
pub fn sampler_for(sys: SystemSpec) -> IcSamplerSpec {
    match sys {
        SystemSpec::Burgers => IcSamplerSpec::burgers_sine(),
        SystemSpec::ShallowWater { .. } => IcSamplerSpec::dam_break(),
        SystemSpec::Euler { gamma } => match IcSamplerSpec::shu_osher() {
            IcSamplerSpec::ShuOsher { rho_l, amplitude, p_l, p_r, u_l, x0, x1, eps, .. } => {
                IcSamplerSpec::ShuOsher { rho_l, amplitude, p_l, p_r, u_l, x0, x1, eps, gamma }
            }
            other => other,
        },
    }
}
