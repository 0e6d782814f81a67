//! Reference finite-volume machinery: numerical fluxes, TVD-RK3 and the solver driver.

mod numflux;
mod reference;
mod rk3;

pub use numflux::{engquist_osher_flux, hlle_flux, NumericalFlux};
pub use reference::{fv_rhs, solve_reference, CflPolicy};
pub use rk3::tvd_rk3_step;

pub(crate) use rk3::{lin_comb, rk3_stage, RK3_STAGES};
