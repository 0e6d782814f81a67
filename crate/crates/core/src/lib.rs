pub mod diagnostics;
pub mod error;
pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod field;
pub mod model;
pub mod nn;
pub mod physics;
pub mod presets;
pub mod solver;
pub mod train;

pub use error::{Error, Result};
