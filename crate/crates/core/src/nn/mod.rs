//! Feed-forward networks, reverse-mode differentiation and the Adam optimizer.

mod adam;
mod mlp;
mod tape;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use mlp::{glorot_limit, grad_scalar, Activation, GradientBundle, MlpParams, MlpVars};
pub use tape::{Tape, Var};
pub(crate) use tape::gather;
