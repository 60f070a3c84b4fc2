//! Minimal reverse-mode toolkit for small fully connected networks.

mod adam;
mod mlp;
pub mod ops;
pub mod snapshot;

pub use adam::{AdamConfig, AdamState};
pub use mlp::{param_count, Activation, Gradients, InitScheme, Mlp, Tape};
pub use ops::{entropy, gaussian_loglik, log_softmax, softmax};
