//! Semi-supervised decoders for an unknown nonlinear memoryless channel.
//!
//! A device transmits a block of 16-QAM symbols through I/Q imbalance,
//! Rayleigh fading and complex Gaussian noise. The receiver knows only the
//! first few (pilot) symbols and has to learn a decoder from the pilots plus
//! the unlabeled payload observations. This crate contains:
//!
//! * [`channel`]: the channel simulator and the known-channel ML decoder,
//! * [`nnkit`]: a small reverse-mode toolkit for fully connected networks,
//! * [`models`]: the Gaussian channel model `p(y|s)` and the classifier `q(s|y)`,
//! * [`ssl`]: the training procedures (all-pilots, decision directed,
//!   Monte-Carlo EM, Viterbi EM, Gumbel-softmax VAE) and decode rules,
//! * [`harness`]: device sweeps, SER bookkeeping and CSV output.
//!
//! Device simulations run on a rayon pool when the `rayon` feature is
//! enabled (the default) and sequentially otherwise; see [`par`].

pub mod channel;
pub mod error;
pub mod harness;
pub mod models;
pub mod nnkit;
pub mod par;
pub mod rng;
pub mod ssl;

pub use error::{Error, Result};
