//! Semi-supervised training procedures and decode rules.

mod batch;
mod config;
pub mod decode;
pub mod gumbel;
pub mod losses;
pub mod schedule;
mod train;

pub use batch::BatchSampler;
pub use config::TrainConfig;
pub use decode::{decode_combined, decode_encoder, decode_generative, BatchDecoder};
pub use gumbel::{gumbel_sample, gumbel_softmax_relax, RelaxedSample};
pub use schedule::{gamma_schedule, tau_schedule, GammaSchedule};
pub use train::{
    pseudo_labels, sample_categorical, train_all_pilots, train_em, train_em_with, train_mcem,
    train_sdd, train_vae, train_vae_in, train_viterbi_em, Imputation, Trained, VaeModels,
};
