//! Device sweeps, SER evaluation and result files.

mod config;
mod results;
mod run;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

pub use config::ExperimentConfig;
pub use results::{holdout_path, read_results, write_results, SerRecord};
pub use run::{
    cells, device_block, evaluate_ser, run_device, run_experiment, CellKey, Decoder, DeviceOutcome,
    ExperimentOutput, TrainedDecoder,
};

/// A decoding method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// ML decoding with the true channel.
    Optimal,
    /// Supervised classifier that sees every label of the block.
    AllPilots,
    Sdd,
    Mcem,
    ViterbiEm,
    Vae,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Optimal,
        Method::AllPilots,
        Method::Sdd,
        Method::Mcem,
        Method::ViterbiEm,
        Method::Vae,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Optimal => "optimal",
            Method::AllPilots => "all_pilots",
            Method::Sdd => "sdd",
            Method::Mcem => "mcem",
            Method::ViterbiEm => "viterbi_em",
            Method::Vae => "vae",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}
