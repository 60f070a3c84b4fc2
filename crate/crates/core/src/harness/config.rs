use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ssl::TrainConfig;
use crate::{Error, Result};

use super::Method;

/// One experiment: the grid of cells `method × snr × N` and the number of
/// devices simulated per cell.
///
/// Stored as TOML; every key is optional and falls back to the default:
///
/// ```toml
/// snr_db = [18.0, 20.0]
/// n_symbols = [128, 256, 512, 1024]
/// n_pilots = 16
/// methods = ["vae", "mcem", "viterbi_em", "sdd", "all_pilots", "optimal"]
/// devices = 50
/// seed = 7
/// out = "results.csv"
/// holdout = false
/// holdout_symbols = 1000
///
/// [train]
/// updates = 5000
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub snr_db: Vec<f64>,
    /// Block lengths `N`, pilots included.
    pub n_symbols: Vec<usize>,
    pub n_pilots: usize,
    pub methods: Vec<Method>,
    /// Devices per cell.
    pub devices: usize,
    /// Master seed.
    pub seed: u64,
    /// Also evaluate every trained decoder on a fresh block of the same
    /// channel.
    pub holdout: bool,
    pub holdout_symbols: usize,
    /// Worker bound; unset uses all cores.
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            snr_db: vec![18.0, 20.0],
            n_symbols: vec![128, 256, 512, 1024],
            n_pilots: 16,
            methods: vec![
                Method::Vae,
                Method::Mcem,
                Method::ViterbiEm,
                Method::Sdd,
                Method::AllPilots,
                Method::Optimal,
            ],
            devices: 50,
            seed: 7,
            holdout: false,
            holdout_symbols: 1000,
            threads: None,
            out: PathBuf::from("results.csv"),
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() || self.n_symbols.is_empty() || self.methods.is_empty() {
            return Err(Error::Config(
                "snr_db, n_symbols and methods must be non-empty".into(),
            ));
        }
        if let Some(bad) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("snr_db {bad} is not finite")));
        }
        let min_n = *self.n_symbols.iter().min().expect("non-empty");
        if self.n_pilots >= min_n {
            return Err(Error::Config(format!(
                "n_pilots ({}) must be below every block length (min {min_n})",
                self.n_pilots
            )));
        }
        let semi_supervised = self
            .methods
            .iter()
            .any(|m| !matches!(m, Method::Optimal | Method::AllPilots));
        if semi_supervised && self.n_pilots == 0 {
            return Err(Error::Config(
                "semi-supervised methods need n_pilots >= 1".into(),
            ));
        }
        if self.devices == 0 {
            return Err(Error::Config("devices must be at least 1".into()));
        }
        if self.holdout && self.holdout_symbols == 0 {
            return Err(Error::Config("holdout_symbols must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        self.train.validate()
    }
}
