use serde::{Deserialize, Serialize};

use crate::models::NetConfig;
use crate::nnkit::AdamConfig;
use crate::{Error, Result};

/// Training hyperparameters. Defaults reproduce the reference setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Pilot mini-batch size `N_b`.
    pub pilot_batch: usize,
    /// Payload mini-batch size `N_u`.
    pub payload_batch: usize,
    /// Total parameter updates `N_t`.
    pub updates: usize,
    /// Pilot-only updates before decision-directed relabeling, `N_s`.
    pub sdd_warmup: usize,
    /// Fixed pilot weight of the decision-directed loss, `γ₀`.
    pub gamma0: f64,
    /// Weight of the encoder's pilot cross-entropy in the VAE loss.
    pub alpha: f64,
    /// Updates between schedule refreshes, `N_τ`.
    pub schedule_period: usize,
    /// ADAM learning rate.
    pub eta: f64,
    /// Mini-batch size of the all-pilots reference trainer.
    pub all_pilots_batch: usize,
    pub adam: AdamConfig,
    pub net: NetConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            pilot_batch: 16,
            payload_batch: 32,
            updates: 5000,
            sdd_warmup: 1500,
            gamma0: 0.98,
            alpha: 0.2,
            schedule_period: 100,
            eta: 0.001,
            all_pilots_batch: 48,
            adam: AdamConfig::default(),
            net: NetConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pilot_batch", self.pilot_batch),
            ("payload_batch", self.payload_batch),
            ("schedule_period", self.schedule_period),
            ("all_pilots_batch", self.all_pilots_batch),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.sdd_warmup > self.updates {
            return Err(Error::Config(format!(
                "sdd_warmup ({}) must not exceed updates ({})",
                self.sdd_warmup, self.updates
            )));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 <= 1.0) {
            return Err(Error::Config(format!(
                "gamma0 must lie in (0, 1], got {}",
                self.gamma0
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.net.hidden.contains(&0) {
            return Err(Error::Config("hidden layer sizes must be positive".into()));
        }
        Ok(())
    }
}
