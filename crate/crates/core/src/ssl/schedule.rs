//! Annealing of the Gumbel-softmax temperature and the pilot weight.
//!
//! Both schedules are evaluated at the first update of each window of
//! `period` updates and held for the rest of the window.

use crate::{Error, Result};

/// Update index at which the window containing `l` starts (1-based).
pub fn window_anchor(l: usize, period: usize) -> usize {
    debug_assert!(l >= 1 && period >= 1);
    period * ((l.max(1) - 1) / period) + 1
}

/// Temperature at update `l`: `max(0.5, exp(−0.001 (l' − 1)))` with `l'`
/// the window anchor.
pub fn tau_schedule(l: usize, period: usize) -> f64 {
    let anchor = window_anchor(l, period);
    (-0.001 * (anchor - 1) as f64).exp().max(0.5)
}

/// Pilot weight `γ_l = 1 / (1 + β_l)` with
/// `β_l = min(2 exp(0.0008 (l' − 1)), β_max)` and
/// `β_max = min((N − N_p)/N_p, 40)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSchedule {
    beta_max: f64,
    period: usize,
}

impl GammaSchedule {
    pub fn new(n_symbols: usize, n_pilots: usize, period: usize) -> Result<Self> {
        if n_pilots == 0 || n_symbols <= n_pilots {
            return Err(Error::Config(format!(
                "pilot weight schedule needs N > N_p >= 1, got N = {n_symbols}, N_p = {n_pilots}"
            )));
        }
        if period == 0 {
            return Err(Error::Config("schedule period must be positive".into()));
        }
        let ratio = (n_symbols - n_pilots) as f64 / n_pilots as f64;
        Ok(GammaSchedule {
            beta_max: ratio.min(40.0),
            period,
        })
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }

    pub fn beta(&self, l: usize) -> f64 {
        let anchor = window_anchor(l, self.period);
        (2.0 * (0.0008 * (anchor - 1) as f64).exp()).min(self.beta_max)
    }

    pub fn gamma(&self, l: usize) -> f64 {
        1.0 / (1.0 + self.beta(l))
    }
}

pub fn gamma_schedule(l: usize, n_symbols: usize, n_pilots: usize, period: usize) -> Result<f64> {
    Ok(GammaSchedule::new(n_symbols, n_pilots, period)?.gamma(l))
}
