//! The two learned probability models.
//!
//! [`GenerativeNet`] maps a constellation point to the mean and log-variance
//! of a diagonal Gaussian over the received sample, giving `p(y|s)`.
//! [`EncoderNet`] maps a received sample to logits of the posterior `q(s|y)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Constellation, Symbol, K};
use crate::nnkit::ops::{self, gaussian_quadratic, log_sum_exp};
use crate::nnkit::{Activation, InitScheme, Mlp};
use crate::{Error, Result};

/// Hidden architecture shared by both networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub init: InitScheme,
    /// Standardize encoder inputs with the block's output mean and spread.
    pub standardize_inputs: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            hidden: vec![10, 30, 30],
            activation: Activation::Relu,
            init: InitScheme::GlorotUniform,
            standardize_inputs: false,
        }
    }
}

impl NetConfig {
    fn sizes(&self, n_in: usize, n_out: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(n_in);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(n_out);
        sizes
    }
}

/// Gaussian parameters predicted for one input point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStats {
    pub mu: [f64; 2],
    pub log_var: [f64; 2],
}

impl GaussianStats {
    fn from_row(row: &[f64]) -> Self {
        GaussianStats {
            mu: [row[0], row[1]],
            log_var: [row[2], row[3]],
        }
    }

    pub fn loglik(&self, y: [f64; 2]) -> f64 {
        -LOG_2PI + gaussian_quadratic(y, self.mu, self.log_var)
    }
}

const LOG_2PI: f64 = 1.837_877_066_409_345_5;

/// The channel model `p_θ(y|s) = N(y; μ_θ(x(s)), diag σ²_θ(x(s)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeNet {
    mlp: Mlp,
    constellation: Constellation,
}

/// Per-symbol Gaussians of a frozen [`GenerativeNet`].
///
/// Evaluating the network on all sixteen constellation points once is
/// enough to score any number of received samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodTable {
    stats: [GaussianStats; K],
}

impl LikelihoodTable {
    pub fn stats(&self) -> &[GaussianStats; K] {
        &self.stats
    }

    pub fn logliks(&self, y: [f64; 2]) -> [f64; K] {
        let mut out = [0.0; K];
        for (o, st) in out.iter_mut().zip(&self.stats) {
            *o = st.loglik(y);
        }
        out
    }

    /// `p_θ(s|y)` under a uniform symbol prior.
    pub fn posterior(&self, y: [f64; 2]) -> [f64; K] {
        softmax16(&self.logliks(y))
    }

    /// `log p_θ(y) = log Σ_s p_θ(y|s)/K`, by enumeration.
    pub fn log_evidence(&self, y: [f64; 2]) -> f64 {
        log_sum_exp(&self.logliks(y)) - (K as f64).ln()
    }

    /// Right-hand side of the evidence lower bound for the surrogate
    /// posterior `q`: `E_q[−log q(s) + log p_θ(s, y)]`.
    pub fn elbo(&self, y: [f64; 2], q: &[f64; K]) -> f64 {
        let ll = self.logliks(y);
        q.iter()
            .zip(&ll)
            .filter(|(&qs, _)| qs > 0.0)
            .map(|(&qs, &l)| qs * (-qs.ln() + l - (K as f64).ln()))
            .sum()
    }

    pub fn decode(&self, y: [f64; 2]) -> Symbol {
        Symbol::from_index(ops::argmax(&self.logliks(y)))
    }
}

pub(crate) fn softmax16(z: &[f64; K]) -> [f64; K] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; K];
    let mut total = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - m).exp();
        total += *o;
    }
    for o in &mut out {
        *o /= total;
    }
    out
}

impl GenerativeNet {
    pub fn init<R: Rng + ?Sized>(
        cfg: &NetConfig,
        constellation: Constellation,
        rng: &mut R,
    ) -> Result<Self> {
        let mlp = Mlp::init(&cfg.sizes(2, 4), cfg.activation, cfg.init, rng)?;
        Ok(GenerativeNet { mlp, constellation })
    }

    pub fn from_mlp(mlp: Mlp, constellation: Constellation) -> Result<Self> {
        if mlp.n_inputs() != 2 || mlp.n_outputs() != 4 {
            return Err(Error::InvalidLayerSizes(mlp.sizes().to_vec()));
        }
        Ok(GenerativeNet { mlp, constellation })
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn mlp_mut(&mut self) -> &mut Mlp {
        &mut self.mlp
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    /// Predicted Gaussian for an arbitrary input point (a constellation
    /// point or a relaxed mixture of them).
    pub fn stats(&self, x: [f64; 2]) -> Result<GaussianStats> {
        let out = self.mlp.eval_batch(&x, 1)?;
        Ok(GaussianStats::from_row(&out))
    }

    pub fn table(&self) -> Result<LikelihoodTable> {
        let inputs: Vec<f64> = self
            .constellation
            .points()
            .iter()
            .flatten()
            .copied()
            .collect();
        let out = self.mlp.eval_batch(&inputs, K)?;
        let mut stats = [GaussianStats {
            mu: [0.0; 2],
            log_var: [0.0; 2],
        }; K];
        for (st, row) in stats.iter_mut().zip(out.chunks_exact(4)) {
            *st = GaussianStats::from_row(row);
        }
        Ok(LikelihoodTable { stats })
    }

    /// `log p_θ(y|s)`.
    pub fn loglik(&self, y: [f64; 2], s: Symbol) -> Result<f64> {
        let st = self.stats(self.constellation.point(s))?;
        ops::gaussian_loglik(y, st.mu, st.log_var)
    }

    /// `p_θ(s|y)` for all sixteen symbols.
    pub fn posterior(&self, y: [f64; 2]) -> Result<[f64; K]> {
        Ok(self.table()?.posterior(y))
    }
}

/// Shift and scale applied to encoder inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputScaling {
    pub shift: [f64; 2],
    pub scale: [f64; 2],
}

impl Default for InputScaling {
    fn default() -> Self {
        InputScaling {
            shift: [0.0; 2],
            scale: [1.0; 2],
        }
    }
}

impl InputScaling {
    /// Per-axis mean and standard deviation of `ys`.
    pub fn standardizing(ys: &[[f64; 2]]) -> Self {
        let n = ys.len().max(1) as f64;
        let mut shift = [0.0; 2];
        let mut scale = [1.0; 2];
        for j in 0..2 {
            shift[j] = ys.iter().map(|y| y[j]).sum::<f64>() / n;
            let var = ys.iter().map(|y| (y[j] - shift[j]).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                scale[j] = var.sqrt();
            }
        }
        InputScaling { shift, scale }
    }

    pub fn apply(&self, y: [f64; 2]) -> [f64; 2] {
        [
            (y[0] - self.shift[0]) / self.scale[0],
            (y[1] - self.shift[1]) / self.scale[1],
        ]
    }
}

/// The classifier / variational posterior `q_Φ(s|y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderNet {
    mlp: Mlp,
    scaling: InputScaling,
}

impl EncoderNet {
    pub fn init<R: Rng + ?Sized>(cfg: &NetConfig, rng: &mut R) -> Result<Self> {
        let mlp = Mlp::init(&cfg.sizes(2, K), cfg.activation, cfg.init, rng)?;
        Ok(EncoderNet {
            mlp,
            scaling: InputScaling::default(),
        })
    }

    pub fn from_mlp(mlp: Mlp) -> Result<Self> {
        if mlp.n_inputs() != 2 || mlp.n_outputs() != K {
            return Err(Error::InvalidLayerSizes(mlp.sizes().to_vec()));
        }
        Ok(EncoderNet {
            mlp,
            scaling: InputScaling::default(),
        })
    }

    pub fn with_scaling(mut self, scaling: InputScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn scaling(&self) -> &InputScaling {
        &self.scaling
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn mlp_mut(&mut self) -> &mut Mlp {
        &mut self.mlp
    }

    /// Network inputs for a batch of received samples, row-major.
    pub fn inputs(&self, ys: impl IntoIterator<Item = [f64; 2]>) -> Vec<f64> {
        ys.into_iter().flat_map(|y| self.scaling.apply(y)).collect()
    }

    pub fn logits(&self, y: [f64; 2]) -> Result<[f64; K]> {
        let out = self.mlp.eval_batch(&self.scaling.apply(y), 1)?;
        let mut z = [0.0; K];
        z.copy_from_slice(&out);
        Ok(z)
    }

    pub fn log_posterior(&self, y: [f64; 2]) -> Result<[f64; K]> {
        let z = self.logits(y)?;
        let lp = ops::log_softmax(&z);
        let mut out = [0.0; K];
        out.copy_from_slice(&lp);
        Ok(out)
    }

    pub fn posterior(&self, y: [f64; 2]) -> Result<[f64; K]> {
        Ok(softmax16(&self.logits(y)?))
    }

    /// Posteriors for many samples with one batched forward pass.
    pub fn posteriors(&self, ys: &[[f64; 2]]) -> Result<Vec<[f64; K]>> {
        let out = self
            .mlp
            .eval_batch(&self.inputs(ys.iter().copied()), ys.len())?;
        Ok(out
            .chunks_exact(K)
            .map(|row| {
                let mut z = [0.0; K];
                z.copy_from_slice(row);
                softmax16(&z)
            })
            .collect())
    }
}
