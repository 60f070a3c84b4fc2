//! Mini-batch loss graphs with their parameter gradients.
//!
//! Each function returns the loss value together with dLoss/dparams in the
//! layout of the corresponding network's flat parameter vector.

use crate::channel::{Symbol, K};
use crate::models::{EncoderNet, GenerativeNet};
use crate::nnkit::ops::{self, gaussian_quadratic_grad};
use crate::{Error, Result};

use super::gumbel::gumbel_softmax_relax;

const LOG_2PI: f64 = 1.837_877_066_409_345_5;

/// A received sample, its (true or imputed) label and its loss weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weighted {
    pub y: [f64; 2],
    pub s: Symbol,
    pub weight: f64,
}

/// Loss value and parameter gradient of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
}

/// `−Σ_i w_i log q_Φ(s_i|y_i)`.
///
/// With `w_i = 1/N_b` over a pilot batch this is the supervised
/// cross-entropy; with `γ₀/N_b` on pilots and `(1−γ₀)/N_u` on
/// pseudo-labeled payload it is the decision-directed loss.
pub fn encoder_cross_entropy(enc: &EncoderNet, items: &[Weighted]) -> Result<LossGrad> {
    let inputs = enc.inputs(items.iter().map(|it| it.y));
    let (logits, tape) = enc.mlp().forward_batch(&inputs, items.len())?;
    let mut loss = 0.0;
    let mut upstream = Vec::with_capacity(logits.len());
    for (row, it) in logits.chunks_exact(K).zip(items) {
        let lq = ops::log_softmax(row);
        loss -= it.weight * lq[it.s.index()];
        // d/dz of −w log softmax(z)_s = w (softmax(z) − e_s)
        for (k, l) in lq.iter().enumerate() {
            let onehot = if k == it.s.index() { 1.0 } else { 0.0 };
            upstream.push(it.weight * (l.exp() - onehot));
        }
    }
    let grad = tape.backward(&upstream)?.params;
    Ok(LossGrad { loss, grad })
}

/// `−Σ_i w_i log p_θ(y_i|s_i)`.
///
/// The network only ever sees the sixteen constellation points here, so it
/// is evaluated once per point and the per-sample gradients are summed per
/// point before a single backward pass.
pub fn generative_nll(gen: &GenerativeNet, items: &[Weighted]) -> Result<LossGrad> {
    let inputs: Vec<f64> = gen
        .constellation()
        .points()
        .iter()
        .flatten()
        .copied()
        .collect();
    let (out, tape) = gen.mlp().forward_batch(&inputs, K)?;
    let mut loss = 0.0;
    let mut upstream = vec![0.0; 4 * K];
    for it in items {
        let k = it.s.index();
        let row = &out[4 * k..4 * k + 4];
        let (q, d_mu, d_lv) = gaussian_quadratic_grad(it.y, [row[0], row[1]], [row[2], row[3]]);
        loss -= it.weight * (q - LOG_2PI);
        let up = &mut upstream[4 * k..4 * k + 4];
        up[0] -= it.weight * d_mu[0];
        up[1] -= it.weight * d_mu[1];
        up[2] -= it.weight * d_lv[0];
        up[3] -= it.weight * d_lv[1];
    }
    let grad = tape.backward(&upstream)?.params;
    Ok(LossGrad { loss, grad })
}

/// Weights of the three VAE loss terms at one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaeWeights {
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
}

/// One VAE mini-batch: labeled pilots, unlabeled payload and one vector of
/// Gumbel noise per payload sample.
#[derive(Debug, Clone, Copy)]
pub struct VaeBatch<'a> {
    pub pilots: &'a [([f64; 2], Symbol)],
    pub payload: &'a [[f64; 2]],
    pub gumbel: &'a [[f64; K]],
}

/// Loss value with gradients for both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeLossGrad {
    pub loss: f64,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

/// The semi-supervised VAE loss
///
/// ```text
/// − α/N_b Σ_pilots log q_Φ(s|y) − γ/N_b Σ_pilots log p_θ(y|s)
/// − (1−γ)/N_u Σ_payload [ H(q_Φ(·|y)) + Ê log p_θ(y|s) ]
/// ```
///
/// where `Ê` feeds one Gumbel-softmax relaxed point `x̃` through the
/// generative network and drops the `log 2π` constant.
pub fn vae_loss(
    gen: &GenerativeNet,
    enc: &EncoderNet,
    batch: VaeBatch<'_>,
    w: VaeWeights,
) -> Result<VaeLossGrad> {
    let n_b = batch.pilots.len();
    let n_u = batch.payload.len();
    if batch.gumbel.len() != n_u {
        return Err(Error::DimensionMismatch {
            expected: n_u,
            got: batch.gumbel.len(),
        });
    }
    let c_pilot_q = if n_b > 0 { w.alpha / n_b as f64 } else { 0.0 };
    let c_pilot_p = if n_b > 0 { w.gamma / n_b as f64 } else { 0.0 };
    let c_payload = if n_u > 0 {
        (1.0 - w.gamma) / n_u as f64
    } else {
        0.0
    };
    let constellation = *gen.constellation();

    // encoder over pilots then payload
    let enc_inputs = enc.inputs(
        batch
            .pilots
            .iter()
            .map(|p| p.0)
            .chain(batch.payload.iter().copied()),
    );
    let (logits, enc_tape) = enc.mlp().forward_batch(&enc_inputs, n_b + n_u)?;
    let log_q: Vec<[f64; K]> = logits
        .chunks_exact(K)
        .map(|row| {
            let mut lq = [0.0; K];
            lq.copy_from_slice(&ops::log_softmax(row));
            lq
        })
        .collect();

    let mut loss = 0.0;
    let mut d_log_q = vec![[0.0; K]; n_b + n_u];

    for (i, &(_, s)) in batch.pilots.iter().enumerate() {
        loss -= c_pilot_q * log_q[i][s.index()];
        d_log_q[i][s.index()] -= c_pilot_q;
    }

    let relaxed: Vec<_> = (0..n_u)
        .map(|u| gumbel_softmax_relax(&log_q[n_b + u], &batch.gumbel[u], w.tau, &constellation))
        .collect();
    for u in 0..n_u {
        let lq = &log_q[n_b + u];
        loss -= c_payload * ops::entropy(lq);
        for (d, e) in d_log_q[n_b + u].iter_mut().zip(ops::entropy_backward(lq)) {
            *d -= c_payload * e;
        }
    }

    // generative network over true pilot points then relaxed payload points
    let mut gen_inputs = Vec::with_capacity(2 * (n_b + n_u));
    for &(_, s) in batch.pilots {
        gen_inputs.extend_from_slice(&constellation.point(s));
    }
    for r in &relaxed {
        gen_inputs.extend_from_slice(&r.xtilde);
    }
    let (out, gen_tape) = gen.mlp().forward_batch(&gen_inputs, n_b + n_u)?;
    let mut upstream = vec![0.0; out.len()];
    let targets = batch
        .pilots
        .iter()
        .map(|p| p.0)
        .chain(batch.payload.iter().copied());
    for (i, y) in targets.enumerate() {
        let row = &out[4 * i..4 * i + 4];
        let (q, d_mu, d_lv) = gaussian_quadratic_grad(y, [row[0], row[1]], [row[2], row[3]]);
        let c = if i < n_b {
            loss -= c_pilot_p * (q - LOG_2PI);
            c_pilot_p
        } else {
            loss -= c_payload * q;
            c_payload
        };
        let up = &mut upstream[4 * i..4 * i + 4];
        up[0] = -c * d_mu[0];
        up[1] = -c * d_mu[1];
        up[2] = -c * d_lv[0];
        up[3] = -c * d_lv[1];
    }
    let gen_grads = gen_tape.backward(&upstream)?;

    for (u, r) in relaxed.iter().enumerate() {
        let i = n_b + u;
        let d_x = [gen_grads.input[2 * i], gen_grads.input[2 * i + 1]];
        for (d, g) in d_log_q[i].iter_mut().zip(r.backward(&constellation, d_x)) {
            *d += g;
        }
    }

    let mut enc_upstream = Vec::with_capacity(logits.len());
    for (lq, d) in log_q.iter().zip(&d_log_q) {
        enc_upstream.extend(ops::log_softmax_backward(lq, d));
    }
    let phi = enc_tape.backward(&enc_upstream)?.params;

    Ok(VaeLossGrad {
        loss,
        theta: gen_grads.params,
        phi,
    })
}
