//! Decision rules applied to trained models. Ties resolve to the lowest
//! symbol index.

use crate::channel::{Symbol, K};
use crate::models::{EncoderNet, GenerativeNet, LikelihoodTable};
use crate::nnkit::ops::argmax;
use crate::Result;

/// `argmax_s q_Φ(s|y)`.
pub fn decode_encoder(phi: &EncoderNet, y: [f64; 2]) -> Result<Symbol> {
    Ok(Symbol::from_index(argmax(&phi.logits(y)?)))
}

/// `argmax_s log p_θ(y|s)`.
pub fn decode_generative(theta: &GenerativeNet, y: [f64; 2]) -> Result<Symbol> {
    Ok(theta.table()?.decode(y))
}

/// `argmax_s [q_Φ(s|y) + p_θ(s|y)]`.
pub fn decode_combined(phi: &EncoderNet, theta: &GenerativeNet, y: [f64; 2]) -> Result<Symbol> {
    Ok(combine(&phi.posterior(y)?, &theta.table()?.posterior(y)))
}

pub fn combine(q: &[f64; K], p: &[f64; K]) -> Symbol {
    let mut sum = [0.0; K];
    for k in 0..K {
        sum[k] = q[k] + p[k];
    }
    Symbol::from_index(argmax(&sum))
}

/// Batch decoding of a block's samples with one of the three rules.
pub enum BatchDecoder<'a> {
    Encoder(&'a EncoderNet),
    Generative(LikelihoodTable),
    Combined(&'a EncoderNet, LikelihoodTable),
}

impl BatchDecoder<'_> {
    pub fn decode_all(&self, ys: &[[f64; 2]]) -> Result<Vec<Symbol>> {
        Ok(match self {
            BatchDecoder::Encoder(phi) => {
                let logits = phi
                    .mlp()
                    .eval_batch(&phi.inputs(ys.iter().copied()), ys.len())?;
                logits
                    .chunks_exact(K)
                    .map(|z| Symbol::from_index(argmax(z)))
                    .collect()
            }
            BatchDecoder::Generative(table) => ys.iter().map(|&y| table.decode(y)).collect(),
            BatchDecoder::Combined(phi, table) => phi
                .posteriors(ys)?
                .iter()
                .zip(ys)
                .map(|(q, &y)| combine(q, &table.posterior(y)))
                .collect(),
        })
    }
}
