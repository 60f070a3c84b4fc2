//! Training procedures. Every trainer draws network initialization,
//! mini-batches and any sampling noise from the single `rng` it is given,
//! in a fixed order, so a seed determines the result bit for bit.

use rand::Rng;

use crate::channel::{Block, Symbol, K};
use crate::models::{EncoderNet, GenerativeNet, InputScaling};
use crate::nnkit::ops::argmax;
use crate::nnkit::AdamState;
use crate::{Error, Result};

use super::batch::BatchSampler;
use super::gumbel::gumbel_vector;
use super::losses::{
    encoder_cross_entropy, generative_nll, vae_loss, VaeBatch, VaeWeights, Weighted,
};
use super::schedule::{tau_schedule, GammaSchedule};
use super::TrainConfig;
use crate::channel::Constellation;

/// A trained model with its per-update loss trace.
#[derive(Debug, Clone)]
pub struct Trained<M> {
    pub model: M,
    pub losses: Vec<f64>,
}

fn check_loss(update: usize, loss: f64) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Diverged { update, loss })
    }
}

/// One ADAM step; a NaN gradient counts as divergence at `update`.
fn adam_step(
    adam: &mut AdamState,
    params: &mut [f64],
    grad: &[f64],
    eta: f64,
    update: usize,
) -> Result<()> {
    adam.step(params, grad, eta).map_err(|e| match e {
        Error::NanGradient { .. } => Error::Diverged {
            update,
            loss: f64::NAN,
        },
        other => other,
    })
}

fn check_semi_supervised(block: &Block) -> Result<()> {
    if block.n_pilots() == 0 || block.n_pilots() >= block.len() {
        return Err(Error::Config(format!(
            "semi-supervised training needs pilots and payload, got {} pilots in {} symbols",
            block.n_pilots(),
            block.len()
        )));
    }
    Ok(())
}

fn new_encoder<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<EncoderNet> {
    let enc = EncoderNet::init(&cfg.net, rng)?;
    Ok(if cfg.net.standardize_inputs {
        enc.with_scaling(InputScaling::standardizing(block.outputs()))
    } else {
        enc
    })
}

/// Runs `updates` cross-entropy steps on mini-batches of the labeled pairs.
#[allow(clippy::too_many_arguments)]
fn supervised_updates<R: Rng + ?Sized>(
    enc: &mut EncoderNet,
    adam: &mut AdamState,
    labeled: (&[[f64; 2]], &[Symbol]),
    batch_size: usize,
    updates: usize,
    eta: f64,
    rng: &mut R,
    losses: &mut Vec<f64>,
) -> Result<()> {
    let (ys, ss) = labeled;
    let mut sampler = BatchSampler::new(ys.len(), batch_size);
    let mut idx = Vec::new();
    let mut items = Vec::with_capacity(batch_size);
    for _ in 0..updates {
        sampler.next_batch(rng, &mut idx);
        let w = 1.0 / idx.len() as f64;
        items.clear();
        items.extend(idx.iter().map(|&i| Weighted {
            y: ys[i],
            s: ss[i],
            weight: w,
        }));
        let lg = encoder_cross_entropy(enc, &items)?;
        let l = losses.len() + 1;
        check_loss(l, lg.loss)?;
        adam_step(adam, enc.mlp_mut().params_mut(), &lg.grad, eta, l)?;
        losses.push(lg.loss);
    }
    Ok(())
}

/// Reference decoder trained as if every symbol of the block were a pilot.
pub fn train_all_pilots<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Trained<EncoderNet>> {
    cfg.validate()?;
    if block.is_empty() {
        return Err(Error::Config("empty block".into()));
    }
    let mut enc = new_encoder(block, cfg, rng)?;
    let mut adam = AdamState::new(enc.mlp().params().len(), cfg.adam);
    let mut losses = Vec::with_capacity(cfg.updates);
    supervised_updates(
        &mut enc,
        &mut adam,
        (block.outputs(), block.symbols()),
        cfg.all_pilots_batch,
        cfg.updates,
        cfg.eta,
        rng,
        &mut losses,
    )?;
    Ok(Trained { model: enc, losses })
}

/// Hard labels of the payload under a frozen classifier.
pub fn pseudo_labels(enc: &EncoderNet, ys: &[[f64; 2]]) -> Result<Vec<Symbol>> {
    let logits = enc
        .mlp()
        .eval_batch(&enc.inputs(ys.iter().copied()), ys.len())?;
    Ok(logits
        .chunks_exact(K)
        .map(|z| Symbol::from_index(argmax(z)))
        .collect())
}

/// Simple decision directed training: pilot-only warmup, one round of
/// payload labeling, then the weighted pilot/pseudo-label cross-entropy
/// with fixed pilot weight `γ₀`.
pub fn train_sdd<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Trained<EncoderNet>> {
    cfg.validate()?;
    check_semi_supervised(block)?;
    let gamma0 = cfg.gamma0;
    let mut enc = new_encoder(block, cfg, rng)?;
    let mut adam = AdamState::new(enc.mlp().params().len(), cfg.adam);
    let mut losses = Vec::with_capacity(cfg.updates);
    supervised_updates(
        &mut enc,
        &mut adam,
        (block.pilot_outputs(), block.pilot_symbols()),
        cfg.pilot_batch,
        cfg.sdd_warmup,
        cfg.eta,
        rng,
        &mut losses,
    )?;

    let payload = block.payload_outputs();
    let labels = pseudo_labels(&enc, payload)?;
    let (pilot_y, pilot_s) = (block.pilot_outputs(), block.pilot_symbols());
    let mut pilots = BatchSampler::new(pilot_y.len(), cfg.pilot_batch);
    let mut unlabeled = BatchSampler::new(payload.len(), cfg.payload_batch);
    let (mut pi, mut ui) = (Vec::new(), Vec::new());
    let mut items = Vec::new();
    for l in cfg.sdd_warmup + 1..=cfg.updates {
        pilots.next_batch(rng, &mut pi);
        unlabeled.next_batch(rng, &mut ui);
        let wp = gamma0 / pi.len() as f64;
        let wu = (1.0 - gamma0) / ui.len() as f64;
        items.clear();
        items.extend(pi.iter().map(|&i| Weighted {
            y: pilot_y[i],
            s: pilot_s[i],
            weight: wp,
        }));
        items.extend(ui.iter().map(|&i| Weighted {
            y: payload[i],
            s: labels[i],
            weight: wu,
        }));
        let lg = encoder_cross_entropy(&enc, &items)?;
        check_loss(l, lg.loss)?;
        adam_step(&mut adam, enc.mlp_mut().params_mut(), &lg.grad, cfg.eta, l)?;
        losses.push(lg.loss);
    }
    Ok(Trained { model: enc, losses })
}

/// How the EM trainers impute payload labels from the current posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Imputation {
    /// Draw from the posterior (Monte-Carlo EM).
    Sample,
    /// Take the posterior mode, lowest index on ties (Viterbi EM).
    Argmax,
}

impl Imputation {
    pub fn label<R: Rng + ?Sized>(self, posterior: &[f64; K], rng: &mut R) -> Symbol {
        match self {
            Imputation::Sample => sample_categorical(posterior, rng),
            Imputation::Argmax => Symbol::from_index(argmax(posterior)),
        }
    }
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_categorical<R: Rng + ?Sized>(p: &[f64; K], rng: &mut R) -> Symbol {
    let u: f64 = rng.random::<f64>() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &pk) in p.iter().enumerate() {
        if pk > 0.0 {
            acc += pk;
            last = k;
            if u < acc {
                return Symbol::from_index(k);
            }
        }
    }
    Symbol::from_index(last)
}

/// EM-style training of the channel model: each update imputes labels for
/// a payload batch from `p_θ(s|y)` at the current parameters, then takes
/// one ADAM step on the `γ_l`-weighted pilot/payload log-likelihood.
pub fn train_em<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    imputation: Imputation,
    constellation: Constellation,
    rng: &mut R,
) -> Result<Trained<GenerativeNet>> {
    let schedule = GammaSchedule::new(block.len(), block.n_pilots(), cfg.schedule_period)?;
    train_em_with(
        block,
        cfg,
        imputation,
        constellation,
        |l| schedule.gamma(l),
        rng,
    )
}

/// [`train_em`] with an arbitrary pilot-weight sequence.
pub fn train_em_with<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    imputation: Imputation,
    constellation: Constellation,
    gamma_at: impl Fn(usize) -> f64,
    rng: &mut R,
) -> Result<Trained<GenerativeNet>> {
    check_semi_supervised(block)?;
    let mut gen = GenerativeNet::init(&cfg.net, constellation, rng)?;
    let mut adam = AdamState::new(gen.mlp().params().len(), cfg.adam);
    let (pilot_y, pilot_s) = (block.pilot_outputs(), block.pilot_symbols());
    let payload = block.payload_outputs();
    let mut pilots = BatchSampler::new(pilot_y.len(), cfg.pilot_batch);
    let mut unlabeled = BatchSampler::new(payload.len(), cfg.payload_batch);
    let (mut pi, mut ui) = (Vec::new(), Vec::new());
    let mut items = Vec::new();
    let mut losses = Vec::with_capacity(cfg.updates);
    for l in 1..=cfg.updates {
        let gamma = gamma_at(l);
        pilots.next_batch(rng, &mut pi);
        unlabeled.next_batch(rng, &mut ui);
        let table = gen.table()?;
        let wp = gamma / pi.len() as f64;
        let wu = (1.0 - gamma) / ui.len() as f64;
        items.clear();
        items.extend(pi.iter().map(|&i| Weighted {
            y: pilot_y[i],
            s: pilot_s[i],
            weight: wp,
        }));
        for &i in &ui {
            let y = payload[i];
            let s = imputation.label(&table.posterior(y), rng);
            items.push(Weighted { y, s, weight: wu });
        }
        let lg = generative_nll(&gen, &items)?;
        check_loss(l, lg.loss)?;
        adam_step(&mut adam, gen.mlp_mut().params_mut(), &lg.grad, cfg.eta, l)?;
        losses.push(lg.loss);
    }
    Ok(Trained { model: gen, losses })
}

pub fn train_mcem<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Trained<GenerativeNet>> {
    cfg.validate()?;
    train_em(block, cfg, Imputation::Sample, Constellation::qam16(), rng)
}

pub fn train_viterbi_em<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Trained<GenerativeNet>> {
    cfg.validate()?;
    train_em(block, cfg, Imputation::Argmax, Constellation::qam16(), rng)
}

/// Jointly trained encoder and channel model.
#[derive(Debug, Clone)]
pub struct VaeModels {
    pub encoder: EncoderNet,
    pub generative: GenerativeNet,
}

pub fn train_vae<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Trained<VaeModels>> {
    cfg.validate()?;
    train_vae_in(block, cfg, Constellation::qam16(), rng)
}

/// Semi-supervised VAE on an explicit constellation mapping.
pub fn train_vae_in<R: Rng + ?Sized>(
    block: &Block,
    cfg: &TrainConfig,
    constellation: Constellation,
    rng: &mut R,
) -> Result<Trained<VaeModels>> {
    check_semi_supervised(block)?;
    let schedule = GammaSchedule::new(block.len(), block.n_pilots(), cfg.schedule_period)?;
    let mut gen = GenerativeNet::init(&cfg.net, constellation, rng)?;
    let mut enc = new_encoder(block, cfg, rng)?;
    let mut adam_theta = AdamState::new(gen.mlp().params().len(), cfg.adam);
    let mut adam_phi = AdamState::new(enc.mlp().params().len(), cfg.adam);
    let (pilot_y, pilot_s) = (block.pilot_outputs(), block.pilot_symbols());
    let payload = block.payload_outputs();
    let mut pilots = BatchSampler::new(pilot_y.len(), cfg.pilot_batch);
    let mut unlabeled = BatchSampler::new(payload.len(), cfg.payload_batch);
    let (mut pi, mut ui) = (Vec::new(), Vec::new());
    let mut pilot_batch = Vec::new();
    let mut payload_batch = Vec::new();
    let mut noise = Vec::new();
    let mut losses = Vec::with_capacity(cfg.updates);
    for l in 1..=cfg.updates {
        let weights = VaeWeights {
            alpha: cfg.alpha,
            gamma: schedule.gamma(l),
            tau: tau_schedule(l, cfg.schedule_period),
        };
        pilots.next_batch(rng, &mut pi);
        unlabeled.next_batch(rng, &mut ui);
        pilot_batch.clear();
        pilot_batch.extend(pi.iter().map(|&i| (pilot_y[i], pilot_s[i])));
        payload_batch.clear();
        payload_batch.extend(ui.iter().map(|&i| payload[i]));
        noise.clear();
        noise.extend((0..ui.len()).map(|_| gumbel_vector(rng)));
        let batch = VaeBatch {
            pilots: &pilot_batch,
            payload: &payload_batch,
            gumbel: &noise,
        };
        let lg = vae_loss(&gen, &enc, batch, weights)?;
        check_loss(l, lg.loss)?;
        adam_step(
            &mut adam_theta,
            gen.mlp_mut().params_mut(),
            &lg.theta,
            cfg.eta,
            l,
        )?;
        adam_step(
            &mut adam_phi,
            enc.mlp_mut().params_mut(),
            &lg.phi,
            cfg.eta,
            l,
        )?;
        losses.push(lg.loss);
    }
    Ok(Trained {
        model: VaeModels {
            encoder: enc,
            generative: gen,
        },
        losses,
    })
}
