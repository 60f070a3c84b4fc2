use log::{info, warn};

use crate::channel::{
    random_symbols, sample_device, transmit_block, Block, ChannelParams, Constellation,
    KnownChannel, Symbol,
};
use crate::models::{EncoderNet, LikelihoodTable};
use crate::par::{with_threads, Execution};
use crate::rng::{derive_seed, label_key, stream_rng, Stream};
use crate::ssl::{self, BatchDecoder, TrainConfig};
use crate::{Error, Result};

use super::{ExperimentConfig, Method, SerRecord};

/// Anything that maps received samples to symbol decisions.
pub trait Decoder {
    fn decode_all(&self, ys: &[[f64; 2]]) -> Result<Vec<Symbol>>;
}

impl Decoder for KnownChannel {
    fn decode_all(&self, ys: &[[f64; 2]]) -> Result<Vec<Symbol>> {
        Ok(ys.iter().map(|&y| self.decode(y)).collect())
    }
}

impl Decoder for BatchDecoder<'_> {
    fn decode_all(&self, ys: &[[f64; 2]]) -> Result<Vec<Symbol>> {
        BatchDecoder::decode_all(self, ys)
    }
}

impl<F: Fn([f64; 2]) -> Symbol> Decoder for F {
    fn decode_all(&self, ys: &[[f64; 2]]) -> Result<Vec<Symbol>> {
        Ok(ys.iter().map(|&y| self(y)).collect())
    }
}

/// The decoder a method produces for one device.
#[derive(Debug, Clone)]
pub enum TrainedDecoder {
    Optimal(KnownChannel),
    /// `argmax q_Φ(s|y)`: all-pilots and SDD.
    Encoder(EncoderNet),
    /// `argmax p_θ(y|s)`: MCEM and Viterbi EM.
    Generative(LikelihoodTable),
    /// `argmax q_Φ + p_θ`: VAE.
    Combined(EncoderNet, LikelihoodTable),
}

impl TrainedDecoder {
    /// Trains `method` on `block`. `params` is only used by the optimal
    /// decoder, which is the only one allowed to know the channel.
    pub fn train<R: rand::Rng + ?Sized>(
        method: Method,
        block: &Block,
        params: &ChannelParams,
        train: &TrainConfig,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(match method {
            Method::Optimal => {
                TrainedDecoder::Optimal(KnownChannel::new(params, &Constellation::qam16()))
            }
            Method::AllPilots => {
                TrainedDecoder::Encoder(ssl::train_all_pilots(block, train, rng)?.model)
            }
            Method::Sdd => TrainedDecoder::Encoder(ssl::train_sdd(block, train, rng)?.model),
            Method::Mcem => {
                TrainedDecoder::Generative(ssl::train_mcem(block, train, rng)?.model.table()?)
            }
            Method::ViterbiEm => {
                TrainedDecoder::Generative(ssl::train_viterbi_em(block, train, rng)?.model.table()?)
            }
            Method::Vae => {
                let m = ssl::train_vae(block, train, rng)?.model;
                TrainedDecoder::Combined(m.encoder, m.generative.table()?)
            }
        })
    }
}

impl Decoder for TrainedDecoder {
    fn decode_all(&self, ys: &[[f64; 2]]) -> Result<Vec<Symbol>> {
        match self {
            TrainedDecoder::Optimal(k) => k.decode_all(ys),
            TrainedDecoder::Encoder(phi) => BatchDecoder::Encoder(phi).decode_all(ys),
            TrainedDecoder::Generative(t) => BatchDecoder::Generative(*t).decode_all(ys),
            TrainedDecoder::Combined(phi, t) => BatchDecoder::Combined(phi, *t).decode_all(ys),
        }
    }
}

/// Decision errors on the payload of `block` (pilots excluded), and the
/// number of payload symbols.
pub fn evaluate_ser(decoder: &impl Decoder, block: &Block) -> Result<(u64, u64)> {
    let decided = decoder.decode_all(block.payload_outputs())?;
    let errors = decided
        .iter()
        .zip(block.payload_symbols())
        .filter(|(a, b)| a != b)
        .count();
    Ok((errors as u64, block.payload_symbols().len() as u64))
}

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub method: Method,
    pub snr_db: f64,
    pub n_symbols: usize,
}

/// Error counts of one device.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeviceOutcome {
    pub errors: u64,
    pub symbols: u64,
    /// Counts on the fresh block, when holdout evaluation is enabled.
    pub holdout: Option<(u64, u64)>,
}

/// Device `index` of a sweep at `snr_db` with an `n`-symbol block.
///
/// The channel realization, the transmitted symbols and the unit noise
/// depend only on the master seed and the device index, so every method,
/// SNR and block length sees the same devices (shorter blocks are prefixes
/// of longer ones). Training randomness is keyed by the full cell.
pub fn device_block(
    cfg: &ExperimentConfig,
    snr_db: f64,
    n: usize,
    index: usize,
) -> Result<(ChannelParams, Block)> {
    let seed = derive_seed(cfg.seed, &[index as u64]);
    let params = sample_device(&mut stream_rng(seed, Stream::Device), snr_db)?;
    let symbols = random_symbols(&mut stream_rng(seed, Stream::Symbols), n);
    let block = transmit_block(
        &params,
        &Constellation::qam16(),
        symbols,
        cfg.n_pilots,
        &mut stream_rng(seed, Stream::Noise),
    )?;
    Ok((params, block))
}

fn holdout_block(cfg: &ExperimentConfig, params: &ChannelParams, index: usize) -> Result<Block> {
    let seed = derive_seed(cfg.seed, &[index as u64]);
    let symbols = random_symbols(
        &mut stream_rng(seed, Stream::HoldoutSymbols),
        cfg.holdout_symbols,
    );
    transmit_block(
        params,
        &Constellation::qam16(),
        symbols,
        0,
        &mut stream_rng(seed, Stream::HoldoutNoise),
    )
}

/// Trains and evaluates one device of one cell. A diverged training run
/// is reported as `Err(Error::Diverged)`.
pub fn run_device(cfg: &ExperimentConfig, cell: CellKey, index: usize) -> Result<DeviceOutcome> {
    let (params, block) = device_block(cfg, cell.snr_db, cell.n_symbols, index)?;
    let train_seed = derive_seed(
        cfg.seed,
        &[
            label_key(cell.method.name()),
            cell.snr_db.to_bits(),
            cell.n_symbols as u64,
            index as u64,
        ],
    );
    let mut rng = stream_rng(train_seed, Stream::Training);
    let decoder = TrainedDecoder::train(cell.method, &block, &params, &cfg.train, &mut rng)?;
    let (errors, symbols) = evaluate_ser(&decoder, &block)?;
    let holdout = if cfg.holdout {
        Some(evaluate_ser(
            &decoder,
            &holdout_block(cfg, &params, index)?,
        )?)
    } else {
        None
    };
    Ok(DeviceOutcome {
        errors,
        symbols,
        holdout,
    })
}

/// Records of a sweep, in grid order (method, then SNR, then N).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub cells: Vec<CellKey>,
    /// Errors on each device's own payload.
    pub records: Vec<SerRecord>,
    /// Errors on fresh blocks; empty unless holdout evaluation is enabled.
    pub holdout: Vec<SerRecord>,
    /// Diverged devices per cell, excluded from the records.
    pub excluded: Vec<usize>,
}

impl ExperimentOutput {
    pub fn total_excluded(&self) -> usize {
        self.excluded.iter().sum()
    }
}

pub fn cells(cfg: &ExperimentConfig) -> Vec<CellKey> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for &snr_db in &cfg.snr_db {
            for &n_symbols in &cfg.n_symbols {
                out.push(CellKey {
                    method,
                    snr_db,
                    n_symbols,
                });
            }
        }
    }
    out
}

/// Runs every device of every cell and aggregates error counts.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let cells = cells(cfg);
    let d = cfg.devices;
    info!("{} cells x {} devices", cells.len(), d);
    let outcomes = with_threads(cfg.threads, || {
        exec.map(cells.len() * d, |job| {
            run_device(cfg, cells[job / d], job % d)
        })
    })?;

    let mut records = Vec::with_capacity(cells.len());
    let mut holdout = Vec::new();
    let mut excluded = Vec::with_capacity(cells.len());
    let mut outcomes = outcomes.into_iter();
    for cell in &cells {
        let (mut errors, mut symbols, mut h_errors, mut h_symbols, mut kept, mut diverged) =
            (0, 0, 0, 0, 0, 0);
        for outcome in outcomes.by_ref().take(d) {
            match outcome {
                Ok(o) => {
                    kept += 1;
                    errors += o.errors;
                    symbols += o.symbols;
                    if let Some((e, s)) = o.holdout {
                        h_errors += e;
                        h_symbols += s;
                    }
                }
                Err(Error::Diverged { update, loss }) => {
                    diverged += 1;
                    warn!(
                        "{} at {} dB, N = {}: training diverged at update {update} (loss {loss})",
                        cell.method, cell.snr_db, cell.n_symbols
                    );
                }
                Err(e) => return Err(e),
            }
        }
        if diverged > 0 {
            warn!(
                "{} at {} dB, N = {}: excluded {diverged} of {d} devices",
                cell.method, cell.snr_db, cell.n_symbols
            );
        }
        let record = |errors, symbols| {
            SerRecord::new(
                cell.method,
                cell.snr_db,
                cell.n_symbols,
                cfg.n_pilots,
                kept,
                symbols,
                errors,
                cfg.seed,
            )
        };
        records.push(record(errors, symbols));
        if cfg.holdout {
            holdout.push(record(h_errors, h_symbols));
        }
        excluded.push(diverged);
    }
    Ok(ExperimentOutput {
        cells,
        records,
        holdout,
        excluded,
    })
}
