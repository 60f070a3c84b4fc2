//! 16-QAM transmission through I/Q imbalance, Rayleigh fading and AWGN.
//!
//! Complex baseband samples are carried as `[re, im]` pairs throughout.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::{Error, Result};

/// Constellation size.
pub const K: usize = 16;

/// Amplitude levels shared by the in-phase and quadrature axes.
pub const LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// Maximum I/Q gain imbalance, reached when the Beta draw is 1.
pub const MAX_EPSILON: f64 = 0.15;

/// Maximum I/Q phase imbalance in radians (15 degrees).
pub const MAX_DELTA: f64 = 15.0 * PI / 180.0;

/// A transmitted symbol, numbered `1..=16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u8);

impl Symbol {
    pub fn new(s: usize) -> Result<Self> {
        if (1..=K).contains(&s) {
            Ok(Symbol(s as u8))
        } else {
            Err(Error::SymbolOutOfRange(s))
        }
    }

    /// Symbol for a zero-based class index.
    ///
    /// Panics if `index >= 16`.
    pub fn from_index(index: usize) -> Self {
        assert!(index < K, "class index {index} out of range");
        Symbol(index as u8 + 1)
    }

    /// One-based symbol number.
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Zero-based class index.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = Symbol> {
        (0..K).map(Symbol::from_index)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Mapping from symbols to points in the I/Q plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constellation {
    points: [[f64; 2]; K],
}

impl Default for Constellation {
    fn default() -> Self {
        Self::qam16()
    }
}

impl Constellation {
    /// Row-major 16-QAM: with `s - 1 = 4a + b`, the point is
    /// `(LEVELS[a], LEVELS[b])`.
    pub fn qam16() -> Self {
        let mut points = [[0.0; 2]; K];
        for (i, p) in points.iter_mut().enumerate() {
            *p = [LEVELS[i / 4], LEVELS[i % 4]];
        }
        Constellation { points }
    }

    /// Relabels the points: symbol `k` of the result maps to the point that
    /// symbol `perm[k]` maps to here (both zero-based).
    pub fn permuted(&self, perm: &[usize; K]) -> Self {
        let mut points = [[0.0; 2]; K];
        for (k, &src) in perm.iter().enumerate() {
            points[k] = self.points[src];
        }
        Constellation { points }
    }

    pub fn point(&self, s: Symbol) -> [f64; 2] {
        self.points[s.index()]
    }

    pub fn points(&self) -> &[[f64; 2]; K] {
        &self.points
    }

    pub fn mean_power(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p[0] * p[0] + p[1] * p[1])
            .sum::<f64>()
            / K as f64
    }
}

/// `x(s)` on the default row-major 16-QAM mapping.
pub fn constellation_point(s: Symbol) -> [f64; 2] {
    Constellation::qam16().point(s)
}

/// Noise variance per complex sample for a given SNR, with unit-gain
/// channel and mean symbol power 10.
pub fn noise_variance(snr_db: f64) -> f64 {
    10.0 / 10f64.powf(snr_db / 10.0)
}

/// One device's channel realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub epsilon: f64,
    pub delta: f64,
    pub h: [f64; 2],
    pub sigma2: f64,
    pub snr_db: f64,
}

impl ChannelParams {
    /// Builds a realization from the unit-interval imbalance draws.
    pub fn new(epsilon0: f64, delta0: f64, h: [f64; 2], snr_db: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon0) || !(0.0..=1.0).contains(&delta0) {
            return Err(Error::Config(format!(
                "imbalance draws must lie in [0, 1], got ({epsilon0}, {delta0})"
            )));
        }
        if !snr_db.is_finite() || !h[0].is_finite() || !h[1].is_finite() {
            return Err(Error::NonFinite("channel parameters"));
        }
        Ok(ChannelParams {
            epsilon: MAX_EPSILON * epsilon0,
            delta: MAX_DELTA * delta0,
            h,
            sigma2: noise_variance(snr_db),
            snr_db,
        })
    }

    /// Same realization observed at a different SNR.
    pub fn with_snr_db(self, snr_db: f64) -> Self {
        ChannelParams {
            sigma2: noise_variance(snr_db),
            snr_db,
            ..self
        }
    }

    /// Noiseless received point `h · iq(x)`.
    pub fn image(&self, x: [f64; 2]) -> [f64; 2] {
        complex_mul(self.h, iq_imbalance(x, self.epsilon, self.delta))
    }
}

pub fn complex_mul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

/// Transmitter I/Q imbalance:
/// `diag(1+ε, 1−ε) · [[cos δ, −sin δ], [−sin δ, cos δ]] · x`.
pub fn iq_imbalance(x: [f64; 2], epsilon: f64, delta: f64) -> [f64; 2] {
    let (sin, cos) = delta.sin_cos();
    [
        (1.0 + epsilon) * (cos * x[0] - sin * x[1]),
        (1.0 - epsilon) * (-sin * x[0] + cos * x[1]),
    ]
}

/// Draws from Beta(5, 2) as `G5 / (G5 + G2)` with independent unit-scale
/// Gamma variates.
pub fn sample_beta52<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let a: f64 = Gamma::new(5.0, 1.0).expect("valid shape").sample(rng);
    let b: f64 = Gamma::new(2.0, 1.0).expect("valid shape").sample(rng);
    a / (a + b)
}

/// Draws a device: Beta(5,2)-scaled imbalance and `h ~ CN(0, 1)`.
///
/// The draws do not depend on `snr_db`, so a seeded stream yields the same
/// realization at every SNR.
pub fn sample_device<R: Rng + ?Sized>(rng: &mut R, snr_db: f64) -> Result<ChannelParams> {
    let epsilon0 = sample_beta52(rng);
    let delta0 = sample_beta52(rng);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ChannelParams::new(epsilon0, delta0, [scale * re, scale * im], snr_db)
}

/// Uniform i.i.d. symbols.
pub fn random_symbols<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Symbol> {
    (0..n)
        .map(|_| Symbol::from_index(rng.random_range(0..K)))
        .collect()
}

/// One device's transmission. Pilots are the leading `n_pilots` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    symbols: Vec<Symbol>,
    outputs: Vec<[f64; 2]>,
    n_pilots: usize,
}

impl Block {
    pub fn new(symbols: Vec<Symbol>, outputs: Vec<[f64; 2]>, n_pilots: usize) -> Result<Self> {
        if symbols.len() != outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: symbols.len(),
                got: outputs.len(),
            });
        }
        if n_pilots > symbols.len() {
            return Err(Error::Config(format!(
                "{n_pilots} pilots in a block of {} symbols",
                symbols.len()
            )));
        }
        Ok(Block {
            symbols,
            outputs,
            n_pilots,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn n_pilots(&self) -> usize {
        self.n_pilots
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn outputs(&self) -> &[[f64; 2]] {
        &self.outputs
    }

    pub fn pilot_symbols(&self) -> &[Symbol] {
        &self.symbols[..self.n_pilots]
    }

    pub fn pilot_outputs(&self) -> &[[f64; 2]] {
        &self.outputs[..self.n_pilots]
    }

    pub fn payload_symbols(&self) -> &[Symbol] {
        &self.symbols[self.n_pilots..]
    }

    pub fn payload_outputs(&self) -> &[[f64; 2]] {
        &self.outputs[self.n_pilots..]
    }

    /// The same observations with every symbol treated as a pilot.
    pub fn fully_labeled(&self) -> Block {
        Block {
            n_pilots: self.len(),
            ..self.clone()
        }
    }
}

/// Sends `symbols` through the channel. Noise is drawn from `rng` in symbol
/// order, two standard normals per symbol, so a block is a prefix of any
/// longer block generated from the same stream.
pub fn transmit_block<R: Rng + ?Sized>(
    params: &ChannelParams,
    constellation: &Constellation,
    symbols: Vec<Symbol>,
    n_pilots: usize,
    rng: &mut R,
) -> Result<Block> {
    if symbols.is_empty() {
        return Err(Error::Config("cannot transmit an empty block".into()));
    }
    if params.sigma2.is_nan() || params.sigma2 < 0.0 {
        return Err(Error::Config(format!("noise variance {}", params.sigma2)));
    }
    let sd = (params.sigma2 / 2.0).sqrt();
    let outputs = symbols
        .iter()
        .map(|&s| {
            let clean = params.image(constellation.point(s));
            let nr: f64 = rng.sample(StandardNormal);
            let ni: f64 = rng.sample(StandardNormal);
            [clean[0] + sd * nr, clean[1] + sd * ni]
        })
        .collect();
    Block::new(symbols, outputs, n_pilots)
}

/// ML decoder for a known channel: nearest noiseless image.
#[derive(Debug, Clone)]
pub struct KnownChannel {
    images: [[f64; 2]; K],
}

impl KnownChannel {
    pub fn new(params: &ChannelParams, constellation: &Constellation) -> Self {
        let mut images = [[0.0; 2]; K];
        for (img, &x) in images.iter_mut().zip(constellation.points()) {
            *img = params.image(x);
        }
        KnownChannel { images }
    }

    pub fn images(&self) -> &[[f64; 2]; K] {
        &self.images
    }

    /// Nearest image; ties go to the lowest symbol.
    pub fn decode(&self, y: [f64; 2]) -> Symbol {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, img) in self.images.iter().enumerate() {
            let d = (y[0] - img[0]).powi(2) + (y[1] - img[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        Symbol::from_index(best)
    }
}

pub fn optimal_decode(
    params: &ChannelParams,
    constellation: &Constellation,
    y: [f64; 2],
) -> Symbol {
    KnownChannel::new(params, constellation).decode(y)
}
