//! Oracles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ssl_channel::channel::{Constellation, Symbol, K};
use ssl_channel::models::{EncoderNet, GenerativeNet, NetConfig};
use ssl_channel::ssl::gumbel::gumbel_vector;
use ssl_channel::ssl::losses::{
    encoder_cross_entropy, generative_nll, vae_loss, VaeBatch, VaeWeights, Weighted,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Outcome of comparing an analytic gradient with central differences.
#[derive(Debug, Clone, Copy)]
pub struct FdCheck {
    /// Largest relative error `|a − n| / max(|a|, |n|, floor)` over the
    /// coordinates that were not excused as kinks.
    pub max_rel: f64,
    /// Coordinates where a ReLU switches inside `[x−h, x+h]`: the one-sided
    /// slopes disagree, the central difference is meaningless, and the
    /// analytic value equals one of the one-sided slopes.
    pub kinks: usize,
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn fd_check(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    analytic: &[f64],
    h: f64,
    floor: f64,
    tol: f64,
) -> FdCheck {
    assert_eq!(x.len(), analytic.len());
    let f0 = f(x);
    let mut p = x.to_vec();
    let mut out = FdCheck {
        max_rel: 0.0,
        kinks: 0,
    };
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let up = f(&p);
        p[i] = x[i] - h;
        let down = f(&p);
        p[i] = x[i];
        let a = analytic[i];
        let e = rel(a, (up - down) / (2.0 * h), floor);
        if e < tol {
            out.max_rel = out.max_rel.max(e);
            continue;
        }
        let (fwd, bwd) = ((up - f0) / h, (f0 - down) / h);
        if rel(fwd, bwd, floor) > tol && rel(a, fwd, floor).min(rel(a, bwd, floor)) < tol {
            out.kinks += 1;
        } else {
            out.max_rel = out.max_rel.max(e);
        }
    }
    out
}

pub fn max_fd_error(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    analytic: &[f64],
    h: f64,
    floor: f64,
) -> f64 {
    fd_check(f, x, analytic, h, floor, 0.0).max_rel
}

pub const FD_STEP: f64 = 1e-6;
pub const FD_FLOOR: f64 = 1e-3;
pub const FD_TOL: f64 = 1e-5;

/// Network at a generic point: default initialization plus a small
/// Gaussian jitter so no bias sits exactly at zero.
pub fn jittered_gen(r: &mut ChaCha8Rng) -> GenerativeNet {
    let mut g = GenerativeNet::init(&NetConfig::default(), Constellation::qam16(), r).unwrap();
    for p in g.mlp_mut().params_mut() {
        *p += 0.1 * normal(r);
    }
    g
}

pub fn jittered_enc(r: &mut ChaCha8Rng) -> EncoderNet {
    let mut e = EncoderNet::init(&NetConfig::default(), r).unwrap();
    for p in e.mlp_mut().params_mut() {
        *p += 0.1 * normal(r);
    }
    e
}

pub fn random_y(r: &mut ChaCha8Rng) -> [f64; 2] {
    [2.0 * normal(r), 2.0 * normal(r)]
}

pub fn random_symbol(r: &mut ChaCha8Rng) -> Symbol {
    Symbol::from_index(r.random_range(0..K))
}

pub fn with_params_enc(enc: &EncoderNet, p: &[f64]) -> EncoderNet {
    let mut e = enc.clone();
    e.mlp_mut().params_mut().copy_from_slice(p);
    e
}

pub fn with_params_gen(gen: &GenerativeNet, p: &[f64]) -> GenerativeNet {
    let mut g = gen.clone();
    g.mlp_mut().params_mut().copy_from_slice(p);
    g
}

/// The four loss graphs used in training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Graph {
    CrossEntropy,
    DecisionDirected,
    EmLikelihood,
    Vae,
}

impl Graph {
    pub const ALL: [Graph; 4] = [
        Graph::CrossEntropy,
        Graph::DecisionDirected,
        Graph::EmLikelihood,
        Graph::Vae,
    ];
}

fn weighted_batch(r: &mut ChaCha8Rng, n: usize, weight: f64) -> Vec<Weighted> {
    (0..n)
        .map(|_| Weighted {
            y: random_y(r),
            s: random_symbol(r),
            weight,
        })
        .collect()
}

/// Gradient check of `graph` at the random point drawn from `seed`, with
/// mini-batch sizes 16 (pilots) and 32 (payload).
pub fn gradient_check(graph: Graph, seed: u64) -> FdCheck {
    let mut r = rng(seed);
    let enc = jittered_enc(&mut r);
    let gen = jittered_gen(&mut r);
    let (n_b, n_u) = (16, 32);
    let encoder_check = |items: &[Weighted]| {
        let lg = encoder_cross_entropy(&enc, items).unwrap();
        let f = |p: &[f64]| {
            encoder_cross_entropy(&with_params_enc(&enc, p), items)
                .unwrap()
                .loss
        };
        fd_check(f, enc.mlp().params(), &lg.grad, FD_STEP, FD_FLOOR, FD_TOL)
    };
    match graph {
        Graph::CrossEntropy => encoder_check(&weighted_batch(&mut r, n_b, 1.0 / n_b as f64)),
        Graph::DecisionDirected => {
            let gamma0 = 0.98;
            let mut items = weighted_batch(&mut r, n_b, gamma0 / n_b as f64);
            items.extend(weighted_batch(&mut r, n_u, (1.0 - gamma0) / n_u as f64));
            encoder_check(&items)
        }
        Graph::EmLikelihood => {
            let gamma = r.random_range(0.05..0.95);
            let mut items = weighted_batch(&mut r, n_b, gamma / n_b as f64);
            items.extend(weighted_batch(&mut r, n_u, (1.0 - gamma) / n_u as f64));
            let lg = generative_nll(&gen, &items).unwrap();
            let f = |p: &[f64]| {
                generative_nll(&with_params_gen(&gen, p), &items)
                    .unwrap()
                    .loss
            };
            fd_check(f, gen.mlp().params(), &lg.grad, FD_STEP, FD_FLOOR, FD_TOL)
        }
        Graph::Vae => {
            let pilots: Vec<([f64; 2], Symbol)> = (0..n_b)
                .map(|_| (random_y(&mut r), random_symbol(&mut r)))
                .collect();
            let payload: Vec<[f64; 2]> = (0..n_u).map(|_| random_y(&mut r)).collect();
            let gumbel: Vec<[f64; K]> = (0..n_u).map(|_| gumbel_vector(&mut r)).collect();
            let weights = VaeWeights {
                alpha: 0.2,
                gamma: r.random_range(0.05..0.95),
                tau: r.random_range(0.5..1.0),
            };
            let batch = VaeBatch {
                pilots: &pilots,
                payload: &payload,
                gumbel: &gumbel,
            };
            let lg = vae_loss(&gen, &enc, batch, weights).unwrap();
            let n_theta = gen.mlp().params().len();
            let mut joint = gen.mlp().params().to_vec();
            joint.extend_from_slice(enc.mlp().params());
            let mut analytic = lg.theta.clone();
            analytic.extend_from_slice(&lg.phi);
            let f = |p: &[f64]| {
                let g = with_params_gen(&gen, &p[..n_theta]);
                let e = with_params_enc(&enc, &p[n_theta..]);
                vae_loss(&g, &e, batch, weights).unwrap().loss
            };
            fd_check(f, &joint, &analytic, FD_STEP, FD_FLOOR, FD_TOL)
        }
    }
}

/// Checks `graph` at `points` random points with no ReLU switch inside
/// the difference step. Points that contain one are replaced by the next
/// draw, but their non-kink coordinates still count towards the error.
/// Returns the worst relative error and the number of replaced points.
pub fn gradient_suite(graph: Graph, points: usize, base_seed: u64) -> (f64, usize) {
    let mut worst = 0.0f64;
    let (mut accepted, mut replaced) = (0, 0);
    let mut seed = base_seed;
    while accepted < points {
        let c = gradient_check(graph, seed);
        seed += 1;
        worst = worst.max(c.max_rel);
        if c.kinks > 0 {
            replaced += 1;
            assert!(replaced <= points, "{graph:?}: too many points on a kink");
        } else {
            accepted += 1;
        }
    }
    (worst, replaced)
}

/// ELBO checks at one random model and output: the equality gap at the
/// exact posterior, and the largest violation `elbo(q) − log p(y)` over
/// `n_q` random surrogates (non-positive when the bound holds).
pub fn elbo_check(seed: u64, n_q: usize) -> (f64, f64) {
    let mut r = rng(seed);
    let table = jittered_gen(&mut r).table().unwrap();
    let y = random_y(&mut r);
    // evidence by direct summation of the densities
    let evidence: f64 = table
        .stats()
        .iter()
        .map(|st| {
            let mut d = 1.0;
            for (j, yj) in y.iter().enumerate() {
                let var = st.log_var[j].clamp(-10.0, 10.0).exp();
                d *= (-(yj - st.mu[j]).powi(2) / (2.0 * var)).exp()
                    / (2.0 * std::f64::consts::PI * var).sqrt();
            }
            d / K as f64
        })
        .sum::<f64>()
        .ln();
    let log_evidence = table.log_evidence(y);
    assert!(
        (log_evidence - evidence).abs() < 1e-9 * evidence.abs().max(1.0),
        "{log_evidence} vs {evidence}"
    );
    let gap = (table.elbo(y, &table.posterior(y)) - log_evidence).abs();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n_q {
        let scale = [0.1, 1.0, 5.0][i % 3];
        let mut logits = [0.0; K];
        for v in &mut logits {
            *v = scale * normal(&mut r);
        }
        let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut q = logits.map(|z| (z - m).exp());
        if i % 10 == 0 {
            // surrogate with some exact zeros
            for v in q.iter_mut().step_by(3) {
                *v = 0.0;
            }
            q[1] += 1e-3;
        }
        let total: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= total);
        worst = worst.max(table.elbo(y, &q) - log_evidence);
    }
    (gap, worst)
}
