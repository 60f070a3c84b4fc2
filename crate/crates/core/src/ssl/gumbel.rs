//! Gumbel noise and the Gumbel-softmax relaxation of a categorical draw.

use rand::Rng;

use crate::channel::{Constellation, K};

/// Uniform draws are clamped to `[UNIFORM_CLAMP, 1 − UNIFORM_CLAMP]`.
pub const UNIFORM_CLAMP: f64 = 1e-12;

pub fn gumbel_from_uniform(u: f64) -> f64 {
    let u = u.clamp(UNIFORM_CLAMP, 1.0 - UNIFORM_CLAMP);
    -(-u.ln()).ln()
}

/// One Gumbel(0, 1) variate.
pub fn gumbel_sample<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    gumbel_from_uniform(rng.random::<f64>())
}

/// Sixteen independent Gumbel(0, 1) variates.
pub fn gumbel_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; K] {
    let mut g = [0.0; K];
    for v in &mut g {
        *v = gumbel_sample(rng);
    }
    g
}

/// A relaxed one-hot sample and the corresponding soft constellation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxedSample {
    /// Softmax weights `s̃_k`, on the probability simplex.
    pub stilde: [f64; K],
    /// `x̃ = Σ_k x(k) s̃_k`.
    pub xtilde: [f64; 2],
    pub tau: f64,
}

/// `s̃ = softmax((log q + g) / τ)`, `x̃ = Σ_k x(k) s̃_k`.
pub fn gumbel_softmax_relax(
    log_q: &[f64; K],
    g: &[f64; K],
    tau: f64,
    constellation: &Constellation,
) -> RelaxedSample {
    debug_assert!(tau > 0.0);
    let mut z = [0.0; K];
    for k in 0..K {
        z[k] = (log_q[k] + g[k]) / tau;
    }
    let stilde = crate::models::softmax16(&z);
    let mut xtilde = [0.0; 2];
    for (w, x) in stilde.iter().zip(constellation.points()) {
        xtilde[0] += w * x[0];
        xtilde[1] += w * x[1];
    }
    RelaxedSample {
        stilde,
        xtilde,
        tau,
    }
}

impl RelaxedSample {
    /// Pulls a gradient on `x̃` back to `log q`.
    pub fn backward(&self, constellation: &Constellation, d_xtilde: [f64; 2]) -> [f64; K] {
        let mut d_s = [0.0; K];
        for (d, x) in d_s.iter_mut().zip(constellation.points()) {
            *d = x[0] * d_xtilde[0] + x[1] * d_xtilde[1];
        }
        let mean: f64 = self.stilde.iter().zip(&d_s).map(|(s, d)| s * d).sum();
        let mut out = [0.0; K];
        for k in 0..K {
            out[k] = self.stilde[k] * (d_s[k] - mean) / self.tau;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnkit::ops::argmax;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn gumbel_at_inverse_e_is_zero() {
        assert!(gumbel_from_uniform((-1.0f64).exp()).abs() < 1e-15);
        assert!(gumbel_from_uniform(0.0).is_finite());
        assert!(gumbel_from_uniform(1.0).is_finite());
    }

    #[test]
    fn low_temperature_is_one_hot() {
        let mut rng = stream_rng(4, Stream::Training);
        let c = Constellation::qam16();
        let lq =
            crate::nnkit::ops::log_softmax(&(0..K).map(|k| (k as f64).cos()).collect::<Vec<_>>());
        let mut log_q = [0.0; K];
        log_q.copy_from_slice(&lq);
        for _ in 0..100 {
            let g = gumbel_vector(&mut rng);
            let r = gumbel_softmax_relax(&log_q, &g, 1e-6, &c);
            let mut z = [0.0; K];
            for k in 0..K {
                z[k] = log_q[k] + g[k];
            }
            let k = argmax(&z);
            for j in 0..K {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((r.stilde[j] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn symmetric_inputs_give_centroid() {
        let c = Constellation::qam16();
        let r = gumbel_softmax_relax(&[(1.0f64 / 16.0).ln(); K], &[0.3; K], 0.7, &c);
        for s in r.stilde {
            assert!((s - 1.0 / 16.0).abs() < 1e-15);
        }
        assert!(r.xtilde[0].abs() < 1e-14 && r.xtilde[1].abs() < 1e-14);
    }

    #[test]
    fn backward_matches_differences() {
        let c = Constellation::qam16();
        let mut rng = stream_rng(5, Stream::Training);
        let g = gumbel_vector(&mut rng);
        let mut log_q = [0.0; K];
        for (k, v) in log_q.iter_mut().enumerate() {
            *v = -2.0 - 0.1 * k as f64;
        }
        let w = [0.7, -1.3];
        let f = |lq: &[f64; K]| {
            let r = gumbel_softmax_relax(lq, &g, 0.8, &c);
            w[0] * r.xtilde[0] + w[1] * r.xtilde[1]
        };
        let grad = gumbel_softmax_relax(&log_q, &g, 0.8, &c).backward(&c, w);
        let h = 1e-6;
        for k in 0..K {
            let mut p = log_q;
            p[k] += h;
            let mut m = log_q;
            m[k] -= h;
            let fd = (f(&p) - f(&m)) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-8, "{k}: {fd} vs {}", grad[k]);
        }
    }
}
