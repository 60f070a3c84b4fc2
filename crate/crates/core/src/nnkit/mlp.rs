use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nonlinearity applied after every hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    fn slope_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Weight initialization. Biases always start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// `U(−a, a)` with `a = sqrt(6 / (n_in + n_out))`.
    #[default]
    GlorotUniform,
    /// `U(−a, a)` with `a = sqrt(6 / n_in)`.
    HeUniform,
}

impl InitScheme {
    pub fn limit(self, n_in: usize, n_out: usize) -> f64 {
        match self {
            InitScheme::GlorotUniform => (6.0 / (n_in + n_out) as f64).sqrt(),
            InitScheme::HeUniform => (6.0 / n_in as f64).sqrt(),
        }
    }
}

/// A fully connected network with an affine output layer.
///
/// Parameters are stored flat, layer by layer: the `n_out × n_in` weight
/// matrix in row-major order followed by the `n_out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    activation: Activation,
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::InvalidLayerSizes(sizes.to_vec()));
    }
    Ok(())
}

impl Mlp {
    pub fn init<R: Rng + ?Sized>(
        sizes: &[usize],
        activation: Activation,
        scheme: InitScheme,
        rng: &mut R,
    ) -> Result<Self> {
        check_sizes(sizes)?;
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let a = scheme.limit(n_in, n_out);
            params.extend((0..n_in * n_out).map(|_| rng.random_range(-a..a)));
            params.extend(std::iter::repeat_n(0.0, n_out));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            params,
            activation,
        })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>, activation: Activation) -> Result<Self> {
        check_sizes(sizes)?;
        let expected = param_count(sizes);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            params,
            activation,
        })
    }

    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        Self::from_params(sizes, vec![0.0; param_count(sizes)], activation)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    /// Range of the flat parameter vector holding layer `l`'s weights,
    /// followed by the range of its biases.
    pub fn layer_ranges(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let offset = param_count(&self.sizes[..=l]);
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = offset..offset + n_in * n_out;
        let b = w.end..w.end + n_out;
        (w, b)
    }

    /// Evaluates one input.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, Tape<'_>)> {
        self.forward_batch(input, 1)
    }

    /// Evaluates `batch` inputs stored row-major in `inputs`.
    pub fn forward_batch(&self, inputs: &[f64], batch: usize) -> Result<(Vec<f64>, Tape<'_>)> {
        let expected = batch * self.n_inputs();
        if inputs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: inputs.len(),
            });
        }
        let n_layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(n_layers);
        let mut current = inputs.to_vec();
        for l in 0..n_layers {
            let mut next = self.affine(l, &current, batch);
            if l + 1 < n_layers {
                for z in next.iter_mut() {
                    *z = self.activation.apply(*z);
                }
            }
            acts.push(std::mem::replace(&mut current, next));
        }
        Ok((
            current,
            Tape {
                mlp: self,
                batch,
                acts,
            },
        ))
    }

    /// Forward pass without recording.
    pub fn eval_batch(&self, inputs: &[f64], batch: usize) -> Result<Vec<f64>> {
        self.forward_batch(inputs, batch).map(|(out, _)| out)
    }

    fn affine(&self, l: usize, input: &[f64], batch: usize) -> Vec<f64> {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let (wr, br) = self.layer_ranges(l);
        let w = &self.params[wr];
        let bias = &self.params[br];
        let mut out = Vec::with_capacity(batch * n_out);
        for row in input.chunks_exact(n_in) {
            for (o, b) in bias.iter().enumerate() {
                let wo = &w[o * n_in..(o + 1) * n_in];
                out.push(b + wo.iter().zip(row).map(|(a, x)| a * x).sum::<f64>());
            }
        }
        out
    }
}

/// Activations recorded by one forward pass, consumed by [`Tape::backward`].
///
/// `backward` takes the tape by value, so a tape cannot be replayed:
///
/// ```compile_fail
/// use ssl_channel::nnkit::{Activation, Mlp};
/// let net = Mlp::zeros(&[1, 1], Activation::Relu).unwrap();
/// let (_, tape) = net.forward(&[1.0]).unwrap();
/// let _ = tape.backward(&[1.0]);
/// let _ = tape.backward(&[1.0]);
/// ```
#[derive(Debug)]
pub struct Tape<'a> {
    mlp: &'a Mlp,
    batch: usize,
    /// Input of each layer.
    acts: Vec<Vec<f64>>,
}

/// Gradients returned by a backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// Sum over the batch of dLoss/dparams, same layout as [`Mlp::params`].
    pub params: Vec<f64>,
    /// dLoss/dinput per batch row, row-major.
    pub input: Vec<f64>,
}

impl Tape<'_> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Propagates `upstream` (dLoss/doutput, row-major) back through the
    /// recorded pass.
    pub fn backward(self, upstream: &[f64]) -> Result<Gradients> {
        let mlp = self.mlp;
        let expected = self.batch * mlp.n_outputs();
        if upstream.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: upstream.len(),
            });
        }
        let mut grad = vec![0.0; mlp.params.len()];
        let mut delta = upstream.to_vec();
        for l in (0..self.acts.len()).rev() {
            let (n_in, n_out) = (mlp.sizes[l], mlp.sizes[l + 1]);
            let (wr, br) = mlp.layer_ranges(l);
            let input = &self.acts[l];
            {
                let (gw, gb) = grad[wr.start..br.end].split_at_mut(n_in * n_out);
                for (d_row, x_row) in delta.chunks_exact(n_out).zip(input.chunks_exact(n_in)) {
                    for (o, &d) in d_row.iter().enumerate() {
                        if d == 0.0 {
                            continue;
                        }
                        gb[o] += d;
                        for (g, &x) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(x_row) {
                            *g += d * x;
                        }
                    }
                }
            }
            let w = &mlp.params[wr];
            let mut next = vec![0.0; self.batch * n_in];
            for (d_row, n_row) in delta.chunks_exact(n_out).zip(next.chunks_exact_mut(n_in)) {
                for (o, &d) in d_row.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (n, &wv) in n_row.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *n += d * wv;
                    }
                }
            }
            if l > 0 {
                for (n, &a) in next.iter_mut().zip(input) {
                    *n *= mlp.activation.slope_from_output(a);
                }
            }
            delta = next;
        }
        Ok(Gradients {
            params: grad,
            input: delta,
        })
    }
}
