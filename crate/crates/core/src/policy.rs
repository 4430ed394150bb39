//! Fully connected tanh policy over a flat parameter vector.
//!
//! Layout: for each layer in order, a row-major `out x in` weight block
//! (one row per output unit) followed by an `out`-long bias block.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ParameterVector;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub obs_dim: usize,
    pub action_dim: usize,
    #[serde(default)]
    pub hidden: Vec<usize>,
}

impl PolicySpec {
    pub fn new(obs_dim: usize, hidden: Vec<usize>, action_dim: usize) -> Self {
        Self { obs_dim, action_dim, hidden }
    }

    /// `(in, out)` of every layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(self.obs_dim);
        widths.extend(&self.hidden);
        widths.push(self.action_dim);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| (i + 1) * o).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.obs_dim == 0 || self.action_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::Config("policy: every layer width must be positive".into()));
        }
        Ok(())
    }

    /// Weights ~ N(0, 1/fan_in), biases zero.
    pub fn init_params(&self, seed: u64) -> Result<ParameterVector> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(self.param_count());
        for (fan_in, fan_out) in self.layer_shapes() {
            let normal = Normal::new(0.0, 1.0 / (fan_in as f64).sqrt())
                .map_err(|e| Error::Config(e.to_string()))?;
            out.extend((0..fan_in * fan_out).map(|_| normal.sample(&mut rng)));
            out.extend(std::iter::repeat_n(0.0, fan_out));
        }
        ParameterVector::new(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

pub fn unflatten(spec: &PolicySpec, params: &[f64]) -> Result<Vec<Layer>> {
    check_len(spec, params)?;
    let mut at = 0;
    Ok(spec
        .layer_shapes()
        .into_iter()
        .map(|(inputs, outputs)| {
            let weights = params[at..at + inputs * outputs].to_vec();
            at += inputs * outputs;
            let bias = params[at..at + outputs].to_vec();
            at += outputs;
            Layer { inputs, outputs, weights, bias }
        })
        .collect())
}

pub fn flatten(layers: &[Layer]) -> Vec<f64> {
    layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias).copied()).collect()
}

fn check_len(spec: &PolicySpec, params: &[f64]) -> Result<()> {
    let expected = spec.param_count();
    if params.len() != expected {
        return Err(Error::DimensionMismatch { expected, actual: params.len() });
    }
    Ok(())
}

/// Reusable forward-pass evaluator; holds scratch buffers so the inner
/// episode loop does not allocate.
#[derive(Debug, Clone)]
pub struct Mlp<'a> {
    spec: &'a PolicySpec,
    shapes: Vec<(usize, usize)>,
    params: &'a [f64],
    scratch: [Vec<f64>; 2],
}

impl<'a> Mlp<'a> {
    pub fn new(spec: &'a PolicySpec, params: &'a [f64]) -> Result<Self> {
        check_len(spec, params)?;
        let widest = spec.hidden.iter().copied().chain([spec.obs_dim, spec.action_dim]).max().unwrap_or(0);
        Ok(Self {
            spec,
            shapes: spec.layer_shapes(),
            params,
            scratch: [vec![0.0; widest], vec![0.0; widest]],
        })
    }

    /// Runs the network; every output lies in `[-1, 1]`.
    pub fn forward_into(&mut self, obs: &[f64], action: &mut [f64]) -> Result<()> {
        if obs.len() != self.spec.obs_dim {
            return Err(Error::DimensionMismatch { expected: self.spec.obs_dim, actual: obs.len() });
        }
        if action.len() != self.spec.action_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.action_dim,
                actual: action.len(),
            });
        }
        let [a, b] = &mut self.scratch;
        a[..obs.len()].copy_from_slice(obs);
        let (mut cur, mut nxt) = (a, b);
        let mut at = 0;
        for &(inputs, outputs) in &self.shapes {
            let w = &self.params[at..at + inputs * outputs];
            let bias = &self.params[at + inputs * outputs..at + (inputs + 1) * outputs];
            at += (inputs + 1) * outputs;
            for o in 0..outputs {
                let row = &w[o * inputs..(o + 1) * inputs];
                let s: f64 = row.iter().zip(&cur[..inputs]).map(|(w, x)| w * x).sum();
                nxt[o] = (s + bias[o]).tanh();
            }
            std::mem::swap(&mut cur, &mut nxt);
        }
        action.copy_from_slice(&cur[..self.spec.action_dim]);
        Ok(())
    }
}

pub fn forward(params: &[f64], spec: &PolicySpec, obs: &[f64]) -> Result<Vec<f64>> {
    let mut action = vec![0.0; spec.action_dim];
    Mlp::new(spec, params)?.forward_into(obs, &mut action)?;
    Ok(action)
}
