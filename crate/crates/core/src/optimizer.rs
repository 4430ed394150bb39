//! Adam ascent with an L2 penalty folded into the gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::GradientEstimate;
use crate::types::ParameterVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    #[serde(default = "AdamConfig::default_alpha")]
    pub alpha: f64,
    #[serde(default = "AdamConfig::default_beta1")]
    pub beta1: f64,
    #[serde(default = "AdamConfig::default_beta2")]
    pub beta2: f64,
    #[serde(default = "AdamConfig::default_eps")]
    pub eps: f64,
    #[serde(default = "AdamConfig::default_l2")]
    pub l2_coeff: f64,
}

impl AdamConfig {
    fn default_alpha() -> f64 {
        0.01
    }
    fn default_beta1() -> f64 {
        0.9
    }
    fn default_beta2() -> f64 {
        0.999
    }
    fn default_eps() -> f64 {
        1e-8
    }
    fn default_l2() -> f64 {
        0.005
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("optimizer.{msg}")));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) || !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta1 and beta2 must lie in (0, 1)");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps must be positive");
        }
        if !(self.l2_coeff >= 0.0 && self.l2_coeff.is_finite()) {
            return bad("l2_coeff must be non-negative");
        }
        Ok(())
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            alpha: Self::default_alpha(),
            beta1: Self::default_beta1(),
            beta2: Self::default_beta2(),
            eps: Self::default_eps(),
            l2_coeff: Self::default_l2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step_count: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(dim: usize, config: AdamConfig) -> Self {
        Self { m: vec![0.0; dim], v: vec![0.0; dim], step_count: 0, config }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// One bias-corrected Adam step that *increases* the objective.
    ///
    /// The effective direction is `grad - l2_coeff * theta`.
    pub fn step(
        &self,
        theta: &ParameterVector,
        grad: &GradientEstimate,
    ) -> Result<(ParameterVector, AdamState)> {
        let dim = self.dim();
        if theta.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: theta.dim() });
        }
        if grad.vector.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: grad.vector.len() });
        }
        if let Some(i) = grad.vector.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(i));
        }
        let AdamConfig { alpha, beta1, beta2, eps, l2_coeff } = self.config;
        let t = self.step_count + 1;
        let bias1 = 1.0 - beta1.powf(t as f64);
        let bias2 = 1.0 - beta2.powf(t as f64);

        let mut next = self.clone();
        next.step_count = t;
        let mut new_theta = theta.as_slice().to_vec();
        for j in 0..dim {
            let g = grad.vector[j] - l2_coeff * theta[j];
            next.m[j] = beta1 * self.m[j] + (1.0 - beta1) * g;
            next.v[j] = beta2 * self.v[j] + (1.0 - beta2) * g * g;
            let m_hat = next.m[j] / bias1;
            let v_hat = next.v[j] / bias2;
            new_theta[j] += alpha * m_hat / (v_hat.sqrt() + eps);
        }
        Ok((ParameterVector::new(new_theta)?, next))
    }
}
