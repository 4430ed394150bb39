//! What the runner optimizes: a map from parameters to fitness and behavior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{self, EnvironmentSpec, Variant, BC_DIM, GOAL_DIRECTIONS};
use crate::error::{Error, Result};
use crate::policy::PolicySpec;
use crate::types::{BehaviorDescriptor, ParameterVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub fitness: f64,
    pub behavior: BehaviorDescriptor,
    pub steps: u64,
}

/// A pure objective evaluated concurrently by the runner.
pub trait Evaluator: Sync {
    fn param_dim(&self) -> usize;

    fn bc_dim(&self) -> usize;

    fn initial_center(&self, seed: u64) -> Result<ParameterVector>;

    fn evaluate(&self, params: &[f64], episode_seed: u64) -> Result<Outcome>;

    /// Fitness of the unperturbed center, used for reporting only.
    fn evaluate_center(&self, params: &[f64]) -> Result<f64> {
        Ok(self.evaluate(params, 0)?.fitness)
    }
}

/// A policy acting in one of the point-mass environments.
#[derive(Debug, Clone, PartialEq)]
pub struct Locomotion {
    pub env: EnvironmentSpec,
    pub policy: PolicySpec,
}

impl Locomotion {
    pub fn new(env: EnvironmentSpec, policy: PolicySpec) -> Result<Self> {
        env.validate()?;
        policy.validate()?;
        if policy.obs_dim != env.obs_dim() || policy.action_dim != environment::ACTION_DIM {
            return Err(Error::Config(format!(
                "policy must map {} observations to {} actions for the {:?} environment, got {} -> {}",
                env.obs_dim(),
                environment::ACTION_DIM,
                env.variant,
                policy.obs_dim,
                policy.action_dim
            )));
        }
        Ok(Self { env, policy })
    }

    pub fn episode(&self, params: &[f64], goal: Option<usize>, record: bool) -> Result<environment::EpisodeResult> {
        environment::simulate(params, &self.env, &self.policy, goal, record)
    }
}

impl Evaluator for Locomotion {
    fn param_dim(&self) -> usize {
        self.policy.param_count()
    }

    fn bc_dim(&self) -> usize {
        BC_DIM
    }

    fn initial_center(&self, seed: u64) -> Result<ParameterVector> {
        self.policy.init_params(seed)
    }

    fn evaluate(&self, params: &[f64], episode_seed: u64) -> Result<Outcome> {
        let r = environment::run_episode(params, &self.env, &self.policy, episode_seed)?;
        Ok(Outcome { fitness: r.fitness, behavior: r.behavior, steps: r.steps_taken })
    }

    /// Directional centers are scored as the mean over all 8 goal directions.
    fn evaluate_center(&self, params: &[f64]) -> Result<f64> {
        if self.env.variant != Variant::Directional {
            return Ok(self.episode(params, None, false)?.fitness);
        }
        let mut total = 0.0;
        for k in 0..GOAL_DIRECTIONS {
            total += self.episode(params, Some(k), false)?.fitness;
        }
        Ok(total / GOAL_DIRECTIONS as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BowlSpec {
    pub dim: usize,
    #[serde(default)]
    pub target_seed: u64,
    /// Target coordinates are drawn uniformly from `[-target_scale, target_scale]`.
    #[serde(default = "BowlSpec::default_scale")]
    pub target_scale: f64,
}

impl BowlSpec {
    fn default_scale() -> f64 {
        1.0
    }
}

/// Synthetic smooth objective `F(theta) = -||theta - target||^2`, starting at the origin.
///
/// The behavior is the first two coordinates of `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBowl {
    pub target: Vec<f64>,
}

impl QuadraticBowl {
    pub fn new(target: Vec<f64>) -> Result<Self> {
        ParameterVector::new(target.clone())?;
        Ok(Self { target })
    }

    pub fn from_spec(spec: &BowlSpec) -> Result<Self> {
        if spec.dim == 0 || !(spec.target_scale >= 0.0 && spec.target_scale.is_finite()) {
            return Err(Error::Config("bowl: dim must be positive and target_scale non-negative".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.target_seed);
        let s = spec.target_scale;
        let target = (0..spec.dim).map(|_| if s > 0.0 { rng.gen_range(-s..=s) } else { 0.0 }).collect();
        Self::new(target)
    }

    pub fn distance(&self, theta: &[f64]) -> f64 {
        self.target.iter().zip(theta).map(|(t, x)| (x - t) * (x - t)).sum::<f64>().sqrt()
    }
}

impl Evaluator for QuadraticBowl {
    fn param_dim(&self) -> usize {
        self.target.len()
    }

    fn bc_dim(&self) -> usize {
        BC_DIM
    }

    fn initial_center(&self, _seed: u64) -> Result<ParameterVector> {
        ParameterVector::zeros(self.target.len())
    }

    fn evaluate(&self, params: &[f64], _episode_seed: u64) -> Result<Outcome> {
        if params.len() != self.target.len() {
            return Err(Error::DimensionMismatch { expected: self.target.len(), actual: params.len() });
        }
        let d = self.distance(params);
        let bc = vec![params[0], params.get(1).copied().unwrap_or(0.0)];
        Ok(Outcome { fitness: -d * d, behavior: BehaviorDescriptor::new(bc)?, steps: 1 })
    }
}
