//! Value types shared across the crate.

use std::ops::Deref;

use crate::error::{Error, Result};

/// Checks that a parameter slice is non-empty and entirely finite.
pub fn validate_parameter_vector(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
    }
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFiniteValue(i)),
        None => Ok(()),
    }
}

/// Flat policy parameters. Always non-empty and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_parameter_vector(&values)?;
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Isotropic Gaussian search distribution around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchDistribution {
    center: ParameterVector,
    sigma: f64,
}

impl SearchDistribution {
    pub fn new(center: ParameterVector, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidSigma(sigma));
        }
        Ok(Self { center, sigma })
    }

    /// Builds a distribution without the `sigma > 0` check. Only the
    /// degenerate `sigma == 0` case is meaningful here (it realizes the center).
    pub fn degenerate(center: ParameterVector) -> Self {
        Self { center, sigma: 0.0 }
    }

    pub fn center(&self) -> &ParameterVector {
        &self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }
}

/// Behavior characterization of one episode, e.g. the final (x, y) position.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorDescriptor(Vec<f64>);

impl BehaviorDescriptor {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Self(coords))
    }

    pub fn xy(x: f64, y: f64) -> Result<Self> {
        Self::new(vec![x, y])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Coordinate `i`, or 0.0 when the descriptor is shorter.
    pub fn get_or_zero(&self, i: usize) -> f64 {
        self.0.get(i).copied().unwrap_or(0.0)
    }
}

/// Fitness and behavior of one offspring.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEvaluation {
    pub sample_index: usize,
    pub fitness: f64,
    pub behavior: BehaviorDescriptor,
    pub episode_steps: u64,
}

/// Per-generation summary written to `records.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: u64,
    pub mean_fitness: f64,
    pub max_fitness: f64,
    pub center_fitness: f64,
    pub mean_evolvability: f64,
    pub bc_mean: BehaviorDescriptor,
    pub wall_clock_seconds: f64,
}

impl GenerationRecord {
    /// Aggregates raw offspring results. Sums run in ascending sample order.
    pub fn aggregate(
        generation: u64,
        evals: &[SampleEvaluation],
        evolvability: &[f64],
        bc_mean: BehaviorDescriptor,
        center_fitness: f64,
        wall_clock_seconds: f64,
    ) -> Result<Self> {
        if evals.is_empty() {
            return Err(Error::TooFewSamples { min: 1, actual: 0 });
        }
        if evolvability.len() != evals.len() {
            return Err(Error::LengthMismatch {
                what: "evolvability",
                expected: evals.len(),
                actual: evolvability.len(),
            });
        }
        let n = evals.len() as f64;
        let mean_fitness = evals.iter().map(|e| e.fitness).sum::<f64>() / n;
        let max_fitness = evals.iter().map(|e| e.fitness).fold(f64::NEG_INFINITY, f64::max);
        let mean_evolvability = evolvability.iter().sum::<f64>() / n;
        Ok(Self {
            generation,
            mean_fitness,
            // Guards the max >= mean invariant against the last-ulp rounding of the mean.
            max_fitness: max_fitness.max(mean_fitness),
            center_fitness,
            mean_evolvability,
            bc_mean,
            wall_clock_seconds,
        })
    }
}
