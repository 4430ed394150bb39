//! Per-sample objectives, shaping modes and the ES gradient estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{centered_rank, centered_rank_of_order, qe_total_order, ObjectivePair};
use crate::sampling::{NoiseTable, PerturbationRef};
use crate::types::{BehaviorDescriptor, SampleEvaluation, SearchDistribution};

/// Which objective drives the shaped weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Plain ES on fitness.
    FitnessOnly,
    /// Evolvability ES.
    EvolvabilityOnly,
    /// Quality Evolvability ES.
    QualityEvolvability,
}

impl ObjectiveMode {
    pub fn short_name(self) -> &'static str {
        match self {
            ObjectiveMode::FitnessOnly => "es",
            ObjectiveMode::EvolvabilityOnly => "e-es",
            ObjectiveMode::QualityEvolvability => "qe-es",
        }
    }

    pub fn uses_evolvability(self) -> bool {
        !matches!(self, ObjectiveMode::FitnessOnly)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub vector: Vec<f64>,
    pub n: usize,
    pub sigma: f64,
}

/// Squared Euclidean distance of every behavior to the population mean.
///
/// The mean of the returned scores is the total (population) variance of the behaviors.
pub fn evolvability_scores(
    behaviors: &[BehaviorDescriptor],
) -> Result<(Vec<f64>, BehaviorDescriptor)> {
    let n = behaviors.len();
    if n < 2 {
        return Err(Error::TooFewSamples { min: 2, actual: n });
    }
    let dim = behaviors[0].dim();
    if let Some(b) = behaviors.iter().find(|b| b.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: b.dim() });
    }
    let mut mean = vec![0.0; dim];
    for b in behaviors {
        for (m, &c) in mean.iter_mut().zip(b.coords()) {
            *m += c;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let scores = behaviors
        .iter()
        .map(|b| b.coords().iter().zip(&mean).map(|(c, m)| (c - m) * (c - m)).sum())
        .collect();
    Ok((scores, BehaviorDescriptor::new(mean)?))
}

/// Shaped weights `r_i` for a generation. `evolvability` is only read by
/// the modes that use it.
pub fn shaped_weights(
    mode: ObjectiveMode,
    evals: &[SampleEvaluation],
    evolvability: &[f64],
) -> Result<Vec<f64>> {
    if mode.uses_evolvability() && evolvability.len() != evals.len() {
        return Err(Error::LengthMismatch {
            what: "evolvability",
            expected: evals.len(),
            actual: evolvability.len(),
        });
    }
    match mode {
        ObjectiveMode::FitnessOnly => {
            centered_rank(&evals.iter().map(|e| e.fitness).collect::<Vec<_>>())
        }
        ObjectiveMode::EvolvabilityOnly => centered_rank(evolvability),
        ObjectiveMode::QualityEvolvability => {
            let pairs: Vec<_> = evals
                .iter()
                .zip(evolvability)
                .map(|(e, &evo)| ObjectivePair::new(e.sample_index, e.fitness, evo))
                .collect();
            centered_rank_of_order(&qe_total_order(&pairs)?)
        }
    }
}

/// `(1 / (n sigma)) * sum_i w_i eps_i`, summed in ascending sample order.
pub fn estimate_gradient(
    weights: &[f64],
    refs: &[PerturbationRef],
    table: &NoiseTable,
    dist: &SearchDistribution,
) -> Result<GradientEstimate> {
    let n = refs.len();
    if weights.len() != n {
        return Err(Error::LengthMismatch { what: "weights", expected: n, actual: weights.len() });
    }
    if n < 2 {
        return Err(Error::TooFewSamples { min: 2, actual: n });
    }
    let dim = dist.dim();
    let mut vector = vec![0.0; dim];
    for (&w, r) in weights.iter().zip(refs) {
        let slice = table.slice(r.offset, dim)?;
        let ws = w * r.sign.as_f64();
        for (g, &e) in vector.iter_mut().zip(slice) {
            *g += ws * e;
        }
    }
    let scale = 1.0 / (n as f64 * dist.sigma());
    for g in &mut vector {
        *g *= scale;
    }
    if let Some(i) = vector.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient(i));
    }
    Ok(GradientEstimate { vector, n, sigma: dist.sigma() })
}
