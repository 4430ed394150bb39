//! Slow, independent reference implementations for verification.
//!
//! Nothing on the optimization path calls into this module.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ranking::{crowding_for_fronts, ObjectivePair, SortedFronts};

fn weakly_better(a: &ObjectivePair, b: &ObjectivePair) -> bool {
    a.fitness >= b.fitness && a.evolvability >= b.evolvability
}

fn strictly_better_somewhere(a: &ObjectivePair, b: &ObjectivePair) -> bool {
    a.fitness > b.fitness || a.evolvability > b.evolvability
}

/// Repeatedly peels off the points that nothing remaining dominates.
pub fn brute_force_fronts(pairs: &[ObjectivePair]) -> SortedFronts {
    let mut remaining: Vec<usize> = (0..pairs.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| {
                !remaining.iter().any(|&j| {
                    j != i
                        && weakly_better(&pairs[j], &pairs[i])
                        && strictly_better_somewhere(&pairs[j], &pairs[i])
                })
            })
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    let crowding = crowding_for_fronts(pairs, &fronts);
    SortedFronts { fronts, crowding }
}

/// Plain Monte-Carlo estimate of the Gaussian-smoothed gradient,
/// `1/(n sigma) * sum_i F(center + sigma eps_i) eps_i`, with raw fitness,
/// fresh i.i.d. draws and no mirroring.
pub fn smoothed_gradient_mc<F>(fitness: F, center: &[f64], sigma: f64, n_large: usize, seed: u64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grad = vec![0.0; dim];
    let mut eps = vec![0.0; dim];
    let mut point = vec![0.0; dim];
    for _ in 0..n_large {
        for ((e, p), c) in eps.iter_mut().zip(point.iter_mut()).zip(center) {
            *e = rng.sample(StandardNormal);
            *p = c + sigma * *e;
        }
        let f = fitness(&point);
        for (g, e) in grad.iter_mut().zip(&eps) {
            *g += f * e;
        }
    }
    let scale = 1.0 / (n_large as f64 * sigma);
    grad.iter_mut().for_each(|g| *g *= scale);
    grad
}
