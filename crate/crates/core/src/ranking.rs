//! Fitness shaping and the two-objective NSGA-II ordering.
//!
//! Both objectives (fitness, evolvability) are maximized. Every tie in this
//! module is broken by ascending sample index.

use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivePair {
    pub fitness: f64,
    pub evolvability: f64,
    pub sample_index: usize,
}

impl ObjectivePair {
    pub fn new(sample_index: usize, fitness: f64, evolvability: f64) -> Self {
        Self { fitness, evolvability, sample_index }
    }

    fn objective(&self, k: usize) -> f64 {
        if k == 0 {
            self.fitness
        } else {
            self.evolvability
        }
    }
}

/// Non-dominated fronts over positions `0..n` of the input list, with the
/// crowding distance of every position computed within its own front.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedFronts {
    pub fronts: Vec<Vec<usize>>,
    pub crowding: Vec<f64>,
}

impl SortedFronts {
    /// Front index of every input position.
    pub fn rank_of(&self) -> Vec<usize> {
        let n = self.fronts.iter().map(Vec::len).sum();
        let mut rank = vec![0; n];
        for (k, front) in self.fronts.iter().enumerate() {
            for &i in front {
                rank[i] = k;
            }
        }
        rank
    }
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<()> {
    match values.into_iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFiniteValue(i)),
        None => Ok(()),
    }
}

/// Centered rank transform: the sample at ascending rank `k` gets `k / (n - 1) - 0.5`.
pub fn centered_rank(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewSamples { min: 2, actual: n });
    }
    check_finite(values.iter().copied())?;
    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so equal values keep ascending index order.
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let denom = (n - 1) as f64;
    let mut weights = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        weights[i] = k as f64 / denom - 0.5;
    }
    Ok(weights)
}

/// Centered rank weights for a best-to-worst ordering: the best position gets `+0.5`.
pub fn centered_rank_of_order(best_to_worst: &[usize]) -> Result<Vec<f64>> {
    let n = best_to_worst.len();
    if n < 2 {
        return Err(Error::TooFewSamples { min: 2, actual: n });
    }
    let denom = (n - 1) as f64;
    let mut weights = vec![f64::NAN; n];
    for (pos, &i) in best_to_worst.iter().enumerate() {
        if i >= n || !weights[i].is_nan() {
            return Err(Error::Config(format!("ordering is not a permutation of 0..{n}")));
        }
        weights[i] = (n - 1 - pos) as f64 / denom - 0.5;
    }
    Ok(weights)
}

pub fn dominates(a: &ObjectivePair, b: &ObjectivePair) -> bool {
    a.fitness >= b.fitness
        && a.evolvability >= b.evolvability
        && (a.fitness > b.fitness || a.evolvability > b.evolvability)
}

/// Deb's fast non-dominated sort followed by per-front crowding distance.
pub fn fast_nondominated_sort(pairs: &[ObjectivePair]) -> SortedFronts {
    let n = pairs.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if dominates(&pairs[p], &pairs[q]) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates(&pairs[q], &pairs[p]) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }

    let crowding = crowding_for_fronts(pairs, &fronts);
    SortedFronts { fronts, crowding }
}

pub(crate) fn crowding_for_fronts(pairs: &[ObjectivePair], fronts: &[Vec<usize>]) -> Vec<f64> {
    let mut crowding = vec![0.0; pairs.len()];
    for front in fronts {
        let members: Vec<ObjectivePair> = front.iter().map(|&i| pairs[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            crowding[i] = d;
        }
    }
    crowding
}

/// Crowding distance of each member of one front, aligned with the input.
///
/// Per objective, the two extreme members (ties by index) are set to
/// infinity and interior members accumulate `(next - prev) / (max - min)`.
/// An objective with zero range adds nothing to interior members.
pub fn crowding_distance(front: &[ObjectivePair]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for k in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            front[a]
                .objective(k)
                .total_cmp(&front[b].objective(k))
                .then(front[a].sample_index.cmp(&front[b].sample_index))
        });
        let lo = front[order[0]].objective(k);
        let hi = front[order[n - 1]].objective(k);
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let i = order[w];
            if dist[i].is_finite() {
                dist[i] += (front[order[w + 1]].objective(k) - front[order[w - 1]].objective(k)) / range;
            }
        }
    }
    dist
}

/// Orders sample positions best-to-worst by front, then descending crowding, then index.
pub fn qe_total_order(pairs: &[ObjectivePair]) -> Result<Vec<usize>> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::TooFewSamples { min: 2, actual: n });
    }
    check_finite(pairs.iter().flat_map(|p| [p.fitness, p.evolvability]))?;
    let sorted = fast_nondominated_sort(pairs);
    Ok(order_from_fronts(pairs, &sorted))
}

pub(crate) fn order_from_fronts(pairs: &[ObjectivePair], sorted: &SortedFronts) -> Vec<usize> {
    let rank = sorted.rank_of();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| {
        rank[a]
            .cmp(&rank[b])
            .then_with(|| sorted.crowding[b].partial_cmp(&sorted.crowding[a]).unwrap_or(Ordering::Equal))
            .then(pairs[a].sample_index.cmp(&pairs[b].sample_index))
    });
    order
}
