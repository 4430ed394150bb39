//! Shared Gaussian noise table and mirrored perturbation handles.
//!
//! Offspring `i` of a generation is `center + sigma * sign_i * table[offset_i .. offset_i + dim]`.
//! Samples `2k` and `2k + 1` share an offset and carry opposite signs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::types::{ParameterVector, SearchDistribution};

/// Default table length for desk-scale runs.
pub const DEFAULT_TABLE_LEN: usize = 10_000_000;

/// Immutable table of i.i.d. standard normal draws, fully determined by `(seed, len)`.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    seed: u64,
    values: Vec<f64>,
}

impl NoiseTable {
    pub fn build(seed: u64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidLength(len));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        Ok(Self { seed, values })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slice(&self, offset: usize, dim: usize) -> Result<&[f64]> {
        let end = offset.checked_add(dim).filter(|&e| e <= self.values.len()).ok_or(
            Error::OffsetOutOfRange { offset, dim, table_len: self.values.len() },
        )?;
        Ok(&self.values[offset..end])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Compact stand-in for one perturbation `epsilon_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PerturbationRef {
    pub offset: usize,
    pub sign: Sign,
}

impl PerturbationRef {
    /// Writes `sign * table[offset .. offset + out.len()]` into `out`.
    pub fn write_epsilon(&self, table: &NoiseTable, out: &mut [f64]) -> Result<()> {
        let slice = table.slice(self.offset, out.len())?;
        let s = self.sign.as_f64();
        for (o, &e) in out.iter_mut().zip(slice) {
            *o = s * e;
        }
        Ok(())
    }

    pub fn epsilon(&self, table: &NoiseTable, dim: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; dim];
        self.write_epsilon(table, &mut out)?;
        Ok(out)
    }
}

/// Draws `n / 2` distinct offsets and lays them out as mirrored pairs.
///
/// Slices starting at distinct offsets may still overlap.
pub fn sample_generation(
    table: &NoiseTable,
    n: usize,
    dim: usize,
    gen_seed: u64,
) -> Result<Vec<PerturbationRef>> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddPopulation(n));
    }
    let pairs = n / 2;
    if dim == 0 || dim > table.len() || table.len() - dim + 1 < pairs {
        return Err(Error::TableTooShort { table_len: table.len(), dim });
    }
    let max_offset = table.len() - dim;
    let mut rng = ChaCha8Rng::seed_from_u64(gen_seed);
    let mut seen = std::collections::HashSet::with_capacity(pairs);
    let mut refs = Vec::with_capacity(n);
    while refs.len() < n {
        let offset = rng.gen_range(0..=max_offset);
        if !seen.insert(offset) {
            continue;
        }
        refs.push(PerturbationRef { offset, sign: Sign::Plus });
        refs.push(PerturbationRef { offset, sign: Sign::Minus });
    }
    Ok(refs)
}

/// Writes `center + sigma * epsilon` into `out` (`out.len()` must equal the center dim).
pub fn realize_into(
    dist: &SearchDistribution,
    r: &PerturbationRef,
    table: &NoiseTable,
    out: &mut [f64],
) -> Result<()> {
    let dim = dist.dim();
    if out.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: out.len() });
    }
    let slice = table.slice(r.offset, dim)?;
    let scale = dist.sigma() * r.sign.as_f64();
    for ((o, &c), &e) in out.iter_mut().zip(dist.center().iter()).zip(slice) {
        *o = c + scale * e;
    }
    Ok(())
}

pub fn realize_offspring(
    dist: &SearchDistribution,
    r: &PerturbationRef,
    table: &NoiseTable,
) -> Result<ParameterVector> {
    let mut out = vec![0.0; dist.dim()];
    realize_into(dist, r, table, &mut out)?;
    ParameterVector::new(out)
}
