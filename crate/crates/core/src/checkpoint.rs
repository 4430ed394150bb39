//! Versioned binary checkpoints.
//!
//! All integers and reals are little-endian; reals are raw IEEE-754 bits.
//!
//! | field                | type            |
//! |----------------------|-----------------|
//! | magic                | `b"QEES"`       |
//! | format version       | u32 (= 1)       |
//! | generation           | u64, generations completed |
//! | config digest        | 32 bytes        |
//! | run seed             | u64             |
//! | episodes evaluated   | u64, cumulative offspring + center episodes |
//! | dim                  | u64             |
//! | center               | dim x f64       |
//! | adam step count      | u64             |
//! | alpha, beta1, beta2, eps, l2_coeff | 5 x f64 |
//! | adam m               | dim x f64       |
//! | adam v               | dim x f64       |

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimizer::{AdamConfig, AdamState};
use crate::types::ParameterVector;

pub const MAGIC: &[u8; 4] = b"QEES";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub generation: u64,
    pub config_digest: [u8; 32],
    pub run_seed: u64,
    pub episodes_evaluated: u64,
    pub center: ParameterVector,
    pub adam: AdamState,
}

fn put_f64s<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(get_u64(r)?))
}

fn get_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| get_f64(r)).collect()
}

fn truncated(e: std::io::Error) -> Error {
    Error::Checkpoint(format!("truncated or unreadable: {e}"))
}

/// Writes a parameter vector as `dim: u64` followed by raw little-endian reals.
pub fn write_parameters<W: Write>(w: &mut W, p: &ParameterVector) -> Result<()> {
    w.write_all(&(p.dim() as u64).to_le_bytes())?;
    put_f64s(w, p)?;
    Ok(())
}

pub fn read_parameters<R: Read>(r: &mut R) -> Result<ParameterVector> {
    let dim = get_u64(r)? as usize;
    if dim == 0 || dim > (1 << 32) {
        return Err(Error::Checkpoint(format!("implausible dimension {dim}")));
    }
    ParameterVector::new(get_f64s(r, dim)?)
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let dim = self.center.dim();
        if self.adam.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: self.adam.dim() });
        }
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.generation.to_le_bytes())?;
        w.write_all(&self.config_digest)?;
        w.write_all(&self.run_seed.to_le_bytes())?;
        w.write_all(&self.episodes_evaluated.to_le_bytes())?;
        write_parameters(w, &self.center)?;
        w.write_all(&self.adam.step_count.to_le_bytes())?;
        let c = &self.adam.config;
        put_f64s(w, &[c.alpha, c.beta1, c.beta2, c.eps, c.l2_coeff])?;
        put_f64s(w, &self.adam.m)?;
        put_f64s(w, &self.adam.v)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad magic header".into()));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v).map_err(truncated)?;
        let version = u32::from_le_bytes(v);
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {version}")));
        }
        let generation = get_u64(r)?;
        let mut config_digest = [0u8; 32];
        r.read_exact(&mut config_digest).map_err(truncated)?;
        let run_seed = get_u64(r)?;
        let episodes_evaluated = get_u64(r)?;
        let center = read_parameters(r)?;
        let dim = center.dim();
        let step_count = get_u64(r)?;
        let h = get_f64s(r, 5)?;
        let config = AdamConfig { alpha: h[0], beta1: h[1], beta2: h[2], eps: h[3], l2_coeff: h[4] };
        let m = get_f64s(r, dim)?;
        let v = get_f64s(r, dim)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Checkpoint("trailing bytes after checkpoint".into()));
        }
        Ok(Self {
            generation,
            config_digest,
            run_seed,
            episodes_evaluated,
            center,
            adam: AdamState { m, v, step_count, config },
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read_from(&mut bytes.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Checkpoint {
        let center = ParameterVector::new(vec![0.1, -2.5, 3.0e-300]).unwrap();
        let mut adam = AdamState::new(3, AdamConfig::default());
        adam.m = vec![1.0, 2.0, 3.0];
        adam.v = vec![0.5, 0.25, 0.125];
        adam.step_count = 7;
        Checkpoint {
            generation: 10,
            config_digest: [7; 32],
            run_seed: 42,
            episodes_evaluated: 2020,
            center,
            adam,
        }
    }

    #[test]
    fn round_trip() {
        let ck = sample();
        let bytes = ck.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"QEES");
        assert_eq!(Checkpoint::read_from(&mut bytes.as_slice()).unwrap(), ck);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = sample().to_bytes().unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Checkpoint::read_from(&mut bad.as_slice()).is_err());
        assert!(Checkpoint::read_from(&mut &bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(Checkpoint::read_from(&mut long.as_slice()).is_err());
        let mut version = bytes;
        version[4] = 2;
        assert!(Checkpoint::read_from(&mut version.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn parameter_vectors_round_trip_bitwise(
            v in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..64)
        ) {
            let p = ParameterVector::new(v).unwrap();
            let mut buf = Vec::new();
            write_parameters(&mut buf, &p).unwrap();
            let back = read_parameters(&mut buf.as_slice()).unwrap();
            prop_assert!(back.iter().zip(p.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert_eq!(back.dim(), p.dim());
        }
    }
}
