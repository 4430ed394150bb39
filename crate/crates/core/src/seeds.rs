//! Stable seed derivation.
//!
//! Every seed used during a run is derived from the run seed with the
//! SplitMix64 finalizer. The derivation is part of the reproducibility
//! contract and must not change between versions:
//!
//! ```text
//! episode_seed(run, g, i) = mix(mix(mix(run ^ EPISODE_TAG) ^ g) ^ i)
//! generation_seed(run, g) = mix(mix(run ^ GENERATION_TAG) ^ g)
//! init_seed(run, base)    = mix(mix(run ^ INIT_TAG) ^ base)
//! ```

pub const EPISODE_TAG: u64 = 0x6570_6973_6f64_6573; // "episodes"
pub const GENERATION_TAG: u64 = 0x6765_6e65_7261_7465; // "generate"
pub const INIT_TAG: u64 = 0x696e_6974_7061_7261; // "initpara"
pub const GOAL_TAG: u64 = 0x676f_616c_6469_7273; // "goaldirs"

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn episode_seed(run_seed: u64, generation: u64, sample_index: u64) -> u64 {
    mix(mix(mix(run_seed ^ EPISODE_TAG) ^ generation) ^ sample_index)
}

pub fn generation_seed(run_seed: u64, generation: u64) -> u64 {
    mix(mix(run_seed ^ GENERATION_TAG) ^ generation)
}

pub fn init_seed(run_seed: u64, base: u64) -> u64 {
    mix(mix(run_seed ^ INIT_TAG) ^ base)
}
