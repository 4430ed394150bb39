//! Run configuration, stored as a TOML document with one section per subsystem.
//!
//! ```toml
//! format_version = 1
//!
//! [run]
//! mode = "quality_evolvability"   # fitness_only | evolvability_only | quality_evolvability
//! population = 200
//! sigma = 0.02
//! generations = 300
//!
//! [noise]
//! seed = 0
//! length = 10000000
//!
//! [task]
//! kind = "locomotion"             # or "quadratic_bowl" with a [bowl] section
//!
//! [environment]
//! variant = "deceptive"
//!
//! [environment.trap]
//! front_wall_x = 4.0
//! side_wall_y = 2.0
//! side_wall_length = 4.0
//! wall_thickness = 0.2
//!
//! [policy]
//! obs_dim = 4
//! action_dim = 2
//! hidden = [16, 16]
//!
//! [optimizer]
//! alpha = 0.01
//! l2_coeff = 0.005
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::estimator::ObjectiveMode;
use crate::optimizer::AdamConfig;
use crate::policy::PolicySpec;
use crate::sampling::DEFAULT_TABLE_LEN;
use crate::task::{BowlSpec, Locomotion, QuadraticBowl};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeSeedPolicy {
    /// Each sample of each generation gets `episode_seed(run_seed, g, i)`.
    PerSample,
    /// All samples of a generation share `episode_seed(run_seed, g, 0)`.
    PerGeneration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: ObjectiveMode,
    pub population: usize,
    pub sigma: f64,
    pub generations: u64,
    #[serde(default)]
    pub init_seed: u64,
    #[serde(default = "RunSection::default_episode_seeds")]
    pub episode_seeds: EpisodeSeedPolicy,
    /// Write a checkpoint every this many generations; 0 writes only the final one.
    #[serde(default)]
    pub checkpoint_interval: u64,
}

impl RunSection {
    fn default_episode_seeds() -> EpisodeSeedPolicy {
        EpisodeSeedPolicy::PerSample
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "NoiseSection::default_length")]
    pub length: usize,
}

impl NoiseSection {
    fn default_length() -> usize {
        DEFAULT_TABLE_LEN
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { seed: 0, length: DEFAULT_TABLE_LEN }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Locomotion,
    QuadraticBowl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub kind: TaskKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Default output directory when none is given on the command line.
    #[serde(default)]
    pub dir: Option<String>,
    /// Record measured seconds per generation; when false the column is 0 so
    /// that records are byte-reproducible.
    #[serde(default)]
    pub record_wall_clock: bool,
    /// Dump the final center's trajectory to `center_trajectory.csv`.
    #[serde(default)]
    pub dump_trajectory: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    pub run: RunSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub task: TaskSection,
    #[serde(default)]
    pub environment: Option<EnvironmentSpec>,
    #[serde(default)]
    pub policy: Option<PolicySpec>,
    #[serde(default)]
    pub bowl: Option<BowlSpec>,
    #[serde(default)]
    pub optimizer: AdamConfig,
    #[serde(default)]
    pub output: OutputSection,
}

/// The concrete objective a config describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Locomotion(Locomotion),
    QuadraticBowl(QuadraticBowl),
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "format_version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let run = &self.run;
        if run.population < 2 || run.population % 2 == 1 {
            return Err(Error::Config(format!(
                "run.population must be even and at least 2, got {}",
                run.population
            )));
        }
        if !(run.sigma > 0.0 && run.sigma.is_finite()) {
            return Err(Error::Config(format!("run.sigma must be positive, got {}", run.sigma)));
        }
        if run.generations == 0 {
            return Err(Error::Config("run.generations must be at least 1".into()));
        }
        if self.noise.length == 0 {
            return Err(Error::Config("noise.length must be positive".into()));
        }
        self.optimizer.validate()?;
        let task = self.task()?;
        let dim = match &task {
            Task::Locomotion(l) => l.policy.param_count(),
            Task::QuadraticBowl(b) => b.target.len(),
        };
        if self.noise.length < dim + run.population {
            return Err(Error::Config(format!(
                "noise.length {} is too short for {dim} parameters and population {}",
                self.noise.length, run.population
            )));
        }
        Ok(())
    }

    pub fn task(&self) -> Result<Task> {
        match self.task.kind {
            TaskKind::Locomotion => {
                let env = self
                    .environment
                    .clone()
                    .ok_or_else(|| Error::Config("[environment] section is required for locomotion".into()))?;
                let policy = self
                    .policy
                    .clone()
                    .ok_or_else(|| Error::Config("[policy] section is required for locomotion".into()))?;
                Ok(Task::Locomotion(Locomotion::new(env, policy)?))
            }
            TaskKind::QuadraticBowl => {
                let bowl = self
                    .bowl
                    .as_ref()
                    .ok_or_else(|| Error::Config("[bowl] section is required for quadratic_bowl".into()))?;
                Ok(Task::QuadraticBowl(QuadraticBowl::from_spec(bowl)?))
            }
        }
    }

    /// SHA-256 over everything that shapes the trajectory of a run, plus the run seed.
    ///
    /// Generation count, checkpoint interval and output settings are excluded so a
    /// run can be resumed with a longer horizon.
    pub fn digest(&self, run_seed: u64) -> [u8; 32] {
        let mut view = self.clone();
        view.run.generations = 0;
        view.run.checkpoint_interval = 0;
        view.output = OutputSection::default();
        let mut h = Sha256::new();
        h.update(view.to_toml_string().as_bytes());
        h.update(run_seed.to_le_bytes());
        h.finalize().into()
    }
}
