//! The generation loop shared by ES, Evolvability ES and Quality Evolvability ES.
//!
//! Each generation: draw mirrored perturbations, evaluate every offspring
//! (concurrently, results keyed by sample index), score evolvability, shape
//! weights for the configured mode, estimate the gradient, take an Adam step.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::checkpoint::Checkpoint;
use crate::config::{EpisodeSeedPolicy, RunConfig, Task};
use crate::error::{Error, Result};
use crate::estimator::{estimate_gradient, evolvability_scores, shaped_weights, GradientEstimate, ObjectiveMode};
use crate::optimizer::{AdamConfig, AdamState};
use crate::records;
use crate::sampling::{realize_into, sample_generation, NoiseTable, PerturbationRef};
use crate::seeds;
use crate::task::Evaluator;
use crate::types::{GenerationRecord, ParameterVector, SampleEvaluation, SearchDistribution};

/// The per-run knobs the loop itself needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub mode: ObjectiveMode,
    pub population: usize,
    pub sigma: f64,
    pub episode_seeds: EpisodeSeedPolicy,
    pub adam: AdamConfig,
    pub record_wall_clock: bool,
}

impl RunSettings {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            mode: cfg.run.mode,
            population: cfg.run.population,
            sigma: cfg.run.sigma,
            episode_seeds: cfg.run.episode_seeds,
            adam: cfg.optimizer,
            record_wall_clock: cfg.output.record_wall_clock,
        }
    }
}

/// Everything a generation produced, for inspection and tests.
#[derive(Debug, Clone)]
pub struct GenerationOutput {
    pub record: GenerationRecord,
    pub refs: Vec<PerturbationRef>,
    pub evaluations: Vec<SampleEvaluation>,
    pub evolvability: Vec<f64>,
    pub weights: Vec<f64>,
    pub gradient: GradientEstimate,
}

/// Mutable run context. Only mutated between evaluation fan-outs.
pub struct Runner<E: Evaluator> {
    settings: RunSettings,
    evaluator: E,
    table: Arc<NoiseTable>,
    run_seed: u64,
    digest: [u8; 32],
    center: ParameterVector,
    adam: AdamState,
    generation: u64,
    episodes_evaluated: u64,
    pool: rayon::ThreadPool,
    last_evaluations: Vec<SampleEvaluation>,
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

impl<E: Evaluator> Runner<E> {
    /// Starts a fresh run. `workers == 0` lets the pool pick a size.
    pub fn new(
        settings: RunSettings,
        evaluator: E,
        table: Arc<NoiseTable>,
        run_seed: u64,
        init_seed: u64,
        digest: [u8; 32],
        workers: usize,
    ) -> Result<Self> {
        let center = evaluator.initial_center(seeds::init_seed(run_seed, init_seed))?;
        let adam = AdamState::new(center.dim(), settings.adam);
        Self::assemble(settings, evaluator, table, run_seed, digest, center, adam, 0, 0, workers)
    }

    /// Continues a run from a checkpoint taken under the same configuration.
    pub fn resume(
        settings: RunSettings,
        evaluator: E,
        table: Arc<NoiseTable>,
        checkpoint: Checkpoint,
        digest: [u8; 32],
        workers: usize,
    ) -> Result<Self> {
        if checkpoint.config_digest != digest {
            return Err(Error::Checkpoint(
                "checkpoint was written under a different configuration or run seed".into(),
            ));
        }
        Self::assemble(
            settings,
            evaluator,
            table,
            checkpoint.run_seed,
            digest,
            checkpoint.center,
            checkpoint.adam,
            checkpoint.generation,
            checkpoint.episodes_evaluated,
            workers,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        settings: RunSettings,
        evaluator: E,
        table: Arc<NoiseTable>,
        run_seed: u64,
        digest: [u8; 32],
        center: ParameterVector,
        adam: AdamState,
        generation: u64,
        episodes_evaluated: u64,
        workers: usize,
    ) -> Result<Self> {
        if settings.population < 2 || settings.population % 2 == 1 {
            return Err(Error::OddPopulation(settings.population));
        }
        if !(settings.sigma > 0.0 && settings.sigma.is_finite()) {
            return Err(Error::InvalidSigma(settings.sigma));
        }
        let dim = evaluator.param_dim();
        if center.dim() != dim || adam.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: center.dim() });
        }
        if evaluator.bc_dim() == 0 {
            return Err(Error::Config("behavior descriptors must have at least one coordinate".into()));
        }
        if table.len() < dim + settings.population {
            return Err(Error::TableTooShort { table_len: table.len(), dim });
        }
        Ok(Self {
            settings,
            evaluator,
            table,
            run_seed,
            digest,
            center,
            adam,
            generation,
            episodes_evaluated,
            pool: build_pool(workers)?,
            last_evaluations: Vec::new(),
        })
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn center(&self) -> &ParameterVector {
        &self.center
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    pub fn evaluator(&self) -> &E {
        &self.evaluator
    }

    pub fn last_evaluations(&self) -> &[SampleEvaluation] {
        &self.last_evaluations
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            generation: self.generation,
            config_digest: self.digest,
            run_seed: self.run_seed,
            episodes_evaluated: self.episodes_evaluated,
            center: self.center.clone(),
            adam: self.adam.clone(),
        }
    }

    fn episode_seed(&self, sample_index: usize) -> u64 {
        let i = match self.settings.episode_seeds {
            EpisodeSeedPolicy::PerSample => sample_index as u64,
            EpisodeSeedPolicy::PerGeneration => 0,
        };
        seeds::episode_seed(self.run_seed, self.generation, i)
    }

    /// Evaluates every offspring; results come back in sample order whatever
    /// order the workers finish in.
    fn evaluate_offspring(
        &self,
        dist: &SearchDistribution,
        refs: &[PerturbationRef],
    ) -> Result<Vec<SampleEvaluation>> {
        let dim = dist.dim();
        let bc_dim = self.evaluator.bc_dim();
        let results: Vec<Result<SampleEvaluation>> = self.pool.install(|| {
            refs.par_iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut params = vec![0.0; dim];
                    realize_into(dist, r, &self.table, &mut params)?;
                    let out = self.evaluator.evaluate(&params, self.episode_seed(i))?;
                    if !out.fitness.is_finite() {
                        return Err(Error::NonFiniteValue(i));
                    }
                    if out.behavior.dim() != bc_dim {
                        return Err(Error::DimensionMismatch { expected: bc_dim, actual: out.behavior.dim() });
                    }
                    Ok(SampleEvaluation {
                        sample_index: i,
                        fitness: out.fitness,
                        behavior: out.behavior,
                        episode_steps: out.steps,
                    })
                })
                .collect()
        });
        results.into_iter().collect()
    }

    /// Runs one generation and returns its full intermediate state.
    pub fn run_generation_detailed(&mut self) -> Result<GenerationOutput> {
        let g = self.generation;
        self.step().map_err(|e| Error::Generation { generation: g, source: Box::new(e) })
    }

    pub fn run_generation(&mut self) -> Result<GenerationRecord> {
        Ok(self.run_generation_detailed()?.record)
    }

    fn step(&mut self) -> Result<GenerationOutput> {
        let started = Instant::now();
        let n = self.settings.population;
        let dist = SearchDistribution::new(self.center.clone(), self.settings.sigma)?;
        let gen_seed = seeds::generation_seed(self.run_seed, self.generation);
        let refs = sample_generation(&self.table, n, dist.dim(), gen_seed)?;

        let evaluations = self.evaluate_offspring(&dist, &refs)?;
        let behaviors: Vec<_> = evaluations.iter().map(|e| e.behavior.clone()).collect();
        let (evolvability, bc_mean) = evolvability_scores(&behaviors)?;
        let weights = shaped_weights(self.settings.mode, &evaluations, &evolvability)?;
        let gradient = estimate_gradient(&weights, &refs, &self.table, &dist)?;

        // Reported only; never feeds the update.
        let center_fitness = self.evaluator.evaluate_center(&self.center)?;

        let (center, adam) = self.adam.step(&self.center, &gradient)?;
        let elapsed = if self.settings.record_wall_clock { started.elapsed().as_secs_f64() } else { 0.0 };
        let record = GenerationRecord::aggregate(
            self.generation,
            &evaluations,
            &evolvability,
            bc_mean,
            center_fitness,
            elapsed,
        )?;

        self.center = center;
        self.adam = adam;
        self.generation += 1;
        self.episodes_evaluated += n as u64;
        self.last_evaluations = evaluations.clone();
        Ok(GenerationOutput { record, refs, evaluations, evolvability, weights, gradient })
    }
}

/// Options for [`run_experiment`] that do not belong in the config file.
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Worker threads for episode evaluation; 0 picks automatically.
    pub workers: usize,
    /// Checkpoint to continue from.
    pub resume: Option<PathBuf>,
    /// Prebuilt noise table matching `noise.seed` / `noise.length`.
    pub table: Option<Arc<NoiseTable>>,
    /// Called after every generation.
    pub on_generation: Option<&'a mut dyn FnMut(&GenerationRecord)>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<GenerationRecord>,
    pub final_checkpoint: Checkpoint,
    pub final_evaluations: Vec<SampleEvaluation>,
    /// Fitness of the final center (after the last update).
    pub final_center_fitness: f64,
    /// Final center's behavior descriptor from one evaluation.
    pub final_center_behavior: Vec<f64>,
}

pub const RECORDS_FILE: &str = "records.csv";
pub const BEHAVIORS_FILE: &str = "behaviors.csv";
pub const CONFIG_FILE: &str = "config.toml";
pub const FINAL_CHECKPOINT_FILE: &str = "checkpoint.qees";
pub const TRAJECTORY_FILE: &str = "center_trajectory.csv";

pub fn checkpoint_file_name(generation: u64) -> String {
    format!("checkpoint_g{generation:06}.qees")
}

/// Builds the noise table a config asks for.
pub fn build_table(cfg: &RunConfig) -> Result<Arc<NoiseTable>> {
    Ok(Arc::new(NoiseTable::build(cfg.noise.seed, cfg.noise.length)?))
}

/// Runs (or resumes) one seed of an experiment and writes its outputs to `out_dir`.
///
/// Outputs: `config.toml`, `records.csv`, `behaviors.csv` (last generation),
/// periodic `checkpoint_gNNNNNN.qees`, final `checkpoint.qees`, and
/// optionally `center_trajectory.csv`.
pub fn run_experiment(
    cfg: &RunConfig,
    run_seed: u64,
    out_dir: &Path,
    opts: RunOptions<'_>,
) -> Result<RunSummary> {
    cfg.validate()?;
    match cfg.task()? {
        Task::Locomotion(task) => drive(cfg, task, run_seed, out_dir, opts),
        Task::QuadraticBowl(task) => drive(cfg, task, run_seed, out_dir, opts),
    }
}

fn drive<E: Evaluator + CenterTrace>(
    cfg: &RunConfig,
    evaluator: E,
    run_seed: u64,
    out_dir: &Path,
    mut opts: RunOptions<'_>,
) -> Result<RunSummary> {
    fs::create_dir_all(out_dir)?;
    let table = match opts.table.take() {
        Some(t) if t.seed() == cfg.noise.seed && t.len() == cfg.noise.length => t,
        Some(_) => return Err(Error::Config("prebuilt noise table does not match [noise]".into())),
        None => build_table(cfg)?,
    };
    let settings = RunSettings::from_config(cfg);
    let digest = cfg.digest(run_seed);

    let mut runner = match &opts.resume {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            Runner::resume(settings, evaluator, table, ck, digest, opts.workers)?
        }
        None => Runner::new(settings, evaluator, table, run_seed, cfg.run.init_seed, digest, opts.workers)?,
    };
    let start_gen = runner.generation();

    fs::write(out_dir.join(CONFIG_FILE), cfg.to_toml_string())?;

    // On resume, keep the rows of generations that precede the checkpoint.
    let records_path = out_dir.join(RECORDS_FILE);
    let kept = if opts.resume.is_some() && records_path.exists() {
        records::read_records(&records_path)?.into_iter().filter(|r| r.generation < start_gen).collect()
    } else {
        Vec::new()
    };
    let mut rec_writer = records::RecordsWriter::create(&records_path)?;
    for r in &kept {
        rec_writer.write(r)?;
    }
    rec_writer.flush()?;

    let mut produced = Vec::new();
    while runner.generation() < cfg.run.generations {
        let record = runner.run_generation()?;
        rec_writer.write(&record)?;
        rec_writer.flush()?;
        if let Some(cb) = opts.on_generation.as_mut() {
            cb(&record);
        }
        let g = runner.generation();
        if cfg.run.checkpoint_interval > 0 && g % cfg.run.checkpoint_interval == 0 {
            runner.checkpoint().save(&out_dir.join(checkpoint_file_name(g)))?;
        }
        produced.push(record);
    }

    let final_checkpoint = runner.checkpoint();
    final_checkpoint.save(&out_dir.join(FINAL_CHECKPOINT_FILE))?;

    let behaviors_path = out_dir.join(BEHAVIORS_FILE);
    if !runner.last_evaluations().is_empty() || !behaviors_path.exists() {
        records::write_behaviors(&behaviors_path, runner.last_evaluations())?;
    }

    let center = runner.center().clone();
    let outcome = runner.evaluator().evaluate(&center, 0)?;
    let final_center_fitness = runner.evaluator().evaluate_center(&center)?;
    if cfg.output.dump_trajectory {
        runner.evaluator().write_center_trace(&center, &out_dir.join(TRAJECTORY_FILE))?;
    }

    let mut records = kept;
    records.extend(produced);
    Ok(RunSummary {
        records,
        final_checkpoint,
        final_evaluations: runner.last_evaluations().to_vec(),
        final_center_fitness,
        final_center_behavior: outcome.behavior.coords().to_vec(),
    })
}

/// Evaluators that can dump the center's path for inspection.
pub trait CenterTrace {
    fn write_center_trace(&self, center: &[f64], path: &Path) -> Result<()>;
}

impl CenterTrace for crate::task::Locomotion {
    fn write_center_trace(&self, center: &[f64], path: &Path) -> Result<()> {
        let ep = self.episode(center, None, true)?;
        let file = BufWriter::new(File::create(path)?);
        crate::environment::write_trajectory_csv(ep.trajectory.as_deref().unwrap_or(&[]), file)
    }
}

impl CenterTrace for crate::task::QuadraticBowl {
    fn write_center_trace(&self, center: &[f64], path: &Path) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        writeln!(f, "step,x,y,heading")?;
        writeln!(f, "0,{},{},0", center[0], center.get(1).copied().unwrap_or(0.0))?;
        Ok(())
    }
}
