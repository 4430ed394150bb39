//! Subcommand drivers. Each returns the process exit code.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use qees::{run_experiment, Error, GenerationRecord, RunConfig, RunOptions};

use crate::aggregate;
use crate::plot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Curve,
    Histogram,
}

fn load_config(path: &Path) -> Result<RunConfig, i32> {
    RunConfig::load(path).map_err(|e| {
        eprintln!("config error: {e}");
        EXIT_CONFIG
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn progress_line(tag: &str, r: &GenerationRecord) {
    println!(
        "{tag}gen {:>5}  mean {:>12.6}  max {:>12.6}  center {:>12.6}  evo {:>12.6}",
        r.generation, r.mean_fitness, r.max_fitness, r.center_fitness, r.mean_evolvability
    );
}

fn run_one(cfg: &RunConfig, seed: u64, out: &Path, workers: usize, resume: Option<PathBuf>, tag: &str) -> qees::Result<()> {
    let mut cb = |r: &GenerationRecord| progress_line(tag, r);
    let opts = RunOptions { workers, resume, table: None, on_generation: Some(&mut cb) };
    let summary = run_experiment(cfg, seed, out, opts)?;
    println!(
        "{tag}done: {} generations, final center fitness {}, outputs in {}",
        summary.records.len(),
        summary.final_center_fitness,
        out.display()
    );
    Ok(())
}

fn default_out(cfg: &RunConfig, config_path: &Path, seed: u64) -> PathBuf {
    let base = cfg.output.dir.clone().map(PathBuf::from).unwrap_or_else(|| {
        let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        PathBuf::from("runs").join(stem)
    });
    base.join(format!("seed_{seed}"))
}

pub fn cmd_run(config_path: &Path, seed: u64, out: Option<&Path>, workers: usize, resume: Option<&Path>) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(r) = resume {
        if !r.is_file() {
            eprintln!("error: checkpoint {} not found", r.display());
            return EXIT_CONFIG;
        }
    }
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| default_out(&cfg, config_path, seed));
    match run_one(&cfg, seed, &out, workers, resume.map(Path::to_path_buf), "") {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `a,b,c`, rejecting empty lists and duplicates.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let mut seen = HashSet::new();
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let s: u64 = part.parse().map_err(|_| format!("invalid seed `{part}`"))?;
        if !seen.insert(s) {
            return Err(format!("duplicate seed {s}"));
        }
        seeds.push(s);
    }
    if seeds.is_empty() {
        return Err("at least one seed is required".into());
    }
    Ok(seeds)
}

pub fn cmd_sweep(config_path: &Path, seeds: &str, out: &Path, workers: usize) -> i32 {
    let seeds = match parse_seeds(seeds) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_CONFIG;
        }
    };
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return EXIT_CONFIG;
    }
    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_RUNTIME;
    }
    let mut done = Vec::new();
    let mut failed = Vec::new();
    for &seed in &seeds {
        let dir = out.join(format!("seed_{seed}"));
        match run_one(&cfg, seed, &dir, workers, None, &format!("[seed {seed}] ")) {
            Ok(()) => done.push(dir),
            Err(e) => {
                eprintln!("[seed {seed}] failed, skipping: {e}");
                failed.push(seed);
            }
        }
    }
    if !done.is_empty() {
        let agg_path = out.join(plot::AGGREGATE_FILE);
        match aggregate::aggregate_dirs(&done).and_then(|rows| aggregate::write_aggregate(&agg_path, &rows)) {
            Ok(()) => println!("aggregate over {} seed(s): {}", done.len(), agg_path.display()),
            Err(e) => {
                eprintln!("error: aggregation failed: {e}");
                return EXIT_RUNTIME;
            }
        }
    }
    if failed.is_empty() {
        EXIT_OK
    } else {
        eprintln!("{} of {} seeds failed: {failed:?}", failed.len(), seeds.len());
        EXIT_RUNTIME
    }
}

pub fn cmd_plot(input: &Path, kind: PlotKind, out: &Path, bins: usize, metrics: &[String]) -> i32 {
    if !input.is_dir() {
        eprintln!("error: input directory {} not found", input.display());
        return EXIT_CONFIG;
    }
    let result = plot::check_output(input, out).and_then(|()| match kind {
        PlotKind::Curve => {
            let rows = plot::load_curve_rows(input)?;
            let metrics: Vec<String> =
                if metrics.is_empty() { vec!["mean_fitness".to_string()] } else { metrics.to_vec() };
            let svg = plot::render_curve(&rows, &metrics)?;
            fs::write(out, svg)?;
            plot::write_curve_data(&plot::data_path(out), &rows, &metrics)
        }
        PlotKind::Histogram => {
            let points = plot::load_positions(input)?;
            let walls = plot::trap_segments(input)?;
            let extra: Vec<_> = walls.iter().flat_map(|&(a, b)| [a, b]).collect();
            let h = plot::Histogram2d::build(&points, bins, &extra)?;
            fs::write(out, plot::render_histogram(&h, &walls))?;
            plot::write_histogram_data(&plot::data_path(out), &h)
        }
    });
    match result {
        Ok(()) => {
            println!("wrote {} and {}", out.display(), plot::data_path(out).display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1,2, 3").unwrap(), vec![1, 2, 3]);
        assert!(parse_seeds("1,2,1").unwrap_err().contains("duplicate"));
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("x").is_err());
    }
}
