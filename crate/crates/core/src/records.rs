//! CSV outputs: per-generation records and the final population's behaviors.
//!
//! Reals are written with Rust's shortest round-trip formatting, so reading a
//! file back yields the exact values that were written.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{BehaviorDescriptor, GenerationRecord, SampleEvaluation};

pub const RECORD_COLUMNS: [&str; 8] = [
    "generation",
    "mean_fitness",
    "max_fitness",
    "center_fitness",
    "mean_evolvability",
    "bc_mean_x",
    "bc_mean_y",
    "wall_clock_seconds",
];

pub const BEHAVIOR_COLUMNS: [&str; 4] = ["sample_index", "fitness", "final_x", "final_y"];

pub struct RecordsWriter {
    inner: csv::Writer<BufWriter<File>>,
}

impl RecordsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        inner.write_record(RECORD_COLUMNS)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &GenerationRecord) -> Result<()> {
        self.inner.write_record([
            r.generation.to_string(),
            r.mean_fitness.to_string(),
            r.max_fitness.to_string(),
            r.center_fitness.to_string(),
            r.mean_evolvability.to_string(),
            r.bc_mean.get_or_zero(0).to_string(),
            r.bc_mean.get_or_zero(1).to_string(),
            r.wall_clock_seconds.to_string(),
        ])?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    row.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Io(format!("{}: bad value in column {i} of row {row:?}", path.display())))
}

fn check_header(rdr: &mut csv::Reader<File>, expected: &[&str], path: &Path) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Io(format!("{}: unexpected header {header:?}", path.display())));
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<GenerationRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    check_header(&mut rdr, &RECORD_COLUMNS, path)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        out.push(GenerationRecord {
            generation: parse(&row, 0, path)?,
            mean_fitness: parse(&row, 1, path)?,
            max_fitness: parse(&row, 2, path)?,
            center_fitness: parse(&row, 3, path)?,
            mean_evolvability: parse(&row, 4, path)?,
            bc_mean: BehaviorDescriptor::xy(parse(&row, 5, path)?, parse(&row, 6, path)?)?,
            wall_clock_seconds: parse(&row, 7, path)?,
        });
    }
    Ok(out)
}

pub fn write_behaviors(path: &Path, evals: &[SampleEvaluation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(BEHAVIOR_COLUMNS)?;
    for e in evals {
        w.write_record([
            e.sample_index.to_string(),
            e.fitness.to_string(),
            e.behavior.get_or_zero(0).to_string(),
            e.behavior.get_or_zero(1).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehaviorRow {
    pub sample_index: usize,
    pub fitness: f64,
    pub final_x: f64,
    pub final_y: f64,
}

pub fn read_behaviors(path: &Path) -> Result<Vec<BehaviorRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    check_header(&mut rdr, &BEHAVIOR_COLUMNS, path)?;
    rdr.records()
        .map(|row| {
            let row = row?;
            Ok(BehaviorRow {
                sample_index: parse(&row, 0, path)?,
                fitness: parse(&row, 1, path)?,
                final_x: parse(&row, 2, path)?,
                final_y: parse(&row, 3, path)?,
            })
        })
        .collect()
}
