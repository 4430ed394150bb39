//! Per-generation mean and standard deviation across seeds.

use std::path::Path;

use qees::records::read_records;
use qees::{Error, GenerationRecord, Result};

/// Record columns that are aggregated, in output order.
pub const METRICS: [&str; 7] = [
    "mean_fitness",
    "max_fitness",
    "center_fitness",
    "mean_evolvability",
    "bc_mean_x",
    "bc_mean_y",
    "wall_clock_seconds",
];

pub fn metric_value(r: &GenerationRecord, metric: &str) -> Option<f64> {
    Some(match metric {
        "mean_fitness" => r.mean_fitness,
        "max_fitness" => r.max_fitness,
        "center_fitness" => r.center_fitness,
        "mean_evolvability" => r.mean_evolvability,
        "bc_mean_x" => r.bc_mean.get_or_zero(0),
        "bc_mean_y" => r.bc_mean.get_or_zero(1),
        "wall_clock_seconds" => r.wall_clock_seconds,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub generation: u64,
    pub seeds: usize,
    /// `(mean, std)` per entry of [`METRICS`].
    pub stats: Vec<(f64, f64)>,
}

impl AggregateRow {
    pub fn stat(&self, metric: &str) -> Option<(f64, f64)> {
        METRICS.iter().position(|m| *m == metric).map(|i| self.stats[i])
    }
}

/// Mean and population standard deviation (divides by the count).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregates over the generations every run reached.
pub fn aggregate(runs: &[Vec<GenerationRecord>]) -> Result<Vec<AggregateRow>> {
    if runs.is_empty() {
        return Err(Error::Config("nothing to aggregate".into()));
    }
    let common = runs.iter().map(Vec::len).min().unwrap_or(0);
    let mut rows = Vec::with_capacity(common);
    for g in 0..common {
        let generation = runs[0][g].generation;
        if runs.iter().any(|r| r[g].generation != generation) {
            return Err(Error::Io(format!("runs disagree on generation numbering at row {g}")));
        }
        let stats = METRICS
            .iter()
            .map(|m| {
                let vals: Vec<f64> = runs.iter().map(|r| metric_value(&r[g], m).unwrap_or(0.0)).collect();
                mean_std(&vals)
            })
            .collect();
        rows.push(AggregateRow { generation, seeds: runs.len(), stats });
    }
    Ok(rows)
}

pub fn header() -> Vec<String> {
    let mut h = vec!["generation".to_string(), "seeds".to_string()];
    for m in METRICS {
        h.push(format!("{m}_mean"));
        h.push(format!("{m}_std"));
    }
    h
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(header()).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        let mut rec = vec![r.generation.to_string(), r.seeds.to_string()];
        for (m, s) in &r.stats {
            rec.push(m.to_string());
            rec.push(s.to_string());
        }
        w.write_record(rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let expected = header();
    let found = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    if found.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Io(format!("{}: unexpected header", path.display())));
    }
    let bad = |row: usize| Error::Io(format!("{}: malformed row {row}", path.display()));
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let num = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(i));
        let generation = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad(i))?;
        let seeds = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad(i))?;
        let stats = (0..METRICS.len()).map(|k| Ok((num(2 + 2 * k)?, num(3 + 2 * k)?))).collect::<Result<_>>()?;
        rows.push(AggregateRow { generation, seeds, stats });
    }
    Ok(rows)
}

/// Reads `records.csv` from each run directory and aggregates them.
pub fn aggregate_dirs(dirs: &[std::path::PathBuf]) -> Result<Vec<AggregateRow>> {
    let runs = dirs
        .iter()
        .map(|d| read_records(&d.join(qees::runner::RECORDS_FILE)))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&runs)
}
