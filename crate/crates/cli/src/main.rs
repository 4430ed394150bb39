use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qees_cli::commands::{self, PlotKind};

#[derive(Parser)]
#[command(name = "qees", version, about = "Quality-evolvability evolution strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Curve,
    Histogram,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seed of an experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Output directory (default: `output.dir` from the config, or runs/<config>/seed_<N>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Concurrent episodes; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Continue from a checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run several seeds and aggregate their records.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated, distinct seeds.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Render an SVG plot (plus a CSV of the plotted data).
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Record column to draw (curve only); repeatable.
        #[arg(long = "metric")]
        metrics: Vec<String>,
    },
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Run { config, seed, out, workers, resume } => {
            commands::cmd_run(&config, seed, out.as_deref(), workers, resume.as_deref())
        }
        Command::Sweep { config, seeds, out, workers } => commands::cmd_sweep(&config, &seeds, &out, workers),
        Command::Plot { input, kind, out, bins, metrics } => {
            let kind = match kind {
                Kind::Curve => PlotKind::Curve,
                Kind::Histogram => PlotKind::Histogram,
            };
            commands::cmd_plot(&input, kind, &out, bins, &metrics)
        }
    };
    ExitCode::from(code as u8)
}
