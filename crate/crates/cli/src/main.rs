//! `reefscan` command-line front end.
//!
//! Exit status is 0 on success, 1 when the input data or a computation is rejected and
//! 2 for malformed command lines.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use reefscan::curation::{Preset, DEFAULT_MIN_SIDE_PX};
use reefscan::eval::Interpolation;
use reefscan::frames::DEFAULT_INTERVAL_S;

#[derive(Debug, Parser)]
#[command(
    name = "reefscan",
    version,
    about = "Reef-fish dataset curation and detection evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Dataset manifest (`manifest.jsonl`).
    #[arg(long, value_name = "MANIFEST")]
    gt: PathBuf,
    /// Family class map; defaults to `classes.txt` next to the manifest.
    #[arg(long)]
    classes: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConfigPreset {
    /// Every family.
    #[value(name = "A")]
    A,
    /// The ten most abundant families.
    #[value(name = "B")]
    B,
    /// Top ten families, boxes of at least 500 px².
    #[value(name = "C")]
    C,
}

impl From<ConfigPreset> for Preset {
    fn from(c: ConfigPreset) -> Self {
        match c {
            ConfigPreset::A => Preset::A,
            ConfigPreset::B => Preset::B,
            ConfigPreset::C => Preset::C,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-family instance histogram as CSV.
    Stats {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter a dataset into a new dataset directory.
    ///
    /// Steps run in the order top-k, keep, min-area, min-side. A dataset produced by an
    /// earlier `curate` carries its curation record, and further steps extend it.
    Curate {
        #[command(flatten)]
        data: DatasetArgs,
        /// Output directory; must not exist or be empty.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, ignore_case = true, conflicts_with_all = ["top_k", "keep", "min_area", "min_side"])]
        config: Option<ConfigPreset>,
        /// Keep the k most abundant families.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        top_k: Option<u32>,
        /// Keep these class ids, renumbered in the order given.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        keep: Option<Vec<u32>>,
        /// Drop boxes under this pixel area.
        #[arg(long, value_parser = non_negative)]
        min_area: Option<f64>,
        /// Drop boxes whose longer side is under this many pixels.
        #[arg(long, value_parser = non_negative)]
        min_side: Option<f64>,
    },
    /// Report boxes breaking the minimum-size annotation rule.
    Validate {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long, default_value_t = DEFAULT_MIN_SIDE_PX, value_parser = non_negative)]
        min_side: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded train/val/test or k-fold assignment.
    Split {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        seed: u64,
        /// Train, val and test fractions summing to 1.
        #[arg(long, value_delimiter = ',', num_args = 3, value_parser = non_negative, conflicts_with = "k_fold")]
        ratios: Option<Vec<f64>>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        k_fold: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frame timestamps for a transect video, plus optional extraction commands.
    PlanFrames {
        /// Video file name or id.
        #[arg(long)]
        video: String,
        #[arg(long, value_parser = positive)]
        duration: f64,
        #[arg(long, value_parser = positive)]
        fps: f64,
        #[arg(long, default_value_t = DEFAULT_INTERVAL_S, value_parser = positive)]
        interval: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Command template with `{video}`, `{timestamp}`, `{index}` and `{out}`.
        #[arg(long, requires = "commands")]
        template: Option<String>,
        /// Where the extraction commands are written, one per line.
        #[arg(long, requires = "template")]
        commands: Option<PathBuf>,
        #[arg(long, default_value = "frames")]
        frames_dir: String,
    },
    /// mAP, F1-optimal operating point and a comparison-table row for one model.
    Evaluate {
        #[command(flatten)]
        data: DatasetArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long, default_value = "model")]
        name: String,
        #[arg(long, default_value = "")]
        dataset_label: String,
        /// Report JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-family CSV.
        #[arg(long)]
        per_class: Option<PathBuf>,
    },
    /// Confidence-threshold sweep for macro F1.
    Sweep {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
        iou: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full sweep table as CSV.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Comparison table from evaluation reports, metrics JSON or comparison CSV files.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        text: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Predictions in JSON Lines.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    iou: f64,
    #[arg(long, default_value = "101-point", value_parser = parse_interpolation)]
    interpolation: Interpolation,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| {
        if v >= 0.0 {
            Ok(v)
        } else {
            Err("must be at least 0".into())
        }
    })
}

fn positive(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err("must be positive".into()) })
}

fn unit_interval(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| {
        if v > 0.0 && v <= 1.0 {
            Ok(v)
        } else {
            Err("must be in (0, 1]".into())
        }
    })
}

fn parse_interpolation(s: &str) -> Result<Interpolation, String> {
    s.parse().map_err(|e: reefscan::Error| e.to_string())
}

/// Checks that need more than one flag at a time.
fn check(cli: &Cli) -> Result<(), clap::Error> {
    if let Command::Split { ratios: Some(r), .. } = &cli.command {
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Cli::command().error(
                clap::error::ErrorKind::ValueValidation,
                format!("--ratios must sum to 1, got {sum}"),
            ));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = check(&cli) {
        e.exit();
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
