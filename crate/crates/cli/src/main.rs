//! `czforge` command-line front end.
//!
//! Exit status: 0 on success, 1 for usage or parameter errors, 2 for bad
//! input data, 3 for filesystem errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use czforge::error::ErrorKind;
use czforge::Workers;

#[derive(Parser, Debug)]
#[command(name = "czforge", version, about = "Construction-zone detection dataset forge and evaluator")]
pub struct Cli {
    /// Worker threads (0 = all cores, 1 = sequential)
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Output directory
    #[arg(long, short)]
    pub out: PathBuf,
    /// Replace a non-empty output directory
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct DriftArgs {
    /// Named pipeline (light_drift, heavy_drift, geometric)
    #[arg(long, conflicts_with = "pipeline")]
    pub preset: Option<String>,
    /// Pipeline description file
    #[arg(long)]
    pub pipeline: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render synthetic scenes with exact labels
    Gen {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, short = 'n', default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 640)]
        width: u32,
        #[arg(long, default_value_t = 640)]
        height: u32,
        /// Apply a drift pipeline to every scene
        #[command(flatten)]
        drift: DriftArgs,
    },
    /// Apply an augmentation pipeline to a flat dataset
    Augment {
        /// Flat dataset (images/, labels/)
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArgs,
        #[command(flatten)]
        drift: DriftArgs,
        /// Override the pipeline's master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset config supplying class names
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Stratified train/val/test split of a flat dataset
    Split {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArgs,
        /// Train,val,test fractions
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write train.txt, val.txt and test.txt image lists instead of copying files
        #[arg(long)]
        dry_run: bool,
    },
    /// Convert a CVAT XML export to YOLO labels
    Convert {
        /// CVAT for images 1.1 XML file
        #[arg(long)]
        cvat: PathBuf,
        /// Directory holding the annotated images, copied alongside the labels
        #[arg(long)]
        images: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Drop images without objects or with an object too close to the camera
    Filter {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArgs,
        /// Largest allowed box area as a fraction of the frame
        #[arg(long, default_value_t = 0.5)]
        max_area: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Object counts per class and split
    Stats {
        /// Dataset config file
        #[arg(long)]
        config: PathBuf,
        /// Print JSON instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Score prediction files against ground truth
    Eval {
        /// Dataset config file
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        /// Directory of `<stem>.txt` prediction files
        #[arg(long)]
        pred: PathBuf,
        /// Directory for report.json, report.csv and PR curves
        #[command(flatten)]
        out: OutArgs,
        /// Confidence threshold
        #[arg(long, default_value_t = 0.2)]
        conf: f64,
        /// IoU thresholds as lo:step:hi or a comma list
        #[arg(long, default_value = "0.5:0.05:0.95")]
        iou: String,
    },
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => 1,
        ErrorKind::Data => 2,
        ErrorKind::Io => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let workers = Workers::from_count(cli.workers);
    match commands::run(cli.command, workers) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("czforge: error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
