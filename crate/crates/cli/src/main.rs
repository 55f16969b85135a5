//! `vrocc`: VR headset occlusion for facial expression datasets.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, unreadable data, missing
//! landmark record), 2 usage or configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

#[derive(Parser)]
#[command(name = "vrocc", version, about = "Simulate VR headset occlusion on face datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Occlude a whole dataset and export it with manifest.tsv and report.json.
    Occlude(OccludeArgs),
    /// Draw the patch on one image next to the occluded result.
    Preview(PreviewArgs),
    /// Check landmark coverage and quality against a dataset manifest.
    Validate(ValidateArgs),
    /// Summarize a finished run from its report.json.
    Stats(StatsArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset adapter.
    #[arg(long, value_parser = ["ferplus", "rafdb", "affectnet"])]
    dataset: Option<String>,
    /// FER2013 pixel CSV (ferplus).
    #[arg(long)]
    pixels: Option<PathBuf>,
    /// FER+ vote CSV (ferplus).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Image directory (rafdb, affectnet).
    #[arg(long)]
    image_root: Option<PathBuf>,
    /// `<file> <code>` label list (rafdb).
    #[arg(long)]
    label_list: Option<PathBuf>,
    /// Manifest CSV (affectnet).
    #[arg(long)]
    manifest_csv: Option<PathBuf>,
    /// Column names, split and code table for the AffectNet CSV.
    #[arg(long)]
    affectnet_layout: Option<PathBuf>,
}

impl DatasetArgs {
    fn apply(&self, s: &mut Settings) {
        s.set("dataset", self.dataset.as_ref());
        for (key, value) in [
            ("pixels", &self.pixels),
            ("labels", &self.labels),
            ("image-root", &self.image_root),
            ("label-list", &self.label_list),
            ("manifest-csv", &self.manifest_csv),
            ("affectnet-layout", &self.affectnet_layout),
        ] {
            s.set(key, value.as_ref().map(|p| p.display()));
        }
    }
}

#[derive(Args)]
struct HeadsetArgs {
    /// Headset width in mm [default: 207.1].
    #[arg(long)]
    headset_width_mm: Option<f64>,
    /// Headset height in mm [default: 98.6].
    #[arg(long)]
    headset_height_mm: Option<f64>,
    /// Physical length of the temple-to-temple reference in mm [default: 152].
    #[arg(long)]
    head_breadth_mm: Option<f64>,
    /// Shift of the patch center towards the forehead in mm [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    vertical_offset_mm: Option<f64>,
    /// Gray level painted inside the patch [default: 0].
    #[arg(long)]
    fill: Option<u8>,
}

impl HeadsetArgs {
    fn apply(&self, s: &mut Settings) {
        s.set("headset-width-mm", self.headset_width_mm);
        s.set("headset-height-mm", self.headset_height_mm);
        s.set("head-breadth-mm", self.head_breadth_mm);
        s.set("vertical-offset-mm", self.vertical_offset_mm);
        s.set("fill", self.fill);
    }
}

#[derive(Args)]
struct OccludeArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Landmark sidecar (JSON lines).
    #[arg(long)]
    landmarks: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    headset: HeadsetArgs,
    /// Output size as WxH, or `native` [default: 224x224].
    #[arg(long)]
    size: Option<String>,
    /// Export 8-bit pixels instead of min-max normalized ones.
    #[arg(long)]
    no_normalize: bool,
    /// Skip the mirrored copies of training images.
    #[arg(long)]
    no_flip: bool,
    /// Keep gray sources single-channel.
    #[arg(long)]
    no_replicate: bool,
    /// Worker threads [default: available cores]. Outputs do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl OccludeArgs {
    fn settings(&self) -> Result<Settings, Failure> {
        let mut s = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        self.dataset.apply(&mut s);
        self.headset.apply(&mut s);
        s.set("landmarks", self.landmarks.as_ref().map(|p| p.display()));
        s.set("out", self.out.as_ref().map(|p| p.display()));
        s.set("size", self.size.as_ref());
        s.flag("no-normalize", self.no_normalize);
        s.flag("no-flip", self.no_flip);
        s.flag("no-replicate", self.no_replicate);
        s.set("workers", self.workers);
        Ok(s)
    }
}

#[derive(Args)]
struct PreviewArgs {
    /// Source image.
    #[arg(long)]
    image: PathBuf,
    /// Landmark sidecar holding a record for the image.
    #[arg(long)]
    landmarks: PathBuf,
    /// Record to use [default: the image file name].
    #[arg(long)]
    image_id: Option<String>,
    /// Output PNG.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    headset: HeadsetArgs,
}

#[derive(Args)]
struct ValidateArgs {
    /// Landmark sidecar to check.
    #[arg(long)]
    landmarks: PathBuf,
    /// manifest.tsv of an earlier run; alternative to the dataset flags.
    #[arg(long, conflicts_with = "dataset")]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    dataset: DatasetArgs,
}

#[derive(Args)]
struct StatsArgs {
    /// report.json of a finished run.
    #[arg(long)]
    report: PathBuf,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Occlude(args) => {
            let settings = args.settings()?;
            commands::occlude(&settings, args.print_config)
        }
        Command::Preview(args) => {
            let mut s = Settings::default();
            args.headset.apply(&mut s);
            commands::preview(&args.image, &args.landmarks, args.image_id.as_deref(), &args.out, &s)
        }
        Command::Validate(args) => {
            let mut s = Settings::default();
            args.dataset.apply(&mut s);
            commands::validate(&args.landmarks, args.manifest.as_deref(), &s)
        }
        Command::Stats(args) => commands::stats(&args.report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `vrocc help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
