//! FER dataset adapters, the preprocessing chain and the batch occlusion runner.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image_buffer::ImageBuffer;

mod affectnet;
mod export;
mod ferplus;
mod preprocess;
mod rafdb;
mod report;
mod runner;

pub use affectnet::{load_affectnet, AffectNetCode, AffectNetLayout};
pub use export::{
    export_dataset, load_image_file, output_stem, read_manifest_tsv, save_png, write_manifest_tsv, write_report,
    ExportWriter, ManifestRow, MANIFEST_FILE, REPORT_FILE,
};
pub use ferplus::{load_ferplus, load_ferplus_from_readers, FERPLUS_PIXELS, FERPLUS_SIDE};
pub use preprocess::{hflip, minmax_normalize, mirror_landmarks, resize_bilinear, MIRROR_PERMUTATION};
pub use rafdb::load_rafdb;
pub use report::{ConfigSnapshot, FractionStats, RunReport, HISTOGRAM_BINS};
pub use runner::{
    finish_image, occlude_dataset, occlude_dataset_in_memory, occlude_image, ExportPixels, OccludedImage,
    OcclusionOptions, Variant,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: missing column {column:?}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}:{line}: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("pixel CSV has {pixels} rows but label CSV has {labels}")]
    RowMisalignment { pixels: usize, labels: usize },
    #[error("row {row}: bad pixel string: {message}")]
    BadPixelString { row: usize, message: String },
    #[error("{path}:{line}: unknown label code {code:?}")]
    UnknownLabelCode { path: PathBuf, line: usize, code: String },
    #[error("missing image file {0}")]
    MissingImageFile(PathBuf),
    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("cannot encode {path}: {message}")]
    Encode { path: PathBuf, message: String },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}

impl DatasetError {
    pub(crate) fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }
}

/// Emotion classes, in FER+ vote-column order. RAF-DB has no `Contempt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Neutral,
    Happiness,
    Surprise,
    Sadness,
    Anger,
    Disgust,
    Fear,
    Contempt,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 8] = [
        Self::Neutral,
        Self::Happiness,
        Self::Surprise,
        Self::Sadness,
        Self::Anger,
        Self::Disgust,
        Self::Fear,
        Self::Contempt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Neutral => "neutral",
            Self::Happiness => "happiness",
            Self::Surprise => "surprise",
            Self::Sadness => "sadness",
            Self::Anger => "anger",
            Self::Disgust => "disgust",
            Self::Fear => "fear",
            Self::Contempt => "contempt",
        }
    }

    /// Whether the label exists in a dataset with `classes` basic emotions (7 or 8).
    pub fn valid_for(self, classes: usize) -> bool {
        classes >= 8 || self != Self::Contempt
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmotionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown emotion {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Val => "val",
            Self::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" | "training" => Ok(Self::Train),
            "val" | "valid" | "validation" => Ok(Self::Val),
            "test" => Ok(Self::Test),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pending,
    Occluded,
    SkippedNoLandmarks,
    FailedDegenerate,
}

impl Status {
    pub const TERMINAL: [Status; 3] = [Self::Occluded, Self::SkippedNoLandmarks, Self::FailedDegenerate];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pending => "pending",
            Self::Occluded => "occluded",
            Self::SkippedNoLandmarks => "skipped_no_landmarks",
            Self::FailedDegenerate => "failed_degenerate",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Self::Pending,
            Self::Occluded,
            Self::SkippedNoLandmarks,
            Self::FailedDegenerate,
        ]
        .into_iter()
        .find(|st| st.name() == s)
        .ok_or_else(|| format!("unknown status {s:?}"))
    }
}

/// Where an entry's pixels come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceLocator {
    /// 0-based data row of a CSV file.
    CsvRow(usize),
    File(PathBuf),
}

impl fmt::Display for SourceLocator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CsvRow(r) => write!(f, "row:{r}"),
            Self::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub image_id: String,
    pub source: SourceLocator,
    pub label: EmotionLabel,
    pub split: Split,
    status: Status,
    occluded_fraction: Option<f64>,
}

impl ManifestEntry {
    pub fn new(image_id: impl Into<String>, source: SourceLocator, label: EmotionLabel, split: Split) -> Self {
        Self {
            image_id: image_id.into(),
            source,
            label,
            split,
            status: Status::Pending,
            occluded_fraction: None,
        }
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn occluded_fraction(&self) -> Option<f64> {
        self.occluded_fraction
    }

    /// Moves a pending entry to a terminal status. Any other transition is
    /// refused.
    pub fn finish(&mut self, status: Status, occluded_fraction: Option<f64>) -> Result<(), Status> {
        if self.status != Status::Pending || status == Status::Pending {
            return Err(self.status);
        }
        self.status = status;
        self.occluded_fraction = occluded_fraction;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Rows dropped by the adapter, keyed by reason (e.g. `unknown`, `not_face`).
    pub excluded: BTreeMap<String, usize>,
    /// Per-split row counts as found in the source files, before exclusion.
    pub source_split_counts: BTreeMap<Split, usize>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count_status(&self, status: Status) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    pub fn count_split(&self, split: Split) -> usize {
        self.entries.iter().filter(|e| e.split == split).count()
    }
}

#[derive(Debug, Clone)]
enum ImageSource {
    Memory(ImageBuffer<u8>),
    File(PathBuf),
}

/// A manifest plus access to each entry's pixels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    images: Vec<ImageSource>,
}

impl Dataset {
    /// In-memory dataset; `images[i]` belongs to `entries[i]`.
    pub fn from_memory(entries: Vec<ManifestEntry>, images: Vec<ImageBuffer<u8>>) -> Result<Self, DatasetError> {
        if entries.len() != images.len() {
            return Err(DatasetError::InvalidOptions(format!(
                "{} entries but {} images",
                entries.len(),
                images.len()
            )));
        }
        let mut manifest = DatasetManifest::default();
        for e in &entries {
            *manifest.source_split_counts.entry(e.split).or_default() += 1;
        }
        manifest.entries = entries;
        Ok(Self {
            manifest,
            images: images.into_iter().map(ImageSource::Memory).collect(),
        })
    }

    pub(crate) fn from_files(manifest: DatasetManifest, paths: Vec<PathBuf>) -> Self {
        debug_assert_eq!(manifest.entries.len(), paths.len());
        Self {
            manifest,
            images: paths.into_iter().map(ImageSource::File).collect(),
        }
    }

    pub(crate) fn from_parts(manifest: DatasetManifest, images: Vec<ImageBuffer<u8>>) -> Self {
        debug_assert_eq!(manifest.entries.len(), images.len());
        Self {
            manifest,
            images: images.into_iter().map(ImageSource::Memory).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.manifest.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.entries.is_empty()
    }

    /// Pixels of entry `index`, decoding from disk when file-backed.
    pub fn image(&self, index: usize) -> Result<Cow<'_, ImageBuffer<u8>>, DatasetError> {
        match &self.images[index] {
            ImageSource::Memory(img) => Ok(Cow::Borrowed(img)),
            ImageSource::File(path) => load_image_file(path).map(Cow::Owned),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_only_leaves_pending_once() {
        let mut e = ManifestEntry::new("a", SourceLocator::CsvRow(0), EmotionLabel::Fear, Split::Train);
        assert_eq!(e.status(), Status::Pending);
        assert_eq!(e.finish(Status::Pending, None), Err(Status::Pending));
        e.finish(Status::Occluded, Some(0.25)).unwrap();
        assert_eq!(e.finish(Status::FailedDegenerate, None), Err(Status::Occluded));
        assert_eq!(e.occluded_fraction(), Some(0.25));
    }

    #[test]
    fn names_round_trip() {
        for l in EmotionLabel::ALL {
            assert_eq!(l.name().parse::<EmotionLabel>().unwrap(), l);
        }
        for s in [Split::Train, Split::Val, Split::Test] {
            assert_eq!(s.name().parse::<Split>().unwrap(), s);
        }
        for s in [
            Status::Pending,
            Status::Occluded,
            Status::SkippedNoLandmarks,
            Status::FailedDegenerate,
        ] {
            assert_eq!(s.name().parse::<Status>().unwrap(), s);
        }
        assert!(!EmotionLabel::Contempt.valid_for(7));
        assert!(EmotionLabel::Contempt.valid_for(8));
    }
}
