//! Landmark sidecar files: one JSON object per line,
//!
//! ```text
//! {"image_id":"a.png","box":[x,y,w,h],"points":[[x0,y0],...,[x67,y67]],"detector":"dlib-hog"}
//! ```
//!
//! `box` is optional. Coordinates are in the pixel frame of the stored image.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{eye_centers, Landmarks68, Point2, LANDMARK_COUNT, TEMPORAL_LEFT, TEMPORAL_RIGHT};
use crate::Scalar;

/// Eyes closer than this produce a warning.
pub const MIN_EYE_DISTANCE_PX: f64 = 2.0;
/// Temporal widths below this produce a warning.
pub const MIN_TEMPORAL_WIDTH_PX: f64 = 8.0;

#[derive(Debug, Error)]
pub enum LandmarkError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: expected {LANDMARK_COUNT} points, found {count}")]
    WrongPointCount { line: usize, count: usize },
    #[error("line {line}: point {point} has a non-finite coordinate")]
    NonFiniteCoordinate { line: usize, point: usize },
    #[error("line {line}: duplicate image_id {image_id:?}")]
    DuplicateImageId { line: usize, image_id: String },
}

impl LandmarkError {
    /// 1-based line number of a parse error.
    pub fn line(&self) -> Option<usize> {
        match self {
            Self::Io { .. } => None,
            Self::MalformedLine { line, .. }
            | Self::WrongPointCount { line, .. }
            | Self::NonFiniteCoordinate { line, .. }
            | Self::DuplicateImageId { line, .. } => Some(*line),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceBox<T> {
    pub x: T,
    pub y: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> FaceBox<T> {
    pub fn contains(&self, p: Point2<T>) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkRecord<T> {
    pub image_id: String,
    pub face_box: Option<FaceBox<T>>,
    pub points: Landmarks68<T>,
    /// Provenance tag of whatever produced the points.
    pub detector: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet<T> {
    records: BTreeMap<String, LandmarkRecord<T>>,
}

impl<T> Default for LandmarkSet<T> {
    fn default() -> Self {
        Self {
            records: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> LandmarkSet<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a record, handing it back if the id is already taken.
    pub fn insert(&mut self, record: LandmarkRecord<T>) -> Result<(), LandmarkRecord<T>> {
        if self.records.contains_key(&record.image_id) {
            return Err(record);
        }
        self.records.insert(record.image_id.clone(), record);
        Ok(())
    }

    pub fn get(&self, image_id: &str) -> Option<&LandmarkRecord<T>> {
        self.records.get(image_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in ascending `image_id` order.
    pub fn iter(&self) -> impl Iterator<Item = &LandmarkRecord<T>> {
        self.records.values()
    }
}

#[derive(Deserialize)]
struct RawRecord {
    image_id: String,
    #[serde(rename = "box", default)]
    face_box: Option<[f64; 4]>,
    points: Vec<[f64; 2]>,
    detector: String,
}

#[derive(Serialize)]
struct RawRecordOut<'a> {
    image_id: &'a str,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    face_box: Option<[f64; 4]>,
    points: Vec<[f64; 2]>,
    detector: &'a str,
}

fn parse_line<T: Scalar>(line: usize, text: &str) -> Result<LandmarkRecord<T>, LandmarkError> {
    let malformed = |message: String| LandmarkError::MalformedLine { line, message };
    let raw: RawRecord = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;

    if raw.image_id.is_empty() {
        return Err(malformed("empty image_id".into()));
    }
    if raw.points.len() != LANDMARK_COUNT {
        return Err(LandmarkError::WrongPointCount {
            line,
            count: raw.points.len(),
        });
    }
    if let Some(point) = raw.points.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(LandmarkError::NonFiniteCoordinate { line, point });
    }
    let face_box = match raw.face_box {
        None => None,
        Some([x, y, w, h]) => {
            if ![x, y, w, h].iter().all(|v| v.is_finite()) {
                return Err(malformed("non-finite box".into()));
            }
            if !(w > 0.0 && h > 0.0) {
                return Err(malformed("box width and height must be positive".into()));
            }
            Some(FaceBox {
                x: T::lit(x),
                y: T::lit(y),
                w: T::lit(w),
                h: T::lit(h),
            })
        }
    };
    let pts: Vec<Point2<T>> = raw
        .points
        .iter()
        .map(|&[x, y]| Point2::new(T::lit(x), T::lit(y)))
        .collect();
    // Finite f64 may still overflow a narrower scalar.
    let points = Landmarks68::new(&pts).map_err(|e| match e {
        crate::GeometryError::NonFinite { index } => LandmarkError::NonFiniteCoordinate { line, point: index },
        other => malformed(other.to_string()),
    })?;
    Ok(LandmarkRecord {
        image_id: raw.image_id,
        face_box,
        points,
        detector: raw.detector,
    })
}

/// Parses sidecar text. Every line must be a record; the first error wins.
pub fn parse_landmarks<T: Scalar>(text: &str) -> Result<LandmarkSet<T>, LandmarkError> {
    let mut set = LandmarkSet::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let record = parse_line::<T>(line, raw_line.trim_end_matches('\r'))?;
        set.insert(record).map_err(|r| LandmarkError::DuplicateImageId {
            line,
            image_id: r.image_id,
        })?;
    }
    Ok(set)
}

pub fn parse_landmark_file<T: Scalar>(path: impl AsRef<Path>) -> Result<LandmarkSet<T>, LandmarkError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LandmarkError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_landmarks(&text)
}

/// One sidecar line, without the trailing newline.
pub fn record_to_line<T: Scalar>(record: &LandmarkRecord<T>) -> String {
    let out = RawRecordOut {
        image_id: &record.image_id,
        face_box: record.face_box.map(|b| [b.x, b.y, b.w, b.h].map(Scalar::to_f64_lossy)),
        points: record
            .points
            .points()
            .iter()
            .map(|p| [p.x.to_f64_lossy(), p.y.to_f64_lossy()])
            .collect(),
        detector: &record.detector,
    };
    serde_json::to_string(&out).expect("finite record serializes")
}

/// Whole sidecar, sorted by `image_id`, newline-terminated.
pub fn to_sidecar<T: Scalar>(set: &LandmarkSet<T>) -> String {
    let mut s = String::new();
    for r in set.iter() {
        s.push_str(&record_to_line(r));
        s.push('\n');
    }
    s
}

pub fn write_landmark_file<T: Scalar>(path: impl AsRef<Path>, set: &LandmarkSet<T>) -> std::io::Result<()> {
    fs::write(path, to_sidecar(set))
}

#[derive(Debug, Clone, PartialEq)]
pub enum LandmarkWarning {
    EyesNearlyCoincident { distance: f64 },
    NarrowTemporalWidth { width: f64 },
    PointsOutsideBox { outside: usize },
}

impl fmt::Display for LandmarkWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EyesNearlyCoincident { distance } => {
                write!(f, "eye centers only {distance:.3} px apart")
            }
            Self::NarrowTemporalWidth { width } => {
                write!(f, "temporal width {width:.3} px, patch would be sub-pixel")
            }
            Self::PointsOutsideBox { outside } => {
                write!(f, "{outside} of {LANDMARK_COUNT} points lie outside the face box")
            }
        }
    }
}

/// Non-fatal checks run before occlusion. An empty list means clean.
pub fn validate_for_occlusion<T: Scalar>(record: &LandmarkRecord<T>) -> Vec<LandmarkWarning> {
    let mut warnings = Vec::new();
    let (left, right) = eye_centers(&record.points);
    let distance = left.distance(&right).to_f64_lossy();
    if distance < MIN_EYE_DISTANCE_PX {
        warnings.push(LandmarkWarning::EyesNearlyCoincident { distance });
    }
    let width = record
        .points
        .get(TEMPORAL_LEFT)
        .distance(&record.points.get(TEMPORAL_RIGHT))
        .to_f64_lossy();
    if width < MIN_TEMPORAL_WIDTH_PX {
        warnings.push(LandmarkWarning::NarrowTemporalWidth { width });
    }
    if let Some(b) = &record.face_box {
        let outside = record.points.points().iter().filter(|&&p| !b.contains(p)).count();
        if outside * 2 > LANDMARK_COUNT {
            warnings.push(LandmarkWarning::PointsOutsideBox { outside });
        }
    }
    warnings
}
