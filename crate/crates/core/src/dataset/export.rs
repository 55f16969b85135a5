//! Output tree: `<out>/<split>/<label>/<stem>.png`, plus `manifest.tsv` and
//! `report.json` at the root.
//!
//! 8-bit exports are written as 8-bit PNG. Normalized exports are written as
//! 16-bit PNG holding `round(v * 65535)`, so 0 and 1 stay exact.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{
    occlude_dataset, Dataset, DatasetError, DatasetManifest, EmotionLabel, ExportPixels, OccludedImage,
    OcclusionOptions, RunReport, Split, Status, Variant,
};
use crate::geometry::HeadsetSpec;
use crate::image_buffer::ImageBuffer;
use crate::landmark_io::LandmarkSet;
use crate::raster::FillStyle;

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const REPORT_FILE: &str = "report.json";

const IMAGE_EXTENSIONS: [&str; 5] = ["png", "jpg", "jpeg", "bmp", "tif"];

/// File stem for an image id: path separators become `_` and a known image
/// extension is dropped.
pub fn output_stem(image_id: &str) -> String {
    let flat: String = image_id
        .chars()
        .map(|c| if c == '/' || c == '\\' { '_' } else { c })
        .collect();
    match flat.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() && IMAGE_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()) => {
            stem.to_string()
        }
        _ => flat,
    }
}

pub fn save_png(path: &Path, pixels: &ExportPixels) -> Result<(), DatasetError> {
    let encode = |e: image::ImageError| DatasetError::Encode {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let (w, h, ch) = pixels.dimensions();
    let result = match (pixels, ch) {
        (ExportPixels::U8(img), 1) => image::GrayImage::from_raw(w, h, img.as_slice().to_vec())
            .expect("shape")
            .save_with_format(path, image::ImageFormat::Png),
        (ExportPixels::U8(img), _) => image::RgbImage::from_raw(w, h, img.as_slice().to_vec())
            .expect("shape")
            .save_with_format(path, image::ImageFormat::Png),
        (ExportPixels::F32(img), c) => {
            let data: Vec<u16> = img
                .as_slice()
                .iter()
                .map(|&v| (v as f64 * 65535.0).round() as u16)
                .collect();
            if c == 1 {
                image::ImageBuffer::<image::Luma<u16>, _>::from_raw(w, h, data)
                    .expect("shape")
                    .save_with_format(path, image::ImageFormat::Png)
            } else {
                image::ImageBuffer::<image::Rgb<u16>, _>::from_raw(w, h, data)
                    .expect("shape")
                    .save_with_format(path, image::ImageFormat::Png)
            }
        }
    };
    match result {
        Ok(()) => Ok(()),
        Err(image::ImageError::IoError(e)) => Err(DatasetError::io(path, e)),
        Err(e) => Err(encode(e)),
    }
}

/// Decodes an image file to 8-bit gray (gray sources) or RGB (everything else).
pub fn load_image_file(path: &Path) -> Result<ImageBuffer<u8>, DatasetError> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => DatasetError::io(path, io),
        other => DatasetError::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    let (w, h) = (img.width(), img.height());
    let gray = matches!(
        img.color(),
        image::ColorType::L8 | image::ColorType::La8 | image::ColorType::L16 | image::ColorType::La16
    );
    let built = if gray {
        ImageBuffer::from_vec(w, h, 1, img.to_luma8().into_raw())
    } else {
        ImageBuffer::from_vec(w, h, 3, img.to_rgb8().into_raw())
    };
    built.map_err(|e| DatasetError::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Sink writing each image under its split/label directory.
#[derive(Debug, Clone)]
pub struct ExportWriter {
    root: PathBuf,
}

impl ExportWriter {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn path_for(&self, img: &OccludedImage) -> PathBuf {
        let stem = output_stem(&img.image_id);
        let name = match img.variant {
            Variant::Original => format!("{stem}.png"),
            Variant::Flipped => format!("{stem}_hflip.png"),
        };
        self.root.join(img.split.name()).join(img.label.name()).join(name)
    }

    pub fn write(&self, img: &OccludedImage) -> Result<PathBuf, DatasetError> {
        let path = self.path_for(img);
        let dir = path.parent().expect("nested path");
        fs::create_dir_all(dir).map_err(|e| DatasetError::io(dir, e))?;
        save_png(&path, &img.pixels)?;
        Ok(path)
    }
}

/// Tab-separated `image_id label split status occluded_fraction`, with a
/// header row. The fraction column is empty unless the entry was occluded.
pub fn write_manifest_tsv(path: &Path, manifest: &DatasetManifest) -> Result<(), DatasetError> {
    let mut out = String::from("image_id\tlabel\tsplit\tstatus\toccluded_fraction\n");
    for e in &manifest.entries {
        let fraction = e.occluded_fraction().map(|f| f.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            e.image_id,
            e.label,
            e.split,
            e.status(),
            fraction
        ));
    }
    fs::write(path, out).map_err(|e| DatasetError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub image_id: String,
    pub label: EmotionLabel,
    pub split: Split,
    pub status: Status,
    pub occluded_fraction: Option<f64>,
}

pub fn read_manifest_tsv(path: &Path) -> Result<Vec<ManifestRow>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let malformed = |message: String| DatasetError::MalformedLine {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        let [id, label, split, status, fraction] = cols[..] else {
            return Err(malformed(format!("expected 5 columns, found {}", cols.len())));
        };
        rows.push(ManifestRow {
            image_id: id.to_string(),
            label: label.parse().map_err(malformed)?,
            split: split.parse().map_err(malformed)?,
            status: status.parse().map_err(malformed)?,
            occluded_fraction: if fraction.is_empty() {
                None
            } else {
                Some(
                    fraction
                        .parse()
                        .map_err(|_| malformed(format!("bad fraction {fraction:?}")))?,
                )
            },
        });
    }
    Ok(rows)
}

pub fn write_report(path: &Path, report: &RunReport) -> Result<(), DatasetError> {
    let mut f = fs::File::create(path).map_err(|e| DatasetError::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, report).expect("report serializes");
    f.write_all(b"\n").map_err(|e| DatasetError::io(path, e))
}

/// Runs the occlusion pipeline and writes the complete output tree.
pub fn export_dataset(
    dataset: &Dataset,
    landmarks: &LandmarkSet<f64>,
    spec: &HeadsetSpec<f64>,
    fill: &FillStyle<u8>,
    options: &OcclusionOptions,
    out_dir: &Path,
) -> Result<(DatasetManifest, RunReport), DatasetError> {
    fs::create_dir_all(out_dir).map_err(|e| DatasetError::io(out_dir, e))?;
    let writer = ExportWriter::new(out_dir);
    let (manifest, report) = occlude_dataset(dataset, landmarks, spec, fill, options, |img| {
        writer.write(img).map(|_| ())
    })?;
    write_manifest_tsv(&out_dir.join(MANIFEST_FILE), &manifest)?;
    write_report(&out_dir.join(REPORT_FILE), &report)?;
    Ok((manifest, report))
}
