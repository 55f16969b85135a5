use std::sync::Mutex;

use rayon::prelude::*;

use super::{
    hflip, minmax_normalize, mirror_landmarks, resize_bilinear, ConfigSnapshot, Dataset, DatasetError, DatasetManifest,
    EmotionLabel, RunReport, Split, Status,
};
use crate::geometry::{build_patch, GeometryError, HeadsetSpec, Landmarks68, OcclusionPatch};
use crate::image_buffer::ImageBuffer;
use crate::landmark_io::LandmarkSet;
use crate::raster::{fill_quad, FillStyle};

#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionOptions {
    /// `None` keeps the native resolution.
    pub output_size: Option<(u32, u32)>,
    pub normalize: bool,
    /// Adds a mirrored copy of every train-split image.
    pub flip: bool,
    /// Gray sources are exported as three identical channels.
    pub replicate_channels: bool,
    pub workers: usize,
}

impl Default for OcclusionOptions {
    fn default() -> Self {
        Self {
            output_size: Some((224, 224)),
            normalize: true,
            flip: true,
            replicate_channels: true,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Original,
    Flipped,
}

/// Exported pixels: 8-bit, or unit-interval floats when normalized.
#[derive(Debug, Clone, PartialEq)]
pub enum ExportPixels {
    U8(ImageBuffer<u8>),
    F32(ImageBuffer<f32>),
}

impl ExportPixels {
    pub fn dimensions(&self) -> (u32, u32, u8) {
        match self {
            Self::U8(i) => (i.width(), i.height(), i.channels()),
            Self::F32(i) => (i.width(), i.height(), i.channels()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccludedImage {
    /// Index into the manifest.
    pub index: usize,
    pub image_id: String,
    pub variant: Variant,
    pub split: Split,
    pub label: EmotionLabel,
    pub occluded_fraction: f64,
    pub pixels: ExportPixels,
}

/// Places and paints the patch at native resolution. Returns the occluded
/// image, the patch and the covered fraction.
pub fn occlude_image(
    img: &ImageBuffer<u8>,
    landmarks: &Landmarks68<f64>,
    spec: &HeadsetSpec<f64>,
    fill: &FillStyle<u8>,
) -> Result<(ImageBuffer<u8>, OcclusionPatch<f64>, f64), GeometryError> {
    let patch = build_patch(landmarks, spec)?;
    let mut out = img.clone();
    let covered = fill_quad(&mut out, &patch.corners, fill);
    let fraction = covered as f64 / (img.width() as usize * img.height() as usize) as f64;
    Ok((out, patch, fraction))
}

/// Resize, channel replication and normalization, each as configured.
pub fn finish_image(img: ImageBuffer<u8>, options: &OcclusionOptions) -> ExportPixels {
    let mut img = match options.output_size {
        Some((w, h)) if (w, h) != (img.width(), img.height()) => resize_bilinear(&img, w, h),
        _ => img,
    };
    if options.replicate_channels && img.channels() == 1 {
        img = img.to_three_channel();
    }
    if options.normalize {
        ExportPixels::F32(minmax_normalize(&img))
    } else {
        ExportPixels::U8(img)
    }
}

struct Outcome {
    status: Status,
    fraction: Option<f64>,
    images: Vec<OccludedImage>,
}

fn process_entry(
    dataset: &Dataset,
    index: usize,
    landmarks: &LandmarkSet<f64>,
    spec: &HeadsetSpec<f64>,
    fill: &FillStyle<u8>,
    options: &OcclusionOptions,
) -> Result<Outcome, DatasetError> {
    let entry = &dataset.manifest.entries[index];
    let Some(record) = landmarks.get(&entry.image_id) else {
        return Ok(Outcome {
            status: Status::SkippedNoLandmarks,
            fraction: None,
            images: Vec::new(),
        });
    };
    let source = dataset.image(index)?;
    let (occluded, _, fraction) = match occlude_image(&source, &record.points, spec, fill) {
        Ok(v) => v,
        Err(_) => {
            return Ok(Outcome {
                status: Status::FailedDegenerate,
                fraction: None,
                images: Vec::new(),
            })
        }
    };
    let make = |variant, occluded_fraction, img| OccludedImage {
        index,
        image_id: entry.image_id.clone(),
        variant,
        split: entry.split,
        label: entry.label,
        occluded_fraction,
        pixels: finish_image(img, options),
    };
    let mut images = vec![make(Variant::Original, fraction, occluded)];

    if options.flip && entry.split == Split::Train {
        let mirrored = mirror_landmarks(&record.points, source.width());
        // A mirror of valid geometry is valid geometry.
        if let Ok((flipped, _, f)) = occlude_image(&hflip(&source), &mirrored, spec, fill) {
            images.push(make(Variant::Flipped, f, flipped));
        }
    }
    Ok(Outcome {
        status: Status::Occluded,
        fraction: Some(fraction),
        images,
    })
}

/// Occludes every manifest entry and hands each output image to `sink`.
///
/// Per-image geometric failures are recorded in the returned manifest; I/O
/// errors (from loading or from the sink) abort the run. Results do not
/// depend on `options.workers`.
pub fn occlude_dataset<F>(
    dataset: &Dataset,
    landmarks: &LandmarkSet<f64>,
    spec: &HeadsetSpec<f64>,
    fill: &FillStyle<u8>,
    options: &OcclusionOptions,
    sink: F,
) -> Result<(DatasetManifest, RunReport), DatasetError>
where
    F: Fn(&OccludedImage) -> Result<(), DatasetError> + Sync,
{
    if options.workers == 0 {
        return Err(DatasetError::InvalidOptions("workers must be at least 1".into()));
    }
    if let Some((w, h)) = options.output_size {
        if w == 0 || h == 0 {
            return Err(DatasetError::InvalidOptions(format!("output size {w}x{h}")));
        }
    }
    spec.validate()
        .map_err(|e| DatasetError::InvalidOptions(e.to_string()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| DatasetError::InvalidOptions(e.to_string()))?;

    let outcomes: Vec<(Status, Option<f64>, usize, usize)> = pool.install(|| {
        (0..dataset.len())
            .into_par_iter()
            .map(|i| {
                let out = process_entry(dataset, i, landmarks, spec, fill, options)?;
                for img in &out.images {
                    sink(img)?;
                }
                let flipped = out.images.iter().filter(|i| i.variant == Variant::Flipped).count();
                Ok((out.status, out.fraction, out.images.len(), flipped))
            })
            .collect::<Result<Vec<_>, DatasetError>>()
    })?;

    let mut manifest = dataset.manifest.clone();
    let (mut exported, mut augmented) = (0, 0);
    for (entry, (status, fraction, n, flipped)) in manifest.entries.iter_mut().zip(outcomes) {
        entry
            .finish(status, fraction)
            .map_err(|s| DatasetError::InvalidOptions(format!("entry {} already {s}", entry.image_id)))?;
        exported += n;
        augmented += flipped;
    }
    let config = ConfigSnapshot {
        headset: *spec,
        fill: fill.value,
        output_size: options.output_size.map(|(w, h)| [w, h]),
        normalize: options.normalize,
        flip: options.flip,
        replicate_channels: options.replicate_channels,
    };
    let report = RunReport::from_manifest(&manifest, exported, augmented, config);
    Ok((manifest, report))
}

/// [`occlude_dataset`] collecting images in manifest order, originals before
/// their flipped copies.
pub fn occlude_dataset_in_memory(
    dataset: &Dataset,
    landmarks: &LandmarkSet<f64>,
    spec: &HeadsetSpec<f64>,
    fill: &FillStyle<u8>,
    options: &OcclusionOptions,
) -> Result<(Vec<OccludedImage>, DatasetManifest, RunReport), DatasetError> {
    let collected = Mutex::new(Vec::new());
    let (manifest, report) = occlude_dataset(dataset, landmarks, spec, fill, options, |img| {
        collected.lock().expect("collector poisoned").push(img.clone());
        Ok(())
    })?;
    let mut images = collected.into_inner().expect("collector poisoned");
    images.sort_by_key(|i| (i.index, i.variant));
    Ok((images, manifest, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ManifestEntry, SourceLocator};
    use crate::geometry::Point2;
    use crate::landmark_io::LandmarkRecord;
    use crate::synthetic::{frontal_face, random_image};
    use rand::SeedableRng;

    fn fixture(n: usize, with_landmarks: usize, split: Split) -> (Dataset, LandmarkSet<f64>) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let mut entries = Vec::new();
        let mut images = Vec::new();
        let mut set = LandmarkSet::new();
        for i in 0..n {
            let id = format!("img{i}.png");
            entries.push(ManifestEntry::new(
                &id,
                SourceLocator::CsvRow(i),
                EmotionLabel::ALL[i % 8],
                split,
            ));
            images.push(random_image(&mut rng, 48, 48, 1));
            if i < with_landmarks {
                set.insert(LandmarkRecord {
                    image_id: id,
                    face_box: None,
                    points: frontal_face(Point2::new(24.0 + i as f64 * 0.3, 20.0), 16.0, 0.05 * i as f64),
                    detector: "synthetic".into(),
                })
                .unwrap();
            }
        }
        (Dataset::from_memory(entries, images).unwrap(), set)
    }

    #[test]
    fn bookkeeping() {
        let (ds, lm) = fixture(3, 2, Split::Test);
        let (imgs, manifest, report) = occlude_dataset_in_memory(
            &ds,
            &lm,
            &HeadsetSpec::default(),
            &FillStyle::default(),
            &OcclusionOptions::default(),
        )
        .unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(report.status_count(Status::Occluded), 2);
        assert_eq!(report.status_count(Status::SkippedNoLandmarks), 1);
        assert_eq!(report.status_count(Status::FailedDegenerate), 0);
        assert_eq!(manifest.entries[2].status(), Status::SkippedNoLandmarks);
        assert_eq!(imgs[0].pixels.dimensions(), (224, 224, 3));
        assert!(matches!(imgs[0].pixels, ExportPixels::F32(_)));
    }

    #[test]
    fn degenerate_geometry_does_not_abort() {
        let (ds, mut lm) = fixture(2, 1, Split::Train);
        lm.insert(LandmarkRecord {
            image_id: "img1.png".into(),
            face_box: None,
            points: Landmarks68::new(&[Point2::new(5.0, 5.0); 68]).unwrap(),
            detector: "bad".into(),
        })
        .unwrap();
        let (imgs, manifest, report) = occlude_dataset_in_memory(
            &ds,
            &lm,
            &HeadsetSpec::default(),
            &FillStyle::default(),
            &OcclusionOptions::default(),
        )
        .unwrap();
        assert_eq!(manifest.entries[1].status(), Status::FailedDegenerate);
        assert_eq!(report.status_count(Status::FailedDegenerate), 1);
        // Train split: original + flipped for the good entry.
        assert_eq!(imgs.len(), 2);
        assert_eq!(report.augmented_images, 1);
    }

    #[test]
    fn flip_only_on_train() {
        for (split, expected) in [(Split::Train, 8), (Split::Val, 4), (Split::Test, 4)] {
            let (ds, lm) = fixture(4, 4, split);
            let (imgs, ..) = occlude_dataset_in_memory(
                &ds,
                &lm,
                &HeadsetSpec::default(),
                &FillStyle::default(),
                &OcclusionOptions::default(),
            )
            .unwrap();
            assert_eq!(imgs.len(), expected);
        }
    }

    #[test]
    fn native_size_without_normalization() {
        let (ds, lm) = fixture(1, 1, Split::Val);
        let opts = OcclusionOptions {
            output_size: None,
            normalize: false,
            replicate_channels: false,
            ..Default::default()
        };
        let (imgs, ..) =
            occlude_dataset_in_memory(&ds, &lm, &HeadsetSpec::default(), &FillStyle::uniform(0), &opts).unwrap();
        let ExportPixels::U8(img) = &imgs[0].pixels else {
            panic!("expected 8-bit")
        };
        assert_eq!((img.width(), img.height(), img.channels()), (48, 48, 1));
        let patch = build_patch(&lm.get("img0.png").unwrap().points, &HeadsetSpec::default()).unwrap();
        let expected = crate::raster::covered_count(48, 48, &patch.corners);
        // Fixture pixels are never 0.
        assert_eq!(img.as_slice().iter().filter(|&&v| v == 0).count(), expected);
        assert_eq!(imgs[0].occluded_fraction, expected as f64 / (48.0 * 48.0));
    }

    #[test]
    fn bad_options() {
        let (ds, lm) = fixture(1, 1, Split::Val);
        let opts = OcclusionOptions {
            workers: 0,
            ..Default::default()
        };
        assert!(occlude_dataset_in_memory(&ds, &lm, &HeadsetSpec::default(), &FillStyle::default(), &opts).is_err());
    }
}
