use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DatasetManifest, Status};
use crate::geometry::HeadsetSpec;

pub const HISTOGRAM_BINS: usize = 10;

/// Run settings that affect output bytes. Worker count is deliberately absent:
/// outputs do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub headset: HeadsetSpec<f64>,
    pub fill: [u8; 3],
    pub output_size: Option<[u32; 2]>,
    pub normalize: bool,
    pub flip: bool,
    pub replicate_channels: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
    /// Equal-width bins over [0, 1]; 1.0 falls into the last bin.
    pub histogram: Vec<usize>,
}

impl FractionStats {
    /// `values` in manifest order; summation order is fixed so the mean is
    /// reproducible.
    pub fn from_values(values: &[f64]) -> Self {
        let mut histogram = vec![0; HISTOGRAM_BINS];
        if values.is_empty() {
            return Self {
                count: 0,
                mean: 0.0,
                min: 0.0,
                max: 0.0,
                p05: 0.0,
                p50: 0.0,
                p95: 0.0,
                histogram,
            };
        }
        for &v in values {
            let bin = ((v * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
            histogram[bin] += 1;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        // Nearest rank.
        let pct = |p: f64| {
            let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            sorted[rank - 1]
        };
        Self {
            count: values.len(),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            p05: pct(0.05),
            p50: pct(0.5),
            p95: pct(0.95),
            histogram,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub total_entries: usize,
    pub status_counts: BTreeMap<String, usize>,
    pub split_counts: BTreeMap<String, usize>,
    pub label_counts: BTreeMap<String, usize>,
    /// split -> label -> entries that ended `occluded`.
    pub occluded_by_split_label: BTreeMap<String, BTreeMap<String, usize>>,
    pub excluded: BTreeMap<String, usize>,
    pub exported_images: usize,
    pub augmented_images: usize,
    pub occluded_fraction: FractionStats,
    pub config: ConfigSnapshot,
}

impl RunReport {
    pub fn from_manifest(
        manifest: &DatasetManifest,
        exported_images: usize,
        augmented_images: usize,
        config: ConfigSnapshot,
    ) -> Self {
        let mut status_counts: BTreeMap<String, usize> =
            Status::TERMINAL.iter().map(|s| (s.name().to_string(), 0)).collect();
        let mut split_counts = BTreeMap::new();
        let mut label_counts = BTreeMap::new();
        let mut occluded_by_split_label: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        let mut fractions = Vec::new();
        for e in &manifest.entries {
            *status_counts.entry(e.status().name().to_string()).or_default() += 1;
            *split_counts.entry(e.split.name().to_string()).or_default() += 1;
            *label_counts.entry(e.label.name().to_string()).or_default() += 1;
            if e.status() == Status::Occluded {
                *occluded_by_split_label
                    .entry(e.split.name().to_string())
                    .or_default()
                    .entry(e.label.name().to_string())
                    .or_default() += 1;
            }
            if let Some(f) = e.occluded_fraction() {
                fractions.push(f);
            }
        }
        Self {
            total_entries: manifest.entries.len(),
            status_counts,
            split_counts,
            label_counts,
            occluded_by_split_label,
            excluded: manifest.excluded.clone(),
            exported_images,
            augmented_images,
            occluded_fraction: FractionStats::from_values(&fractions),
            config,
        }
    }

    pub fn status_count(&self, status: Status) -> usize {
        self.status_counts.get(status.name()).copied().unwrap_or(0)
    }
}
