//! Oracles and fixtures shared by the integration tests and the acceptance
//! runner. The oracles here avoid the library code paths they check.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use vrocc_core::dataset::{Dataset, EmotionLabel, ManifestEntry, SourceLocator, Split};
use vrocc_core::raster::point_in_quad;
use vrocc_core::synthetic::{random_face, random_image};
use vrocc_core::{HeadsetSpec, LandmarkRecord, LandmarkSet, Landmarks68, Point2};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Patch geometry written out longhand: eye means, `atan2`, mm scale, then
/// each corner as `center + hw·u ± hh·v` with `u` along the eye line and `v`
/// perpendicular to it.
pub struct OraclePatch {
    pub center: (f64, f64),
    pub angle: f64,
    pub width: f64,
    pub height: f64,
    pub corners: [(f64, f64); 4],
}

pub fn oracle_patch(lm: &Landmarks68, spec: &HeadsetSpec) -> OraclePatch {
    let p = lm.points();
    let mean = |r: std::ops::RangeInclusive<usize>| {
        let n = r.clone().count() as f64;
        let (sx, sy) = r.fold((0.0, 0.0), |(sx, sy), i| (sx + p[i].x, sy + p[i].y));
        (sx / n, sy / n)
    };
    let (l, r) = (mean(36..=41), mean(42..=47));
    let angle = (r.1 - l.1).atan2(r.0 - l.0);
    let temporal = ((p[16].x - p[0].x).powi(2) + (p[16].y - p[0].y).powi(2)).sqrt();
    let scale = temporal / spec.head_breadth_mm;
    let (width, height) = (spec.width_mm * scale, spec.height_mm * scale);
    let center = ((l.0 + r.0) / 2.0, (l.1 + r.1) / 2.0);
    let u = (angle.cos(), angle.sin());
    let v = (-angle.sin(), angle.cos());
    let (hw, hh) = (width / 2.0, height / 2.0);
    let corner = |a: f64, b: f64| {
        (
            center.0 + a * hw * u.0 + b * hh * v.0,
            center.1 + a * hw * u.1 + b * hh * v.1,
        )
    };
    OraclePatch {
        center,
        angle,
        width,
        height,
        corners: [
            corner(-1.0, -1.0),
            corner(1.0, -1.0),
            corner(1.0, 1.0),
            corner(-1.0, 1.0),
        ],
    }
}

/// Coverage mask from testing every pixel center on its own.
pub fn brute_force_mask(w: u32, h: u32, corners: &[Point2; 4]) -> Vec<bool> {
    let mut mask = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            mask.push(point_in_quad(Point2::new(x as f64 + 0.5, y as f64 + 0.5), corners));
        }
    }
    mask
}

/// A convex quad: four points on an ellipse at sorted random angles, placed
/// so it may hang off any edge of a `w × h` frame.
pub fn random_convex_quad<R: Rng>(rng: &mut R, w: u32, h: u32) -> [Point2; 4] {
    let (w, h) = (w as f64, h as f64);
    let c = (rng.gen_range(-0.2 * w..1.2 * w), rng.gen_range(-0.2 * h..1.2 * h));
    let (rx, ry) = (rng.gen_range(0.5..w.max(2.0)), rng.gen_range(0.5..h.max(2.0)));
    let tilt: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut angles: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    let pts: Vec<Point2> = angles
        .iter()
        .map(|a| {
            let (ex, ey) = (rx * a.cos(), ry * a.sin());
            Point2::new(
                c.0 + ex * tilt.cos() - ey * tilt.sin(),
                c.1 + ex * tilt.sin() + ey * tilt.cos(),
            )
        })
        .collect();
    [pts[0], pts[1], pts[2], pts[3]]
}

/// SHA-256 over every file below `root`: sorted relative paths and contents.
pub fn hash_tree(root: &Path) -> String {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, out);
            } else {
                out.push(path);
            }
        }
    }
    let mut files = Vec::new();
    walk(root, &mut files);
    files.sort();
    let mut hasher = Sha256::new();
    for f in files {
        let rel = f.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
        hasher.update(rel.as_bytes());
        hasher.update([0]);
        let bytes = fs::read(&f).unwrap();
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    format!("{:x}", hasher.finalize())
}

/// In-memory dataset of random images and faces. Every tenth entry has no
/// landmarks and every seventeenth has collapsed eyes.
pub fn synthetic_dataset(n: usize, side: u32, seed: u64) -> (Dataset, LandmarkSet) {
    let mut rng = rng(seed);
    let mut entries = Vec::new();
    let mut images = Vec::new();
    let mut set = LandmarkSet::new();
    for i in 0..n {
        let id = format!("img{i:04}.png");
        let split = [Split::Train, Split::Train, Split::Train, Split::Val, Split::Test][i % 5];
        let label = EmotionLabel::ALL[rng.gen_range(0..EmotionLabel::ALL.len())];
        entries.push(ManifestEntry::new(&id, SourceLocator::CsvRow(i), label, split));
        let channels = if i % 2 == 0 { 1 } else { 3 };
        images.push(random_image(&mut rng, side, side, channels));
        let mut lm = random_face(&mut rng, side, side);
        if i % 10 == 9 {
            continue;
        }
        if i % 17 == 16 {
            let spot = lm.get(39);
            let mut pts = *lm.points();
            for p in &mut pts[36..48] {
                *p = spot;
            }
            lm = Landmarks68::new(&pts).unwrap();
        }
        set.insert(LandmarkRecord {
            image_id: id,
            face_box: None,
            points: lm,
            detector: "synthetic".into(),
        })
        .unwrap();
    }
    (Dataset::from_memory(entries, images).unwrap(), set)
}

/// Label counts from the FER+ vote CSV by plain argmax, first column winning
/// ties; returns (per-label counts, unknown, not_face, no_votes).
pub fn ferplus_vote_oracle(labels_csv: &str) -> ([usize; 8], usize, usize, usize) {
    let mut counts = [0usize; 8];
    let (mut unknown, mut nf, mut none) = (0, 0, 0);
    for line in labels_csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let votes: Vec<u32> = cols[2..12].iter().map(|v| v.trim().parse().unwrap()).collect();
        let max = *votes.iter().max().unwrap();
        let winner = votes.iter().position(|&v| v == max).unwrap();
        match (max, winner) {
            (0, _) => none += 1,
            (_, 9) => nf += 1,
            (_, 8) => unknown += 1,
            (_, k) => counts[k] += 1,
        }
    }
    (counts, unknown, nf, none)
}
