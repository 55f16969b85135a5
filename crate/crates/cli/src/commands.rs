use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use vrocc_core::dataset::{
    export_dataset, load_image_file, occlude_image, read_manifest_tsv, save_png, EmotionLabel, ExportPixels, RunReport,
    Split, Status,
};
use vrocc_core::landmark_io::{parse_landmark_file, validate_for_occlusion};
use vrocc_core::{FillStyle, GrayOrRgb8, LandmarkSet, Point2};

use crate::config::{resolve_headset, RunConfig, Settings, Source};
use crate::Failure;

const OUTLINE: [u8; 3] = [255, 0, 0];

fn load_landmarks(path: &Path) -> Result<LandmarkSet, Failure> {
    parse_landmark_file(path)
        .with_context(|| format!("landmarks {}", path.display()))
        .map_err(Failure::Runtime)
}

pub fn occlude(settings: &Settings, print_config: bool) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(settings)?;
    if print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let landmarks = load_landmarks(&cfg.landmarks)?;
    let dataset = cfg.source.load()?;
    let fill = FillStyle::uniform(cfg.fill);
    let (_, report) = export_dataset(&dataset, &landmarks, &cfg.spec, &fill, &cfg.options, &cfg.out)
        .with_context(|| format!("writing {}", cfg.out.display()))?;

    for status in Status::TERMINAL {
        println!("{:<22}{:>8}", status.name(), report.status_count(status));
    }
    for (reason, n) in &report.excluded {
        println!("{:<22}{:>8}", format!("excluded:{reason}"), n);
    }
    println!(
        "exported {} images ({} flipped) to {}",
        report.exported_images,
        report.augmented_images,
        cfg.out.display()
    );
    Ok(())
}

/// Marks every pixel a segment passes through.
fn draw_segment(img: &mut GrayOrRgb8, a: Point2, b: Point2, color: [u8; 3]) {
    let steps = ((b.x - a.x).abs().max((b.y - a.y).abs()) * 2.0).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let (x, y) = ((a.x + (b.x - a.x) * t).floor(), (a.y + (b.y - a.y) * t).floor());
        if x >= 0.0 && y >= 0.0 && x < img.width() as f64 && y < img.height() as f64 {
            for (c, v) in color.iter().enumerate() {
                img.set(x as u32, y as u32, c as u8, *v);
            }
        }
    }
}

pub fn preview(
    image: &Path,
    landmarks: &Path,
    image_id: Option<&str>,
    out: &Path,
    headset: &Settings,
) -> Result<(), Failure> {
    let (spec, fill) = resolve_headset(headset)?;
    let id = match image_id {
        Some(id) => id.to_string(),
        None => image
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Failure::usage(format!("cannot derive an image id from {}", image.display())))?
            .to_string(),
    };
    let set = load_landmarks(landmarks)?;
    let record = set
        .get(&id)
        .ok_or_else(|| anyhow!("no landmark record for image id {id:?} in {}", landmarks.display()))?;
    let src = load_image_file(image).context("loading image")?;
    let (occluded, patch, fraction) = occlude_image(&src, &record.points, &spec, &FillStyle::uniform(fill))
        .with_context(|| format!("cannot place a patch for {id:?}"))?;

    let (w, h) = (src.width(), src.height());
    let mut outlined = src.to_three_channel();
    for i in 0..4 {
        draw_segment(&mut outlined, patch.corners[i], patch.corners[(i + 1) % 4], OUTLINE);
    }
    let occluded = occluded.to_three_channel();
    let mut canvas = GrayOrRgb8::new(2 * w, h, 3, 0).map_err(|e| anyhow!(e))?;
    for y in 0..h {
        let row = canvas.row_mut(y);
        let half = 3 * w as usize;
        row[..half].copy_from_slice(outlined.row(y));
        row[half..].copy_from_slice(occluded.row(y));
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_png(out, &ExportPixels::U8(canvas)).context("writing preview")?;

    println!("image_id {id}");
    println!("center {} {}", patch.center.x, patch.center.y);
    println!("angle_rad {}", patch.angle_rad);
    println!("size_px {} {}", patch.width_px, patch.height_px);
    for (i, c) in patch.corners.iter().enumerate() {
        println!("corner {i} {} {}", c.x, c.y);
    }
    println!("occluded_fraction {fraction}");
    println!("wrote {}", out.display());
    Ok(())
}

fn percent(part: usize, whole: usize) -> String {
    if whole == 0 || part == whole {
        return "100".into();
    }
    let p = format!("{:.1}", 100.0 * part as f64 / whole as f64);
    p.strip_suffix(".0").map(str::to_string).unwrap_or(p)
}

pub fn validate(landmarks: &Path, manifest: Option<&Path>, dataset: &Settings) -> Result<(), Failure> {
    if !landmarks.exists() {
        return Err(Failure::usage(format!(
            "--landmarks: {} does not exist",
            landmarks.display()
        )));
    }
    let ids: Vec<String> = match manifest {
        Some(p) => {
            if !p.exists() {
                return Err(Failure::usage(format!("--manifest: {} does not exist", p.display())));
            }
            read_manifest_tsv(p)
                .context("reading manifest")?
                .into_iter()
                .map(|r| r.image_id)
                .collect()
        }
        None => {
            let source = Source::resolve(dataset).map_err(|e| match e {
                Failure::Usage(m) => Failure::usage(format!("{m} (or pass --manifest)")),
                other => other,
            })?;
            source
                .load()?
                .manifest
                .entries
                .into_iter()
                .map(|e| e.image_id)
                .collect()
        }
    };
    let set: LandmarkSet =
        parse_landmark_file(landmarks).map_err(|e| Failure::Runtime(anyhow!("{}: {e}", landmarks.display())))?;

    let mut missing = Vec::new();
    let mut warnings = Vec::new();
    for id in &ids {
        match set.get(id) {
            Some(record) => warnings.extend(validate_for_occlusion(record).into_iter().map(|w| (id, w))),
            None => missing.push(id),
        }
    }
    let covered = ids.len() - missing.len();
    println!("coverage {}%, {} warnings", percent(covered, ids.len()), warnings.len());
    println!("{covered} of {} entries have landmarks", ids.len());
    for id in &missing {
        println!("missing {id}");
    }
    for (id, w) in &warnings {
        println!("warning {id}: {w}");
    }
    let unused = set.iter().filter(|r| !ids.contains(&r.image_id)).count();
    if unused > 0 {
        println!("{unused} landmark records match no entry");
    }
    Ok(())
}

pub fn stats(report: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(report).with_context(|| format!("reading {}", report.display()))?;
    let r: RunReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", report.display()))?;

    let splits = [Split::Train, Split::Val, Split::Test];
    let count = |m: &std::collections::BTreeMap<String, usize>, k: &str| m.get(k).copied().unwrap_or(0);
    println!("entries {}", r.total_entries);
    for status in Status::TERMINAL {
        println!("  {:<22}{:>8}", status.name(), r.status_count(status));
    }
    for (reason, n) in &r.excluded {
        println!("  {:<22}{:>8}", format!("excluded:{reason}"), n);
    }
    println!("exported images {} ({} flipped)", r.exported_images, r.augmented_images);
    println!();

    println!("occluded entries by label and split");
    print!("{:<12}", "label");
    for s in splits {
        print!("{:>8}", s.name());
    }
    println!("{:>8}", "total");
    let mut column_totals = [0usize; 3];
    for label in EmotionLabel::ALL {
        print!("{:<12}", label.name());
        let mut row = 0;
        for (i, s) in splits.iter().enumerate() {
            let n = r
                .occluded_by_split_label
                .get(s.name())
                .map_or(0, |m| count(m, label.name()));
            column_totals[i] += n;
            row += n;
            print!("{n:>8}");
        }
        println!("{row:>8}");
    }
    print!("{:<12}", "total");
    for n in column_totals {
        print!("{n:>8}");
    }
    println!("{:>8}", column_totals.iter().sum::<usize>());
    print!("{:<12}", "all entries");
    for s in splits {
        print!("{:>8}", count(&r.split_counts, s.name()));
    }
    println!("{:>8}", r.total_entries);
    println!();

    let f = &r.occluded_fraction;
    println!(
        "occluded_fraction n={} mean={:.4} min={:.4} p05={:.4} p50={:.4} p95={:.4} max={:.4}",
        f.count, f.mean, f.min, f.p05, f.p50, f.p95, f.max
    );
    let hist: Vec<String> = f.histogram.iter().map(usize::to_string).collect();
    println!("histogram {}", hist.join(" "));
    Ok(())
}
