//! RAF-DB basic-emotion subset: a label list of `<file> <code>` lines with
//! codes 1–7, split encoded in the `train_`/`test_` filename prefix.

use std::fs;
use std::path::{Path, PathBuf};

use super::{Dataset, DatasetError, DatasetManifest, EmotionLabel, ManifestEntry, SourceLocator, Split};

fn code_label(code: &str) -> Option<EmotionLabel> {
    Some(match code {
        "1" => EmotionLabel::Surprise,
        "2" => EmotionLabel::Fear,
        "3" => EmotionLabel::Disgust,
        "4" => EmotionLabel::Happiness,
        "5" => EmotionLabel::Sadness,
        "6" => EmotionLabel::Anger,
        "7" => EmotionLabel::Neutral,
        _ => return None,
    })
}

/// The listed file, or the `<stem>_aligned.<ext>` variant shipped in the
/// aligned image folder.
fn resolve(root: &Path, name: &str) -> Option<PathBuf> {
    let direct = root.join(name);
    if direct.is_file() {
        return Some(direct);
    }
    let p = Path::new(name);
    let stem = p.file_stem()?.to_str()?;
    let aligned = match p.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_aligned.{ext}"),
        None => format!("{stem}_aligned"),
    };
    let aligned = root.join(p.parent().unwrap_or(Path::new(""))).join(aligned);
    aligned.is_file().then_some(aligned)
}

pub fn load_rafdb(image_root: impl AsRef<Path>, label_list: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let (root, list) = (image_root.as_ref(), label_list.as_ref());
    let text = fs::read_to_string(list).map_err(|e| DatasetError::io(list, e))?;

    let mut manifest = DatasetManifest::default();
    let mut paths = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let malformed = |message: String| DatasetError::MalformedLine {
            path: list.to_path_buf(),
            line,
            message,
        };
        let mut parts = raw.split_whitespace();
        let (Some(name), Some(code), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(malformed(format!("expected `<file> <code>`, got {raw:?}")));
        };
        let label = code_label(code).ok_or_else(|| DatasetError::UnknownLabelCode {
            path: list.to_path_buf(),
            line,
            code: code.to_string(),
        })?;
        let base = Path::new(name).file_name().and_then(|f| f.to_str()).unwrap_or(name);
        let split = if base.starts_with("train") {
            Split::Train
        } else if base.starts_with("test") {
            Split::Test
        } else {
            return Err(malformed(format!("cannot infer split from {name:?}")));
        };
        let path = resolve(root, name).ok_or_else(|| DatasetError::MissingImageFile(root.join(name)))?;
        *manifest.source_split_counts.entry(split).or_default() += 1;
        manifest.entries.push(ManifestEntry::new(
            name,
            SourceLocator::File(path.clone()),
            label,
            split,
        ));
        paths.push(path);
    }
    Ok(Dataset::from_files(manifest, paths))
}
