//! AffectNet manifest CSV. Column names, the split and the category-code
//! table come from an [`AffectNetLayout`], since releases differ.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Dataset, DatasetError, DatasetManifest, EmotionLabel, ManifestEntry, SourceLocator, Split};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AffectNetCode {
    Emotion(EmotionLabel),
    /// Kept out of the manifest and counted under this name.
    Excluded(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffectNetLayout {
    pub path_column: String,
    pub label_column: String,
    pub split: Split,
    pub codes: BTreeMap<i64, AffectNetCode>,
}

impl Default for AffectNetLayout {
    /// The manually annotated release: `subDirectory_filePath`, `expression`,
    /// codes 0–7 basic emotions, 8 none, 9 uncertain, 10 non-face.
    fn default() -> Self {
        use EmotionLabel::*;
        let mut codes: BTreeMap<i64, AffectNetCode> =
            [Neutral, Happiness, Sadness, Surprise, Fear, Disgust, Anger, Contempt]
                .into_iter()
                .enumerate()
                .map(|(i, l)| (i as i64, AffectNetCode::Emotion(l)))
                .collect();
        for (code, name) in [(8, "none"), (9, "uncertain"), (10, "non_face")] {
            codes.insert(code, AffectNetCode::Excluded(name.into()));
        }
        Self {
            path_column: "subDirectory_filePath".into(),
            label_column: "expression".into(),
            split: Split::Train,
            codes,
        }
    }
}

impl AffectNetLayout {
    /// Reads a flat `key = value` layout:
    ///
    /// ```text
    /// path_column = subDirectory_filePath
    /// label_column = expression
    /// split = val
    /// code.0 = neutral
    /// code.10 = exclude:non_face
    /// ```
    ///
    /// Unspecified keys keep their defaults; any `code.*` key replaces the
    /// whole default code table.
    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let mut layout = Self::default();
        let mut codes = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let err = |m: String| DatasetError::InvalidLayout(format!("line {}: {m}", idx + 1));
            let (key, value) = raw
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {raw:?}")))?;
            match key {
                "path_column" => layout.path_column = value.to_string(),
                "label_column" => layout.label_column = value.to_string(),
                "split" => layout.split = value.parse().map_err(err)?,
                _ => {
                    let code: i64 = key
                        .strip_prefix("code.")
                        .and_then(|c| c.parse().ok())
                        .ok_or_else(|| err(format!("unknown key {key:?}")))?;
                    let mapped = match value.strip_prefix("exclude:") {
                        Some(name) if !name.is_empty() => AffectNetCode::Excluded(name.to_string()),
                        Some(_) => return Err(err("empty exclusion name".into())),
                        None => AffectNetCode::Emotion(value.parse().map_err(err)?),
                    };
                    codes.insert(code, mapped);
                }
            }
        }
        if !codes.is_empty() {
            layout.codes = codes;
        }
        Ok(layout)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        Self::parse(&text)
    }
}

pub fn load_affectnet(
    manifest_csv: impl AsRef<Path>,
    image_root: impl AsRef<Path>,
    layout: &AffectNetLayout,
) -> Result<Dataset, DatasetError> {
    let (csv_path, root) = (manifest_csv.as_ref(), image_root.as_ref());
    let text = fs::read_to_string(csv_path).map_err(|e| DatasetError::io(csv_path, e))?;
    let mut manifest = DatasetManifest::default();
    let mut paths: Vec<PathBuf> = Vec::new();
    if text.trim().is_empty() {
        return Ok(Dataset::from_files(manifest, paths));
    }

    let csv_err = |e: csv::Error| DatasetError::Csv {
        path: csv_path.to_path_buf(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DatasetError::MissingColumn {
                path: csv_path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let path_col = column(&layout.path_column)?;
    let label_col = column(&layout.label_column)?;

    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = row + 2;
        let rel = record.get(path_col).unwrap_or("").trim();
        let code_text = record.get(label_col).unwrap_or("").trim();
        let unknown = || DatasetError::UnknownLabelCode {
            path: csv_path.to_path_buf(),
            line,
            code: code_text.to_string(),
        };
        let code: i64 = code_text.parse().map_err(|_| unknown())?;
        *manifest.source_split_counts.entry(layout.split).or_default() += 1;
        match layout.codes.get(&code).ok_or_else(unknown)? {
            AffectNetCode::Excluded(name) => {
                *manifest.excluded.entry(name.clone()).or_default() += 1;
            }
            AffectNetCode::Emotion(label) => {
                if rel.is_empty() {
                    return Err(DatasetError::MalformedLine {
                        path: csv_path.to_path_buf(),
                        line,
                        message: "empty image path".into(),
                    });
                }
                let path = root.join(rel);
                if !path.is_file() {
                    return Err(DatasetError::MissingImageFile(path));
                }
                manifest.entries.push(ManifestEntry::new(
                    rel,
                    SourceLocator::File(path.clone()),
                    *label,
                    layout.split,
                ));
                paths.push(path);
            }
        }
    }
    Ok(Dataset::from_files(manifest, paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{save_png, ExportPixels};
    use crate::image_buffer::ImageBuffer;

    fn write_images(root: &Path, names: &[String]) {
        let img = ExportPixels::U8(ImageBuffer::new(6, 6, 3, 50u8).unwrap());
        for n in names {
            let p = root.join(n);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            save_png(&p, &img).unwrap();
        }
    }

    #[test]
    fn basic_rows_kept_others_counted() {
        let dir = tempfile::tempdir().unwrap();
        let names: Vec<String> = (0..5).map(|i| format!("1/img{i}.png")).collect();
        write_images(dir.path(), &names);
        let mut csv = String::from("subDirectory_filePath,face_x,expression\n");
        for (i, n) in names.iter().enumerate() {
            csv.push_str(&format!("{n},0,{}\n", i + 1));
        }
        csv.push_str("2/nf.png,0,10\n2/nf2.png,0,10\n");
        let path = dir.path().join("training.csv");
        fs::write(&path, csv).unwrap();

        let ds = load_affectnet(&path, dir.path(), &AffectNetLayout::default()).unwrap();
        assert_eq!(ds.len(), 5);
        assert_eq!(ds.manifest.excluded.get("non_face"), Some(&2));
        assert_eq!(ds.manifest.entries[0].label, EmotionLabel::Happiness);
        assert_eq!(ds.manifest.entries[4].label, EmotionLabel::Disgust);
        assert_eq!(ds.manifest.source_split_counts[&Split::Train], 7);
    }

    #[test]
    fn empty_csv_is_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        fs::write(&path, "").unwrap();
        let ds = load_affectnet(&path, dir.path(), &AffectNetLayout::default()).unwrap();
        assert!(ds.is_empty());
        fs::write(&path, "subDirectory_filePath,expression\n").unwrap();
        assert!(load_affectnet(&path, dir.path(), &AffectNetLayout::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unknown_code_and_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "subDirectory_filePath,expression\na.png,42\n").unwrap();
        assert!(matches!(
            load_affectnet(&path, dir.path(), &AffectNetLayout::default()),
            Err(DatasetError::UnknownLabelCode { line: 2, .. })
        ));
        fs::write(&path, "subDirectory_filePath,expression\na.png,3\n").unwrap();
        assert!(matches!(
            load_affectnet(&path, dir.path(), &AffectNetLayout::default()),
            Err(DatasetError::MissingImageFile(_))
        ));
    }

    #[test]
    fn layout_file() {
        let layout = AffectNetLayout::parse(
            "# custom release\npath_column = file\nlabel_column = label\nsplit = val\ncode.1 = fear\ncode.2 = exclude:blurry\n",
        )
        .unwrap();
        assert_eq!(layout.split, Split::Val);
        assert_eq!(layout.codes.len(), 2);
        assert_eq!(layout.codes[&1], AffectNetCode::Emotion(EmotionLabel::Fear));

        let dir = tempfile::tempdir().unwrap();
        write_images(dir.path(), &["x.png".to_string()]);
        let path = dir.path().join("m.csv");
        fs::write(&path, "file,label\nx.png,1\ny.png,2\n").unwrap();
        let ds = load_affectnet(&path, dir.path(), &layout).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.manifest.entries[0].split, Split::Val);
        assert_eq!(ds.manifest.excluded["blurry"], 1);

        assert!(AffectNetLayout::parse("code.x = fear").is_err());
        assert!(AffectNetLayout::parse("code.1 = joy").is_err());
        assert!(AffectNetLayout::parse("nonsense").is_err());
    }
}
