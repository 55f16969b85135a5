//! FER+: the FER2013 pixel CSV (`emotion,pixels,Usage`) paired row-for-row
//! with the FER+ vote CSV (`Usage,Image name,neutral,...,contempt,unknown,NF`).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::{Dataset, DatasetError, DatasetManifest, EmotionLabel, ManifestEntry, SourceLocator, Split};
use crate::image_buffer::ImageBuffer;

pub const FERPLUS_SIDE: u32 = 48;
pub const FERPLUS_PIXELS: usize = (FERPLUS_SIDE * FERPLUS_SIDE) as usize;

/// Vote columns in the order used for argmax tie-breaking.
const VOTE_COLUMNS: [&str; 10] = [
    "neutral",
    "happiness",
    "surprise",
    "sadness",
    "anger",
    "disgust",
    "fear",
    "contempt",
    "unknown",
    "NF",
];

fn usage_split(usage: &str) -> Option<Split> {
    match usage.trim() {
        "Training" => Some(Split::Train),
        "PublicTest" => Some(Split::Val),
        "PrivateTest" => Some(Split::Test),
        _ => None,
    }
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
}

fn read_all<R: Read>(reader: R, name: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>), DatasetError> {
    let csv_err = |e: csv::Error| DatasetError::Csv {
        path: name.to_path_buf(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let rows = rdr.records().collect::<Result<Vec<_>, _>>().map_err(csv_err)?;
    Ok((headers, rows))
}

fn require(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize, DatasetError> {
    find_column(headers, name).ok_or_else(|| DatasetError::MissingColumn {
        path: path.to_path_buf(),
        column: name.to_string(),
    })
}

fn parse_pixels(row: usize, text: &str) -> Result<ImageBuffer<u8>, DatasetError> {
    let bad = |message: String| DatasetError::BadPixelString { row, message };
    let mut data = Vec::with_capacity(FERPLUS_PIXELS);
    for tok in text.split_whitespace() {
        let v: u16 = tok.parse().map_err(|_| bad(format!("not an integer: {tok:?}")))?;
        if v > 255 {
            return Err(bad(format!("value {v} outside 0..=255")));
        }
        data.push(v as u8);
    }
    if data.len() != FERPLUS_PIXELS {
        return Err(bad(format!("expected {FERPLUS_PIXELS} values, found {}", data.len())));
    }
    Ok(ImageBuffer::from_vec(FERPLUS_SIDE, FERPLUS_SIDE, 1, data).expect("48x48 gray"))
}

pub fn load_ferplus(pixels_csv: impl AsRef<Path>, labels_csv: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let (p, l) = (pixels_csv.as_ref(), labels_csv.as_ref());
    let pf = File::open(p).map_err(|e| DatasetError::io(p, e))?;
    let lf = File::open(l).map_err(|e| DatasetError::io(l, e))?;
    load_ferplus_from_readers(pf, p, lf, l)
}

/// Label = argmax over the 10 vote columns, first column wins ties. Rows won
/// by `unknown` or `NF`, and rows with no votes, are excluded and counted
/// under `unknown`, `not_face` and `no_votes`.
pub fn load_ferplus_from_readers<P: Read, L: Read>(
    pixels: P,
    pixels_name: &Path,
    labels: L,
    labels_name: &Path,
) -> Result<Dataset, DatasetError> {
    let (p_head, p_rows) = read_all(pixels, pixels_name)?;
    let (l_head, l_rows) = read_all(labels, labels_name)?;
    if p_rows.len() != l_rows.len() {
        return Err(DatasetError::RowMisalignment {
            pixels: p_rows.len(),
            labels: l_rows.len(),
        });
    }

    let pix_col = require(&p_head, "pixels", pixels_name)?;
    let usage_col = require(&p_head, "Usage", pixels_name)?;
    let name_col = find_column(&l_head, "Image name");
    let vote_cols = VOTE_COLUMNS
        .iter()
        .map(|c| require(&l_head, c, labels_name))
        .collect::<Result<Vec<_>, _>>()?;

    let mut manifest = DatasetManifest::default();
    let mut images = Vec::new();
    let mut excluded: BTreeMap<String, usize> = BTreeMap::new();

    for (row, (prow, lrow)) in p_rows.iter().zip(&l_rows).enumerate() {
        // Header is line 1.
        let line = row + 2;
        let img = parse_pixels(row, prow.get(pix_col).unwrap_or(""))?;
        let usage = prow.get(usage_col).unwrap_or("");
        let split = usage_split(usage).ok_or_else(|| DatasetError::MalformedLine {
            path: pixels_name.to_path_buf(),
            line,
            message: format!("unknown Usage {usage:?}"),
        })?;
        *manifest.source_split_counts.entry(split).or_default() += 1;

        let mut votes = [0u32; 10];
        for (slot, &col) in votes.iter_mut().zip(&vote_cols) {
            let raw = lrow.get(col).unwrap_or("").trim();
            *slot = raw.parse().map_err(|_| DatasetError::MalformedLine {
                path: labels_name.to_path_buf(),
                line,
                message: format!("bad vote count {raw:?}"),
            })?;
        }
        let (winner, &max) = votes
            .iter()
            .enumerate()
            .fold((0, &0u32), |best, cur| if cur.1 > best.1 { cur } else { best });
        let label = match (max, winner) {
            (0, _) => {
                *excluded.entry("no_votes".into()).or_default() += 1;
                continue;
            }
            (_, 9) => {
                *excluded.entry("not_face".into()).or_default() += 1;
                continue;
            }
            (_, 8) => {
                *excluded.entry("unknown".into()).or_default() += 1;
                continue;
            }
            (_, k) => EmotionLabel::ALL[k],
        };

        let image_id = name_col
            .and_then(|c| lrow.get(c))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .unwrap_or_else(|| format!("fer{row:07}.png"));
        manifest
            .entries
            .push(ManifestEntry::new(image_id, SourceLocator::CsvRow(row), label, split));
        images.push(img);
    }
    manifest.excluded = excluded;
    Ok(Dataset::from_parts(manifest, images))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LABEL_HEAD: &str =
        "Usage,Image name,neutral,happiness,surprise,sadness,anger,disgust,fear,contempt,unknown,NF\n";

    fn pixel_row(v: u8, n: usize, usage: &str) -> String {
        let px: Vec<String> = (0..n).map(|_| v.to_string()).collect();
        format!("0,{},{usage}\n", px.join(" "))
    }

    fn load(pixels: &str, labels: &str) -> Result<Dataset, DatasetError> {
        load_ferplus_from_readers(
            pixels.as_bytes(),
            Path::new("p.csv"),
            labels.as_bytes(),
            Path::new("l.csv"),
        )
    }

    fn three_rows() -> (String, String) {
        let pixels = format!(
            "emotion,pixels,Usage\n{}{}{}",
            pixel_row(1, 2304, "Training"),
            pixel_row(2, 2304, "PublicTest"),
            pixel_row(3, 2304, "PrivateTest"),
        );
        let labels = format!(
            "{LABEL_HEAD}Training,fer0000000.png,2,6,0,0,0,0,0,0,0,0\n\
             PublicTest,fer0000001.png,0,0,0,0,0,0,0,0,7,3\n\
             PrivateTest,,0,0,0,0,0,0,0,0,0,10\n"
        );
        (pixels, labels)
    }

    #[test]
    fn majority_vote_and_exclusions() {
        let (p, l) = three_rows();
        let ds = load(&p, &l).unwrap();
        assert_eq!(ds.len(), 1);
        let e = &ds.manifest.entries[0];
        assert_eq!(e.label, EmotionLabel::Happiness);
        assert_eq!(e.split, Split::Train);
        assert_eq!(e.image_id, "fer0000000.png");
        assert_eq!(e.source, SourceLocator::CsvRow(0));
        assert_eq!(ds.manifest.excluded.get("unknown"), Some(&1));
        assert_eq!(ds.manifest.excluded.get("not_face"), Some(&1));
        assert_eq!(ds.manifest.excluded.get("no_votes"), None);
        let counts = &ds.manifest.source_split_counts;
        assert_eq!(
            (counts[&Split::Train], counts[&Split::Val], counts[&Split::Test]),
            (1, 1, 1)
        );
        let img = ds.image(0).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (48, 48, 1));
        assert!(img.as_slice().iter().all(|&v| v == 1));
    }

    #[test]
    fn rows_without_votes_are_counted_separately() {
        let p = format!("emotion,pixels,Usage\n{}", pixel_row(0, 2304, "Training"));
        let l = format!("{LABEL_HEAD}Training,x.png,0,0,0,0,0,0,0,0,0,0\n");
        let ds = load(&p, &l).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.manifest.excluded.get("no_votes"), Some(&1));
    }

    #[test]
    fn ties_go_to_earlier_column() {
        let p = format!("emotion,pixels,Usage\n{}", pixel_row(0, 2304, "Training"));
        let l = format!("{LABEL_HEAD}Training,x.png,0,0,4,4,0,0,0,0,4,0\n");
        assert_eq!(load(&p, &l).unwrap().manifest.entries[0].label, EmotionLabel::Surprise);
    }

    #[test]
    fn short_pixel_string() {
        let p = format!("emotion,pixels,Usage\n{}", pixel_row(0, 2303, "Training"));
        let l = format!("{LABEL_HEAD}Training,x.png,1,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(load(&p, &l), Err(DatasetError::BadPixelString { row: 0, .. })));
    }

    #[test]
    fn out_of_range_pixel() {
        let mut p = format!("emotion,pixels,Usage\n{}", pixel_row(0, 2304, "Training"));
        p = p.replacen(",0 ", ",256 ", 1);
        let l = format!("{LABEL_HEAD}Training,x.png,1,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(load(&p, &l), Err(DatasetError::BadPixelString { .. })));
    }

    #[test]
    fn misaligned_rows() {
        let (p, _) = three_rows();
        let l = format!("{LABEL_HEAD}Training,x.png,1,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(
            load(&p, &l),
            Err(DatasetError::RowMisalignment { pixels: 3, labels: 1 })
        ));
    }

    #[test]
    fn missing_vote_column() {
        let p = format!("emotion,pixels,Usage\n{}", pixel_row(0, 2304, "Training"));
        let l = "Usage,Image name,neutral\nTraining,x.png,1\n";
        assert!(matches!(load(&p, l), Err(DatasetError::MissingColumn { .. })));
    }

    #[test]
    fn unnamed_rows_get_index_ids() {
        let p = format!(
            "emotion,pixels,Usage\n{}{}",
            pixel_row(0, 2304, "Training"),
            pixel_row(0, 2304, "Training")
        );
        let l = format!("{LABEL_HEAD}Training,,1,0,0,0,0,0,0,0,0,0\nTraining,,0,0,0,0,0,0,0,2,0,0\n");
        let ds = load(&p, &l).unwrap();
        assert_eq!(ds.manifest.entries[1].image_id, "fer0000001.png");
        assert_eq!(ds.manifest.entries[1].label, EmotionLabel::Contempt);
    }
}
