//! Regenerates the small synthetic datasets under `fixtures/`.
//!
//! ```text
//! cargo run -p vrocc-core --example make_fixtures -- fixtures
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vrocc_core::dataset::{save_png, ExportPixels};
use vrocc_core::geometry::{LEFT_EYE, RIGHT_EYE};
use vrocc_core::landmark_io::{write_landmark_file, FaceBox};
use vrocc_core::synthetic::{face_image, frontal_face};
use vrocc_core::{GrayOrRgb8, LandmarkRecord, LandmarkSet, Landmarks68, Point2};

const DETECTOR: &str = "synthetic-template";

fn record(image_id: &str, points: Landmarks68, side: f64) -> LandmarkRecord {
    LandmarkRecord {
        image_id: image_id.to_string(),
        face_box: Some(FaceBox {
            x: 0.0,
            y: 0.0,
            w: side,
            h: side,
        }),
        points,
        detector: DETECTOR.to_string(),
    }
}

fn face(rng: &mut ChaCha8Rng, side: u32) -> Landmarks68 {
    let s = side as f64;
    let center = Point2::new(s * rng.gen_range(0.45..0.55), s * rng.gen_range(0.38..0.45));
    frontal_face(center, s * rng.gen_range(0.3..0.36), rng.gen_range(-0.3..0.3))
}

/// Every eye point moved onto one spot, so both eye centers coincide.
fn collapse_eyes(lm: &Landmarks68) -> Landmarks68 {
    let spot = lm.get(39);
    let mut pts = *lm.points();
    for i in LEFT_EYE.chain(RIGHT_EYE) {
        pts[i] = spot;
    }
    Landmarks68::new(&pts).unwrap()
}

fn save(path: &Path, img: &GrayOrRgb8) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    save_png(path, &ExportPixels::U8(img.clone())).unwrap();
}

fn ferplus(dir: &Path, rng: &mut ChaCha8Rng) {
    const VOTES: [&str; 10] = [
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
    fs::create_dir_all(dir).unwrap();
    let mut pixels = String::from("emotion,pixels,Usage\n");
    let mut labels = format!("Usage,Image name,{}\n", VOTES.join(","));
    let mut set = LandmarkSet::new();
    for row in 0..30usize {
        let usage = match row {
            0..=19 => "Training",
            20..=24 => "PublicTest",
            _ => "PrivateTest",
        };
        let mut votes = [0u32; 10];
        match row {
            3 | 27 => votes[8] = 6,
            7 | 22 => votes[9] = 7,
            12 => {}
            5 => {
                votes[0] = 4;
                votes[1] = 4;
            }
            _ => {
                votes[row % 8] = 7;
                votes[(row + 3) % 8] = 2;
                votes[8] = 1;
            }
        }
        let lm = face(rng, 48);
        let img = face_image(48, 48, &lm);
        let px: Vec<String> = img.as_slice().iter().map(u8::to_string).collect();
        pixels.push_str(&format!("0,{},{usage}\n", px.join(" ")));
        let name = format!("fer{row:07}.png");
        let v: Vec<String> = votes.iter().map(u32::to_string).collect();
        labels.push_str(&format!("{usage},{name},{}\n", v.join(",")));
        match row {
            10 | 26 => {}
            15 => set.insert(record(&name, collapse_eyes(&lm), 48.0)).unwrap(),
            _ => set.insert(record(&name, lm, 48.0)).unwrap(),
        }
    }
    fs::write(dir.join("fer2013.csv"), pixels).unwrap();
    fs::write(dir.join("fer2013new.csv"), labels).unwrap();
    write_landmark_file(dir.join("landmarks.jsonl"), &set).unwrap();
}

fn rafdb(dir: &Path, rng: &mut ChaCha8Rng) {
    let images = dir.join("aligned");
    let mut list = String::new();
    let mut set = LandmarkSet::new();
    for i in 0..12usize {
        let name = if i < 8 {
            format!("train_{:05}.png", i + 1)
        } else {
            format!("test_{:04}.png", i - 7)
        };
        let code = i % 7 + 1;
        list.push_str(&format!("{name} {code}\n"));
        let lm = face(rng, 100);
        let img = face_image(100, 100, &lm).to_three_channel();
        // One image ships under the aligned-folder naming.
        let file = if i == 2 {
            name.replace(".png", "_aligned.png")
        } else {
            name.clone()
        };
        save(&images.join(file), &img);
        set.insert(record(&name, lm, 100.0)).unwrap();
    }
    fs::write(dir.join("list_patition_label.txt"), list).unwrap();
    write_landmark_file(dir.join("landmarks.jsonl"), &set).unwrap();
}

fn affectnet(dir: &Path, rng: &mut ChaCha8Rng) {
    let images = dir.join("images");
    let mut csv = String::from("subDirectory_filePath,face_x,face_y,face_width,face_height,expression\n");
    let mut set = LandmarkSet::new();
    for (i, code) in [0, 1, 2, 3, 4, 5, 6, 7, 8, 10].into_iter().enumerate() {
        let rel = format!("{}/{:04}.png", i % 3 + 1, i);
        csv.push_str(&format!("{rel},0,0,112,112,{code}\n"));
        if code >= 8 {
            continue;
        }
        let lm = face(rng, 112);
        save(&images.join(&rel), &face_image(112, 112, &lm).to_three_channel());
        set.insert(record(&rel, lm, 112.0)).unwrap();
    }
    fs::write(dir.join("validation.csv"), csv).unwrap();
    fs::write(
        dir.join("layout.txt"),
        "path_column = subDirectory_filePath\nlabel_column = expression\nsplit = val\n",
    )
    .unwrap();
    write_landmark_file(dir.join("landmarks.jsonl"), &set).unwrap();
}

fn main() {
    let root: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()).into();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    ferplus(&root.join("ferplus"), &mut rng);
    rafdb(&root.join("rafdb"), &mut rng);
    affectnet(&root.join("affectnet"), &mut rng);
    println!("fixtures written to {}", root.display());
}
