//! Synthetic 68-point faces and face images for fixtures and tests.
//!
//! The template is left/right symmetric in the iBUG index layout, so an
//! unrolled face centered on the image midline is a fixed point of landmark
//! mirroring (up to rounding).

use core::f64::consts::PI;

use rand::Rng;

use crate::geometry::{rotate_about, Landmarks68, Point2, LANDMARK_COUNT};
use crate::image_buffer::ImageBuffer;

/// Template in units of the inter-ocular distance, eye midpoint at origin.
fn template() -> [(f64, f64); LANDMARK_COUNT] {
    let mut t = [(0.0, 0.0); LANDMARK_COUNT];

    // Jaw 0..=16, a U from temple to temple.
    for (i, slot) in t.iter_mut().enumerate().take(17) {
        let a = PI * i as f64 / 16.0;
        *slot = (-0.95 * a.cos(), 0.1 + 1.1 * a.sin());
    }
    // Brows, 17..=21 and their mirror 26..=22.
    let brow = [
        (-0.8, -0.3),
        (-0.65, -0.4),
        (-0.48, -0.44),
        (-0.32, -0.42),
        (-0.17, -0.36),
    ];
    for (k, &(x, y)) in brow.iter().enumerate() {
        t[17 + k] = (x, y);
        t[26 - k] = (-x, y);
    }
    // Nose bridge and base.
    for k in 0..4 {
        t[27 + k] = (0.0, 0.15 * k as f64);
    }
    let base = [(-0.2, 0.55), (-0.1, 0.57), (0.0, 0.58)];
    for (k, &(x, y)) in base.iter().enumerate() {
        t[31 + k] = (x, y);
        t[35 - k] = (-x, y);
    }
    // Eyes: 36 outer corner, 39 inner corner; 42..=47 mirror 39,38,37,36,41,40.
    let eye = [
        (-0.7, 0.0),
        (-0.57, -0.07),
        (-0.43, -0.07),
        (-0.3, 0.0),
        (-0.43, 0.07),
        (-0.57, 0.07),
    ];
    let right_order = [3usize, 2, 1, 0, 5, 4];
    for k in 0..6 {
        t[36 + k] = eye[k];
        let (x, y) = eye[right_order[k]];
        t[42 + k] = (-x, y);
    }
    // Outer lip 48..=59, inner lip 60..=67.
    let (cx, cy) = (0.0, 0.85);
    for k in 0..=6 {
        let a = PI - k as f64 * PI / 6.0;
        t[48 + k] = (cx + 0.35 * a.cos(), cy - 0.15 * a.sin());
    }
    for k in 1..=5 {
        let a = -(k as f64) * PI / 6.0;
        t[54 + k] = (cx + 0.35 * a.cos(), cy - 0.15 * a.sin());
    }
    for k in 0..=4 {
        let a = PI - k as f64 * PI / 4.0;
        t[60 + k] = (cx + 0.25 * a.cos(), cy - 0.08 * a.sin());
    }
    for k in 1..=3 {
        let a = -(k as f64) * PI / 4.0;
        t[64 + k] = (cx + 0.25 * a.cos(), cy - 0.08 * a.sin());
    }
    t
}

/// A frontal face with its eye midpoint at `center`, eyes `eye_distance`
/// apart, rolled by `roll` radians (y-down frame).
pub fn frontal_face(center: Point2<f64>, eye_distance: f64, roll: f64) -> Landmarks68<f64> {
    let pts: Vec<Point2<f64>> = template()
        .iter()
        .map(|&(x, y)| {
            let p = Point2::new(center.x + x * eye_distance, center.y + y * eye_distance);
            rotate_about(p, center, roll)
        })
        .collect();
    Landmarks68::new(&pts).expect("template is finite")
}

/// A randomly placed, sized, rolled and jittered face roughly inside a
/// `width × height` frame.
pub fn random_face<R: Rng + ?Sized>(rng: &mut R, width: u32, height: u32) -> Landmarks68<f64> {
    let (w, h) = (width as f64, height as f64);
    let span = w.min(h);
    let eye_distance = rng.gen_range(0.2..0.45) * span;
    let center = Point2::new(rng.gen_range(0.3..0.7) * w, rng.gen_range(0.3..0.55) * h);
    let roll = rng.gen_range(-0.6..0.6);
    let jitter = 0.02 * eye_distance;
    let face = frontal_face(center, eye_distance, roll);
    face.try_map(|p| {
        Point2::new(
            p.x + rng.gen_range(-jitter..=jitter),
            p.y + rng.gen_range(-jitter..=jitter),
        )
    })
    .expect("jittered template is finite")
}

/// A random 8-bit image with no pixel equal to 0, so every filled pixel is a
/// visible change.
pub fn random_image<R: Rng + ?Sized>(rng: &mut R, width: u32, height: u32, channels: u8) -> ImageBuffer<u8> {
    let n = width as usize * height as usize * channels as usize;
    let data = (0..n).map(|_| rng.gen_range(1..=255u8)).collect();
    ImageBuffer::from_vec(width, height, channels, data).expect("consistent shape")
}

/// A crude shaded face: mid-gray background with a lighter ellipse, so
/// fixtures look like faces in previews.
pub fn face_image(width: u32, height: u32, landmarks: &Landmarks68<f64>) -> ImageBuffer<u8> {
    let pts = landmarks.points();
    let (cx, cy) = (
        pts.iter().map(|p| p.x).sum::<f64>() / LANDMARK_COUNT as f64,
        pts.iter().map(|p| p.y).sum::<f64>() / LANDMARK_COUNT as f64,
    );
    let rx = pts[0].distance(&pts[16]) * 0.55;
    let ry = rx * 1.3;
    let mut img = ImageBuffer::new(width, height, 1, 90u8).expect("non-empty frame");
    for y in 0..height {
        for x in 0..width {
            let dx = (x as f64 + 0.5 - cx) / rx;
            let dy = (y as f64 + 0.5 - cy) / ry;
            let r2 = dx * dx + dy * dy;
            if r2 <= 1.0 {
                let v = 200.0 - 60.0 * r2 + ((x * 7 + y * 13) % 11) as f64;
                img.set(x, y, 0, v as u8);
            }
        }
    }
    for p in pts {
        let (x, y) = (p.x.floor(), p.y.floor());
        if x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64 {
            img.set(x as u32, y as u32, 0, 30);
        }
    }
    img
}
