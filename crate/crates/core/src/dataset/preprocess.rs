use crate::geometry::{Landmarks68, Point2, LANDMARK_COUNT};
use crate::image_buffer::{ImageBuffer, Pixel};
use crate::Scalar;

/// iBUG 68-point left/right correspondence: `MIRROR_PERMUTATION[i]` is the
/// index that lands on `i` after a horizontal flip.
pub const MIRROR_PERMUTATION: [usize; LANDMARK_COUNT] = [
    // jaw
    16, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0, // brows
    26, 25, 24, 23, 22, 21, 20, 19, 18, 17, // nose bridge, nose base
    27, 28, 29, 30, 35, 34, 33, 32, 31, // eyes
    45, 44, 43, 42, 47, 46, 39, 38, 37, 36, 41, 40, // outer lip
    54, 53, 52, 51, 50, 49, 48, 59, 58, 57, 56, 55, // inner lip
    64, 63, 62, 61, 60, 67, 66, 65,
];

/// Per-axis sampling plan: source indices and blend weight per output index.
fn sample_plan(src: u32, dst: u32) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    let last = (src - 1) as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src as usize - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Bilinear resize sampling source coordinate `(i + 0.5) * in/out - 0.5`,
/// clamped to the source frame. Constant images stay constant and a resize
/// to the same size is the identity, both bit-exact.
pub fn resize_bilinear<P: Pixel>(img: &ImageBuffer<P>, out_w: u32, out_h: u32) -> ImageBuffer<P> {
    let ch = img.channels();
    let cols = sample_plan(img.width(), out_w);
    let rows = sample_plan(img.height(), out_h);
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize * ch as usize);
    for &(y0, y1, fy) in &rows {
        let (r0, r1) = (img.row(y0 as u32), img.row(y1 as u32));
        for &(x0, x1, fx) in &cols {
            for c in 0..ch as usize {
                let at = |r: &[P], x: usize| r[x * ch as usize + c].to_f64();
                let top = lerp(at(r0, x0), at(r0, x1), fx);
                let bottom = lerp(at(r1, x0), at(r1, x1), fx);
                data.push(P::from_f64(lerp(top, bottom, fy)));
            }
        }
    }
    ImageBuffer::from_vec(out_w, out_h, ch, data).expect("resize keeps shape consistent")
}

/// `(v - min) / (max - min)` over all channels jointly. A constant image maps
/// to all zeros.
pub fn minmax_normalize<P: Pixel>(img: &ImageBuffer<P>) -> ImageBuffer<f32> {
    let vals = img.as_slice();
    let (min, max) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        let v = v.to_f64();
        (lo.min(v), hi.max(v))
    });
    let range = max - min;
    let data = if range > 0.0 {
        vals.iter().map(|v| ((v.to_f64() - min) / range) as f32).collect()
    } else {
        vec![0.0; vals.len()]
    };
    ImageBuffer::from_vec(img.width(), img.height(), img.channels(), data).expect("same shape")
}

/// Column `x` moves to `width - 1 - x`.
pub fn hflip<P: Pixel>(img: &ImageBuffer<P>) -> ImageBuffer<P> {
    let ch = img.channels() as usize;
    let mut data = Vec::with_capacity(img.as_slice().len());
    for y in 0..img.height() {
        for px in img.row(y).chunks_exact(ch).rev() {
            data.extend_from_slice(px);
        }
    }
    ImageBuffer::from_vec(img.width(), img.height(), img.channels(), data).expect("same shape")
}

/// Landmarks of the horizontally flipped image: `x -> width - x`, with the
/// left/right index groups swapped.
pub fn mirror_landmarks<T: Scalar>(landmarks: &Landmarks68<T>, width: u32) -> Landmarks68<T> {
    let w = T::lit(width as f64);
    let src = landmarks.points();
    let pts: Vec<Point2<T>> = MIRROR_PERMUTATION
        .iter()
        .map(|&j| Point2::new(w - src[j].x, src[j].y))
        .collect();
    Landmarks68::new(&pts).expect("mirroring finite points stays finite")
}
