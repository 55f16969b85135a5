//! Hard-edged filling of the convex occlusion quadrilateral.
//!
//! Coverage rule: pixel `(i, j)` is covered iff its center `(i + 0.5, j + 0.5)`
//! passes [`point_in_quad`], boundary inclusive with a `1e-9` signed-area
//! slack. The scanline fill evaluates that same predicate, so it agrees with
//! per-pixel brute force bit for bit.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::image_buffer::{ImageBuffer, Pixel};
use crate::Scalar;

/// Signed-area slack for the inclusive boundary test.
pub const EDGE_SLACK: f64 = 1e-9;

/// Per-channel fill value. Single-channel images use the first entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FillStyle<P> {
    pub value: [P; 3],
}

impl<P: Pixel> FillStyle<P> {
    pub fn uniform(v: P) -> Self {
        Self { value: [v; 3] }
    }
}

impl<P: Pixel> Default for FillStyle<P> {
    /// Black.
    fn default() -> Self {
        Self::uniform(P::MIN)
    }
}

#[inline]
fn cross<T: Scalar>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> T {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

/// Twice the signed area (shoelace).
fn signed_area2<T: Scalar>(c: &[Point2<T>; 4]) -> T {
    (0..4)
        .map(|i| {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            a.x * b.y - b.x * a.y
        })
        .fold(T::zero(), |acc, v| acc + v)
}

/// Winding of a non-degenerate quad, or `None` when its area is within slack
/// of zero (a segment or a point).
fn winding<T: Scalar>(c: &[Point2<T>; 4]) -> Option<T> {
    let area2 = signed_area2(c);
    if area2.abs() <= T::lit(EDGE_SLACK) {
        None
    } else if area2 > T::zero() {
        Some(T::one())
    } else {
        Some(-T::one())
    }
}

#[inline]
fn edge_ok<T: Scalar>(a: Point2<T>, b: Point2<T>, p: Point2<T>, sign: T) -> bool {
    sign * cross(a, b, p) >= -T::lit(EDGE_SLACK)
}

fn on_segment<T: Scalar>(a: Point2<T>, b: Point2<T>, p: Point2<T>) -> bool {
    let eps = T::lit(EDGE_SLACK);
    let d = b - a;
    let len2 = d.x * d.x + d.y * d.y;
    let v = p - a;
    if len2 <= eps {
        return v.x * v.x + v.y * v.y <= eps;
    }
    if cross(a, b, p).abs() > eps {
        return false;
    }
    let t = v.x * d.x + v.y * d.y;
    t >= -eps && t <= len2 + eps
}

/// Inclusive point-in-convex-quad test. Either winding is accepted; zero-area
/// quads contain exactly the points of their (segment or point) hull.
pub fn point_in_quad<T: Scalar>(p: Point2<T>, corners: &[Point2<T>; 4]) -> bool {
    match winding(corners) {
        Some(sign) => (0..4).all(|i| edge_ok(corners[i], corners[(i + 1) % 4], p, sign)),
        None => (0..4).any(|i| (i + 1..4).any(|j| on_segment(corners[i], corners[j], p))),
    }
}

#[inline]
fn pixel_center<T: Scalar>(i: u32) -> T {
    T::lit(i as f64) + T::half()
}

/// First index in `lo..hi` where the monotone predicate `pred` flips to
/// `target`, or `hi` if it never does.
fn first_where(lo: u32, hi: u32, target: bool, pred: impl Fn(u32) -> bool) -> u32 {
    let (mut lo, mut hi) = (lo, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) == target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Covered pixel runs as `(row, first_col, end_col_exclusive)`, clipped to a
/// `width × height` frame, in row order.
pub fn covered_spans<T: Scalar>(width: u32, height: u32, corners: &[Point2<T>; 4]) -> Vec<(u32, u32, u32)> {
    let mut spans = Vec::new();
    let Some(sign) = winding(corners) else {
        degenerate_spans(width, height, corners, &mut spans);
        return spans;
    };

    for row in 0..height {
        let py = pixel_center::<T>(row);
        let (mut lo, mut hi) = (0u32, width);
        for e in 0..4 {
            if lo >= hi {
                break;
            }
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            let ok = |col: u32| edge_ok(a, b, Point2::new(pixel_center(col), py), sign);
            // Along a row the edge function is monotone in x (rounding is
            // monotone), so each edge accepts a prefix or suffix of columns.
            let slope = -(sign * (b.y - a.y));
            if slope > T::zero() {
                lo = first_where(lo, hi, true, ok);
            } else if slope < T::zero() {
                hi = first_where(lo, hi, false, ok);
            } else if !ok(lo) {
                hi = lo;
            }
        }
        if lo < hi {
            spans.push((row, lo, hi));
        }
    }
    spans
}

fn degenerate_spans<T: Scalar>(width: u32, height: u32, corners: &[Point2<T>; 4], spans: &mut Vec<(u32, u32, u32)>) {
    let clip = |lo: T, hi: T, n: u32| -> (u32, u32) {
        let lo = (lo.to_f64_lossy().floor() - 1.0).max(0.0);
        let hi = (hi.to_f64_lossy().ceil() + 1.0).min(n as f64);
        if hi <= lo {
            (0, 0)
        } else {
            (lo as u32, hi as u32)
        }
    };
    let min_x = corners.iter().map(|c| c.x).fold(T::infinity(), T::min);
    let max_x = corners.iter().map(|c| c.x).fold(T::neg_infinity(), T::max);
    let min_y = corners.iter().map(|c| c.y).fold(T::infinity(), T::min);
    let max_y = corners.iter().map(|c| c.y).fold(T::neg_infinity(), T::max);
    let (x0, x1) = clip(min_x, max_x, width);
    let (y0, y1) = clip(min_y, max_y, height);
    for row in y0..y1 {
        let py = pixel_center::<T>(row);
        let mut start = None;
        for col in x0..=x1 {
            let inside = col < x1 && point_in_quad(Point2::new(pixel_center(col), py), corners);
            match (inside, start) {
                (true, None) => start = Some(col),
                (false, Some(s)) => {
                    spans.push((row, s, col));
                    start = None;
                }
                _ => {}
            }
        }
    }
}

/// Number of pixel centers of a `width × height` frame inside the quad.
pub fn covered_count<T: Scalar>(width: u32, height: u32, corners: &[Point2<T>; 4]) -> usize {
    covered_spans(width, height, corners)
        .iter()
        .map(|&(_, a, b)| (b - a) as usize)
        .sum()
}

/// Fraction of the frame's pixels covered by the quad.
pub fn occluded_fraction<T: Scalar>(width: u32, height: u32, corners: &[Point2<T>; 4]) -> f64 {
    let area = width as usize * height as usize;
    if area == 0 {
        return 0.0;
    }
    covered_count(width, height, corners) as f64 / area as f64
}

/// Paints the quad into `img` in place and returns the covered pixel count.
pub fn fill_quad<T: Scalar, P: Pixel>(
    img: &mut ImageBuffer<P>,
    corners: &[Point2<T>; 4],
    fill: &FillStyle<P>,
) -> usize {
    let channels = img.channels() as usize;
    let fill = &fill.value[..channels];
    let mut covered = 0;
    for (row, a, b) in covered_spans(img.width(), img.height(), corners) {
        let line = img.row_mut(row);
        for px in line[a as usize * channels..b as usize * channels].chunks_exact_mut(channels) {
            px.copy_from_slice(fill);
        }
        covered += (b - a) as usize;
    }
    covered
}

/// Returns a copy of `img` with the quad painted in `fill`.
pub fn rasterize_quad<T: Scalar, P: Pixel>(
    img: &ImageBuffer<P>,
    corners: &[Point2<T>; 4],
    fill: &FillStyle<P>,
) -> ImageBuffer<P> {
    let mut out = img.clone();
    fill_quad(&mut out, corners, fill);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn unit_square() -> [Point2<f64>; 4] {
        [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]
    }

    fn brute_force(w: u32, h: u32, q: &[Point2<f64>; 4]) -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if point_in_quad(p(x as f64 + 0.5, y as f64 + 0.5), q) {
                    v.push((x, y));
                }
            }
        }
        v
    }

    fn span_pixels(w: u32, h: u32, q: &[Point2<f64>; 4]) -> Vec<(u32, u32)> {
        covered_spans(w, h, q)
            .into_iter()
            .flat_map(|(y, a, b)| (a..b).map(move |x| (x, y)))
            .collect()
    }

    #[test]
    fn point_in_quad_examples() {
        let sq = unit_square();
        assert!(point_in_quad(p(0.5, 0.5), &sq));
        assert!(!point_in_quad(p(2.0, 2.0), &sq));
        assert!(point_in_quad(p(1.0, 0.5), &sq));
        assert!(point_in_quad(p(0.0, 0.0), &sq));
        // Reverse winding.
        let mut rev = sq;
        rev.reverse();
        assert!(point_in_quad(p(0.5, 0.5), &rev));
        assert!(!point_in_quad(p(1.5, 0.5), &rev));
    }

    #[test]
    fn degenerate_quads() {
        let point = [p(2.0, 2.0); 4];
        assert!(point_in_quad(p(2.0, 2.0), &point));
        assert!(!point_in_quad(p(2.5, 2.5), &point));
        let seg = [p(0.5, 0.5), p(3.5, 0.5), p(3.5, 0.5), p(0.5, 0.5)];
        assert!(point_in_quad(p(2.0, 0.5), &seg));
        assert!(!point_in_quad(p(4.0, 0.5), &seg));
        assert!(!point_in_quad(p(2.0, 0.6), &seg));
        // A zero-area quad through the row-0 centers covers all 4 of them.
        assert_eq!(span_pixels(4, 4, &seg), brute_force(4, 4, &seg));
        assert_eq!(covered_count(4, 4, &seg), 4);
    }

    #[test]
    fn full_cover() {
        let q = [p(-1.0, -1.0), p(5.0, -1.0), p(5.0, 5.0), p(-1.0, 5.0)];
        let img = ImageBuffer::new(4, 4, 1, 9u8).unwrap();
        let out = rasterize_quad(&img, &q, &FillStyle::default());
        assert!(out.as_slice().iter().all(|&v| v == 0));
        assert_eq!(occluded_fraction(4, 4, &q), 1.0);
    }

    #[test]
    fn point_quad_changes_nothing() {
        let q = [p(2.0, 2.0); 4];
        let img = ImageBuffer::new(4, 4, 1, 9u8).unwrap();
        assert_eq!(rasterize_quad(&img, &q, &FillStyle::default()), img);
    }

    #[test]
    fn left_half() {
        let q = [p(0.0, 0.0), p(2.0, 0.0), p(2.0, 4.0), p(0.0, 4.0)];
        // Brute force over all 16 centers: x in {0.5, 1.5} pass, 8 pixels.
        assert_eq!(brute_force(4, 4, &q).len(), 8);
        let img = ImageBuffer::new(4, 4, 3, 9u8).unwrap();
        let out = rasterize_quad(&img, &q, &FillStyle::uniform(200));
        let changed = (0..4)
            .flat_map(|y| (0..4).map(move |x| (x, y)))
            .filter(|&(x, y)| out.pixel(x, y) != img.pixel(x, y))
            .count();
        assert_eq!(changed, 8);
        assert_eq!(out.pixel(1, 3), &[200, 200, 200]);
        assert_eq!(out.pixel(2, 3), &[9, 9, 9]);
        assert_eq!(occluded_fraction(4, 4, &q), 0.5);
    }

    #[test]
    fn outside_frame() {
        let q = [p(10.0, 10.0), p(20.0, 10.0), p(20.0, 20.0), p(10.0, 20.0)];
        assert_eq!(occluded_fraction(4, 4, &q), 0.0);
        let q = [p(-10.0, 0.0), p(-1.0, 0.0), p(-1.0, 4.0), p(-10.0, 4.0)];
        assert_eq!(occluded_fraction(4, 4, &q), 0.0);
    }

    #[test]
    fn corner_rotation_invariance() {
        let q = [p(0.3, 1.2), p(6.1, 0.4), p(7.7, 5.9), p(1.1, 6.6)];
        let base = span_pixels(9, 9, &q);
        for k in 1..4 {
            let mut r = q;
            r.rotate_left(k);
            assert_eq!(span_pixels(9, 9, &r), base);
        }
        assert_eq!(base, brute_force(9, 9, &q));
    }

    #[test]
    fn f32_corners() {
        let q: [Point2<f32>; 4] = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 4.0),
            Point2::new(0.0, 4.0),
        ];
        assert_eq!(covered_count(4, 4, &q), 8);
    }

    #[test]
    fn float_images_fill() {
        let q = unit_square().map(|c| c * 4.0);
        let img = ImageBuffer::new(2, 2, 1, 0.25f32).unwrap();
        let out = rasterize_quad(&img, &q, &FillStyle::uniform(1.0f32));
        assert!(out.as_slice().iter().all(|&v| v == 1.0));
    }
}
