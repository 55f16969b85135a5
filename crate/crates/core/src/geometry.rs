//! Placement of the headset occlusion patch from 68 facial landmarks.
//!
//! Coordinates live in image space: origin at the top-left corner, x to the
//! right, y downward. Angles follow the same frame, so a positive angle turns
//! the x-axis toward +y (clockwise on screen).

use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub const LANDMARK_COUNT: usize = 68;

/// iBUG 300-W contour indices of the two eyes (0-based, inclusive ranges).
pub const LEFT_EYE: core::ops::RangeInclusive<usize> = 36..=41;
pub const RIGHT_EYE: core::ops::RangeInclusive<usize> = 42..=47;

/// Jaw-contour endpoints adjacent to the temples, used as the reference length.
pub const TEMPORAL_LEFT: usize = 0;
pub const TEMPORAL_RIGHT: usize = 16;

/// Eyes or temporal points closer than this are treated as coincident.
pub const DEGENERACY_EPS_PX: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("eye centers coincide (distance {distance} px)")]
    DegenerateEyes { distance: f64 },
    #[error("temporal reference length is zero (distance {distance} px)")]
    DegenerateFace { distance: f64 },
    #[error("expected {LANDMARK_COUNT} landmarks, got {0}")]
    WrongPointCount(usize),
    #[error("landmark {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("invalid headset spec: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    #[inline]
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    #[inline]
    pub fn midpoint(&self, other: &Self) -> Self {
        Self::new((self.x + other.x) * T::half(), (self.y + other.y) * T::half())
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// The 68 landmarks of one face, in iBUG 300-W order. Points may fall outside
/// the image; only finiteness is enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmarks68<T> {
    points: [Point2<T>; LANDMARK_COUNT],
}

impl<T: Scalar> Landmarks68<T> {
    pub fn new(points: &[Point2<T>]) -> Result<Self, GeometryError> {
        if points.len() != LANDMARK_COUNT {
            return Err(GeometryError::WrongPointCount(points.len()));
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
        let mut out = [Point2::default(); LANDMARK_COUNT];
        out.copy_from_slice(points);
        Ok(Self { points: out })
    }

    #[inline]
    pub fn points(&self) -> &[Point2<T>; LANDMARK_COUNT] {
        &self.points
    }

    #[inline]
    pub fn get(&self, index: usize) -> Point2<T> {
        self.points[index]
    }

    /// Applies `f` to every point. Fails if the result is non-finite.
    pub fn try_map(&self, mut f: impl FnMut(Point2<T>) -> Point2<T>) -> Result<Self, GeometryError> {
        let mapped: Vec<Point2<T>> = self.points.iter().map(|&p| f(p)).collect();
        Self::new(&mapped)
    }

    pub fn translated(&self, offset: Point2<T>) -> Result<Self, GeometryError> {
        self.try_map(|p| p + offset)
    }

    pub fn cast<U: Scalar>(&self) -> Result<Landmarks68<U>, GeometryError> {
        let pts: Vec<Point2<U>> = self.points.iter().map(|p| p.cast()).collect();
        Landmarks68::new(&pts)
    }
}

/// Physical headset footprint plus the assumed head breadth that the
/// temporal reference length corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadsetSpec<T> {
    pub width_mm: T,
    pub height_mm: T,
    /// Physical distance between landmarks 0 and 16.
    pub head_breadth_mm: T,
    /// Shift of the patch center along the face's up direction. Zero keeps
    /// the center on the eye-line midpoint.
    pub vertical_offset_mm: T,
}

impl<T: Scalar> Default for HeadsetSpec<T> {
    /// Samsung Gear VR: 207.1 × 98.6 mm.
    fn default() -> Self {
        Self {
            width_mm: T::lit(207.1),
            height_mm: T::lit(98.6),
            head_breadth_mm: T::lit(152.0),
            vertical_offset_mm: T::zero(),
        }
    }
}

impl<T: Scalar> HeadsetSpec<T> {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.width_mm) {
            return Err(GeometryError::InvalidSpec("width_mm must be positive"));
        }
        if !positive(self.height_mm) {
            return Err(GeometryError::InvalidSpec("height_mm must be positive"));
        }
        if !positive(self.head_breadth_mm) {
            return Err(GeometryError::InvalidSpec("head_breadth_mm must be positive"));
        }
        if !self.vertical_offset_mm.is_finite() {
            return Err(GeometryError::InvalidSpec("vertical_offset_mm must be finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn aspect_ratio(&self) -> T {
        self.width_mm / self.height_mm
    }
}

/// The placed headset rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcclusionPatch<T> {
    pub center: Point2<T>,
    pub width_px: T,
    pub height_px: T,
    pub angle_rad: T,
    /// Top-left, top-right, bottom-right, bottom-left before rotation. This
    /// is positive (counter-clockwise in y-up terms) signed-area order.
    pub corners: [Point2<T>; 4],
}

impl<T: Scalar> OcclusionPatch<T> {
    pub fn translated(&self, offset: Point2<T>) -> Self {
        Self {
            center: self.center + offset,
            corners: self.corners.map(|c| c + offset),
            ..*self
        }
    }
}

/// Arithmetic means of the two 6-point eye contours. `left` is the eye with
/// indices 36–41, which sits at smaller x on an upright frontal face.
pub fn eye_centers<T: Scalar>(landmarks: &Landmarks68<T>) -> (Point2<T>, Point2<T>) {
    (mean_of(landmarks, LEFT_EYE), mean_of(landmarks, RIGHT_EYE))
}

fn mean_of<T: Scalar>(landmarks: &Landmarks68<T>, range: core::ops::RangeInclusive<usize>) -> Point2<T> {
    let n = T::from_usize_lossy(range.clone().count());
    let pts = &landmarks.points()[range];
    let sx: T = pts.iter().map(|p| p.x).sum();
    let sy: T = pts.iter().map(|p| p.y).sum();
    Point2::new(sx / n, sy / n)
}

/// Roll of the eye line, `atan2(Δy, Δx)` in (−π, π].
pub fn interocular_angle<T: Scalar>(left: Point2<T>, right: Point2<T>) -> Result<T, GeometryError> {
    let distance = left.distance(&right);
    if distance <= T::lit(DEGENERACY_EPS_PX) {
        return Err(GeometryError::DegenerateEyes {
            distance: distance.to_f64_lossy(),
        });
    }
    let angle = (right.y - left.y).atan2(right.x - left.x);
    // atan2 yields -π for (-0.0, negative); fold it onto π.
    Ok(if angle <= -T::PI() { T::PI() } else { angle })
}

/// Distance between the two temple-adjacent jaw landmarks (0 and 16).
pub fn temporal_reference_px<T: Scalar>(landmarks: &Landmarks68<T>) -> Result<T, GeometryError> {
    let distance = landmarks.get(TEMPORAL_LEFT).distance(&landmarks.get(TEMPORAL_RIGHT));
    if distance <= T::lit(DEGENERACY_EPS_PX) {
        return Err(GeometryError::DegenerateFace {
            distance: distance.to_f64_lossy(),
        });
    }
    Ok(distance)
}

/// Pixels per millimeter implied by the temporal reference length.
#[inline]
pub fn mm_to_px<T: Scalar>(temporal_px: T, spec: &HeadsetSpec<T>) -> T {
    temporal_px / spec.head_breadth_mm
}

/// Rotates `p` about `pivot` by `angle_rad` in the y-down frame.
#[inline]
pub fn rotate_about<T: Scalar>(p: Point2<T>, pivot: Point2<T>, angle_rad: T) -> Point2<T> {
    let (s, c) = angle_rad.sin_cos();
    let dx = p.x - pivot.x;
    let dy = p.y - pivot.y;
    Point2::new(pivot.x + (c * dx - s * dy), pivot.y + (s * dx + c * dy))
}

/// Sizes, centers and rotates the headset rectangle for one face.
pub fn build_patch<T: Scalar>(
    landmarks: &Landmarks68<T>,
    spec: &HeadsetSpec<T>,
) -> Result<OcclusionPatch<T>, GeometryError> {
    spec.validate()?;
    let (left, right) = eye_centers(landmarks);
    let angle_rad = interocular_angle(left, right)?;
    let scale = mm_to_px(temporal_reference_px(landmarks)?, spec);

    let width_px = spec.width_mm * scale;
    let height_px = spec.height_mm * scale;

    let mut center = left.midpoint(&right);
    if spec.vertical_offset_mm != T::zero() {
        // Face "up" in the y-down frame is the eye-line direction turned by -90°.
        let (s, c) = angle_rad.sin_cos();
        let shift = spec.vertical_offset_mm * scale;
        center = Point2::new(center.x + shift * s, center.y - shift * c);
    }

    let hw = width_px * T::half();
    let hh = height_px * T::half();
    let corners = [
        Point2::new(center.x - hw, center.y - hh),
        Point2::new(center.x + hw, center.y - hh),
        Point2::new(center.x + hw, center.y + hh),
        Point2::new(center.x - hw, center.y + hh),
    ]
    .map(|c| rotate_about(c, center, angle_rad));

    Ok(OcclusionPatch {
        center,
        width_px,
        height_px,
        angle_rad,
        corners,
    })
}
