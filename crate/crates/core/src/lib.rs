//! Simulation of the facial occlusion caused by a head-mounted VR display
//! (Samsung Gear VR footprint by default) on face images, plus the dataset
//! preprocessing chain that turns FER+, RAF-DB and AffectNet into occluded,
//! resized, normalized and flip-augmented training exports.
//!
//! The geometric core ([`geometry`], [`raster`], [`landmark_io`]) is generic
//! over the floating point [`Scalar`] type; the aliases at the crate root pin
//! it to `f64`, which is what the dataset pipeline uses.

pub mod dataset;
pub mod geometry;
pub mod image_buffer;
pub mod landmark_io;
pub mod raster;
mod scalar;
pub mod synthetic;

pub use scalar::Scalar;

pub use geometry::{GeometryError, LANDMARK_COUNT};
pub use image_buffer::{ImageBuffer, ImageError, Pixel};
pub use landmark_io::{LandmarkError, LandmarkWarning};
pub use raster::FillStyle;

pub type Point2 = geometry::Point2<f64>;
pub type Landmarks68 = geometry::Landmarks68<f64>;
pub type HeadsetSpec = geometry::HeadsetSpec<f64>;
pub type OcclusionPatch = geometry::OcclusionPatch<f64>;
pub type LandmarkRecord = landmark_io::LandmarkRecord<f64>;
pub type LandmarkSet = landmark_io::LandmarkSet<f64>;

pub type Point2f32 = geometry::Point2<f32>;
pub type Landmarks68f32 = geometry::Landmarks68<f32>;
pub type HeadsetSpecf32 = geometry::HeadsetSpec<f32>;
pub type OcclusionPatchf32 = geometry::OcclusionPatch<f32>;

/// 8-bit source image.
pub type GrayOrRgb8 = ImageBuffer<u8>;
/// Unit-interval image produced by min-max normalization.
pub type NormalizedImage = ImageBuffer<f32>;
