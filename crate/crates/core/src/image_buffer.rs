use core::fmt::Debug;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyFrame { width: u32, height: u32 },
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    Channels(u8),
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    Length { expected: usize, actual: usize },
    #[error("pixel value out of range")]
    Range,
}

/// Sample type of an [`ImageBuffer`]: 8-bit source values or unit-interval
/// floats after normalization.
pub trait Pixel: Copy + PartialEq + PartialOrd + Debug + Default + Send + Sync + 'static {
    const MIN: Self;
    const MAX: Self;

    fn to_f64(self) -> f64;

    /// Nearest representable value, clamped to `MIN..=MAX`.
    fn from_f64(v: f64) -> Self;
}

impl Pixel for u8 {
    const MIN: Self = 0;
    const MAX: Self = 255;

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v.round().clamp(0.0, 255.0) as u8
    }
}

impl Pixel for f32 {
    const MIN: Self = 0.0;
    const MAX: Self = 1.0;

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        (v as f32).clamp(0.0, 1.0)
    }
}

/// Row-major, channel-interleaved pixel grid with 1 or 3 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer<P> {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<P>,
}

fn check_shape(width: u32, height: u32, channels: u8) -> Result<usize, ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::EmptyFrame { width, height });
    }
    if channels != 1 && channels != 3 {
        return Err(ImageError::Channels(channels));
    }
    Ok(width as usize * height as usize * channels as usize)
}

impl<P: Pixel> ImageBuffer<P> {
    pub fn new(width: u32, height: u32, channels: u8, value: P) -> Result<Self, ImageError> {
        let n = check_shape(width, height, channels)?;
        Ok(Self {
            width,
            height,
            channels,
            data: vec![value; n],
        })
    }

    pub fn from_vec(width: u32, height: u32, channels: u8, data: Vec<P>) -> Result<Self, ImageError> {
        let expected = check_shape(width, height, channels)?;
        if data.len() != expected {
            return Err(ImageError::Length {
                expected,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !(*v >= P::MIN && *v <= P::MAX)) {
            return Err(ImageError::Range);
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> u8 {
        self.channels
    }

    #[inline]
    pub fn as_slice(&self) -> &[P] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<P> {
        self.data
    }

    #[inline]
    fn index(&self, x: u32, y: u32, c: u8) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize + c as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, c: u8) -> P {
        self.data[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: u8, v: P) {
        let i = self.index(x, y, c);
        self.data[i] = v;
    }

    /// All channels of one pixel.
    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> &[P] {
        let i = self.index(x, y, 0);
        &self.data[i..i + self.channels as usize]
    }

    /// Mutable view of one row, `width * channels` samples.
    #[inline]
    pub fn row_mut(&mut self, y: u32) -> &mut [P] {
        let stride = self.width as usize * self.channels as usize;
        let start = y as usize * stride;
        &mut self.data[start..start + stride]
    }

    #[inline]
    pub fn row(&self, y: u32) -> &[P] {
        let stride = self.width as usize * self.channels as usize;
        let start = y as usize * stride;
        &self.data[start..start + stride]
    }

    /// Replicates a single-channel image into three identical channels.
    /// Three-channel images are returned unchanged.
    pub fn to_three_channel(&self) -> Self {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        Self {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }
}
