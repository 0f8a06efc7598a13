//! Raster types shared by every stage, plus color conversion, resampling and
//! file I/O.

mod color;
pub mod io;
mod resize;

pub use color::{rgb_to_hsv, rgb_to_lab};
pub use resize::{resize_bilinear, resize_frame};

use crate::error::{Error, Result};

/// One RGB video frame, 8 bits per channel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    index: usize,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>, index: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "frame must be at least 1x1, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::LengthMismatch {
                expected: width * height * 3,
                got: pixels.len(),
            });
        }
        Ok(Frame {
            width,
            height,
            pixels,
            index,
        })
    }

    /// A frame painted with a single color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3], index: usize) -> Result<Self> {
        let pixels = rgb.repeat(width * height);
        Frame::new(width, height, pixels, index)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        index: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Frame::new(width, height, pixels, index)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn iter_pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.pixels.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }
}

/// Per-pixel object probability, row-major, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "map must be at least 1x1, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: values.len(),
            });
        }
        if let Some((at, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ValueOutOfRange { value, at });
        }
        Ok(ProbabilityMap {
            width,
            height,
            values,
        })
    }

    /// Builds a map from arbitrary reals, clamping into `[0, 1]`. NaN maps to 0.
    pub fn from_clamped(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let values = values
            .into_iter()
            .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
            .collect();
        ProbabilityMap::new(width, height, values)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        ProbabilityMap::new(width, height, vec![value; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        ProbabilityMap::constant(width, height, 0.0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn same_dims(&self, width: usize, height: usize) -> Result<()> {
        check_dims((width, height), (self.width, self.height))
    }
}

/// Foreground/background raster; `true` marks the primary object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "mask must be at least 1x1, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                got: bits.len(),
            });
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        BinaryMask::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        BinaryMask::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// The mask as a 0/1 probability map.
    pub fn to_map(&self) -> ProbabilityMap {
        ProbabilityMap {
            width: self.width,
            height: self.height,
            values: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn same_dims(&self, other: &BinaryMask) -> Result<()> {
        check_dims((self.width, self.height), (other.width, other.height))
    }
}

pub(crate) fn check_dims(expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            expected_w: expected.0,
            expected_h: expected.1,
            got_w: got.0,
            got_h: got.1,
        });
    }
    Ok(())
}

/// Frames of one video in temporal order; indices are exactly `0..len`.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    source_id: String,
    frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn new(source_id: impl Into<String>, frames: Vec<Frame>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Sequence("sequence has no frames".into()));
        }
        for (pos, frame) in frames.iter().enumerate() {
            if frame.index() != pos {
                return Err(Error::Sequence(format!(
                    "frame at position {pos} carries index {}",
                    frame.index()
                )));
            }
        }
        let (w, h) = (frames[0].width(), frames[0].height());
        for frame in &frames[1..] {
            check_dims((w, h), (frame.width(), frame.height()))?;
        }
        Ok(FrameSequence {
            source_id: source_id.into(),
            frames,
        })
    }

    /// Renumbers the frames `0..len` in the given order.
    pub fn from_ordered(source_id: impl Into<String>, frames: Vec<Frame>) -> Result<Self> {
        let frames = frames
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.with_index(i))
            .collect();
        FrameSequence::new(source_id, frames)
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rejects_bad_buffer() {
        assert!(Frame::new(2, 2, vec![0; 11], 0).is_err());
        assert!(Frame::new(0, 2, vec![], 0).is_err());
        assert!(Frame::new(2, 2, vec![0; 12], 0).is_ok());
    }

    #[test]
    fn map_rejects_out_of_range() {
        let err = ProbabilityMap::new(2, 1, vec![0.5, 1.5]).unwrap_err();
        assert!(matches!(err, Error::ValueOutOfRange { at: 1, .. }));
        assert!(ProbabilityMap::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn sequence_requires_contiguous_indices() {
        let f = |i| Frame::filled(2, 2, [0, 0, 0], i).unwrap();
        assert!(FrameSequence::new("v", vec![f(0), f(1), f(2)]).is_ok());
        assert!(FrameSequence::new("v", vec![f(0), f(2)]).is_err());
        assert!(FrameSequence::new("v", vec![f(1), f(0)]).is_err());
        assert!(FrameSequence::new("v", vec![]).is_err());
    }
}
