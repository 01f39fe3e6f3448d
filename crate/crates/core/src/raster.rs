//! Core raster types shared by every stage of the pipeline.

use crate::error::{Error, Result};

/// An H×W×C raster of real-valued samples in [0, 1], row-major and
/// channel-interleaved. C is 1 (grayscale) or 3 (color).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput("image dimensions must be at least 1x1".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!("channels must be 1 or 3, got {channels}")));
        }
        if data.len() != height * width * channels {
            return Err(Error::Mismatch(format!(
                "image data has {} samples, expected {}x{}x{} = {}",
                data.len(),
                height,
                width,
                channels,
                height * width * channels
            )));
        }
        if let Some(s) = data.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidInput(format!("sample {s} outside [0, 1]")));
        }
        Ok(Image { height, width, channels, data })
    }

    /// Uniform image with every sample equal to `value`.
    pub fn constant(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Image::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Sample at row `i`, column `j`, channel `c`.
    #[inline]
    pub fn sample(&self, i: usize, j: usize, c: usize) -> f64 {
        debug_assert!(i < self.height && j < self.width && c < self.channels);
        self.data[(i * self.width + j) * self.channels + c]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }
}

/// An H×W boolean foreground labeling (true = foreground).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput("mask dimensions must be at least 1x1".into()));
        }
        if bits.len() != height * width {
            return Err(Error::Mismatch(format!(
                "mask has {} bits, expected {}x{} = {}",
                bits.len(),
                height,
                width,
                height * width
            )));
        }
        Ok(BinaryMask { height, width, bits })
    }

    pub fn filled(height: usize, width: usize, value: bool) -> Self {
        BinaryMask { height, width, bits: vec![value; height * width] }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.height && j < self.width);
        self.bits[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.height && j < self.width);
        self.bits[i * self.width + j] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.height == other.height && self.width == other.width
    }
}

/// Standard hexcone RGB→HSV conversion with every channel normalized to
/// [0, 1]. Hue is circular (0 and 1 are the same hue) and defined as 0 for
/// achromatic pixels; V is exactly max(R, G, B).
pub fn rgb_to_hsv(img: &Image) -> Result<Image> {
    if img.channels != 3 {
        return Err(Error::InvalidInput(format!(
            "rgb_to_hsv needs a 3-channel image, got {} channels",
            img.channels
        )));
    }
    let mut out = Vec::with_capacity(img.data.len());
    for px in img.data.chunks_exact(3) {
        let (r, g, b) = (px[0], px[1], px[2]);
        let v = r.max(g).max(b);
        let min = r.min(g).min(b);
        let range = v - min;
        let s = if v > 0.0 { range / v } else { 0.0 };
        let h = if range > 0.0 {
            let h6 = if r == v {
                (g - b) / range
            } else if g == v {
                (b - r) / range + 2.0
            } else {
                (r - g) / range + 4.0
            };
            let h = h6 / 6.0;
            if h < 0.0 {
                h + 1.0
            } else {
                h
            }
        } else {
            0.0
        };
        out.push(h);
        out.push(s);
        out.push(v);
    }
    Image::new(img.height, img.width, 3, out)
}
