//! Per-pixel normalized difference between a frame and the background
//! model, with optional shadow-tolerant handling in HSV space.

use crate::bgmodel::BackgroundModel;
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Image};

/// Per-pixel difference δ between a frame and the background model, in
/// std units summed over channels. `difference` always produces δ ≥ 0;
/// the synthetic benchmark feeds raw noisy signal through the same type,
/// where δ may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMap {
    height: usize,
    width: usize,
    delta: Vec<f64>,
}

impl DifferenceMap {
    pub fn new(height: usize, width: usize, delta: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput("difference map must be at least 1x1".into()));
        }
        if delta.len() != height * width {
            return Err(Error::Mismatch(format!(
                "difference map has {} entries, expected {}x{} = {}",
                delta.len(),
                height,
                width,
                height * width
            )));
        }
        Ok(DifferenceMap { height, width, delta })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.height && j < self.width);
        self.delta[i * self.width + j]
    }

    /// Pointwise foreground test δ > tau (ties go to background).
    pub fn threshold(&self, tau: f64) -> BinaryMask {
        let bits = self.delta.iter().map(|&d| d > tau).collect();
        BinaryMask::new(self.height, self.width, bits).expect("delta length is validated")
    }
}

/// Shadow handling: compare in HSV and discount small darkenings of V.
#[derive(Debug, Clone, Copy)]
pub struct ShadowConfig {
    pub enabled: bool,
    /// Largest decrease in V (fraction of the total range) treated as
    /// shadow rather than foreground.
    pub v_discount: f64,
}

impl Default for ShadowConfig {
    fn default() -> Self {
        ShadowConfig { enabled: false, v_discount: 0.05 }
    }
}

impl ShadowConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.v_discount) {
            return Err(Error::InvalidInput(format!(
                "v_discount must be in [0, 1], got {}",
                self.v_discount
            )));
        }
        Ok(())
    }
}

/// Computes δ = Σ_c |frame_c − mean_c| / std_c per pixel.
///
/// With shadows enabled on 3-channel input, the frame and model are
/// interpreted as HSV (the model must have been built from HSV frames):
/// the hue term uses circular distance scaled by the smaller of the two
/// saturations, and decreases of V no larger than `v_discount` contribute
/// nothing.
pub fn difference(
    frame: &Image,
    model: &BackgroundModel,
    shadow: &ShadowConfig,
) -> Result<DifferenceMap> {
    shadow.validate()?;
    if (frame.height(), frame.width(), frame.channels())
        != (model.height(), model.width(), model.channels())
    {
        return Err(Error::Mismatch(format!(
            "frame is {}x{}x{} but model is {}x{}x{}",
            frame.height(),
            frame.width(),
            frame.channels(),
            model.height(),
            model.width(),
            model.channels()
        )));
    }
    let (h, w, c) = (frame.height(), frame.width(), frame.channels());
    let hsv = shadow.enabled && c == 3;
    let mut delta = Vec::with_capacity(h * w);
    for px in 0..h * w {
        let base = px * c;
        let d = if hsv {
            hsv_pixel_difference(frame, model, base, shadow.v_discount)
        } else {
            (0..c)
                .map(|k| {
                    (frame.data()[base + k] - model.mean()[base + k]).abs()
                        / model.std()[base + k]
                })
                .sum()
        };
        delta.push(d);
    }
    DifferenceMap::new(h, w, delta)
}

fn hsv_pixel_difference(frame: &Image, model: &BackgroundModel, base: usize, v_discount: f64) -> f64 {
    let (fh, fs, fv) = (frame.data()[base], frame.data()[base + 1], frame.data()[base + 2]);
    let (mh, ms, mv) = (model.mean()[base], model.mean()[base + 1], model.mean()[base + 2]);

    // Hue lives on a circle; desaturated pixels carry no usable hue.
    let dh = (fh - mh).abs();
    let circular = dh.min(1.0 - dh);
    let hue_term = circular * fs.min(ms) / model.std()[base];

    let sat_term = (fs - ms).abs() / model.std()[base + 1];

    let darkening = mv - fv;
    let val_term = if darkening > 0.0 && darkening <= v_discount {
        0.0
    } else {
        darkening.abs() / model.std()[base + 2]
    };

    hue_term + sat_term + val_term
}

/// Renders δ for inspection: clipped to [0, 4·tau] and scaled linearly
/// into [0, 1] as a grayscale image.
pub fn preview_image(diff: &DifferenceMap, tau: f64) -> Image {
    let top = 4.0 * tau;
    let data = diff.delta.iter().map(|&d| (d.clamp(0.0, top)) / top).collect();
    Image::new(diff.height, diff.width, 1, data).expect("clipped values are in range")
}
