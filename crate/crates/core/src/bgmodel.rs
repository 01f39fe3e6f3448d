//! Robust static background model: per-pixel trimmed mean and an
//! IQR-based standard deviation estimated from a strided frame sample.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::raster::Image;

/// Fewest sampled frames for which quartile trimming is meaningful.
pub const MIN_SAMPLED_FRAMES: usize = 8;

const MODEL_MAGIC: &[u8; 4] = b"FGBG";

/// How the model builder samples and trims the frame sequence.
#[derive(Debug, Clone, Copy)]
pub struct ModelConfig {
    /// Use every `sample_stride`-th frame.
    pub sample_stride: usize,
    /// Keep samples with rank fraction in [lower_pct, upper_pct].
    pub lower_pct: f64,
    pub upper_pct: f64,
    /// Smallest allowed per-channel std; δ normalization divides by std.
    pub std_floor: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { sample_stride: 4, lower_pct: 0.25, upper_pct: 0.75, std_floor: 1.0 / 255.0 }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_stride == 0 {
            return Err(Error::InvalidInput("sample_stride must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lower_pct)
            || !(0.0..=1.0).contains(&self.upper_pct)
            || self.lower_pct >= self.upper_pct
        {
            return Err(Error::InvalidInput(format!(
                "percentiles must satisfy 0 <= lower < upper <= 1, got {} and {}",
                self.lower_pct, self.upper_pct
            )));
        }
        if self.std_floor <= 0.0 {
            return Err(Error::InvalidInput("std_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Per-pixel, per-channel mean and standard deviation of the static scene.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    height: usize,
    width: usize,
    channels: usize,
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl BackgroundModel {
    pub fn from_parts(
        height: usize,
        width: usize,
        channels: usize,
        mean: Vec<f64>,
        std: Vec<f64>,
    ) -> Result<Self> {
        let n = height * width * channels;
        if n == 0 || (channels != 1 && channels != 3) {
            return Err(Error::InvalidInput(format!(
                "bad model shape {height}x{width}x{channels}"
            )));
        }
        if mean.len() != n || std.len() != n {
            return Err(Error::Mismatch(format!(
                "model arrays have {} and {} entries, expected {}",
                mean.len(),
                std.len(),
                n
            )));
        }
        if mean.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::InvalidInput("model mean outside [0, 1]".into()));
        }
        if std.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidInput("model std must be positive".into()));
        }
        Ok(BackgroundModel { height, width, channels, mean, std })
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

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    /// Serializes as a flat binary file: 16-byte header (magic "FGBG",
    /// u32 height, width, channels, little-endian) followed by the mean
    /// then std arrays as little-endian f64, row-major.
    pub fn save(&self, path: &Path) -> Result<()> {
        let n = self.mean.len();
        let mut out = Vec::with_capacity(16 + 16 * n);
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.channels as u32).to_le_bytes());
        for v in self.mean.iter().chain(&self.std) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, out).map_err(|source| Error::Io { path: path.into(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let bad = |detail: &str| Error::Format { path: path.into(), detail: detail.into() };
        if bytes.len() < 16 || &bytes[..4] != MODEL_MAGIC {
            return Err(bad("not a FGBG model file"));
        }
        let field = |i: usize| {
            u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize
        };
        let (h, w, c) = (field(0), field(1), field(2));
        let n = h * w * c;
        if bytes.len() != 16 + 16 * n {
            return Err(bad(&format!("expected {} bytes for {h}x{w}x{c}, found {}", 16 + 16 * n, bytes.len())));
        }
        let read_f64s = |offset: usize| -> Vec<f64> {
            bytes[offset..offset + 8 * n]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        };
        BackgroundModel::from_parts(h, w, c, read_f64s(16), read_f64s(16 + 8 * n))
    }
}

/// Standard-normal quantile span Φ⁻¹(upper) − Φ⁻¹(lower); for the default
/// quartiles this is 1.34898.
pub fn normal_quantile_span(lower: f64, upper: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(upper) - normal.inverse_cdf(lower)
}

/// Builds the background model from every `sample_stride`-th frame: per
/// pixel-channel the samples are sorted, ranks outside
/// [lower_pct, upper_pct] are discarded, the mean is the mean of the kept
/// samples, and the std is the interquantile span divided by the matching
/// normal quantile span (floored at `std_floor`).
pub fn build_background(frames: &[Image], cfg: &ModelConfig) -> Result<BackgroundModel> {
    cfg.validate()?;
    let sampled: Vec<&Image> = frames.iter().step_by(cfg.sample_stride).collect();
    if sampled.len() < MIN_SAMPLED_FRAMES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_SAMPLED_FRAMES} sampled frames, got {} ({} frames at stride {})",
            sampled.len(),
            frames.len(),
            cfg.sample_stride
        )));
    }
    let first = sampled[0];
    for f in &sampled[1..] {
        if !f.same_shape(first) {
            return Err(Error::Mismatch(format!(
                "frame is {}x{}x{} but first frame is {}x{}x{}",
                f.height(),
                f.width(),
                f.channels(),
                first.height(),
                first.width(),
                first.channels()
            )));
        }
    }

    let m = sampled.len();
    let lo_rank = cfg.lower_pct * (m - 1) as f64;
    let hi_rank = cfg.upper_pct * (m - 1) as f64;
    let keep_first = (lo_rank - 1e-9).ceil() as usize;
    let keep_last = (hi_rank + 1e-9).floor() as usize;
    if keep_first > keep_last {
        return Err(Error::InvalidInput(format!(
            "percentile band [{}, {}] keeps no samples out of {m}",
            cfg.lower_pct, cfg.upper_pct
        )));
    }
    let z_span = normal_quantile_span(cfg.lower_pct, cfg.upper_pct);

    let n = first.height() * first.width() * first.channels();
    let stats: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let mut samples: Vec<f64> = sampled.iter().map(|f| f.data()[idx]).collect();
            samples.sort_unstable_by(f64::total_cmp);
            let kept = &samples[keep_first..=keep_last];
            // A constant kept band gets its value back bit-exactly.
            let mean = if kept[0] == kept[kept.len() - 1] {
                kept[0]
            } else {
                kept.iter().sum::<f64>() / kept.len() as f64
            };
            let spread = interpolate(&samples, hi_rank) - interpolate(&samples, lo_rank);
            (mean, (spread / z_span).max(cfg.std_floor))
        })
        .collect();

    let (mean, std) = stats.into_iter().unzip();
    BackgroundModel::from_parts(first.height(), first.width(), first.channels(), mean, std)
}

/// Linear interpolation between order statistics of a sorted slice.
fn interpolate(sorted: &[f64], rank: f64) -> f64 {
    let i0 = rank.floor() as usize;
    let frac = rank - i0 as f64;
    if frac == 0.0 || i0 + 1 >= sorted.len() {
        sorted[i0]
    } else {
        sorted[i0] * (1.0 - frac) + sorted[i0 + 1] * frac
    }
}
