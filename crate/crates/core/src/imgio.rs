//! Lossless image file IO: binary PGM (P5) / PPM (P6) and 8-bit PNG in,
//! PGM masks out. Formats are sniffed from the file's magic bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Image};

/// Loads a PGM (P5), PPM (P6), or 8-bit PNG file, scaling samples to [0, 1]
/// by the format's max value. Grayscale yields 1 channel, color 3.
pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|source| Error::Io { path: path.into(), source })?;
    match bytes.get(..2) {
        Some(b"P5") | Some(b"P6") => decode_pnm(&bytes, path),
        Some([0x89, b'P']) => decode_png(&bytes, path),
        _ => Err(Error::Format {
            path: path.into(),
            detail: "unsupported format (expected P5/P6 PNM or PNG)".into(),
        }),
    }
}

/// Writes an image losslessly: P5 for 1 channel, P6 for 3, maxval 255.
/// Samples are quantized as round(s * 255).
pub fn save_image(img: &Image, path: &Path) -> Result<()> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{}\n{} {}\n255\n", magic, img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&s| (s * 255.0).round() as u8));
    write_file(path, &out)
}

/// Writes a mask as binary PGM: foreground 255, background 0.
pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0u8 }));
    write_file(path, &out)
}

/// Reads a P5 PGM as a mask; any nonzero byte counts as foreground.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let bytes = fs::read(path).map_err(|source| Error::Io { path: path.into(), source })?;
    if bytes.get(..2) != Some(b"P5") {
        return Err(Error::Format { path: path.into(), detail: "mask must be a P5 PGM".into() });
    }
    let (w, h, _maxval, data) = parse_pnm_body(&bytes, path, 1)?;
    let bits = data.iter().map(|&b| b != 0).collect();
    BinaryMask::new(h, w, bits)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f =
        fs::File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
    f.write_all(bytes).map_err(|source| Error::Io { path: path.into(), source })
}

fn decode_pnm(bytes: &[u8], path: &Path) -> Result<Image> {
    let channels = if &bytes[..2] == b"P5" { 1 } else { 3 };
    let (w, h, maxval, data) = parse_pnm_body(bytes, path, channels)?;
    let mut samples = Vec::with_capacity(data.len());
    for &b in data {
        if b as u32 > maxval {
            return Err(Error::Format {
                path: path.into(),
                detail: format!("sample {b} exceeds maxval {maxval}"),
            });
        }
        samples.push(b as f64 / maxval as f64);
    }
    Image::new(h, w, channels, samples)
}

/// Parses the ASCII header after the magic and returns (width, height,
/// maxval, raster bytes). Only 8-bit depth (maxval <= 255) is supported.
fn parse_pnm_body<'a>(
    bytes: &'a [u8],
    path: &Path,
    channels: usize,
) -> Result<(usize, usize, u32, &'a [u8])> {
    let malformed = |detail: &str| Error::Format { path: path.into(), detail: detail.into() };

    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and '#' comment lines between header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(malformed("truncated header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(malformed("expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("unparsable header field"))?;
    }
    let [w, h, maxval] = fields;
    if w == 0 || h == 0 {
        return Err(malformed("zero dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(malformed(&format!("unsupported maxval {maxval} (only 8-bit depth)")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(malformed("missing raster separator")),
    }
    let expected = w as usize * h as usize * channels;
    let data = bytes.get(pos..pos + expected).ok_or_else(|| malformed("truncated raster"))?;
    Ok((w as usize, h as usize, maxval, data))
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<Image> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Format { path: path.into(), detail: e.to_string() })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, raw): (usize, Vec<u8>) = match decoded {
        image::DynamicImage::ImageLuma8(img) => (1, img.into_raw()),
        image::DynamicImage::ImageRgb8(img) => (3, img.into_raw()),
        other => {
            return Err(Error::Format {
                path: path.into(),
                detail: format!(
                    "unsupported PNG pixel type {:?} (need 8-bit gray or RGB)",
                    other.color()
                ),
            })
        }
    };
    let samples = raw.iter().map(|&b| b as f64 / 255.0).collect();
    Image::new(h, w, channels, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tempfile::tempdir;

    #[test]
    fn pgm_scaling_matches_maxval() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("tiny.pgm");
        fs::write(&path, [b"P5\n2 2\n255\n".as_slice(), &[0u8, 255, 128, 64]].concat()).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!((img.height(), img.width(), img.channels()), (2, 2, 1));
        let expect = [0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0];
        for (got, want) in img.data().iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        fs::write(&path, [b"P5\n# a comment\n2 1\n# another\n255\n".as_slice(), &[7u8, 9]].concat())
            .unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.data().len(), 2);
    }

    #[test]
    fn ppm_is_three_channel() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.ppm");
        fs::write(&path, [b"P6\n1 1\n255\n".as_slice(), &[255u8, 0, 0]].concat()).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.data(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn sixteen_bit_png_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let img16 = image::ImageBuffer::<image::Luma<u16>, _>::from_pixel(2, 2, image::Luma([40000u16]));
        img16.save(&path).unwrap();
        match load_image(&path) {
            Err(Error::Format { detail, .. }) => assert!(detail.contains("unsupported"), "{detail}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn eight_bit_png_roundtrips_through_gray_and_rgb() {
        let dir = tempdir().unwrap();
        for (name, channels) in [("g.png", 1usize), ("c.png", 3usize)] {
            let path = dir.path().join(name);
            if channels == 1 {
                image::ImageBuffer::<image::Luma<u8>, _>::from_fn(3, 2, |x, y| {
                    image::Luma([(x * 40 + y * 7) as u8])
                })
                .save(&path)
                .unwrap();
            } else {
                image::ImageBuffer::<image::Rgb<u8>, _>::from_fn(3, 2, |x, y| {
                    image::Rgb([(x * 40) as u8, (y * 90) as u8, 13])
                })
                .save(&path)
                .unwrap();
            }
            let img = load_image(&path).unwrap();
            assert_eq!((img.height(), img.width(), img.channels()), (2, 3, channels));
        }
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_image(Path::new("/nonexistent/frame.pgm")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/frame.pgm"));
    }

    #[test]
    fn truncated_raster_is_a_format_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("short.pgm");
        fs::write(&path, [b"P5\n4 4\n255\n".as_slice(), &[0u8; 3]].concat()).unwrap();
        assert!(matches!(load_image(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn all_false_mask_is_zero_bytes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        save_mask(&BinaryMask::filled(3, 3, false), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..9], b"P5\n3 3\n25");
        assert_eq!(&bytes[bytes.len() - 9..], &[0u8; 9]);
    }

    #[test]
    fn all_true_1x1_mask_is_single_255() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        save_mask(&BinaryMask::filled(1, 1, true), &path).unwrap();
        assert_eq!(*fs::read(&path).unwrap().last().unwrap(), 255);
    }

    proptest! {
        // Round trip: save then load any 8-bit-representable image gives
        // identical samples; masks survive a save/load cycle exactly.
        #[test]
        fn image_roundtrip_identity(
            h in 1usize..6, w in 1usize..6, color in proptest::bool::ANY,
            seed in proptest::collection::vec(0u8..=255, 1..=108),
        ) {
            let channels = if color { 3 } else { 1 };
            let n = h * w * channels;
            prop_assume!(seed.len() >= n);
            let data: Vec<f64> = seed[..n].iter().map(|&b| b as f64 / 255.0).collect();
            let img = Image::new(h, w, channels, data).unwrap();
            let dir = tempdir().unwrap();
            let path = dir.path().join(if color { "rt.ppm" } else { "rt.pgm" });
            save_image(&img, &path).unwrap();
            prop_assert_eq!(load_image(&path).unwrap(), img);
        }

        #[test]
        fn mask_roundtrip_identity(
            h in 1usize..8, w in 1usize..8,
            seed in proptest::collection::vec(proptest::bool::ANY, 1..=64),
        ) {
            prop_assume!(seed.len() >= h * w);
            let mask = BinaryMask::new(h, w, seed[..h * w].to_vec()).unwrap();
            let dir = tempdir().unwrap();
            let path = dir.path().join("rt.pgm");
            save_mask(&mask, &path).unwrap();
            prop_assert_eq!(load_mask(&path).unwrap(), mask.clone());
            // The written PGM also reads back as an image whose 0.5-threshold
            // reproduces the mask.
            let img = load_image(&path).unwrap();
            let rethresh: Vec<bool> = img.data().iter().map(|&s| s > 0.5).collect();
            prop_assert_eq!(rethresh, mask.bits().to_vec());
        }
    }
}
