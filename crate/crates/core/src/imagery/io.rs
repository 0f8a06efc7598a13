//! PNG frames and masks, PFM probability maps.
//!
//! Maps are stored as grayscale PFM: header `Pf`, dimensions, scale `-1.0`
//! (little-endian), then 32-bit floats with the bottom row first.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, ImageFormat, Luma, Rgb};

use super::{check_dims, BinaryMask, Frame, ProbabilityMap};
use crate::error::{Error, Result};

fn image_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

pub fn read_frame(path: &Path, index: usize) -> Result<Frame> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_rgb8();
    let (w, h) = img.dimensions();
    Frame::new(w as usize, h as usize, img.into_raw(), index)
}

pub fn encode_frame_png(frame: &Frame) -> Result<Vec<u8>> {
    let buf: ImageBuffer<Rgb<u8>, _> = ImageBuffer::from_raw(
        frame.width() as u32,
        frame.height() as u32,
        frame.pixels().to_vec(),
    )
    .expect("frame buffer matches its dimensions");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| image_err(Path::new("<memory>"), e))?;
    Ok(out.into_inner())
}

pub fn write_frame(path: &Path, frame: &Frame) -> Result<()> {
    let bytes = encode_frame_png(frame)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a grayscale mask PNG; values above 127 are foreground.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    let bits = img.into_raw().into_iter().map(|v| v > 127).collect();
    BinaryMask::new(w as usize, h as usize, bits)
}

/// 8-bit grayscale PNG, 255 for foreground and 0 for background.
pub fn encode_mask_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    let raw = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    encode_gray_png(mask.width(), mask.height(), raw)
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let bytes = encode_mask_png(mask)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Grayscale rendering of a map for viewing, `round(255 * p)`.
pub fn encode_map_png(map: &ProbabilityMap) -> Result<Vec<u8>> {
    let raw = map
        .values()
        .iter()
        .map(|&v| (v * 255.0).round() as u8)
        .collect();
    encode_gray_png(map.width(), map.height(), raw)
}

fn encode_gray_png(width: usize, height: usize, raw: Vec<u8>) -> Result<Vec<u8>> {
    let buf: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(width as u32, height as u32, raw).expect("sized buffer");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| image_err(Path::new("<memory>"), e))?;
    Ok(out.into_inner())
}

pub fn encode_pfm(map: &ProbabilityMap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for row in map.values().chunks_exact(w).rev() {
        for &v in row {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

/// Splits off one newline-terminated header line.
fn header_line<'a>(bytes: &mut &'a [u8], what: &str) -> Result<&'a str> {
    let end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader(format!("missing {what} line")))?;
    let (line, rest) = bytes.split_at(end);
    *bytes = &rest[1..];
    std::str::from_utf8(line)
        .map(str::trim)
        .map_err(|_| Error::MalformedHeader(format!("non-text {what} line")))
}

pub fn decode_pfm(mut bytes: &[u8]) -> Result<ProbabilityMap> {
    let magic = header_line(&mut bytes, "magic")?;
    if magic != "Pf" {
        return Err(Error::MalformedHeader(format!(
            "expected grayscale 'Pf', found '{magic}'"
        )));
    }
    let dims = header_line(&mut bytes, "dimension")?;
    let parsed: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::MalformedHeader(format!("bad dimensions '{dims}'")))?;
    let [w, h] = parsed[..] else {
        return Err(Error::MalformedHeader(format!("bad dimensions '{dims}'")));
    };
    if w == 0 || h == 0 {
        return Err(Error::MalformedHeader(format!("empty image {w}x{h}")));
    }
    let scale_text = header_line(&mut bytes, "scale")?;
    let scale: f32 = scale_text
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad scale '{scale_text}'")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::MalformedHeader(format!("bad scale '{scale_text}'")));
    }
    let little_endian = scale < 0.0;

    if bytes.len() != w * h * 4 {
        return Err(Error::MalformedHeader(format!(
            "payload is {} bytes, {w}x{h} needs {}",
            bytes.len(),
            w * h * 4
        )));
    }
    let mut values = vec![0.0f64; w * h];
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        // File rows run bottom-up.
        let (fy, x) = (i / w, i % w);
        values[(h - 1 - fy) * w + x] = v as f64;
    }
    ProbabilityMap::new(w, h, values)
}

pub fn write_map(path: &Path, map: &ProbabilityMap) -> Result<()> {
    fs::write(path, encode_pfm(map)).map_err(|e| Error::io(path, e))
}

pub fn read_map(path: &Path) -> Result<ProbabilityMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes)
}

/// Reads a map and checks it has the expected size.
pub fn read_map_sized(path: &Path, width: usize, height: usize) -> Result<ProbabilityMap> {
    let map = read_map(path)?;
    check_dims((width, height), (map.width(), map.height()))?;
    Ok(map)
}

/// Trailing decimal digits of a file stem, e.g. `mask_000015` -> 15.
pub fn stem_index(path: &Path) -> Option<usize> {
    let stem = path.file_stem()?.to_str()?;
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    stem[stem.len() - digits..].parse().ok()
}

/// Files with extension `ext` directly inside `dir`, sorted by name.
pub fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x.eq_ignore_ascii_case(ext)) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// A directory of per-video subdirectories, each holding `ext` files. A
/// directory without subdirectories is read as a single video named after
/// the directory itself.
pub fn video_tree(root: &Path, ext: &str) -> Result<Vec<(String, Vec<PathBuf>)>> {
    let mut videos = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let path = entry.map_err(|e| Error::io(root, e))?.path();
        if path.is_dir() {
            videos.push(path);
        }
    }
    videos.sort();
    if videos.is_empty() {
        let name = root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| ".".into());
        return Ok(vec![(name, list_files(root, ext)?)]);
    }
    videos
        .into_iter()
        .map(|dir| {
            let name = dir.file_name().expect("entry has a name").to_string_lossy().into_owned();
            Ok((name, list_files(&dir, ext)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeros_roundtrip() {
        let m = ProbabilityMap::zeros(5, 3).unwrap();
        assert_eq!(decode_pfm(&encode_pfm(&m)).unwrap(), m);
    }

    #[test]
    fn value_roundtrips_at_f32_precision() {
        let m = ProbabilityMap::new(2, 1, vec![0.123_456_789, 1.0]).unwrap();
        let back = decode_pfm(&encode_pfm(&m)).unwrap();
        assert_eq!(back.values()[0], 0.123_456_79_f32 as f64);
        assert_eq!(back.values()[1], 1.0);
    }

    #[test]
    fn header_layout_and_row_order() {
        let m = ProbabilityMap::new(2, 2, vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        let bytes = encode_pfm(&m);
        assert!(bytes.starts_with(b"Pf\n2 2\n-1.0\n"));
        let payload = &bytes[12..];
        // Bottom row (0.5, 1.0) is stored first.
        assert_eq!(&payload[0..4], &0.5f32.to_le_bytes());
        assert_eq!(&payload[12..16], &0.25f32.to_le_bytes());
    }

    #[test]
    fn big_endian_files_are_accepted() {
        let mut bytes = b"Pf\n1 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&0.75f32.to_be_bytes());
        assert_eq!(decode_pfm(&bytes).unwrap().values(), &[0.75]);
    }

    #[test]
    fn distinct_errors() {
        let color = b"PF\n1 1\n-1.0\n\0\0\0\0".to_vec();
        assert!(matches!(decode_pfm(&color), Err(Error::MalformedHeader(_))));
        let short = b"Pf\n2 1\n-1.0\n\0\0\0\0".to_vec();
        assert!(matches!(decode_pfm(&short), Err(Error::MalformedHeader(_))));
        let mut big = b"Pf\n1 1\n-1.0\n".to_vec();
        big.extend_from_slice(&1.5f32.to_le_bytes());
        assert!(matches!(decode_pfm(&big), Err(Error::ValueOutOfRange { .. })));
        let mut nan = b"Pf\n1 1\n-1.0\n".to_vec();
        nan.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_pfm(&nan), Err(Error::ValueOutOfRange { .. })));

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.pfm");
        write_map(&p, &ProbabilityMap::zeros(3, 2).unwrap()).unwrap();
        assert!(matches!(
            read_map_sized(&p, 2, 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mask_and_frame_png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        let mask = BinaryMask::from_fn(4, 3, |x, y| x == 2 && y == 1).unwrap();
        write_mask(&p, &mask).unwrap();
        assert_eq!(read_mask(&p).unwrap(), mask);

        let q = dir.path().join("f.png");
        let frame = Frame::from_fn(3, 2, 0, |x, y| [x as u8 * 40, y as u8 * 90, 7]).unwrap();
        write_frame(&q, &frame).unwrap();
        assert_eq!(read_frame(&q, 0).unwrap(), frame);
    }

    #[test]
    fn stem_indices() {
        assert_eq!(stem_index(Path::new("a/mask_000015.png")), Some(15));
        assert_eq!(stem_index(Path::new("frame_000000.png")), Some(0));
        assert_eq!(stem_index(Path::new("cover.png")), None);
    }

    proptest! {
        #[test]
        fn pfm_roundtrip_is_identity_at_f32(
            (w, h, values) in (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
                (Just(w), Just(h), proptest::collection::vec(0.0f32..=1.0, w * h))
            })
        ) {
            let m = ProbabilityMap::new(w, h, values.iter().map(|&v| v as f64).collect()).unwrap();
            let back = decode_pfm(&encode_pfm(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
