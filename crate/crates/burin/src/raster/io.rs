//! PNG and binary PGM/PPM reading and writing.
//!
//! Reads 8- and 16-bit grayscale or RGB images; 16-bit samples are rescaled
//! to 0..=255 by integer division by 257 so that 65535 maps to 255 exactly.
//! Writes are always 8-bit. The format on load is sniffed from magic bytes,
//! on save it follows the file extension.

use std::fs;
use std::io::{BufWriter, Cursor};
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{Raster, Sample};

/// Load a PNG or binary PGM/PPM file as an 8-bit raster.
pub fn load_image(path: impl AsRef<Path>) -> Result<Raster<u8>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes)
    } else {
        Err(Error::Image(format!(
            "unsupported format in {} (expected PNG or binary PGM/PPM)",
            path.display()
        )))
    }
}

/// Write a raster as PNG, PGM or PPM depending on the file extension.
///
/// `u8` rasters round-trip losslessly; unit-domain `f32` rasters are
/// quantised by `round(v * 255)` on the way out.
pub fn save_image<T: Sample>(raster: &Raster<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes: Vec<u8> = raster.samples().iter().map(|v| v.to_byte()).collect();
    match ext.as_str() {
        "png" => encode_png(raster.width(), raster.height(), raster.channels(), &bytes, path),
        "pgm" => {
            if raster.channels() != 1 {
                return Err(Error::Image(
                    "PGM holds a single channel; use .ppm or .png for colour".into(),
                ));
            }
            encode_pnm(b"P5", raster.width(), raster.height(), &bytes, path)
        }
        "ppm" => {
            if raster.channels() != 3 {
                return Err(Error::Image(
                    "PPM holds three channels; use .pgm or .png for grayscale".into(),
                ));
            }
            encode_pnm(b"P6", raster.width(), raster.height(), &bytes, path)
        }
        other => Err(Error::Image(format!(
            "unsupported output extension '{other}' (use png, pgm or ppm)"
        ))),
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<Raster<u8>> {
    let channels = if bytes.starts_with(b"P5") { 1 } else { 3 };
    let mut pos = 2usize;
    let width = read_header_number(bytes, &mut pos)? as usize;
    let height = read_header_number(bytes, &mut pos)? as usize;
    let maxval = read_header_number(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(Error::Image(format!("zero-dimension image {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Image(format!("invalid PNM maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the samples.
    pos += 1;
    let n = width
        .checked_mul(height)
        .and_then(|wh| wh.checked_mul(channels))
        .filter(|&n| n <= 1 << 31)
        .ok_or_else(|| Error::Image(format!("implausible PNM dimensions {width}x{height}")))?;
    let data = &bytes[pos.min(bytes.len())..];
    let samples = if maxval > 255 {
        if data.len() < n * 2 {
            return Err(Error::Image("truncated 16-bit PNM data".into()));
        }
        data.chunks_exact(2)
            .take(n)
            .map(|p| {
                let v = u32::from(u16::from_be_bytes([p[0], p[1]]));
                if maxval == 65535 {
                    (v / 257) as u8
                } else {
                    ((v * 255) as f64 / f64::from(maxval)).round().min(255.0) as u8
                }
            })
            .collect()
    } else {
        if data.len() < n {
            return Err(Error::Image("truncated PNM data".into()));
        }
        if maxval == 255 {
            data[..n].to_vec()
        } else {
            data[..n]
                .iter()
                .map(|&v| {
                    ((u32::from(v) * 255) as f64 / f64::from(maxval))
                        .round()
                        .min(255.0) as u8
                })
                .collect()
        }
    };
    Raster::from_samples(width, height, channels, samples)
}

fn read_header_number(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    // Skip whitespace and `#` comment lines.
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Image("malformed PNM header".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Image("malformed PNM header".into()))
}

fn encode_pnm(magic: &[u8], width: usize, height: usize, bytes: &[u8], path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(bytes.len() + 32);
    out.extend_from_slice(magic);
    out.extend_from_slice(format!("\n{width} {height}\n255\n").as_bytes());
    out.extend_from_slice(bytes);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn decode_png(bytes: &[u8]) -> Result<Raster<u8>> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Image(format!("PNG decode: {e}")))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Image(format!("PNG decode: {e}")))?;
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::Image(format!(
                "unsupported PNG colour type {other:?} (expected grayscale or RGB)"
            )))
        }
    };
    let (width, height) = (info.width as usize, info.height as usize);
    if width == 0 || height == 0 {
        return Err(Error::Image("zero-dimension PNG".into()));
    }
    let n = width * height * channels;
    let samples = match info.bit_depth {
        png::BitDepth::Eight => buf[..n].to_vec(),
        png::BitDepth::Sixteen => buf[..n * 2]
            .chunks_exact(2)
            .map(|p| (u32::from(u16::from_be_bytes([p[0], p[1]])) / 257) as u8)
            .collect(),
        other => {
            return Err(Error::Image(format!(
                "unsupported PNG bit depth {other:?} (expected 8 or 16)"
            )))
        }
    };
    Raster::from_samples(width, height, channels, samples)
}

fn encode_png(
    width: usize,
    height: usize,
    channels: usize,
    bytes: &[u8],
    path: &Path,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(if channels == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::Image(format!("PNG encode: {e}")))?;
    writer
        .write_image_data(bytes)
        .map_err(|e| Error::Image(format!("PNG encode: {e}")))?;
    Ok(())
}
