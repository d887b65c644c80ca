//! Colour engraving modes.
//!
//! Two families: masking, where the monochrome engraving gates a blurred
//! version of the colour image (engraving-white stays white, engraving-black
//! shows colour), and separation, where each RGB channel is dithered on its
//! own, optionally against vertically shifted copies of the matrix.

use crate::error::{Error, Result};
use crate::halftone::{warped_dither, OffsetField};
use crate::matrix::DitherMatrix;
use crate::raster::{gaussian_blur, scale_intensity, scale_saturation, to_gray, Raster};

/// Mask mode: per channel `max(engraving, blur(channel))`. The engraving is
/// normally binary; supersampled grayscale engravings blend proportionally.
pub fn mask(colour: &Raster<u8>, engraving: &Raster<u8>, blur_sigma: f64) -> Result<Raster<u8>> {
    if colour.channels() != 3 {
        return Err(Error::Mismatch("colour masking expects a 3-channel image".into()));
    }
    if engraving.channels() != 1 || engraving.dims() != colour.dims() {
        return Err(Error::Mismatch(format!(
            "engraving {:?} does not match colour image {:?}",
            engraving.dims(),
            colour.dims()
        )));
    }
    let blurred = gaussian_blur(colour, blur_sigma)?;
    let (w, h) = colour.dims();
    let mut out = Vec::with_capacity(w * h * 3);
    for (i, px) in blurred.samples().chunks_exact(3).enumerate() {
        let e = engraving.samples()[i];
        for &c in px {
            out.push(c.max(e));
        }
    }
    Raster::from_samples(w, h, 3, out)
}

/// Darkened mask mode: scale the input down, re-run the engraving pipeline
/// on the darkened gray (widening the black lines), mask with the darkened
/// colour, then boost saturation to keep the result from going gray.
pub fn mask_darkened(
    colour: &Raster<u8>,
    darken: f64,
    sat_boost: f64,
    blur_sigma: f64,
    engrave: impl FnOnce(&Raster<u8>) -> Result<Raster<u8>>,
) -> Result<Raster<u8>> {
    if !(darken > 0.0 && darken <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "darken factor must lie in (0, 1], got {darken}"
        )));
    }
    if sat_boost < 1.0 {
        return Err(Error::InvalidParam(format!(
            "saturation boost must be >= 1, got {sat_boost}"
        )));
    }
    let darkened = scale_intensity(colour, darken)?;
    let gray = to_gray(&darkened)?;
    let engraving = engrave(&gray)?;
    let masked = mask(&darkened, &engraving, blur_sigma)?;
    scale_saturation(&masked, sat_boost)
}

/// Separation mode: dither each RGB channel independently, channel `i`
/// against the matrix shifted down by `round(shifts[i] * period)` rows of
/// the working period. Equal shifts on a grayscale input reproduce the
/// monochrome engraving in all three channels.
pub fn separation(
    colour: &Raster<u8>,
    matrix_hi: &DitherMatrix,
    offsets: &OffsetField,
    shifts: [f64; 3],
    k: u32,
) -> Result<Raster<u8>> {
    if colour.channels() != 3 {
        return Err(Error::Mismatch("colour separation expects a 3-channel image".into()));
    }
    for s in shifts {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::InvalidParam(format!(
                "channel shifts must lie in [0, 1), got {s}"
            )));
        }
    }
    let k_us = k.max(1) as usize;
    if !matrix_hi.period_h().is_multiple_of(k_us) {
        return Err(Error::Mismatch(format!(
            "matrix period {} is not a multiple of the supersampling factor {k}",
            matrix_hi.period_h()
        )));
    }
    // Shifts quantise on the working period so the channels separate by a
    // whole number of output pixels.
    let working_ph = matrix_hi.period_h() / k_us;
    let (w, h) = colour.dims();
    let mut planes: Vec<Raster<u8>> = Vec::with_capacity(3);
    for (c, shift) in shifts.iter().enumerate() {
        let rows = (shift * working_ph as f64).round() as usize * k_us;
        let channel = Raster::from_samples(
            w,
            h,
            1,
            colour.samples().iter().skip(c).step_by(3).copied().collect(),
        )?;
        let shifted = matrix_hi.shift_rows(rows);
        planes.push(warped_dither(&channel, &shifted, offsets, k)?);
    }
    Raster::from_fn(w, h, 3, |x, y, c| planes[c].get(x, y, 0))
}
