//! Applying a dither matrix to an image.
//!
//! Three entry points build on one another: [`dither`] is plain tiled
//! thresholding, [`supersampled_dither`] runs the same comparison at `k`
//! times the resolution and area-averages the binary result back down
//! (yielding grayscale, alias-reduced line edges), and [`warped_dither`]
//! additionally displaces the threshold lookup vertically per pixel so the
//! engraving lines bend.

use crate::error::{Error, Result};
use crate::matrix::DitherMatrix;
use crate::raster::{resample, rotate, Angle, Raster, ResampleMode};

/// Per-pixel vertical displacement (in pixels) applied to the matrix lookup.
#[derive(Clone, Debug, PartialEq)]
pub struct OffsetField {
    width: usize,
    height: usize,
    dy: Vec<f32>,
}

impl OffsetField {
    pub fn zeros(width: usize, height: usize) -> Self {
        OffsetField {
            width,
            height,
            dy: vec![0.0; width * height],
        }
    }

    pub fn constant(width: usize, height: usize, dy: f32) -> Self {
        OffsetField {
            width,
            height,
            dy: vec![dy; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut dy = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                debug_assert!(v.is_finite());
                dy.push(v);
            }
        }
        OffsetField { width, height, dy }
    }

    pub(crate) fn from_samples(width: usize, height: usize, dy: Vec<f32>) -> Self {
        debug_assert_eq!(dy.len(), width * height);
        OffsetField { width, height, dy }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.dy[y * self.width + x]
    }

    pub fn samples(&self) -> &[f32] {
        &self.dy
    }

    pub fn is_zero(&self) -> bool {
        self.dy.iter().all(|&v| v == 0.0)
    }
}

fn check_matrix(matrix: &DitherMatrix) -> Result<()> {
    if !matrix.is_equalized() {
        return Err(Error::InvalidParam(
            "dither matrix has not been equalised".into(),
        ));
    }
    Ok(())
}

fn check_gray(image: &Raster<u8>) -> Result<()> {
    if image.channels() != 1 {
        return Err(Error::Mismatch("dithering expects a single channel".into()));
    }
    Ok(())
}

/// Plain ordered dithering: white wherever the sample meets its tiled
/// threshold. Output is strictly binary.
pub fn dither(image: &Raster<u8>, matrix: &DitherMatrix) -> Result<Raster<u8>> {
    check_gray(image)?;
    check_matrix(matrix)?;
    let (w, h) = image.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let g = f32::from(image.get(x, y, 0));
            out.push(if g >= matrix.threshold(x, y) { 255 } else { 0 });
        }
    }
    Raster::from_samples(w, h, 1, out)
}

/// Supersampled dithering: upsample by `k`, threshold against a matrix held
/// at `k` times the working period, and area-average back down. `k = 1`
/// reduces to [`dither`].
pub fn supersampled_dither(
    image: &Raster<u8>,
    matrix_hi: &DitherMatrix,
    k: u32,
) -> Result<Raster<u8>> {
    let zeros = OffsetField::zeros(image.width(), image.height());
    warped_dither(image, matrix_hi, &zeros, k)
}

/// Offset-warped, supersampled dithering.
///
/// The threshold lookup becomes `matrix(x mod pw, wrap(y + dy(x, y), ph))`
/// with linear interpolation between the two straddled matrix rows when the
/// displacement is fractional. Offsets are bilinearly upsampled alongside
/// the image and scaled by `k` so they stay expressed in output pixels. A
/// zero field reproduces [`supersampled_dither`] exactly.
pub fn warped_dither(
    image: &Raster<u8>,
    matrix_hi: &DitherMatrix,
    offsets: &OffsetField,
    k: u32,
) -> Result<Raster<u8>> {
    check_gray(image)?;
    check_matrix(matrix_hi)?;
    if k < 1 {
        return Err(Error::InvalidParam("supersampling factor must be >= 1".into()));
    }
    if offsets.dims() != image.dims() {
        return Err(Error::Mismatch(format!(
            "offset field {:?} does not match image {:?}",
            offsets.dims(),
            image.dims()
        )));
    }
    let (w, h) = image.dims();
    let k = k as usize;
    let (hw, hh) = (w * k, h * k);

    let plane: Raster<f32> = {
        let raw = Raster::from_samples(
            w,
            h,
            1,
            image.samples().iter().map(|&v| f32::from(v)).collect(),
        )?;
        resample(&raw, hw, hh, ResampleMode::Bilinear)?
    };
    let dy_hi: Raster<f32> = {
        let raw = Raster::from_samples(w, h, 1, offsets.samples().to_vec())?;
        let up = resample(&raw, hw, hh, ResampleMode::Bilinear)?;
        if k == 1 {
            up
        } else {
            up.map(|v| v * k as f32)
        }
    };

    let (pw, ph) = matrix_hi.period();
    let ph_f = ph as f32;
    let mut binary = Vec::with_capacity(hw * hh);
    for y in 0..hh {
        for x in 0..hw {
            let g = plane.get(x, y, 0);
            let yw = (y as f32 + dy_hi.get(x, y, 0)).rem_euclid(ph_f);
            let y0 = yw as usize % ph;
            let f = yw - yw.floor();
            let col = x % pw;
            let t = if f == 0.0 {
                matrix_hi.value_at(col, y0)
            } else {
                let y1 = (y0 + 1) % ph;
                matrix_hi.value_at(col, y0) * (1.0 - f) + matrix_hi.value_at(col, y1) * f
            };
            binary.push(if g >= t { 255u8 } else { 0 });
        }
    }
    let binary = Raster::from_samples(hw, hh, 1, binary)?;
    if k == 1 {
        Ok(binary)
    } else {
        resample(&binary, w, h, ResampleMode::AreaAverage)
    }
}

/// Warped dithering braced by a rotation pair: the image is rotated by
/// `-roll` about `center`, dithered with offsets that were computed in that
/// rotated frame, and the engraving rotated back. Out-of-frame pixels fill
/// with white.
pub fn engrave_rotated(
    image: &Raster<u8>,
    matrix_hi: &DitherMatrix,
    offsets: &OffsetField,
    roll: Angle,
    center: (f64, f64),
    k: u32,
) -> Result<Raster<u8>> {
    if roll.is_zero() {
        return warped_dither(image, matrix_hi, offsets, k);
    }
    let upright = rotate(image, roll.negated(), center, 255u8);
    let engraved = warped_dither(&upright, matrix_hi, offsets, k)?;
    Ok(rotate(&engraved, roll, center, 255u8))
}
