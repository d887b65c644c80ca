//! Image containers, file I/O, resampling, rotation, blurring and the small
//! colour utilities every other module leans on.
//!
//! A [`Raster`] is a row-major grid of 1- or 3-channel samples. Two sample
//! domains are used throughout the crate: `Raster<u8>` for 0..=255 images on
//! disk and `Raster<f32>` for continuous intermediate fields. All filtering
//! rounds half away from zero when it lands back in `u8`.

mod blur;
mod io;
mod resample;

pub(crate) use blur::banded_vertical_blur;
pub use blur::{gaussian_blur, oriented_gaussian_blur};
pub use io::{load_image, save_image};
pub use resample::{resample, rotate, rotate_point, ResampleMode};

use crate::error::{Error, Result};

/// Scalar sample types a [`Raster`] can hold.
pub trait Sample: Copy + PartialOrd + Send + Sync + 'static {
    fn to_f64(self) -> f64;

    /// Convert back from filtering arithmetic. `u8` rounds half away from
    /// zero and clamps to 0..=255; `f32` truncates precision only.
    fn from_f64(v: f64) -> Self;

    /// Quantised byte view used when a raster is written to disk.
    fn to_byte(self) -> u8;
}

impl Sample for u8 {
    #[inline]
    fn to_f64(self) -> f64 {
        f64::from(self)
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v.round().clamp(0.0, 255.0) as u8
    }

    #[inline]
    fn to_byte(self) -> u8 {
        self
    }
}

impl Sample for f32 {
    #[inline]
    fn to_f64(self) -> f64 {
        f64::from(self)
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_byte(self) -> u8 {
        (f64::from(self) * 255.0).round().clamp(0.0, 255.0) as u8
    }
}

/// Row-major sample grid with 1 or 3 interleaved channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster<T: Sample = u8> {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<T>,
}

impl<T: Sample> Raster<T> {
    /// New raster filled with a constant sample.
    pub fn filled(width: usize, height: usize, channels: usize, value: T) -> Result<Self> {
        Self::validate_shape(width, height, channels)?;
        Ok(Raster {
            width,
            height,
            channels,
            samples: vec![value; width * height * channels],
        })
    }

    /// Wrap an existing sample buffer. The buffer length must equal
    /// `width * height * channels`.
    pub fn from_samples(
        width: usize,
        height: usize,
        channels: usize,
        samples: Vec<T>,
    ) -> Result<Self> {
        Self::validate_shape(width, height, channels)?;
        if samples.len() != width * height * channels {
            return Err(Error::InvalidParam(format!(
                "sample buffer length {} does not match {}x{}x{}",
                samples.len(),
                width,
                height,
                channels
            )));
        }
        Ok(Raster {
            width,
            height,
            channels,
            samples,
        })
    }

    /// Build from a per-sample generator called as `f(x, y, channel)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        Self::validate_shape(width, height, channels)?;
        let mut samples = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    samples.push(f(x, y, c));
                }
            }
        }
        Ok(Raster {
            width,
            height,
            channels,
            samples,
        })
    }

    fn validate_shape(width: usize, height: usize, channels: usize) -> Result<()> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParam(format!(
                "zero-dimension raster {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParam(format!(
                "rasters carry 1 or 3 channels, got {channels}"
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [T] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.samples[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: T) {
        self.samples[(y * self.width + x) * self.channels + c] = v;
    }

    /// One channel as a contiguous f64 plane.
    pub fn channel_plane(&self, c: usize) -> Vec<f64> {
        let mut plane = Vec::with_capacity(self.width * self.height);
        let mut i = c;
        for _ in 0..self.width * self.height {
            plane.push(self.samples[i].to_f64());
            i += self.channels;
        }
        plane
    }

    /// Rebuild a raster from per-channel f64 planes.
    pub fn from_planes(width: usize, height: usize, planes: &[Vec<f64>]) -> Result<Self> {
        let channels = planes.len();
        Self::validate_shape(width, height, channels)?;
        for p in planes {
            if p.len() != width * height {
                return Err(Error::Internal("plane length mismatch".into()));
            }
        }
        let mut samples = Vec::with_capacity(width * height * channels);
        for i in 0..width * height {
            for p in planes {
                samples.push(T::from_f64(p[i]));
            }
        }
        Ok(Raster {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Raster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl Raster<u8> {
    /// Continuous view with samples scaled into [0, 1].
    pub fn to_unit(&self) -> Raster<f32> {
        Raster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            samples: self.samples.iter().map(|&v| f32::from(v) / 255.0).collect(),
        }
    }
}

impl Raster<f32> {
    /// Quantise a unit-domain raster back to bytes via `round(v * 255)`.
    pub fn quantize_u8(&self) -> Raster<u8> {
        Raster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            samples: self.samples.iter().map(|v| v.to_byte()).collect(),
        }
    }
}

/// Luma conversion with the broadcast weights 0.299/0.587/0.114.
pub fn to_gray(colour: &Raster<u8>) -> Result<Raster<u8>> {
    if colour.channels() != 3 {
        return Err(Error::Mismatch(format!(
            "to_gray expects a 3-channel raster, got {} channel(s)",
            colour.channels()
        )));
    }
    let (w, h) = colour.dims();
    let mut samples = Vec::with_capacity(w * h);
    for px in colour.samples().chunks_exact(3) {
        let luma =
            0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2]);
        samples.push(luma.round().clamp(0.0, 255.0) as u8);
    }
    Raster::from_samples(w, h, 1, samples)
}

/// Scale every channel by `factor`, rounding half away from zero.
pub fn scale_intensity(image: &Raster<u8>, factor: f64) -> Result<Raster<u8>> {
    if factor < 0.0 {
        return Err(Error::InvalidParam(format!(
            "intensity factor must be >= 0, got {factor}"
        )));
    }
    Ok(image.map(|v| (f64::from(v) * factor).round().clamp(0.0, 255.0) as u8))
}

/// Saturation scaling in hue/saturation/value space.
///
/// Value and hue are held fixed while S is replaced by `min(1, factor * S)`.
/// Grayscale pixels (S = 0) pass through unchanged.
pub fn scale_saturation(colour: &Raster<u8>, factor: f64) -> Result<Raster<u8>> {
    if colour.channels() != 3 {
        return Err(Error::Mismatch(
            "scale_saturation expects a 3-channel raster".into(),
        ));
    }
    if factor < 0.0 {
        return Err(Error::InvalidParam(format!(
            "saturation factor must be >= 0, got {factor}"
        )));
    }
    let (w, h) = colour.dims();
    let mut out = Vec::with_capacity(w * h * 3);
    for px in colour.samples().chunks_exact(3) {
        let max = px.iter().copied().max().unwrap();
        let min = px.iter().copied().min().unwrap();
        if max == min || max == 0 {
            out.extend_from_slice(px);
            continue;
        }
        let v = f64::from(max);
        let s = (v - f64::from(min)) / v;
        let s_new = (factor * s).min(1.0);
        // Holding V and hue fixed, each channel's distance below V scales
        // with the saturation ratio.
        let ratio = s_new / s;
        for &c in px {
            let scaled = v - (v - f64::from(c)) * ratio;
            out.push(scaled.round().clamp(0.0, 255.0) as u8);
        }
    }
    Raster::from_samples(w, h, 3, out)
}

/// In-plane angle in radians, normalised to (-pi, pi].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Angle {
    radians: f64,
}

impl Angle {
    pub const ZERO: Angle = Angle { radians: 0.0 };

    pub fn from_radians(radians: f64) -> Self {
        let mut r = radians % std::f64::consts::TAU;
        if r > std::f64::consts::PI {
            r -= std::f64::consts::TAU;
        } else if r <= -std::f64::consts::PI {
            r += std::f64::consts::TAU;
        }
        Angle { radians: r }
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::from_radians(degrees.to_radians())
    }

    pub fn radians(&self) -> f64 {
        self.radians
    }

    pub fn degrees(&self) -> f64 {
        self.radians.to_degrees()
    }

    pub fn is_zero(&self) -> bool {
        self.radians == 0.0
    }

    pub fn negated(&self) -> Angle {
        Angle::from_radians(-self.radians)
    }

    pub fn plus(&self, other: Angle) -> Angle {
        Angle::from_radians(self.radians + other.radians)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_weights() {
        let px = |r, g, b| {
            let img = Raster::from_samples(1, 1, 3, vec![r, g, b]).unwrap();
            to_gray(&img).unwrap().get(0, 0, 0)
        };
        assert_eq!(px(255, 255, 255), 255);
        assert_eq!(px(0, 0, 0), 0);
        // round(0.299 * 255) = round(76.245)
        assert_eq!(px(255, 0, 0), 76);
    }

    #[test]
    fn gray_rejects_single_channel() {
        let img = Raster::filled(2, 2, 1, 7u8).unwrap();
        assert!(to_gray(&img).is_err());
    }

    #[test]
    fn saturation_leaves_gray_pixels() {
        let img = Raster::from_samples(1, 1, 3, vec![128, 128, 128]).unwrap();
        let out = scale_saturation(&img, 1.5).unwrap();
        assert_eq!(out.samples(), &[128, 128, 128]);
    }

    #[test]
    fn saturation_factor_one_is_identity() {
        let img = Raster::from_samples(2, 1, 3, vec![10, 200, 32, 255, 0, 100]).unwrap();
        let out = scale_saturation(&img, 1.0).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn saturation_doubling_saturates() {
        // S = 0.5 at V = 200; doubling pushes the low channels to zero.
        let img = Raster::from_samples(1, 1, 3, vec![200, 100, 100]).unwrap();
        let out = scale_saturation(&img, 2.0).unwrap();
        assert_eq!(out.samples(), &[200, 0, 0]);
    }

    #[test]
    fn intensity_scaling_rounds() {
        let img = Raster::from_samples(1, 1, 1, vec![200u8]).unwrap();
        assert_eq!(scale_intensity(&img, 0.75).unwrap().get(0, 0, 0), 150);
    }

    #[test]
    fn angle_normalisation() {
        assert_eq!(Angle::from_radians(0.0).radians(), 0.0);
        let pi = std::f64::consts::PI;
        // -pi folds onto +pi so a roll of half a turn is unambiguous.
        assert_eq!(Angle::from_radians(-pi).radians(), pi);
        assert!((Angle::from_radians(3.0 * pi).radians() - pi).abs() < 1e-12);
    }

    #[test]
    fn shape_validation() {
        assert!(Raster::filled(0, 4, 1, 0u8).is_err());
        assert!(Raster::filled(4, 4, 2, 0u8).is_err());
        assert!(Raster::from_samples(2, 2, 1, vec![0u8; 3]).is_err());
    }

    #[test]
    fn unit_round_trip_quantisation() {
        let img = Raster::from_samples(3, 1, 1, vec![0.0f32, 0.5, 1.0]).unwrap();
        let q = img.quantize_u8();
        // 0.5 * 255 = 127.5 rounds half away from zero.
        assert_eq!(q.samples(), &[0, 128, 255]);
    }
}
