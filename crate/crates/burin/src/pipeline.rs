//! End-to-end orchestration: one config struct, matrix construction, and
//! the monochrome and colour engraving pipelines the CLI exposes.

use serde::{Deserialize, Serialize};

use crate::colour;
use crate::error::{Error, Result};
use crate::face::{
    blur_shading, depth_to_shading, face_mask, nose_axis, pseudo_normal_field, shading_field,
    shading_to_offsets, LandmarkSet, ShadingField,
};
use crate::halftone::{supersampled_dither, warped_dither, OffsetField};
use crate::matrix::{CrosshatchParams, DitherMatrix};
use crate::raster::{rotate, to_gray, Raster};

/// Every knob of the engraving pipeline, with the defaults the CLI uses.
/// Serialises to and from a TOML key-value file; absent keys keep their
/// defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngravingConfig {
    /// Cross-hatch strength S in [0, 0.5].
    pub scale_s: f64,
    /// Working period of the dither matrix in pixels.
    pub period: u32,
    /// Fraction of matrix rows receiving white cross-hatch (split between
    /// the top and bottom bands).
    pub white_band: f64,
    /// Supersampling factor k.
    pub supersample: u32,
    /// Warp amplitude in pixels; defaults to one matrix period.
    pub amplitude: Option<f64>,
    /// Upward mask extension as a fraction of the brow-to-chin height.
    pub extend: f64,
    /// Ambient weight of the shading model.
    pub alpha: f32,
    /// Scales the anisotropic shading blur; 0 disables it.
    pub blur_strength: f64,
    /// Rotate the image so the face is upright before dithering and back
    /// afterwards.
    pub rotate_align: bool,
    /// Intensity scale applied before engraving in the darkened mask mode.
    pub darken: f64,
    /// Saturation boost applied after masking in the darkened mask mode.
    pub sat_boost: f64,
    /// Blur of the colour image used by the mask modes; defaults to half a
    /// period.
    pub colour_blur_sigma: Option<f64>,
    /// Per-channel vertical matrix shifts (fractions of the period) for the
    /// shifted separation mode.
    pub shifts: [f64; 3],
}

impl Default for EngravingConfig {
    fn default() -> Self {
        EngravingConfig {
            scale_s: 0.25,
            period: 16,
            white_band: 2.0 / 3.0,
            supersample: 4,
            amplitude: None,
            extend: 0.45,
            alpha: 0.4,
            blur_strength: 1.0,
            rotate_align: false,
            darken: 0.75,
            sat_boost: 1.5,
            colour_blur_sigma: None,
            shifts: [0.0, 1.0 / 3.0, 2.0 / 3.0],
        }
    }
}

impl EngravingConfig {
    pub fn validate(&self) -> Result<()> {
        self.crosshatch_params().validate()?;
        if self.period < 2 {
            return Err(Error::InvalidParam(format!(
                "period must be >= 2, got {}",
                self.period
            )));
        }
        if self.supersample < 1 {
            return Err(Error::InvalidParam("supersample factor must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidParam(format!(
                "alpha must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        if self.extend < 0.0 {
            return Err(Error::InvalidParam("extend must be >= 0".into()));
        }
        if self.blur_strength < 0.0 {
            return Err(Error::InvalidParam("blur strength must be >= 0".into()));
        }
        if let Some(a) = self.amplitude {
            if !a.is_finite() {
                return Err(Error::InvalidParam("amplitude must be finite".into()));
            }
        }
        if !(self.darken > 0.0 && self.darken <= 1.0) {
            return Err(Error::InvalidParam("darken must lie in (0, 1]".into()));
        }
        if self.sat_boost < 1.0 {
            return Err(Error::InvalidParam("sat-boost must be >= 1".into()));
        }
        for s in self.shifts {
            if !(0.0..1.0).contains(&s) {
                return Err(Error::InvalidParam("shifts must lie in [0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude.unwrap_or(f64::from(self.period))
    }

    pub fn colour_blur_sigma(&self) -> f64 {
        self.colour_blur_sigma
            .unwrap_or(f64::from(self.period) / 2.0)
    }

    pub fn crosshatch_params(&self) -> CrosshatchParams {
        CrosshatchParams {
            s: self.scale_s,
            white_band: self.white_band,
            ..CrosshatchParams::default()
        }
    }
}

/// Working-period matrix plus its supersampling companion, both taken from
/// the same full-resolution base so the high matrix is simply less
/// downsampled.
pub struct Matrices {
    pub working: DitherMatrix,
    pub hi: DitherMatrix,
}

/// Build the combined, equalised base matrix at full resolution.
pub fn build_base_matrix(cfg: &EngravingConfig) -> Result<DitherMatrix> {
    let params = cfg.crosshatch_params();
    params.validate()?;
    let side = params.base_height;
    let horizontal = DitherMatrix::horizontal_profile(side, side)?;
    let stripe = DitherMatrix::vertical_stripe(side, side, &params)?
        .scale_toward_white(params.s)?;
    let combined = DitherMatrix::combine(&horizontal, &stripe, &params)?;
    Ok(combined.equalize())
}

/// The raw (pre-equalisation) combined matrix, kept for inspection.
pub fn build_raw_matrix(cfg: &EngravingConfig) -> Result<DitherMatrix> {
    let params = cfg.crosshatch_params();
    params.validate()?;
    let side = params.base_height;
    let horizontal = DitherMatrix::horizontal_profile(side, side)?;
    let stripe = DitherMatrix::vertical_stripe(side, side, &params)?
        .scale_toward_white(params.s)?;
    DitherMatrix::combine(&horizontal, &stripe, &params)
}

pub fn build_matrices(cfg: &EngravingConfig) -> Result<Matrices> {
    cfg.validate()?;
    let base = build_base_matrix(cfg)?;
    let p = cfg.period as usize;
    let working = base.resample_to(p, p)?;
    let hi = if cfg.supersample == 1 {
        working.clone()
    } else {
        let k = cfg.supersample as usize;
        base.resample_to(p * k, p * k)?
    };
    Ok(Matrices { working, hi })
}

/// Where the warp geometry comes from.
pub enum Geometry<'a> {
    /// Straight engraving lines, no warp.
    None,
    /// The landmark-derived proxy head.
    Landmarks(&'a LandmarkSet),
    /// An external depth map (larger sample = nearer).
    Depth(&'a Raster<u8>),
}

/// Intermediate fields kept for debug export.
#[derive(Default)]
pub struct Artifacts {
    pub mask: Option<Raster<u8>>,
    pub theta: Option<Raster<f32>>,
    pub shading: Option<Raster<f32>>,
    pub offsets: Option<OffsetField>,
}

pub struct Engraving {
    pub image: Raster<u8>,
    pub artifacts: Artifacts,
}

fn landmark_fields(
    landmarks: &LandmarkSet,
    dims: (usize, usize),
    cfg: &EngravingConfig,
) -> Result<(Raster<u8>, Raster<f32>, ShadingField, OffsetField)> {
    let mask = face_mask(landmarks, dims, cfg.extend)?;
    let axis = nose_axis(landmarks, &mask)?;
    let theta = pseudo_normal_field(&mask, &axis)?;
    let shade = shading_field(&theta, cfg.alpha)?;
    let blurred = blur_shading(&shade, &mask, landmarks.roll(), cfg.blur_strength)?;
    let offsets = shading_to_offsets(&blurred, cfg.amplitude());
    Ok((mask.raster().clone(), theta, blurred, offsets))
}

/// Monochrome engraving of a grayscale image.
pub fn engrave_image(
    gray: &Raster<u8>,
    geometry: Geometry<'_>,
    cfg: &EngravingConfig,
) -> Result<Engraving> {
    cfg.validate()?;
    if gray.channels() != 1 {
        return Err(Error::Mismatch("engraving expects a grayscale image".into()));
    }
    let matrices = build_matrices(cfg)?;
    let k = cfg.supersample;
    let dims = gray.dims();
    match geometry {
        Geometry::None => Ok(Engraving {
            image: supersampled_dither(gray, &matrices.hi, k)?,
            artifacts: Artifacts::default(),
        }),
        Geometry::Depth(depth) => {
            if depth.dims() != dims {
                return Err(Error::Mismatch(format!(
                    "depth map {:?} does not match image {:?}",
                    depth.dims(),
                    dims
                )));
            }
            let sigma = cfg.blur_strength * 0.04 * dims.0.min(dims.1) as f64;
            let shade = depth_to_shading(depth, cfg.alpha, sigma)?;
            let offsets = shading_to_offsets(&shade, cfg.amplitude());
            let image = warped_dither(gray, &matrices.hi, &offsets, k)?;
            Ok(Engraving {
                image,
                artifacts: Artifacts {
                    shading: Some(shade.field().clone()),
                    offsets: Some(offsets),
                    ..Artifacts::default()
                },
            })
        }
        Geometry::Landmarks(lm) => {
            let roll = lm.roll();
            if cfg.rotate_align && !roll.is_zero() {
                let center = lm.centroid();
                let upright_img = rotate(gray, roll.negated(), center, 255u8);
                let upright_lm = lm.rotated(roll.negated(), center);
                let (mask, theta, shade, offsets) =
                    landmark_fields(&upright_lm, dims, cfg)?;
                let engraved = warped_dither(&upright_img, &matrices.hi, &offsets, k)?;
                let image = rotate(&engraved, roll, center, 255u8);
                Ok(Engraving {
                    image,
                    artifacts: Artifacts {
                        mask: Some(mask),
                        theta: Some(theta),
                        shading: Some(shade.field().clone()),
                        offsets: Some(offsets),
                    },
                })
            } else {
                let (mask, theta, shade, offsets) = landmark_fields(lm, dims, cfg)?;
                let image = warped_dither(gray, &matrices.hi, &offsets, k)?;
                Ok(Engraving {
                    image,
                    artifacts: Artifacts {
                        mask: Some(mask),
                        theta: Some(theta),
                        shading: Some(shade.field().clone()),
                        offsets: Some(offsets),
                    },
                })
            }
        }
    }
}

/// Just the blurred shading field for a given geometry source, without
/// running the dithering stages.
pub fn shading_only(
    dims: (usize, usize),
    geometry: Geometry<'_>,
    cfg: &EngravingConfig,
) -> Result<ShadingField> {
    cfg.validate()?;
    match geometry {
        Geometry::None => Err(Error::InvalidParam(
            "shading needs a landmark file or a depth map".into(),
        )),
        Geometry::Landmarks(lm) => {
            let mask = face_mask(lm, dims, cfg.extend)?;
            let axis = nose_axis(lm, &mask)?;
            let theta = pseudo_normal_field(&mask, &axis)?;
            let shade = shading_field(&theta, cfg.alpha)?;
            blur_shading(&shade, &mask, lm.roll(), cfg.blur_strength)
        }
        Geometry::Depth(depth) => {
            if depth.dims() != dims {
                return Err(Error::Mismatch(format!(
                    "depth map {:?} does not match image {:?}",
                    depth.dims(),
                    dims
                )));
            }
            let sigma = cfg.blur_strength * 0.04 * dims.0.min(dims.1) as f64;
            depth_to_shading(depth, cfg.alpha, sigma)
        }
    }
}

/// The four colour-engraving modes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ColourMode {
    Mask,
    MaskDarkened,
    SeparationSame,
    SeparationShifted,
}

/// Colour engraving of a 3-channel image.
pub fn colour_engrave(
    colour: &Raster<u8>,
    geometry: Geometry<'_>,
    mode: ColourMode,
    cfg: &EngravingConfig,
) -> Result<Raster<u8>> {
    cfg.validate()?;
    if colour.channels() != 3 {
        return Err(Error::Mismatch("colour engraving expects a 3-channel image".into()));
    }

    // The rotate-align brace wraps the whole colour pipeline: work in the
    // upright frame and rotate the finished engraving back.
    if cfg.rotate_align {
        if let Geometry::Landmarks(lm) = &geometry {
            let roll = lm.roll();
            if !roll.is_zero() {
                let center = lm.centroid();
                let upright_img = rotate(colour, roll.negated(), center, 255u8);
                let upright_lm = lm.rotated(roll.negated(), center);
                let mut inner = cfg.clone();
                inner.rotate_align = false;
                let out = colour_engrave(
                    &upright_img,
                    Geometry::Landmarks(&upright_lm),
                    mode,
                    &inner,
                )?;
                return Ok(rotate(&out, roll, center, 255u8));
            }
        }
    }

    let sigma = cfg.colour_blur_sigma();
    match mode {
        ColourMode::Mask => {
            let gray = to_gray(colour)?;
            let engraving = engrave_image(&gray, geometry, cfg)?.image;
            colour::mask(colour, &engraving, sigma)
        }
        ColourMode::MaskDarkened => colour::mask_darkened(
            colour,
            cfg.darken,
            cfg.sat_boost,
            sigma,
            |gray| Ok(engrave_image(gray, geometry, cfg)?.image),
        ),
        ColourMode::SeparationSame | ColourMode::SeparationShifted => {
            let matrices = build_matrices(cfg)?;
            let dims = colour.dims();
            let offsets = match geometry {
                Geometry::None => OffsetField::zeros(dims.0, dims.1),
                Geometry::Landmarks(lm) => landmark_fields(lm, dims, cfg)?.3,
                Geometry::Depth(depth) => {
                    let sigma_d = cfg.blur_strength * 0.04 * dims.0.min(dims.1) as f64;
                    let shade = depth_to_shading(depth, cfg.alpha, sigma_d)?;
                    shading_to_offsets(&shade, cfg.amplitude())
                }
            };
            let shifts = match mode {
                ColourMode::SeparationSame => [0.0; 3],
                _ => cfg.shifts,
            };
            colour::separation(colour, &matrices.hi, &offsets, shifts, cfg.supersample)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn config_round_trips_and_validates() {
        let cfg = EngravingConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.scale_s, 0.25);
        assert_eq!(cfg.period, 16);
        assert_eq!(cfg.white_band, 2.0 / 3.0);
        assert_eq!(cfg.supersample, 4);
        assert_eq!(cfg.amplitude(), 16.0);
        assert_eq!(cfg.extend, 0.45);
        assert_eq!(cfg.alpha, 0.4);
        assert_eq!(cfg.darken, 0.75);
        assert_eq!(cfg.sat_boost, 1.5);
        assert_eq!(cfg.shifts, [0.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(cfg.colour_blur_sigma(), 8.0);

        let bad = EngravingConfig {
            scale_s: 0.7,
            ..EngravingConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn matrices_share_the_base() {
        let cfg = EngravingConfig::default();
        let m = build_matrices(&cfg).unwrap();
        assert_eq!(m.working.period(), (16, 16));
        assert_eq!(m.hi.period(), (64, 64));
        assert!(m.working.is_equalized() && m.hi.is_equalized());
    }

    #[test]
    fn no_geometry_matches_zero_amplitude_landmarks() {
        let (img, lm) = synth::portrait_with_landmarks(128, 128);
        let gray = to_gray(&img).unwrap();
        let cfg = EngravingConfig {
            supersample: 1,
            amplitude: Some(0.0),
            ..EngravingConfig::default()
        };
        let warped = engrave_image(&gray, Geometry::Landmarks(&lm), &cfg).unwrap();
        let straight = engrave_image(&gray, Geometry::None, &cfg).unwrap();
        assert_eq!(warped.image, straight.image);
    }

    #[test]
    fn straight_lines_tile_with_the_period() {
        let gray = Raster::filled(64, 64, 1, 140u8).unwrap();
        let cfg = EngravingConfig {
            supersample: 1,
            ..EngravingConfig::default()
        };
        let out = engrave_image(&gray, Geometry::None, &cfg).unwrap().image;
        for y in 0..48 {
            for x in 0..64 {
                assert_eq!(out.get(x, y, 0), out.get(x, y + 16, 0));
            }
        }
    }

    #[test]
    fn rotate_align_with_zero_roll_is_exact() {
        let (img, lm) = synth::portrait_with_landmarks(128, 128);
        let gray = to_gray(&img).unwrap();
        let lm = lm.with_roll(crate::raster::Angle::ZERO);
        let direct = engrave_image(
            &gray,
            Geometry::Landmarks(&lm),
            &EngravingConfig::default(),
        )
        .unwrap();
        let braced = engrave_image(
            &gray,
            Geometry::Landmarks(&lm),
            &EngravingConfig {
                rotate_align: true,
                ..EngravingConfig::default()
            },
        )
        .unwrap();
        assert_eq!(direct.image, braced.image);
    }

    #[test]
    fn depth_geometry_runs() {
        let depth = Raster::from_fn(96, 96, 1, |x, y, _| {
            let dx = x as f64 - 48.0;
            let dy = y as f64 - 48.0;
            let d = (1.0 - (dx * dx + dy * dy).sqrt() / 68.0).max(0.0);
            (d * 255.0) as u8
        })
        .unwrap();
        let gray = Raster::filled(96, 96, 1, 120u8).unwrap();
        let cfg = EngravingConfig {
            supersample: 2,
            ..EngravingConfig::default()
        };
        let out = engrave_image(&gray, Geometry::Depth(&depth), &cfg).unwrap();
        assert_eq!(out.image.dims(), (96, 96));
        assert!(out.artifacts.offsets.is_some());
    }

    #[test]
    fn grayscale_separation_equals_monochrome() {
        let (img, _) = synth::portrait_with_landmarks(96, 96);
        let gray = to_gray(&img).unwrap();
        let replicated = Raster::from_fn(96, 96, 3, |x, y, _| gray.get(x, y, 0)).unwrap();
        let cfg = EngravingConfig::default();
        let mono = engrave_image(&gray, Geometry::None, &cfg).unwrap().image;
        let sep = colour_engrave(
            &replicated,
            Geometry::None,
            ColourMode::SeparationSame,
            &cfg,
        )
        .unwrap();
        for y in 0..96 {
            for x in 0..96 {
                for c in 0..3 {
                    assert_eq!(sep.get(x, y, c), mono.get(x, y, 0));
                }
            }
        }
    }

    #[test]
    fn mask_mode_on_white_input_stays_white() {
        let white = Raster::filled(64, 64, 3, 255u8).unwrap();
        let out = colour_engrave(
            &white,
            Geometry::None,
            ColourMode::Mask,
            &EngravingConfig::default(),
        )
        .unwrap();
        assert!(out.samples().iter().all(|&v| v == 255));
    }
}
