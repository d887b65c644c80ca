//! burin: engraving-style stylisation of portrait photographs.
//!
//! The pipeline renders an image as sets of horizontal engraving lines with
//! perpendicular cross-hatching, using ordered dithering against a purpose
//! built threshold matrix. When facial landmarks are supplied, a rough
//! cylindrical proxy for the head is derived from them and used to bend the
//! engraving lines around the face. Four colour-engraving modes build on the
//! monochrome renderer.
//!
//! Stages, each usable on its own:
//!
//! 1. [`matrix`] constructs, combines, equalises and rescales the dither
//!    matrix that draws the hatching.
//! 2. [`halftone`] applies a matrix to an image: plain thresholding,
//!    supersampled (grayscale) dithering, and offset-warped dithering.
//! 3. [`face`] turns a 68-point landmark file (or an external depth map)
//!    into a shading field and the per-pixel vertical offsets that curve
//!    the lines.
//! 4. [`colour`] provides the colour-engraving modes.
//! 5. [`pipeline`] wires the stages together behind one config struct; the
//!    `burin` command line tool is a thin wrapper over it.
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! outputs, with no randomness anywhere in the system.

pub mod colour;
mod edt;
pub mod error;
pub mod face;
pub mod halftone;
pub mod matrix;
pub mod pipeline;
pub mod raster;
pub mod synth;

pub use error::{Error, Result};
pub use face::{FaceMask, LandmarkSet, ShadingField};
pub use halftone::OffsetField;
pub use matrix::{CrosshatchParams, DitherMatrix};
pub use pipeline::{ColourMode, EngravingConfig, Geometry};
pub use raster::{Angle, Raster, ResampleMode, Sample};
