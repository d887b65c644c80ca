//! From 68-point facial landmarks (or an external depth map) to the shading
//! field and the offset field that bends the engraving lines.
//!
//! The head is approximated by a rounded cylinder implied by two distance
//! fields: `D`, the distance to an axis fitted through the nose bridge, and
//! `B`, the distance to the face-mask boundary. The pseudo-normal angle
//! `theta = (pi/2) * D / (D + B)` is 0 on the axis and pi/2 at the mask
//! border, everything outside the mask is truncated to pi/2, and shading
//! follows `cos(theta) * (1 - alpha) + alpha` with frontal lighting.

use std::path::Path;

use serde::Deserialize;

use crate::edt::squared_edt;
use crate::error::{Error, Result};
use crate::halftone::OffsetField;
use crate::raster::{
    gaussian_blur, oriented_gaussian_blur, rotate_point, Angle, Raster,
};

/// Landmark indices follow the common 68-point convention: 0-16 jawline,
/// 17-26 brows, 27-30 nose bridge, 31-35 nose base, 36-47 eyes, 48-67 mouth.
pub const JAW: std::ops::RangeInclusive<usize> = 0..=16;
pub const BROWS: std::ops::RangeInclusive<usize> = 17..=26;
pub const NOSE_BRIDGE: std::ops::RangeInclusive<usize> = 27..=30;
pub const LEFT_EYE: std::ops::RangeInclusive<usize> = 36..=41;
pub const RIGHT_EYE: std::ops::RangeInclusive<usize> = 42..=47;

const CHIN: usize = 8;

/// 68 ordered landmark positions in image pixel coordinates plus the head
/// roll angle.
#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkSet {
    points: Vec<(f64, f64)>,
    roll: Angle,
}

#[derive(Deserialize)]
struct LandmarkFile {
    points: Vec<[f64; 2]>,
    roll_deg: Option<f64>,
}

impl LandmarkSet {
    /// Parse the landmark JSON schema
    /// `{"points": [[x, y] * 68], "roll_deg": <optional number>}`.
    ///
    /// Coordinates are image pixels, origin top left, y down. When
    /// `roll_deg` is absent the roll is derived from the eye centres.
    pub fn from_json_str(json: &str, image_dims: (usize, usize)) -> Result<Self> {
        let file: LandmarkFile = serde_json::from_str(json)
            .map_err(|e| Error::Landmarks(format!("malformed landmark JSON: {e}")))?;
        if file.points.len() != 68 {
            return Err(Error::Landmarks(format!(
                "expected 68 points, got {}",
                file.points.len()
            )));
        }
        let (w, h) = (image_dims.0 as f64, image_dims.1 as f64);
        let mut points = Vec::with_capacity(68);
        for (i, p) in file.points.iter().enumerate() {
            let (x, y) = (p[0], p[1]);
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Landmarks(format!("point {i} is not finite")));
            }
            if x.abs() > 2.0 * w || y.abs() > 2.0 * h {
                return Err(Error::Landmarks(format!(
                    "point {i} ({x}, {y}) lies wildly outside the {w}x{h} image"
                )));
            }
            points.push((x, y));
        }
        if let Some(roll_deg) = file.roll_deg {
            if !roll_deg.is_finite() {
                return Err(Error::Landmarks("roll_deg is not finite".into()));
            }
            Ok(LandmarkSet {
                points,
                roll: Angle::from_degrees(roll_deg),
            })
        } else {
            let roll = derived_roll(&points);
            Ok(LandmarkSet { points, roll })
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>, image_dims: (usize, usize)) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&json, image_dims)
    }

    /// Build directly from 68 points; the roll comes from the eye centres.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() != 68 {
            return Err(Error::Landmarks(format!(
                "expected 68 points, got {}",
                points.len()
            )));
        }
        let roll = derived_roll(&points);
        Ok(LandmarkSet { points, roll })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn roll(&self) -> Angle {
        self.roll
    }

    pub fn with_roll(mut self, roll: Angle) -> Self {
        self.roll = roll;
        self
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        (sx / n, sy / n)
    }

    /// Landmarks carried into a rotated frame, using the same forward map as
    /// raster rotation. The stored roll shifts by the same angle.
    pub fn rotated(&self, angle: Angle, center: (f64, f64)) -> Self {
        LandmarkSet {
            points: self
                .points
                .iter()
                .map(|&p| rotate_point(p, angle, center))
                .collect(),
            roll: self.roll.plus(angle),
        }
    }

    /// Serialise back to the landmark JSON schema.
    pub fn to_json_string(&self) -> String {
        let points: Vec<String> = self
            .points
            .iter()
            .map(|(x, y)| format!("[{x}, {y}]"))
            .collect();
        format!(
            "{{\"points\": [{}], \"roll_deg\": {}}}",
            points.join(", "),
            self.roll.degrees()
        )
    }
}

/// Roll fallback: the angle of the segment joining the two eye centres.
fn derived_roll(points: &[(f64, f64)]) -> Angle {
    let centre = |range: std::ops::RangeInclusive<usize>| {
        let pts = &points[*range.start()..=*range.end()];
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        (sx / n, sy / n)
    };
    let left = centre(LEFT_EYE);
    let right = centre(RIGHT_EYE);
    Angle::from_radians((right.1 - left.1).atan2(right.0 - left.0))
}

/// Binary face mask with the bounding box of its set pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceMask {
    raster: Raster<u8>,
    bbox: (usize, usize, usize, usize),
}

impl FaceMask {
    /// Build from a membership predicate. Errors when no pixel is set.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut inside: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let raster = Raster::from_fn(width, height, 1, |x, y, _| {
            if inside(x, y) {
                255u8
            } else {
                0
            }
        })?;
        Self::from_raster(raster)
    }

    fn from_raster(raster: Raster<u8>) -> Result<Self> {
        let (w, h) = raster.dims();
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0usize, 0usize);
        for y in 0..h {
            for x in 0..w {
                if raster.get(x, y, 0) != 0 {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        if x0 == usize::MAX {
            return Err(Error::Geometry("empty face mask".into()));
        }
        Ok(FaceMask {
            raster,
            bbox: (x0, y0, x1, y1),
        })
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.raster.get(x, y, 0) != 0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.raster.dims()
    }

    /// Inclusive bounding box (x0, y0, x1, y1) of the masked region.
    pub fn bbox(&self) -> (usize, usize, usize, usize) {
        self.bbox
    }

    pub fn raster(&self) -> &Raster<u8> {
        &self.raster
    }

    pub fn area(&self) -> usize {
        self.raster.samples().iter().filter(|&&v| v != 0).count()
    }
}

/// Face mask: the filled convex hull of the jawline points and the brow
/// points translated up the face axis by `extend` times the brow-to-chin
/// height, clipped to the image.
pub fn face_mask(
    landmarks: &LandmarkSet,
    image_dims: (usize, usize),
    extend: f64,
) -> Result<FaceMask> {
    if extend < 0.0 {
        return Err(Error::InvalidParam(format!(
            "mask extension must be >= 0, got {extend}"
        )));
    }
    let pts = landmarks.points();
    let chin = pts[CHIN];
    let brows = &pts[*BROWS.start()..=*BROWS.end()];
    let n = brows.len() as f64;
    let brow_centroid = brows
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let axis = (brow_centroid.0 - chin.0, brow_centroid.1 - chin.1);
    let height = (axis.0 * axis.0 + axis.1 * axis.1).sqrt();
    if height < 1e-9 {
        return Err(Error::Geometry("brow centroid coincides with the chin".into()));
    }
    // extend * height along the unit chin-to-brow direction.
    let up = (axis.0 * extend, axis.1 * extend);

    let mut hull_input: Vec<(f64, f64)> = pts[*JAW.start()..=*JAW.end()].to_vec();
    hull_input.extend(brows.iter().map(|p| (p.0 + up.0, p.1 + up.1)));
    let hull = convex_hull(&hull_input)?;

    let (w, h) = image_dims;
    let min_x = hull.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max_x = hull.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let min_y = hull.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max_y = hull.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let x_lo = min_x.floor().max(0.0) as usize;
    let y_lo = min_y.floor().max(0.0) as usize;
    let x_hi = (max_x.ceil() as isize).clamp(0, w as isize - 1) as usize;
    let y_hi = (max_y.ceil() as isize).clamp(0, h as isize - 1) as usize;

    let mut raster = Raster::filled(w, h, 1, 0u8)?;
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            if point_in_convex(&hull, (x as f64, y as f64)) {
                raster.set(x, y, 0, 255);
            }
        }
    }
    FaceMask::from_raster(raster)
}

/// Monotone-chain convex hull.
fn convex_hull(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::Geometry("fewer than 3 distinct landmarks".into()));
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::Geometry("collinear landmarks give a degenerate hull".into()));
    }
    Ok(lower)
}

fn point_in_convex(hull: &[(f64, f64)], p: (f64, f64)) -> bool {
    let n = hull.len();
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        if cross < -1e-9 {
            return false;
        }
    }
    true
}

/// The nose-bridge axis segment, clipped to the face mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisSegment {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl AxisSegment {
    /// Euclidean distance from a point to the segment.
    pub fn distance_to(&self, p: (f64, f64)) -> f64 {
        let d = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let len_sq = d.0 * d.0 + d.1 * d.1;
        let t = if len_sq <= 1e-18 {
            0.0
        } else {
            (((p.0 - self.a.0) * d.0 + (p.1 - self.a.1) * d.1) / len_sq).clamp(0.0, 1.0)
        };
        let cx = self.a.0 + t * d.0;
        let cy = self.a.1 + t * d.1;
        ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
    }

    pub fn direction(&self) -> (f64, f64) {
        let d = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let len = (d.0 * d.0 + d.1 * d.1).sqrt();
        (d.0 / len, d.1 / len)
    }
}

/// Fit a line through the nose-bridge landmarks (total least squares, so
/// vertical bridges are exact) and extend it to the mask boundary in both
/// directions.
pub fn nose_axis(landmarks: &LandmarkSet, mask: &FaceMask) -> Result<AxisSegment> {
    let bridge = &landmarks.points()[*NOSE_BRIDGE.start()..=*NOSE_BRIDGE.end()];
    let n = bridge.len() as f64;
    let mean = bridge
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in bridge {
        let dx = p.0 - mean.0;
        let dy = p.1 - mean.1;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx + syy < 1e-12 {
        return Err(Error::Geometry("nose bridge points coincide".into()));
    }
    // Principal eigenvector of the 2x2 scatter matrix.
    let trace_half = (sxx + syy) / 2.0;
    let det = sxx * syy - sxy * sxy;
    let lambda = trace_half + (trace_half * trace_half - det).max(0.0).sqrt();
    let dir = if sxy.abs() > 1e-12 {
        (lambda - syy, sxy)
    } else if sxx >= syy {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let len = (dir.0 * dir.0 + dir.1 * dir.1).sqrt();
    let mut dir = (dir.0 / len, dir.1 / len);

    // Orient along the bridge, from point 27 toward point 30.
    let span = (bridge[3].0 - bridge[0].0, bridge[3].1 - bridge[0].1);
    if span.0 * dir.0 + span.1 * dir.1 < 0.0 {
        dir = (-dir.0, -dir.1);
    }

    let (w, h) = mask.dims();
    let inside = |p: (f64, f64)| {
        p.0 >= 0.0
            && p.1 >= 0.0
            && (p.0.round() as usize) < w
            && (p.1.round() as usize) < h
            && mask.contains(p.0.round() as usize, p.1.round() as usize)
    };
    if !inside(mean) {
        return Err(Error::Geometry("nose bridge lies outside the face mask".into()));
    }
    let march = |sign: f64| {
        let step = 0.25;
        let mut t = 0.0;
        let mut last = mean;
        loop {
            let t_next = t + step;
            let p = (
                mean.0 + sign * t_next * dir.0,
                mean.1 + sign * t_next * dir.1,
            );
            if !inside(p) {
                return last;
            }
            last = p;
            t = t_next;
        }
    };
    Ok(AxisSegment {
        a: march(-1.0),
        b: march(1.0),
    })
}

/// Pseudo-normal angles in [0, pi/2]: `(pi/2) * D / (D + B)` inside the
/// mask, truncated to pi/2 outside it. `D` is the exact distance to the
/// axis segment, `B` the distance to the nearest background pixel less one,
/// so the outermost mask ring sits exactly at pi/2.
pub fn pseudo_normal_field(mask: &FaceMask, axis: &AxisSegment) -> Result<Raster<f32>> {
    let (w, h) = mask.dims();
    if mask.area() == 0 {
        return Err(Error::Geometry("empty face mask".into()));
    }
    let background: Vec<bool> = (0..w * h)
        .map(|i| mask.raster().samples()[i] == 0)
        .collect();
    if background.iter().all(|&b| !b) {
        return Err(Error::Geometry("mask covers the whole image".into()));
    }
    let sq = squared_edt(&background, w, h);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            if !mask.contains(x, y) {
                out.push(half_pi as f32);
                continue;
            }
            let d = axis.distance_to((x as f64, y as f64));
            let b = (sq[y * w + x].sqrt() - 1.0).max(0.0);
            let theta = if d + b <= 1e-12 {
                half_pi
            } else {
                (half_pi * d / (d + b)).clamp(0.0, half_pi)
            };
            out.push(theta as f32);
        }
    }
    Raster::from_samples(w, h, 1, out)
}

/// Continuous shading raster in [alpha, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ShadingField {
    field: Raster<f32>,
    alpha: f32,
}

impl ShadingField {
    pub fn field(&self) -> &Raster<f32> {
        &self.field
    }

    pub fn alpha(&self) -> f32 {
        self.alpha
    }

    pub fn dims(&self) -> (usize, usize) {
        self.field.dims()
    }
}

/// Pseudo-Phong shade `cos(theta) * (1 - alpha) + alpha` with ambient
/// weight `alpha`; 1 where the normal faces the light, `alpha` at the rim.
pub fn shading_field(theta: &Raster<f32>, alpha: f32) -> Result<ShadingField> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParam(format!(
            "ambient weight alpha must lie in [0, 1), got {alpha}"
        )));
    }
    if theta.channels() != 1 {
        return Err(Error::Mismatch("theta field must be single channel".into()));
    }
    let a = f64::from(alpha);
    let field = Raster::from_samples(
        theta.width(),
        theta.height(),
        1,
        theta
            .samples()
            .iter()
            .map(|&t| ((f64::from(t).cos() * (1.0 - a) + a).clamp(a, 1.0)) as f32)
            .collect(),
    )?;
    Ok(ShadingField { field, alpha })
}

/// Anisotropic smoothing of the shading field along the head axis, with an
/// extra doubled-sigma pass cross-faded in over the top and bottom fifths of
/// the mask's bounding box. `strength` scales every sigma; zero is the
/// identity.
pub fn blur_shading(
    shade: &ShadingField,
    mask: &FaceMask,
    roll: Angle,
    strength: f64,
) -> Result<ShadingField> {
    if strength < 0.0 {
        return Err(Error::InvalidParam(format!(
            "blur strength must be >= 0, got {strength}"
        )));
    }
    if strength == 0.0 {
        return Ok(shade.clone());
    }
    let (x0, y0, x1, y1) = mask.bbox();
    let bw = (x1 - x0 + 1) as f64;
    let bh = (y1 - y0 + 1) as f64;
    let sigma_along = strength * 0.12 * bh;
    let sigma_across = strength * 0.03 * bw;
    let axis = roll.plus(Angle::from_radians(std::f64::consts::FRAC_PI_2));

    let base = oriented_gaussian_blur(shade.field(), sigma_along, sigma_across, axis)?;
    let band = (0.2 * bh).round().max(1.0);

    // The doubled pass only matters where the cross-fade weight is nonzero.
    // With an upright head axis that region is two row bands, which the
    // banded evaluator handles without touching the middle of the frame.
    let heavy = if axis.radians().cos().abs() < 1e-9 {
        let rows = shade.field().height();
        let top_end = ((y0 as f64 + band).ceil() as usize + 1).min(rows);
        let bot_start = (y1 as f64 - band).floor().max(0.0) as usize;
        crate::raster::banded_vertical_blur(
            &base,
            2.0 * sigma_along,
            2.0 * sigma_across,
            [(0, top_end), (bot_start, rows)],
        )
    } else {
        oriented_gaussian_blur(&base, 2.0 * sigma_along, 2.0 * sigma_across, axis)?
    };
    let (w, h) = base.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let yf = y as f64;
        let w_top = if yf <= y0 as f64 {
            1.0
        } else {
            (1.0 - (yf - y0 as f64) / band).max(0.0)
        };
        let w_bot = if yf >= y1 as f64 {
            1.0
        } else {
            (1.0 - (y1 as f64 - yf) / band).max(0.0)
        };
        let wgt = w_top.max(w_bot);
        for x in 0..w {
            let b = f64::from(base.get(x, y, 0));
            let hv = f64::from(heavy.get(x, y, 0));
            out.push((b + (hv - b) * wgt) as f32);
        }
    }
    Ok(ShadingField {
        field: Raster::from_samples(w, h, 1, out)?,
        alpha: shade.alpha,
    })
}

/// Shading from an external depth map (larger sample = nearer): min-max
/// normalise, map affinely onto [alpha, 1] and blur isotropically.
pub fn depth_to_shading(depth: &Raster<u8>, alpha: f32, sigma: f64) -> Result<ShadingField> {
    if depth.channels() != 1 {
        return Err(Error::Mismatch("depth maps are single channel".into()));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParam(format!(
            "ambient weight alpha must lie in [0, 1), got {alpha}"
        )));
    }
    let min = *depth.samples().iter().min().unwrap();
    let max = *depth.samples().iter().max().unwrap();
    if min == max {
        return Err(Error::Geometry("depth map has zero range".into()));
    }
    let a = f64::from(alpha);
    let range = f64::from(max) - f64::from(min);
    let field = Raster::from_samples(
        depth.width(),
        depth.height(),
        1,
        depth
            .samples()
            .iter()
            .map(|&v| {
                let d = (f64::from(v) - f64::from(min)) / range;
                (a + (1.0 - a) * d) as f32
            })
            .collect(),
    )?;
    let field = gaussian_blur(&field, sigma)?;
    Ok(ShadingField { field, alpha })
}

/// Vertical warp offsets from a shading field: `amplitude` pixels where the
/// shade is 1 (on the face axis), zero where it sits at the ambient floor.
pub fn shading_to_offsets(shade: &ShadingField, amplitude: f64) -> OffsetField {
    let (w, h) = shade.dims();
    let a = f64::from(shade.alpha());
    let scale = amplitude / (1.0 - a);
    OffsetField::from_samples(
        w,
        h,
        shade
            .field()
            .samples()
            .iter()
            .map(|&s| ((f64::from(s) - a) * scale) as f32)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_landmarks() -> Vec<(f64, f64)> {
        // A synthetic frontal face in a 200x200 frame.
        let mut pts = Vec::with_capacity(68);
        let (cx, cy, rx, ry) = (100.0, 100.0, 55.0, 70.0);
        for i in 0..17 {
            let ang = (170.0 - 160.0 * i as f64 / 16.0).to_radians();
            pts.push((cx + rx * ang.cos(), cy + ry * ang.sin()));
        }
        for i in 0..5 {
            pts.push((cx - 45.0 + 9.0 * i as f64, cy - 30.0));
        }
        for i in 0..5 {
            pts.push((cx + 9.0 + 9.0 * i as f64, cy - 30.0));
        }
        for i in 0..4 {
            pts.push((cx, cy - 20.0 + 12.0 * i as f64));
        }
        for i in 0..5 {
            pts.push((cx - 10.0 + 5.0 * i as f64, cy + 24.0));
        }
        for i in 0..6 {
            let ang = std::f64::consts::TAU * i as f64 / 6.0;
            pts.push((cx - 28.0 + 7.0 * ang.cos(), cy - 18.0 + 3.5 * ang.sin()));
        }
        for i in 0..6 {
            let ang = std::f64::consts::TAU * i as f64 / 6.0;
            pts.push((cx + 28.0 + 7.0 * ang.cos(), cy - 18.0 + 3.5 * ang.sin()));
        }
        for i in 0..20 {
            let ang = std::f64::consts::TAU * i as f64 / 20.0;
            pts.push((cx + 14.0 * ang.cos(), cy + 45.0 + 6.0 * ang.sin()));
        }
        pts
    }

    fn lm_json(points: &[(f64, f64)], roll: Option<f64>) -> String {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("[{x},{y}]")).collect();
        match roll {
            Some(r) => format!("{{\"points\":[{}],\"roll_deg\":{}}}", pts.join(","), r),
            None => format!("{{\"points\":[{}]}}", pts.join(",")),
        }
    }

    #[test]
    fn parse_accepts_explicit_roll() {
        let lm =
            LandmarkSet::from_json_str(&lm_json(&square_landmarks(), Some(0.0)), (200, 200))
                .unwrap();
        assert_eq!(lm.roll(), Angle::ZERO);
    }

    #[test]
    fn parse_rejects_wrong_count() {
        let pts = &square_landmarks()[..67];
        let err = LandmarkSet::from_json_str(&lm_json(pts, None), (200, 200)).unwrap_err();
        assert!(err.to_string().contains("expected 68"));
    }

    #[test]
    fn parse_rejects_far_points() {
        let mut pts = square_landmarks();
        pts[10] = (1e6, 50.0);
        assert!(LandmarkSet::from_json_str(&lm_json(&pts, None), (200, 200)).is_err());
    }

    #[test]
    fn parse_rejects_non_finite() {
        let pts: Vec<String> = (0..68).map(|_| "[1e999,5]".to_string()).collect();
        let json = format!("{{\"points\":[{}]}}", pts.join(","));
        assert!(LandmarkSet::from_json_str(&json, (200, 200)).is_err());
    }

    #[test]
    fn level_eyes_derive_zero_roll() {
        let mut pts = square_landmarks();
        for i in LEFT_EYE {
            pts[i] = (100.0 + (i as f64 - 38.5), 100.0);
        }
        for i in RIGHT_EYE {
            pts[i] = (200.0 + (i as f64 - 44.5), 100.0);
        }
        let lm = LandmarkSet::from_json_str(&lm_json(&pts, None), (400, 400)).unwrap();
        assert_eq!(lm.roll(), Angle::ZERO);
    }

    #[test]
    fn json_round_trip() {
        let lm = LandmarkSet::from_points(square_landmarks()).unwrap();
        let back = LandmarkSet::from_json_str(&lm.to_json_string(), (200, 200)).unwrap();
        assert_eq!(lm, back);
    }

    #[test]
    fn mask_respects_extension() {
        let lm = LandmarkSet::from_points(square_landmarks()).unwrap();
        let flat = face_mask(&lm, (200, 200), 0.0).unwrap();
        let brow_y = 70.0;
        // Without extension the mask cannot reach above the brow line.
        assert!(flat.bbox().1 as f64 >= brow_y - 1.0);

        let extended = face_mask(&lm, (200, 200), 0.45).unwrap();
        let chin_y = lm.points()[CHIN].1;
        let face_h = chin_y - brow_y;
        let expected_top = brow_y - 0.45 * face_h;
        assert!((extended.bbox().1 as f64 - expected_top).abs() <= 2.0);
        assert!(extended.area() > flat.area());

        let larger = face_mask(&lm, (200, 200), 0.7).unwrap();
        assert!(larger.area() > extended.area());
    }

    #[test]
    fn collinear_landmarks_are_degenerate() {
        let pts: Vec<(f64, f64)> = (0..68).map(|i| (i as f64, i as f64)).collect();
        let lm = LandmarkSet::from_points(pts).unwrap();
        assert!(face_mask(&lm, (100, 100), 0.45).is_err());
    }

    #[test]
    fn axis_spans_vertical_bridge() {
        let lm = LandmarkSet::from_points(square_landmarks()).unwrap();
        let mask = face_mask(&lm, (200, 200), 0.45).unwrap();
        let axis = nose_axis(&lm, &mask).unwrap();
        // The bridge sits on x = 100, so the fitted chord must too.
        assert!((axis.a.0 - 100.0).abs() < 1e-6);
        assert!((axis.b.0 - 100.0).abs() < 1e-6);
        assert!(axis.b.1 > axis.a.1);
        // Endpoints reach the mask boundary: one step further is outside.
        let dir = axis.direction();
        let beyond = (axis.b.0 + dir.0, axis.b.1 + dir.1);
        let (w, h) = mask.dims();
        let bx = beyond.0.round() as usize;
        let by = beyond.1.round() as usize;
        assert!(bx >= w || by >= h || !mask.contains(bx, by));
    }

    #[test]
    fn axis_on_circular_mask_is_the_chord() {
        let mask = FaceMask::from_fn(120, 120, |x, y| {
            let dx = x as f64 - 50.0;
            let dy = y as f64 - 60.0;
            dx * dx + dy * dy <= 40.0 * 40.0
        })
        .unwrap();
        let mut pts = square_landmarks();
        for (i, idx) in NOSE_BRIDGE.enumerate() {
            pts[idx] = (50.0, 45.0 + 10.0 * i as f64);
        }
        let lm = LandmarkSet::from_points(pts).unwrap();
        let axis = nose_axis(&lm, &mask).unwrap();
        assert!((axis.a.0 - 50.0).abs() < 1e-6);
        assert!((axis.b.0 - 50.0).abs() < 1e-6);
        assert!(axis.a.1 < 25.0 && axis.b.1 > 95.0);
    }

    #[test]
    fn axis_rotates_with_the_landmarks() {
        let lm = LandmarkSet::from_points(square_landmarks()).unwrap();
        let mask = face_mask(&lm, (200, 200), 0.45).unwrap();
        let axis = nose_axis(&lm, &mask).unwrap();

        let angle = Angle::from_degrees(20.0);
        let turned = lm.rotated(angle, (100.0, 100.0));
        let turned_mask = face_mask(&turned, (200, 200), 0.45).unwrap();
        let turned_axis = nose_axis(&turned, &turned_mask).unwrap();

        let before = axis.direction();
        let after = turned_axis.direction();
        let got = after.1.atan2(after.0) - before.1.atan2(before.0);
        let got = Angle::from_radians(got);
        assert!((got.radians() - angle.radians()).abs() < 0.05);
    }

    #[test]
    fn bridge_points_must_differ() {
        let mut pts = square_landmarks();
        for idx in NOSE_BRIDGE {
            pts[idx] = (100.0, 100.0);
        }
        let lm = LandmarkSet::from_points(pts).unwrap();
        let mask = face_mask(&lm, (200, 200), 0.45).unwrap();
        assert!(nose_axis(&lm, &mask).is_err());
    }

    fn disc_fixture() -> (FaceMask, AxisSegment) {
        let (cx, cy, r) = (110.0, 110.0, 100.0);
        let mask = FaceMask::from_fn(221, 221, |x, y| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            dx * dx + dy * dy <= r * r
        })
        .unwrap();
        let axis = AxisSegment {
            a: (cx, cy - r),
            b: (cx, cy + r),
        };
        (mask, axis)
    }

    #[test]
    fn theta_boundary_conditions() {
        let (mask, axis) = disc_fixture();
        let theta = pseudo_normal_field(&mask, &axis).unwrap();
        let half_pi = std::f32::consts::FRAC_PI_2;
        // On the axis.
        assert_eq!(theta.get(110, 110, 0), 0.0);
        assert_eq!(theta.get(110, 30, 0), 0.0);
        // Outside the mask.
        assert_eq!(theta.get(0, 0, 0), half_pi);
        // On the outermost mask ring (boundary pixel).
        assert_eq!(theta.get(210, 110, 0), half_pi);
    }

    #[test]
    fn theta_matches_disc_closed_form() {
        // On the horizontal midline of the disc the closed form is linear:
        // theta(d) = (pi/2) * d / R.
        let (mask, axis) = disc_fixture();
        let theta = pseudo_normal_field(&mask, &axis).unwrap();
        let half_pi = std::f64::consts::FRAC_PI_2;
        for d in 0..=98usize {
            let got = f64::from(theta.get(110 + d, 110, 0));
            let want = half_pi * d as f64 / 100.0;
            assert!(
                (got - want).abs() <= 0.02,
                "d = {d}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn shade_formula() {
        let theta = Raster::from_samples(
            3,
            1,
            1,
            vec![0.0f32, std::f32::consts::FRAC_PI_3, std::f32::consts::FRAC_PI_2],
        )
        .unwrap();
        let shade = shading_field(&theta, 0.4).unwrap();
        assert_eq!(shade.field().get(0, 0, 0), 1.0);
        assert!((shade.field().get(1, 0, 0) - 0.7).abs() < 1e-6);
        assert_eq!(shade.field().get(2, 0, 0), 0.4);
    }

    #[test]
    fn blur_strength_zero_is_identity() {
        let (mask, axis) = disc_fixture();
        let theta = pseudo_normal_field(&mask, &axis).unwrap();
        let shade = shading_field(&theta, 0.4).unwrap();
        let out = blur_shading(&shade, &mask, Angle::ZERO, 0.0).unwrap();
        assert_eq!(out, shade);
    }

    #[test]
    fn blur_preserves_constants_and_range() {
        let mask = FaceMask::from_fn(64, 64, |x, y| {
            (8..56).contains(&x) && (8..56).contains(&y)
        })
        .unwrap();
        let field = Raster::filled(64, 64, 1, 0.55f32).unwrap();
        let shade = ShadingField { field, alpha: 0.4 };
        let out = blur_shading(&shade, &mask, Angle::ZERO, 1.0).unwrap();
        for &v in out.field().samples() {
            assert!((v - 0.55).abs() < 1e-5);
        }
    }

    #[test]
    fn blur_smooths_the_mask_boundary() {
        let (mask, axis) = disc_fixture();
        let theta = pseudo_normal_field(&mask, &axis).unwrap();
        let shade = shading_field(&theta, 0.4).unwrap();
        let out = blur_shading(&shade, &mask, Angle::ZERO, 1.0).unwrap();
        let (w, h) = out.dims();
        let mut max_jump = 0.0f32;
        for y in 1..h {
            for x in 0..w {
                let jump = (out.field().get(x, y, 0) - out.field().get(x, y - 1, 0)).abs();
                max_jump = max_jump.max(jump);
            }
        }
        assert!(max_jump <= 0.15, "vertical jump {max_jump} exceeds 0.15");
        for &v in out.field().samples() {
            assert!((0.4..=1.0 + 1e-6).contains(&v));
        }
    }

    #[test]
    fn depth_shading_endpoints() {
        let depth = Raster::from_fn(4, 4, 1, |x, y, _| (16 * (x + 4 * y)) as u8).unwrap();
        let shade = depth_to_shading(&depth, 0.4, 0.0).unwrap();
        assert_eq!(shade.field().get(0, 0, 0), 0.4);
        let max_px = shade.field().get(3, 3, 0);
        assert!((max_px - 1.0).abs() < 1e-6);

        // Mid-range depth maps to the midpoint of [alpha, 1].
        let mid = Raster::from_samples(3, 1, 1, vec![0u8, 128, 255]).unwrap();
        let shade = depth_to_shading(&mid, 0.4, 0.0).unwrap();
        assert!((shade.field().get(1, 0, 0) - 0.7012).abs() < 1e-3);

        let flat = Raster::filled(4, 4, 1, 9u8).unwrap();
        assert!(depth_to_shading(&flat, 0.4, 0.0).is_err());
    }

    #[test]
    fn offsets_scale_between_floor_and_axis() {
        let field = Raster::from_samples(3, 1, 1, vec![0.4f32, 0.7, 1.0]).unwrap();
        let shade = ShadingField { field, alpha: 0.4 };
        let offsets = shading_to_offsets(&shade, 16.0);
        assert_eq!(offsets.get(0, 0), 0.0);
        assert!((offsets.get(1, 0) - 8.0).abs() < 1e-4);
        assert!((offsets.get(2, 0) - 16.0).abs() < 1e-4);
    }

    #[test]
    fn disc_offsets_fall_off_monotonically() {
        let (mask, axis) = disc_fixture();
        let theta = pseudo_normal_field(&mask, &axis).unwrap();
        let shade = shading_field(&theta, 0.4).unwrap();
        let offsets = shading_to_offsets(&shade, 16.0);
        let mut prev = f32::INFINITY;
        for d in 0..=100usize {
            let v = offsets.get(110 + d, 110);
            assert!(v <= prev + 1e-6, "offset rose at d = {d}");
            prev = v;
        }
    }
}
