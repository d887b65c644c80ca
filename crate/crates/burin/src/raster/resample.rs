//! Separable resampling and bilinear rotation.

use crate::error::{Error, Result};
use crate::raster::{Angle, Raster, Sample};

/// Interpolation used by [`resample`]: bilinear when growing an image,
/// box-filter area averaging when shrinking it.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ResampleMode {
    Bilinear,
    AreaAverage,
}

/// Resize a raster. Unchanged dimensions return a copy of the input.
pub fn resample<T: Sample>(
    src: &Raster<T>,
    new_width: usize,
    new_height: usize,
    mode: ResampleMode,
) -> Result<Raster<T>> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::InvalidParam(format!(
            "zero target dimension {new_width}x{new_height}"
        )));
    }
    if (new_width, new_height) == src.dims() {
        return Ok(src.clone());
    }
    let (w, h) = src.dims();
    let planes: Vec<Vec<f64>> = (0..src.channels())
        .map(|c| {
            let plane = src.channel_plane(c);
            let horiz = resample_axis_rows(&plane, w, h, new_width, mode);
            resample_axis_cols(&horiz, new_width, h, new_height, mode)
        })
        .collect();
    Raster::from_planes(new_width, new_height, &planes)
}

fn resample_axis_rows(
    plane: &[f64],
    w: usize,
    h: usize,
    nw: usize,
    mode: ResampleMode,
) -> Vec<f64> {
    let taps = axis_taps(w, nw, mode);
    let mut out = vec![0.0; nw * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for (x, tap) in taps.iter().enumerate() {
            let mut acc = 0.0;
            for (i, wgt) in tap.weights.iter().enumerate() {
                acc += row[tap.start + i] * wgt;
            }
            out[y * nw + x] = acc;
        }
    }
    out
}

fn resample_axis_cols(
    plane: &[f64],
    w: usize,
    h: usize,
    nh: usize,
    mode: ResampleMode,
) -> Vec<f64> {
    let taps = axis_taps(h, nh, mode);
    let mut out = vec![0.0; w * nh];
    for (y, tap) in taps.iter().enumerate() {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, wgt) in tap.weights.iter().enumerate() {
                acc += plane[(tap.start + i) * w + x] * wgt;
            }
            out[y * w + x] = acc;
        }
    }
    out
}

struct AxisTap {
    start: usize,
    weights: Vec<f64>,
}

/// Per-output-coordinate source ranges and normalised weights for one axis.
fn axis_taps(src_len: usize, dst_len: usize, mode: ResampleMode) -> Vec<AxisTap> {
    let mut taps = Vec::with_capacity(dst_len);
    match mode {
        ResampleMode::Bilinear => {
            let scale = src_len as f64 / dst_len as f64;
            for x in 0..dst_len {
                // Pixel centres align; edges clamp.
                let s = ((x as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
                let i0 = s.floor() as usize;
                let f = s - i0 as f64;
                if i0 + 1 < src_len && f > 0.0 {
                    taps.push(AxisTap {
                        start: i0,
                        weights: vec![1.0 - f, f],
                    });
                } else {
                    taps.push(AxisTap {
                        start: i0,
                        weights: vec![1.0],
                    });
                }
            }
        }
        ResampleMode::AreaAverage => {
            let scale = src_len as f64 / dst_len as f64;
            for x in 0..dst_len {
                let lo = x as f64 * scale;
                let hi = (x as f64 + 1.0) * scale;
                let first = lo.floor() as usize;
                let last = (hi.ceil() as usize).min(src_len) - 1;
                let mut weights = Vec::with_capacity(last - first + 1);
                let mut total = 0.0;
                for i in first..=last {
                    let cover = (hi.min((i + 1) as f64) - lo.max(i as f64)).max(0.0);
                    weights.push(cover);
                    total += cover;
                }
                for wgt in &mut weights {
                    *wgt /= total;
                }
                taps.push(AxisTap {
                    start: first,
                    weights,
                });
            }
        }
    }
    taps
}

/// Rotate about `center` with bilinear inverse mapping. Pixels that fall
/// outside the source take `fill`. Output dimensions equal the input's.
pub fn rotate<T: Sample>(src: &Raster<T>, angle: Angle, center: (f64, f64), fill: T) -> Raster<T> {
    if angle.is_zero() {
        return src.clone();
    }
    let (w, h) = src.dims();
    let ch = src.channels();
    let (sin_a, cos_a) = angle.radians().sin_cos();
    let (cx, cy) = center;
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    let eps = 1e-6;
    let mut out = Raster::filled(w, h, ch, fill).expect("source shape already validated");
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let sx = cos_a * dx + sin_a * dy + cx;
            let sy = -sin_a * dx + cos_a * dy + cy;
            if sx < -eps || sy < -eps || sx > max_x + eps || sy > max_y + eps {
                continue;
            }
            let sx = sx.clamp(0.0, max_x);
            let sy = sy.clamp(0.0, max_y);
            let x0 = sx.floor() as usize;
            let y0 = sy.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let y1 = (y0 + 1).min(h - 1);
            let fx = sx - x0 as f64;
            let fy = sy - y0 as f64;
            for c in 0..ch {
                let a = src.get(x0, y0, c).to_f64();
                let b = src.get(x1, y0, c).to_f64();
                let d = src.get(x0, y1, c).to_f64();
                let e = src.get(x1, y1, c).to_f64();
                let top = a + (b - a) * fx;
                let bot = d + (e - d) * fx;
                out.set(x, y, c, T::from_f64(top + (bot - top) * fy));
            }
        }
    }
    out
}

/// Forward map of [`rotate`]: where a source point lands in the rotated
/// raster. Used to carry landmark coordinates into the rotated frame.
pub fn rotate_point(p: (f64, f64), angle: Angle, center: (f64, f64)) -> (f64, f64) {
    let (sin_a, cos_a) = angle.radians().sin_cos();
    let dx = p.0 - center.0;
    let dy = p.1 - center.1;
    (
        cos_a * dx - sin_a * dy + center.0,
        sin_a * dx + cos_a * dy + center.1,
    )
}
