//! Construction of the engraving dither matrix.
//!
//! The matrix is built from two parts: a horizontal-line profile whose rows
//! run 255 down to 0 and back, and a narrower vertical stripe that supplies
//! the cross-hatching. The stripe is range-compressed toward white by the
//! cross-hatch strength `S`, merged into the horizontal matrix band by band,
//! and the result is histogram equalised so dithering preserves tone.
//!
//! Band semantics of [`DitherMatrix::combine`]: in the top and bottom bands
//! thresholds along the stripe are lowered to `255 - s` (white hatch lines
//! switch on no later than tone `255 * S`), in the middle band they are
//! raised to `s` (black hatch lines persist until at least `255 * (1 - S)`).
//! Columns where the scaled stripe sits at peak value are left untouched, so
//! `S = 0` reproduces the horizontal matrix exactly.

use crate::error::{Error, Result};
use crate::raster::{resample, Raster, ResampleMode};

/// Tileable threshold grid. After finalisation (equalisation) every value
/// lies in 1..=255; lookups wrap modulo the period.
#[derive(Clone, Debug, PartialEq)]
pub struct DitherMatrix {
    period_w: usize,
    period_h: usize,
    values: Vec<f32>,
    equalized: bool,
}

/// Parameters of the cross-hatch construction.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CrosshatchParams {
    /// Cross-hatch strength in [0, 0.5]. Zero disables cross-hatching.
    pub s: f64,
    /// Fraction of the period width carrying the vertical stripe, in (0, 1].
    pub stripe_fraction: f64,
    /// Fraction of rows (split between top and bottom) that receive white
    /// cross-hatch; the remaining middle band receives black. In (0, 1).
    pub white_band: f64,
    /// Side length of the full-resolution base matrix. Odd so the
    /// horizontal profile has a single zero-valued centre row.
    pub base_height: usize,
}

impl Default for CrosshatchParams {
    fn default() -> Self {
        CrosshatchParams {
            s: 0.25,
            stripe_fraction: 0.5,
            white_band: 2.0 / 3.0,
            base_height: 511,
        }
    }
}

impl CrosshatchParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.s) {
            return Err(Error::InvalidParam(format!(
                "cross-hatch strength S must lie in [0, 0.5], got {}",
                self.s
            )));
        }
        if !(self.stripe_fraction > 0.0 && self.stripe_fraction <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "stripe fraction must lie in (0, 1], got {}",
                self.stripe_fraction
            )));
        }
        if !(self.white_band > 0.0 && self.white_band < 1.0) {
            return Err(Error::InvalidParam(format!(
                "white band fraction must lie in (0, 1), got {}",
                self.white_band
            )));
        }
        if self.base_height < 3 || self.base_height.is_multiple_of(2) {
            return Err(Error::InvalidParam(format!(
                "base height must be odd and >= 3, got {}",
                self.base_height
            )));
        }
        Ok(())
    }
}

fn round(v: f64) -> f32 {
    v.round() as f32
}

impl DitherMatrix {
    /// Horizontal-line profile: every row is constant, with values running
    /// 255 at the top edge down to 0 at the centre row and back up to 255.
    /// `height` must be odd and at least 3 so the zero row exists.
    pub fn horizontal_profile(height: usize, width: usize) -> Result<Self> {
        if height < 3 || height.is_multiple_of(2) {
            return Err(Error::InvalidParam(format!(
                "horizontal profile needs an odd height >= 3, got {height}"
            )));
        }
        if width == 0 {
            return Err(Error::InvalidParam("zero-width matrix".into()));
        }
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            // Integer numerator keeps mirrored rows bit-identical.
            let num = (height - 1).abs_diff(2 * r);
            let v = round(255.0 * num as f64 / (height - 1) as f64);
            values.extend(std::iter::repeat_n(v, width));
        }
        Ok(DitherMatrix {
            period_w: width,
            period_h: height,
            values,
            equalized: false,
        })
    }

    /// Vertical-stripe profile before scaling: a column triangle (0 at the
    /// stripe centre, 255 at its edges) over the central
    /// `round(stripe_fraction * width)` columns, with everything else
    /// saturated at peak value. Constant down each column.
    pub fn vertical_stripe(width: usize, height: usize, params: &CrosshatchParams) -> Result<Self> {
        params.validate()?;
        if width < 3 || height == 0 {
            return Err(Error::InvalidParam(format!(
                "stripe matrix needs width >= 3 and height >= 1, got {width}x{height}"
            )));
        }
        let stripe_w = (params.stripe_fraction * width as f64).round() as usize;
        if stripe_w > width {
            return Err(Error::InvalidParam("stripe wider than the matrix".into()));
        }
        let stripe_w = stripe_w.max(1);
        let start = (width - stripe_w) / 2;
        let mut row = vec![255.0f32; width];
        for i in 0..stripe_w {
            row[start + i] = if stripe_w == 1 {
                0.0
            } else {
                let num = (stripe_w - 1).abs_diff(2 * i);
                round(255.0 * num as f64 / (stripe_w - 1) as f64)
            };
        }
        let mut values = Vec::with_capacity(width * height);
        for _ in 0..height {
            values.extend_from_slice(&row);
        }
        Ok(DitherMatrix {
            period_w: width,
            period_h: height,
            values,
            equalized: false,
        })
    }

    /// Compress the threshold range toward white: every value `x` becomes
    /// `round(255 - s * (255 - x))`, so 255 is a fixed point and the output
    /// spans `[255 * (1 - s), 255]`.
    pub fn scale_toward_white(&self, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParam(format!(
                "scale factor must lie in [0, 1], got {s}"
            )));
        }
        let values = self
            .values
            .iter()
            .map(|&x| round(255.0 - s * (255.0 - f64::from(x))))
            .collect();
        Ok(DitherMatrix {
            period_w: self.period_w,
            period_h: self.period_h,
            values,
            equalized: false,
        })
    }

    /// Merge a scaled stripe matrix into a horizontal-line matrix.
    ///
    /// Stripe columns are the ones where `stripe_scaled` sits below peak
    /// value. In the top and bottom bands (each `round(white_band / 2 *
    /// period_h)` rows) thresholds there drop to `min(h, 255 - s)`; in the
    /// middle band they rise to `max(h, s)`. Off-stripe columns are copied
    /// from the horizontal matrix untouched.
    pub fn combine(
        horizontal: &DitherMatrix,
        stripe_scaled: &DitherMatrix,
        params: &CrosshatchParams,
    ) -> Result<Self> {
        params.validate()?;
        if horizontal.period() != stripe_scaled.period() {
            return Err(Error::Mismatch(format!(
                "matrix periods differ: {:?} vs {:?}",
                horizontal.period(),
                stripe_scaled.period()
            )));
        }
        let (w, h) = horizontal.period();
        let band = (params.white_band / 2.0 * h as f64).round() as usize;
        let mut values = Vec::with_capacity(w * h);
        for r in 0..h {
            let white_band_row = r < band || r >= h - band;
            for c in 0..w {
                let hv = horizontal.values[r * w + c];
                let s = stripe_scaled.values[r * w + c];
                let v = if s >= 254.5 {
                    hv
                } else if white_band_row {
                    hv.min(255.0 - s)
                } else {
                    hv.max(s)
                };
                values.push(v);
            }
        }
        Ok(DitherMatrix {
            period_w: w,
            period_h: h,
            values,
            equalized: false,
        })
    }

    /// Rank-order equalisation into [1, 255].
    ///
    /// Entries are sorted (ties broken by row-major position) and the entry
    /// of rank `k` receives `1 + round(254 * k / (N - 1))`, which keeps the
    /// value histogram within one count of uniform. A constant input still
    /// spans the full range, which is degenerate but well defined.
    pub fn equalize(&self) -> Self {
        let n = self.values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        let mut values = vec![0.0f32; n];
        let denom = (n - 1).max(1) as f64;
        for (rank, &idx) in order.iter().enumerate() {
            values[idx] = round(1.0 + 254.0 * rank as f64 / denom);
        }
        DitherMatrix {
            period_w: self.period_w,
            period_h: self.period_h,
            values,
            equalized: true,
        }
    }

    /// Rescale the period by `factor` (area averaging when shrinking,
    /// bilinear when growing) and re-equalise.
    pub fn resample(&self, factor: f64) -> Result<Self> {
        if factor <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "resample factor must be > 0, got {factor}"
            )));
        }
        let w = (self.period_w as f64 * factor).round() as usize;
        let h = (self.period_h as f64 * factor).round() as usize;
        self.resample_to(w, h)
    }

    /// Rescale to an explicit period and re-equalise.
    pub fn resample_to(&self, width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidParam(format!(
                "degenerate target period {width}x{height}"
            )));
        }
        let grid = Raster::from_samples(self.period_w, self.period_h, 1, self.values.clone())?;
        let mode = if width * height <= self.period_w * self.period_h {
            ResampleMode::AreaAverage
        } else {
            ResampleMode::Bilinear
        };
        let grid = resample(&grid, width, height, mode)?;
        let raw = DitherMatrix {
            period_w: width,
            period_h: height,
            values: grid.samples().to_vec(),
            equalized: false,
        };
        Ok(raw.equalize())
    }

    /// Cyclically rotate the rows by `round(shift * period_h)`. A lookup at
    /// row `y` afterwards reads the original row `y + rows`, so the rendered
    /// pattern moves up. `shift` lies in [0, 1).
    pub fn shift_vertical(&self, shift: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&shift) {
            return Err(Error::InvalidParam(format!(
                "vertical shift must lie in [0, 1), got {shift}"
            )));
        }
        Ok(self.shift_rows((shift * self.period_h as f64).round() as usize))
    }

    /// Row rotation by a whole number of rows.
    pub fn shift_rows(&self, rows: usize) -> Self {
        let h = self.period_h;
        let w = self.period_w;
        let rows = rows % h;
        if rows == 0 {
            return self.clone();
        }
        let mut values = Vec::with_capacity(w * h);
        for r in 0..h {
            let src = (r + rows) % h;
            values.extend_from_slice(&self.values[src * w..(src + 1) * w]);
        }
        DitherMatrix {
            period_w: w,
            period_h: h,
            values,
            equalized: self.equalized,
        }
    }

    pub fn period(&self) -> (usize, usize) {
        (self.period_w, self.period_h)
    }

    pub fn period_w(&self) -> usize {
        self.period_w
    }

    pub fn period_h(&self) -> usize {
        self.period_h
    }

    pub fn is_equalized(&self) -> bool {
        self.equalized
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Tiling threshold lookup.
    #[inline]
    pub fn threshold(&self, x: usize, y: usize) -> f32 {
        self.values[(y % self.period_h) * self.period_w + (x % self.period_w)]
    }

    #[inline]
    pub(crate) fn value_at(&self, col: usize, row: usize) -> f32 {
        self.values[row * self.period_w + col]
    }

    /// Threshold grid as a gray image for inspection and golden tests.
    pub fn to_raster(&self) -> Raster<u8> {
        let samples = self
            .values
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8)
            .collect();
        Raster::from_samples(self.period_w, self.period_h, 1, samples)
            .expect("matrix dimensions are valid")
    }

    /// Import a matrix previously exported with [`DitherMatrix::to_raster`].
    /// The matrix counts as finalised when no threshold sits below 1.
    pub fn from_raster(raster: &Raster<u8>) -> Result<Self> {
        if raster.channels() != 1 {
            return Err(Error::Mismatch("matrices are single channel".into()));
        }
        let values: Vec<f32> = raster.samples().iter().map(|&v| f32::from(v)).collect();
        let equalized = values.iter().all(|&v| v >= 1.0);
        Ok(DitherMatrix {
            period_w: raster.width(),
            period_h: raster.height(),
            values,
            equalized,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(m: &DitherMatrix, c: usize) -> Vec<f32> {
        (0..m.period_h()).map(|r| m.value_at(c, r)).collect()
    }

    #[test]
    fn horizontal_profile_full_resolution() {
        let m = DitherMatrix::horizontal_profile(511, 4).unwrap();
        let col = column(&m, 0);
        for (r, &v) in col.iter().enumerate() {
            let expected = (255 - r.min(510 - r)) as f32;
            assert_eq!(v, expected, "row {r}");
        }
        assert_eq!(col[0], 255.0);
        assert_eq!(col[255], 0.0);
        assert_eq!(col[510], 255.0);
    }

    #[test]
    fn horizontal_profile_height_five() {
        let m = DitherMatrix::horizontal_profile(5, 2).unwrap();
        assert_eq!(column(&m, 0), vec![255.0, 128.0, 0.0, 128.0, 255.0]);
        assert_eq!(column(&m, 1), vec![255.0, 128.0, 0.0, 128.0, 255.0]);
    }

    #[test]
    fn horizontal_profile_rejects_even_or_small_heights() {
        assert!(DitherMatrix::horizontal_profile(4, 4).is_err());
        assert!(DitherMatrix::horizontal_profile(1, 4).is_err());
    }

    #[test]
    fn scale_examples() {
        let m = DitherMatrix::horizontal_profile(3, 1).unwrap(); // column 255, 0, 255
        assert_eq!(m.scale_toward_white(0.25).unwrap().value_at(0, 1), 191.0);
        // 255 - 0.5 * 255 = 127.5 rounds half away from zero.
        assert_eq!(m.scale_toward_white(0.5).unwrap().value_at(0, 1), 128.0);
        assert!(m.scale_toward_white(1.5).is_err());
    }

    proptest! {
        #[test]
        fn horizontal_profile_is_symmetric(height in 1usize..120) {
            let height = 2 * height + 1;
            let m = DitherMatrix::horizontal_profile(height, 1).unwrap();
            for r in 0..height {
                prop_assert_eq!(m.value_at(0, r), m.value_at(0, height - 1 - r));
            }
        }

        #[test]
        fn scale_fixes_peak_and_is_monotone(s in 0.0f64..=1.0) {
            let m = DitherMatrix::horizontal_profile(9, 1).unwrap();
            let scaled = m.scale_toward_white(s).unwrap();
            prop_assert_eq!(scaled.value_at(0, 0), 255.0);
            for r in 1..9 {
                let prev = (m.value_at(0, r - 1), scaled.value_at(0, r - 1));
                let cur = (m.value_at(0, r), scaled.value_at(0, r));
                if cur.0 >= prev.0 {
                    prop_assert!(cur.1 >= prev.1);
                } else {
                    prop_assert!(cur.1 <= prev.1);
                }
            }
        }

        #[test]
        fn equalize_histogram_tracks_uniform(w in 2usize..12, h in 2usize..12, seed in 0u32..1000) {
            // Deterministic pseudo-random values from the seed.
            let mut state = seed.wrapping_mul(2654435761).wrapping_add(1);
            let values: Vec<f32> = (0..w * h).map(|_| {
                state = state.wrapping_mul(1664525).wrapping_add(1013904223);
                (state >> 24) as f32
            }).collect();
            let m = DitherMatrix { period_w: w, period_h: h, values, equalized: false }.equalize();
            let n = (w * h) as f64;
            let slack = 1.0 / n.min(255.0);
            for g in 0..=255u32 {
                let count = m.values().iter().filter(|&&v| v <= g as f32).count() as f64;
                let frac = count / n;
                let target = g as f64 / 255.0;
                prop_assert!(frac >= target - slack - 1e-9 && frac <= target + slack + 1e-9,
                    "tone {} fraction {} target {}", g, frac, target);
            }
        }
    }

    #[test]
    fn equalize_examples() {
        // Already uniform 1..=255 stays put.
        let values: Vec<f32> = (1..=255).map(|v| v as f32).collect();
        let m = DitherMatrix {
            period_w: 255,
            period_h: 1,
            values: values.clone(),
            equalized: false,
        };
        assert_eq!(m.equalize().values(), values.as_slice());

        let m = DitherMatrix {
            period_w: 2,
            period_h: 2,
            values: vec![0.0, 10.0, 20.0, 30.0],
            equalized: false,
        };
        assert_eq!(m.equalize().values(), &[1.0, 86.0, 170.0, 255.0]);

        // Constant input is forced across the whole range by rank order.
        let m = DitherMatrix {
            period_w: 2,
            period_h: 1,
            values: vec![9.0, 9.0],
            equalized: false,
        };
        assert_eq!(m.equalize().values(), &[1.0, 255.0]);
    }

    #[test]
    fn stripe_full_width_mirrors_horizontal_profile() {
        let params = CrosshatchParams {
            stripe_fraction: 1.0,
            ..CrosshatchParams::default()
        };
        let stripe = DitherMatrix::vertical_stripe(9, 2, &params).unwrap();
        let profile = DitherMatrix::horizontal_profile(9, 1).unwrap();
        for c in 0..9 {
            assert_eq!(stripe.value_at(c, 0), profile.value_at(0, c));
        }
    }

    #[test]
    fn stripe_half_width_layout() {
        let params = CrosshatchParams {
            stripe_fraction: 0.5,
            ..CrosshatchParams::default()
        };
        let stripe = DitherMatrix::vertical_stripe(8, 3, &params).unwrap();
        let row: Vec<f32> = (0..8).map(|c| stripe.value_at(c, 0)).collect();
        assert_eq!(&row[..2], &[255.0, 255.0]);
        assert_eq!(&row[6..], &[255.0, 255.0]);
        assert_eq!(&row[2..6], &[255.0, 85.0, 85.0, 255.0]);
        // Constant down each column.
        for r in 1..3 {
            for c in 0..8 {
                assert_eq!(stripe.value_at(c, r), stripe.value_at(c, 0));
            }
        }
    }

    #[test]
    fn stripe_centre_scales_per_f() {
        let params = CrosshatchParams {
            stripe_fraction: 1.0 / 3.0,
            ..CrosshatchParams::default()
        };
        let stripe = DitherMatrix::vertical_stripe(9, 2, &params).unwrap();
        assert_eq!(stripe.value_at(4, 0), 0.0);
        let scaled = stripe.scale_toward_white(0.25).unwrap();
        assert_eq!(scaled.value_at(4, 0), 191.0);
    }

    fn default_pair(s: f64) -> (DitherMatrix, DitherMatrix, CrosshatchParams) {
        let params = CrosshatchParams {
            s,
            ..CrosshatchParams::default()
        };
        let h = DitherMatrix::horizontal_profile(params.base_height, params.base_height).unwrap();
        let stripe =
            DitherMatrix::vertical_stripe(params.base_height, params.base_height, &params)
                .unwrap()
                .scale_toward_white(s)
                .unwrap();
        (h, stripe, params)
    }

    #[test]
    fn combine_with_zero_strength_is_identity() {
        let (h, stripe, params) = default_pair(0.0);
        let combined = DitherMatrix::combine(&h, &stripe, &params).unwrap();
        assert_eq!(combined.values(), h.values());
    }

    #[test]
    fn combine_stripe_centre_in_white_band() {
        // An odd stripe width gives an exact zero-valued centre column:
        // scaled to 191 at S = 0.25, inverted to 64 in the bands.
        let params = CrosshatchParams {
            s: 0.25,
            stripe_fraction: 255.0 / 511.0,
            ..CrosshatchParams::default()
        };
        let h = DitherMatrix::horizontal_profile(511, 511).unwrap();
        let stripe = DitherMatrix::vertical_stripe(511, 511, &params)
            .unwrap()
            .scale_toward_white(params.s)
            .unwrap();
        let combined = DitherMatrix::combine(&h, &stripe, &params).unwrap();
        let centre = 255;
        assert_eq!(stripe.value_at(centre, 0), 191.0);
        for r in [0usize, 5, 100, 510] {
            let expected = h.value_at(centre, r).min(64.0);
            assert_eq!(combined.value_at(centre, r), expected, "row {r}");
        }
    }

    #[test]
    fn combine_leaves_off_stripe_columns() {
        let (h, stripe, params) = default_pair(0.25);
        let combined = DitherMatrix::combine(&h, &stripe, &params).unwrap();
        let (w, ph) = combined.period();
        for c in 0..w {
            if stripe.value_at(c, 0) >= 254.5 {
                for r in 0..ph {
                    assert_eq!(combined.value_at(c, r), h.value_at(c, r));
                }
            }
        }
    }

    #[test]
    fn combine_confines_threshold_rewrites() {
        // Rewritten white-band entries stay at or below 255 * S and middle
        // band entries at or above 255 * (1 - S).
        let (h, stripe, params) = default_pair(0.25);
        let combined = DitherMatrix::combine(&h, &stripe, &params).unwrap();
        let (w, ph) = combined.period();
        let band = (params.white_band / 2.0 * ph as f64).round() as usize;
        let mut rewrites = 0usize;
        for r in 0..ph {
            for c in 0..w {
                let v = combined.value_at(c, r);
                let hv = h.value_at(c, r);
                if v != hv {
                    rewrites += 1;
                    if r < band || r >= ph - band {
                        assert!(v <= 64.0, "white band rewrite to {v} at ({c}, {r})");
                    } else {
                        assert!(v >= 191.0, "middle band rewrite to {v} at ({c}, {r})");
                    }
                }
            }
        }
        assert!(rewrites > 0);
    }

    #[test]
    fn resample_factor_one_matches_plain_equalisation() {
        let (h, stripe, params) = default_pair(0.25);
        let combined = DitherMatrix::combine(&h, &stripe, &params).unwrap();
        assert_eq!(combined.resample(1.0).unwrap(), combined.equalize());
    }

    #[test]
    fn resample_updates_period_and_equalises() {
        let (h, stripe, params) = default_pair(0.25);
        let combined = DitherMatrix::combine(&h, &stripe, &params).unwrap();
        let small = combined.resample_to(16, 16).unwrap();
        assert_eq!(small.period(), (16, 16));
        assert!(small.is_equalized());
        assert!(small.values().iter().all(|&v| (1.0..=255.0).contains(&v)));
        assert!(combined.resample_to(1, 1).is_err());
    }

    #[test]
    fn shift_examples() {
        let m = DitherMatrix::horizontal_profile(9, 3).unwrap();
        assert_eq!(m.shift_vertical(0.0).unwrap(), m);

        let shifted = m.shift_vertical(1.0 / 3.0).unwrap();
        for r in 0..9 {
            assert_eq!(shifted.value_at(0, r), m.value_at(0, (r + 3) % 9));
        }

        let thrice = m
            .shift_vertical(1.0 / 3.0)
            .unwrap()
            .shift_vertical(1.0 / 3.0)
            .unwrap()
            .shift_vertical(1.0 / 3.0)
            .unwrap();
        assert_eq!(thrice, m);
        assert!(m.shift_vertical(1.0).is_err());
    }

    #[test]
    fn raster_round_trip_preserves_finalisation() {
        let m = DitherMatrix::horizontal_profile(5, 5).unwrap().equalize();
        let back = DitherMatrix::from_raster(&m.to_raster()).unwrap();
        assert!(back.is_equalized());
        assert_eq!(back.values(), m.values());

        let raw = DitherMatrix::horizontal_profile(5, 5).unwrap();
        let back = DitherMatrix::from_raster(&raw.to_raster()).unwrap();
        assert!(!back.is_equalized());
    }
}
