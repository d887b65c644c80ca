//! Deterministic synthetic portrait generation.
//!
//! Supplies a photograph-free stand-in for pipeline tests and demos: a
//! painted head-and-shoulders scene plus the matching 68-point landmark
//! set. Everything is a closed-form function of the requested size, so two
//! calls always agree bit for bit.

use crate::face::LandmarkSet;
use crate::raster::Raster;

struct Layout {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
}

fn layout(width: usize, height: usize) -> Layout {
    Layout {
        cx: width as f64 * 0.5,
        cy: height as f64 * 0.52,
        rx: width as f64 * 0.26,
        ry: height as f64 * 0.34,
    }
}

/// The 68 landmark positions matching [`portrait`].
pub fn landmarks(width: usize, height: usize) -> LandmarkSet {
    let l = layout(width, height);
    let mut pts = Vec::with_capacity(68);
    // 0-16: jawline, ear to ear through the chin.
    for i in 0..17 {
        let ang = (170.0 - 160.0 * i as f64 / 16.0).to_radians();
        pts.push((l.cx + l.rx * ang.cos(), l.cy + l.ry * ang.sin()));
    }
    // 17-26: brows.
    let brow_y = l.cy - 0.42 * l.ry;
    for i in 0..5 {
        pts.push((l.cx - 0.78 * l.rx + 0.14 * l.rx * i as f64, brow_y));
    }
    for i in 0..5 {
        pts.push((l.cx + 0.22 * l.rx + 0.14 * l.rx * i as f64, brow_y));
    }
    // 27-30: nose bridge.
    for i in 0..4 {
        pts.push((l.cx, l.cy - 0.30 * l.ry + 0.12 * l.ry * i as f64));
    }
    // 31-35: nose base.
    for i in 0..5 {
        pts.push((l.cx - 0.12 * l.rx + 0.06 * l.rx * i as f64, l.cy + 0.14 * l.ry));
    }
    // 36-47: eyes.
    for side in [-1.0f64, 1.0] {
        let ex = l.cx + side * 0.38 * l.rx;
        let ey = l.cy - 0.22 * l.ry;
        for i in 0..6 {
            let ang = std::f64::consts::TAU * i as f64 / 6.0;
            pts.push((ex + 0.11 * l.rx * ang.cos(), ey + 0.05 * l.ry * ang.sin()));
        }
    }
    // 48-67: mouth ring.
    for i in 0..20 {
        let ang = std::f64::consts::TAU * i as f64 / 20.0;
        pts.push((
            l.cx + 0.30 * l.rx * ang.cos(),
            l.cy + 0.52 * l.ry + 0.10 * l.ry * ang.sin(),
        ));
    }
    LandmarkSet::from_points(pts).expect("synthetic landmarks are well formed")
}

/// A painted portrait: graded backdrop, shaded skin, hair, eyes and mouth.
pub fn portrait(width: usize, height: usize) -> Raster<u8> {
    let l = layout(width, height);
    let eye_y = l.cy - 0.22 * l.ry;
    let mouth_y = l.cy + 0.52 * l.ry;
    Raster::from_fn(width, height, 3, |x, y, c| {
        let xf = x as f64;
        let yf = y as f64;
        let dx = (xf - l.cx) / l.rx;
        let dy = (yf - l.cy) / l.ry;
        let in_face = dx * dx + dy * dy <= 1.0;

        // Backdrop: vertical tone ramp with a slight blue cast.
        let t = yf / height as f64;
        let mut rgb = [
            205.0 - 90.0 * t,
            210.0 - 85.0 * t,
            222.0 - 70.0 * t,
        ];

        // Shoulders.
        let shoulder_y = l.cy + 1.05 * l.ry;
        if yf > shoulder_y {
            let s = ((yf - shoulder_y) / (height as f64 - shoulder_y)).min(1.0);
            rgb = [60.0 + 25.0 * s, 52.0 + 20.0 * s, 58.0 + 22.0 * s];
        }

        if in_face {
            // Skin with a cylinder-like falloff toward the face rim.
            let shade = 1.0 - 0.38 * (dx * dx + 0.3 * dy * dy);
            rgb = [224.0 * shade, 182.0 * shade, 150.0 * shade];

            // Hair cap above the brows.
            if dy < -0.55 {
                let hd = (-dy - 0.55) / 0.45;
                rgb = [72.0 - 30.0 * hd, 54.0 - 22.0 * hd, 40.0 - 16.0 * hd];
            }

            // Eyes.
            for side in [-1.0f64, 1.0] {
                let ex = l.cx + side * 0.38 * l.rx;
                let ddx = (xf - ex) / (0.12 * l.rx);
                let ddy = (yf - eye_y) / (0.06 * l.ry);
                if ddx * ddx + ddy * ddy <= 1.0 {
                    rgb = [46.0, 38.0, 36.0];
                }
            }

            // Mouth.
            let mdx = (xf - l.cx) / (0.30 * l.rx);
            let mdy = (yf - mouth_y) / (0.10 * l.ry);
            if mdx * mdx + mdy * mdy <= 1.0 {
                rgb = [168.0, 86.0, 82.0];
            }
        }
        rgb[c].round().clamp(0.0, 255.0) as u8
    })
    .expect("synthetic portrait dimensions are valid")
}

/// Portrait and landmarks in one call.
pub fn portrait_with_landmarks(width: usize, height: usize) -> (Raster<u8>, LandmarkSet) {
    (portrait(width, height), landmarks(width, height))
}
