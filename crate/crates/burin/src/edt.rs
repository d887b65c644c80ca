//! Exact Euclidean distance transform (squared), computed with the
//! two-pass lower-envelope-of-parabolas scheme: one 1-D transform down the
//! columns followed by one along the rows.

const INF: f64 = 1e20;

/// Squared Euclidean distance from every cell to the nearest seed cell.
/// Cells with no seed anywhere in the grid come back as a very large value.
pub(crate) fn squared_edt(seeds: &[bool], width: usize, height: usize) -> Vec<f64> {
    debug_assert_eq!(seeds.len(), width * height);
    let mut grid: Vec<f64> = seeds.iter().map(|&s| if s { 0.0 } else { INF }).collect();

    let side = width.max(height);
    let mut f = vec![0.0; side];
    let mut d = vec![0.0; side];
    let mut v = vec![0usize; side];
    let mut z = vec![0.0; side + 1];

    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        transform_1d(&f[..height], &mut d, &mut v, &mut z);
        for y in 0..height {
            grid[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        f[..width].copy_from_slice(&grid[y * width..(y + 1) * width]);
        transform_1d(&f[..width], &mut d, &mut v, &mut z);
        grid[y * width..(y + 1) * width].copy_from_slice(&d[..width]);
    }
    grid
}

fn transform_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INF;
    }
    let mut k = 0usize;
    for (q, dq_out) in d.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *dq_out = dq * dq + f[p];
    }
}
