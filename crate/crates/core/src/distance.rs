//! Exact Euclidean distance transform via the two-pass separable
//! parabolic-envelope algorithm on squared distances. All intermediate
//! squared distances are integers representable exactly in f64, so the
//! result is bit-exact against a brute-force all-pairs scan.

use crate::mask::BinaryMask;

/// Per-pixel real-valued distance map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DistanceMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Distance from every pixel to the nearest foreground pixel of `pos`.
/// Foreground pixels map to 0; an empty `pos` yields infinity everywhere.
pub fn distance_transform(pos: &BinaryMask) -> DistanceMap {
    let (w, h) = pos.dims();
    let mut sq = vec![f64::INFINITY; w * h];

    // Column pass: squared distance to the nearest foreground pixel in the
    // same column, found by an up scan and a down scan over row offsets.
    for x in 0..w {
        let mut last_fg: Option<usize> = None;
        for y in 0..h {
            if pos.get(x, y) {
                last_fg = Some(y);
            }
            if let Some(fy) = last_fg {
                let d = (y - fy) as f64;
                sq[y * w + x] = d * d;
            }
        }
        last_fg = None;
        for y in (0..h).rev() {
            if pos.get(x, y) {
                last_fg = Some(y);
            }
            if let Some(fy) = last_fg {
                let d = (fy - y) as f64;
                let cell = &mut sq[y * w + x];
                *cell = cell.min(d * d);
            }
        }
    }

    // Row pass: lower envelope of parabolas seeded by the column distances.
    let mut row_in = vec![0.0f64; w];
    let mut row_out = vec![0.0f64; w];
    let mut vertices = vec![0usize; w];
    let mut boundaries = vec![0.0f64; w + 1];
    for y in 0..h {
        row_in.copy_from_slice(&sq[y * w..(y + 1) * w]);
        envelope_1d(&row_in, &mut row_out, &mut vertices, &mut boundaries);
        sq[y * w..(y + 1) * w].copy_from_slice(&row_out);
    }

    let values = sq.iter().map(|&d| d.sqrt()).collect();
    DistanceMap {
        width: w,
        height: h,
        values,
    }
}

/// One-dimensional squared-distance transform of a sampled function:
/// out[q] = min_v ((q - v)^2 + f[v]). Parabolas with infinite height are
/// skipped so empty columns fall through untouched.
fn envelope_1d(f: &[f64], out: &mut [f64], vertices: &mut [usize], boundaries: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize; // index of the rightmost parabola in the envelope
    let mut started = false;

    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        if !started {
            vertices[0] = q;
            boundaries[0] = f64::NEG_INFINITY;
            boundaries[1] = f64::INFINITY;
            started = true;
            continue;
        }
        // Intersection of the parabola at q with the current rightmost one.
        let mut s = intersection(f, q, vertices[k]);
        while k > 0 && s <= boundaries[k] {
            k -= 1;
            s = intersection(f, q, vertices[k]);
        }
        k += 1;
        vertices[k] = q;
        boundaries[k] = s;
        boundaries[k + 1] = f64::INFINITY;
    }

    if !started {
        out.copy_from_slice(f);
        return;
    }

    let mut j = 0usize;
    for (q, slot) in out.iter_mut().enumerate() {
        while boundaries[j + 1] < q as f64 {
            j += 1;
        }
        let v = vertices[j];
        let dq = q as f64 - v as f64;
        *slot = dq * dq + f[v];
    }
}

#[inline]
fn intersection(f: &[f64], p: usize, q: usize) -> f64 {
    let (p, q) = (p as f64, q as f64);
    ((f[p as usize] + p * p) - (f[q as usize] + q * q)) / (2.0 * p - 2.0 * q)
}

/// Brute-force all-pairs oracle; shared with the acceptance suite.
pub fn distance_transform_brute_force(pos: &BinaryMask) -> DistanceMap {
    let (w, h) = pos.dims();
    let foreground: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| pos.get(x, y))
        .collect();
    let mut values = vec![f64::INFINITY; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut best = u64::MAX;
            for &(fx, fy) in &foreground {
                let dx = fx as i64 - x as i64;
                let dy = fy as i64 - y as i64;
                best = best.min((dx * dx + dy * dy) as u64);
            }
            if best != u64::MAX {
                values[y * w + x] = (best as f64).sqrt();
            }
        }
    }
    DistanceMap {
        width: w,
        height: h,
        values,
    }
}
