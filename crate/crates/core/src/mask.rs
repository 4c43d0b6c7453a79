//! Binary-mask algebra and geometry: set operations, overlap statistics,
//! morphology, and the run-length codec used by the proposal interchange
//! format.

use crate::error::{check_dims, Error, Result};

/// Per-pixel foreground/background raster, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// All-background mask. Panics if either dimension is zero.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "mask dimensions must be >= 1");
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::format("mask dimensions must be >= 1"));
        }
        if bits.len() != width * height {
            return Err(Error::format(format!(
                "mask bit length {} does not match {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    /// Builds a mask from a predicate over (x, y).
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = BinaryMask::new(width, height);
        for y in 0..height {
            for x in 0..width {
                mask.bits[y * width + x] = f(x, y);
            }
        }
        mask
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

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y * self.width + x] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Pixel-wise AND. Errors on dimension mismatch.
    pub fn intersect(&self, other: &BinaryMask) -> Result<BinaryMask> {
        check_dims(self.dims(), other.dims())?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| a && b)
            .collect();
        BinaryMask::from_bits(self.width, self.height, bits)
    }

    /// Pixel-wise OR. Errors on dimension mismatch.
    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        check_dims(self.dims(), other.dims())?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| a || b)
            .collect();
        BinaryMask::from_bits(self.width, self.height, bits)
    }

    /// True iff every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> Result<bool> {
        check_dims(self.dims(), other.dims())?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .all(|(&a, &b)| !a || b))
    }

    fn intersection_count(&self, other: &BinaryMask) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count()
    }
}

/// Axis-aligned pixel box; `x`/`y` are the inclusive left/top corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl BBox {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        assert!(w >= 1 && h >= 1, "box dimensions must be >= 1");
        BBox { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    /// Exclusive right edge.
    pub fn right(&self) -> usize {
        self.x + self.w
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.right() <= width && self.bottom() <= height
    }

    pub fn intersection_area(&self, other: &BBox) -> usize {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 > x0 && y1 > y0 {
            (x1 - x0) * (y1 - y0)
        } else {
            0
        }
    }

    /// Intersection-over-union of two boxes in the same coordinate frame.
    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// Intersection-over-union of two same-sized masks. An empty union yields 0.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    check_dims(a.dims(), b.dims())?;
    let inter = a.intersection_count(b);
    let union = a.area() + b.area() - inter;
    if union == 0 {
        Ok(0.0)
    } else {
        Ok(inter as f64 / union as f64)
    }
}

/// |inner ∩ cover| / |inner|. Errors if `inner` is empty.
pub fn overlap_ratio(inner: &BinaryMask, cover: &BinaryMask) -> Result<f64> {
    check_dims(inner.dims(), cover.dims())?;
    let denom = inner.area();
    if denom == 0 {
        return Err(Error::EmptyInput("overlap_ratio inner mask"));
    }
    Ok(inner.intersection_count(cover) as f64 / denom as f64)
}

/// Pixel-wise OR over a nonempty list of same-sized masks.
pub fn union_all(masks: &[BinaryMask]) -> Result<BinaryMask> {
    let first = masks.first().ok_or(Error::EmptyInput("union_all mask list"))?;
    let mut out = first.clone();
    for m in &masks[1..] {
        out = out.union(m)?;
    }
    Ok(out)
}

/// Offsets of the discrete Euclidean disk {(dx, dy) : dx^2 + dy^2 <= r^2}.
fn disk_offsets(radius: u32) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let r2 = r * r;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r2 {
                offsets.push((dx, dy));
            }
        }
    }
    offsets
}

/// Morphological erosion by a Euclidean disk. Pixels outside the frame count
/// as background, so the frame border erodes. Radius 0 is the identity.
pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let offsets = disk_offsets(radius);
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        if !mask.get(x, y) {
            return false;
        }
        offsets.iter().all(|&(dx, dy)| {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            nx >= 0 && nx < w && ny >= 0 && ny < h && mask.get(nx as usize, ny as usize)
        })
    })
}

/// Morphological dilation by a Euclidean disk; dual of [`erode`].
pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let offsets = disk_offsets(radius);
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| {
        mask.get(x, y)
            || offsets.iter().any(|&(dx, dy)| {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                nx >= 0 && nx < w && ny >= 0 && ny < h && mask.get(nx as usize, ny as usize)
            })
    })
}

/// Tightest box enclosing all foreground pixels. Errors on an empty mask.
pub fn bbox_of(mask: &BinaryMask) -> Result<BBox> {
    let mut min_x = usize::MAX;
    let mut min_y = usize::MAX;
    let mut max_x = 0usize;
    let mut max_y = 0usize;
    let mut any = false;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                any = true;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
            }
        }
    }
    if !any {
        return Err(Error::EmptyInput("bbox_of mask"));
    }
    Ok(BBox::new(min_x, min_y, max_x - min_x + 1, max_y - min_y + 1))
}

/// Run-length encoding: column-major scan, alternating run lengths starting
/// with a background run (possibly zero).
pub fn rle_encode(mask: &BinaryMask) -> Vec<u32> {
    let mut counts = Vec::new();
    let mut current = false; // scan starts counting background
    let mut run: u32 = 0;
    for x in 0..mask.width() {
        for y in 0..mask.height() {
            let v = mask.get(x, y);
            if v == current {
                run += 1;
            } else {
                counts.push(run);
                current = v;
                run = 1;
            }
        }
    }
    counts.push(run);
    counts
}

/// Inverse of [`rle_encode`]. Errors unless the counts sum to width*height.
pub fn rle_decode(counts: &[u32], width: usize, height: usize) -> Result<BinaryMask> {
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    if total != (width * height) as u64 {
        return Err(Error::format(format!(
            "rle counts sum to {total}, expected {}",
            width * height
        )));
    }
    let mut mask = BinaryMask::new(width, height);
    let mut pos = 0usize;
    let mut value = false;
    for &count in counts {
        for _ in 0..count {
            let x = pos / height;
            let y = pos % height;
            mask.set(x, y, value);
            pos += 1;
        }
        value = !value;
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_from_rows(rows: &[&str]) -> BinaryMask {
        let height = rows.len();
        let width = rows[0].len();
        BinaryMask::from_fn(width, height, |x, y| {
            rows[y].as_bytes()[x] == b'#'
        })
    }

    #[test]
    fn iou_identity_is_one() {
        let m = mask_from_rows(&["#..", ".#.", "..."]);
        assert_eq!(iou(&m, &m).unwrap(), 1.0);
    }

    #[test]
    fn iou_disjoint_is_zero() {
        let a = mask_from_rows(&["#.", ".."]);
        let b = mask_from_rows(&[".#", ".."]);
        assert_eq!(iou(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn iou_empty_union_is_zero() {
        let a = BinaryMask::new(3, 3);
        assert_eq!(iou(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn iou_dimension_mismatch() {
        let a = BinaryMask::new(2, 2);
        let b = BinaryMask::new(3, 2);
        assert!(iou(&a, &b).is_err());
    }

    #[test]
    fn box_iou_strip_overlap() {
        // Two 2x2 boxes overlapping in a 1x2 strip: |∩|=2, |∪|=6.
        let a = BBox::new(0, 0, 2, 2);
        let b = BBox::new(1, 0, 2, 2);
        let expected = 2.0 / 6.0;
        assert!((a.iou(&b) - expected).abs() < 1e-15);
        // Brute-force pixel count over the same rectangles agrees.
        let am = BinaryMask::from_fn(4, 4, |x, y| x < 2 && y < 2);
        let bm = BinaryMask::from_fn(4, 4, |x, y| (1..3).contains(&x) && y < 2);
        assert_eq!(iou(&am, &bm).unwrap(), a.iou(&b));
    }

    #[test]
    fn overlap_ratio_containment() {
        let inner = mask_from_rows(&[".#.", ".#.", "..."]);
        let cover = mask_from_rows(&["###", "###", "..."]);
        assert_eq!(overlap_ratio(&inner, &cover).unwrap(), 1.0);
    }

    #[test]
    fn overlap_ratio_disjoint() {
        let inner = mask_from_rows(&["#.", ".."]);
        let cover = mask_from_rows(&[".#", ".."]);
        assert_eq!(overlap_ratio(&inner, &cover).unwrap(), 0.0);
    }

    #[test]
    fn overlap_ratio_partial() {
        // 10 foreground pixels, 6 shared with the cover.
        let inner = BinaryMask::from_fn(10, 1, |_, _| true);
        let cover = BinaryMask::from_fn(10, 1, |x, _| x < 6);
        assert_eq!(overlap_ratio(&inner, &cover).unwrap(), 0.6);
    }

    #[test]
    fn overlap_ratio_empty_inner_errors() {
        let inner = BinaryMask::new(2, 2);
        let cover = BinaryMask::new(2, 2);
        assert!(overlap_ratio(&inner, &cover).is_err());
    }

    #[test]
    fn union_all_singleton_and_neutral() {
        let a = mask_from_rows(&["#.", ".#"]);
        assert_eq!(union_all(std::slice::from_ref(&a)).unwrap(), a);
        let empty = BinaryMask::new(2, 2);
        assert_eq!(union_all(&[a.clone(), empty]).unwrap(), a);
    }

    #[test]
    fn union_all_halves_cover_frame() {
        let left = BinaryMask::from_fn(4, 2, |x, _| x < 2);
        let right = BinaryMask::from_fn(4, 2, |x, _| x >= 2);
        let full = BinaryMask::from_fn(4, 2, |_, _| true);
        assert_eq!(union_all(&[left, right]).unwrap(), full);
    }

    #[test]
    fn union_all_empty_list_errors() {
        assert!(union_all(&[]).is_err());
    }

    #[test]
    fn erode_radius_zero_is_identity() {
        let m = mask_from_rows(&["##", ".#"]);
        assert_eq!(erode(&m, 0), m);
    }

    #[test]
    fn erode_full_square_r1() {
        // 5x5 full square erodes to the centered 3x3 square (r=1 disk is
        // the 4-connected plus, and the frame border counts as background).
        let full = BinaryMask::from_fn(5, 5, |_, _| true);
        let expected = BinaryMask::from_fn(5, 5, |x, y| (1..4).contains(&x) && (1..4).contains(&y));
        assert_eq!(erode(&full, 1), expected);
    }

    #[test]
    fn erode_single_pixel_vanishes() {
        let m = BinaryMask::from_fn(3, 3, |x, y| x == 1 && y == 1);
        assert!(erode(&m, 1).is_empty());
    }

    #[test]
    fn dilate_trivials() {
        let m = mask_from_rows(&["#.", ".."]);
        assert_eq!(dilate(&m, 0), m);
        let empty = BinaryMask::new(4, 4);
        assert!(dilate(&empty, 3).is_empty());
    }

    #[test]
    fn dilate_single_pixel_to_plus() {
        let m = BinaryMask::from_fn(5, 5, |x, y| x == 2 && y == 2);
        let d = dilate(&m, 1);
        let expected = BinaryMask::from_fn(5, 5, |x, y| {
            let dx = x as i64 - 2;
            let dy = y as i64 - 2;
            dx * dx + dy * dy <= 1
        });
        assert_eq!(d.area(), 5);
        assert_eq!(d, expected);
    }

    #[test]
    fn bbox_of_cases() {
        let single = BinaryMask::from_fn(8, 10, |x, y| x == 3 && y == 7);
        assert_eq!(bbox_of(&single).unwrap(), BBox::new(3, 7, 1, 1));

        let full = BinaryMask::from_fn(6, 4, |_, _| true);
        assert_eq!(bbox_of(&full).unwrap(), BBox::new(0, 0, 6, 4));

        let two = BinaryMask::from_fn(6, 4, |x, y| (x, y) == (1, 1) || (x, y) == (4, 2));
        assert_eq!(bbox_of(&two).unwrap(), BBox::new(1, 1, 4, 2));

        assert!(bbox_of(&BinaryMask::new(2, 2)).is_err());
    }

    #[test]
    fn rle_trivials() {
        let bg = BinaryMask::new(2, 2);
        assert_eq!(rle_encode(&bg), vec![4]);
        let fg = BinaryMask::from_fn(2, 2, |_, _| true);
        assert_eq!(rle_encode(&fg), vec![0, 4]);
    }

    #[test]
    fn rle_decode_sum_mismatch_errors() {
        assert!(rle_decode(&[3], 2, 2).is_err());
    }

    #[test]
    fn rle_scan_is_column_major() {
        // Foreground = left column of a 2x2 mask: the column-major scan sees
        // two foreground pixels first.
        let m = BinaryMask::from_fn(2, 2, |x, _| x == 0);
        assert_eq!(rle_encode(&m), vec![0, 2, 2]);
    }

    #[test]
    fn rle_round_trip_seeded_batch() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..1000 {
            let m = BinaryMask::from_fn(32, 32, |_, _| rng.random_bool(0.5));
            let counts = rle_encode(&m);
            assert_eq!(rle_decode(&counts, 32, 32).unwrap(), m);
        }
    }

    fn arb_mask(max_side: usize) -> impl Strategy<Value = BinaryMask> {
        (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
            prop::collection::vec(any::<bool>(), w * h)
                .prop_map(move |bits| BinaryMask::from_bits(w, h, bits).unwrap())
        })
    }

    proptest! {
        #[test]
        fn prop_iou_symmetric_and_bounded(m in arb_mask(12), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let other = BinaryMask::from_fn(m.width(), m.height(), |_, _| rng.random_bool(0.4));
            let ab = iou(&m, &other).unwrap();
            let ba = iou(&other, &m).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=1.0).contains(&ab));
            if !m.is_empty() {
                prop_assert_eq!(iou(&m, &m).unwrap(), 1.0);
            }
        }

        #[test]
        fn prop_erode_subset_dilate(m in arb_mask(10), r in 0u32..4) {
            let eroded = erode(&m, r);
            let dilated = dilate(&m, r);
            prop_assert!(eroded.is_subset_of(&m).unwrap());
            prop_assert!(m.is_subset_of(&dilated).unwrap());
        }

        #[test]
        fn prop_rle_round_trip(m in arb_mask(16)) {
            let counts = rle_encode(&m);
            prop_assert_eq!(rle_decode(&counts, m.width(), m.height()).unwrap(), m);
        }

        #[test]
        fn prop_union_all_order_independent(m in arb_mask(8), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b = BinaryMask::from_fn(m.width(), m.height(), |_, _| rng.random_bool(0.3));
            let c = BinaryMask::from_fn(m.width(), m.height(), |_, _| rng.random_bool(0.3));
            let abc = union_all(&[m.clone(), b.clone(), c.clone()]).unwrap();
            let cba = union_all(&[c, b, m]).unwrap();
            prop_assert_eq!(abc, cba);
        }
    }
}
