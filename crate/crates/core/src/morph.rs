//! Classic binary raster algorithms shared by the encoder, decoder and baseline.
//!
//! The raster border behaves as background everywhere in this module: a pixel
//! just outside the image counts as a background pixel at its geometric distance.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Connectivity, Grid, LabelMap, RasterShape, ScalarField};

/// Labels the foreground components of `mask`.
///
/// Labels are `1..=K`, assigned in raster-scan order of each component's first
/// pixel. Background stays 0.
pub fn connected_components(mask: &BinaryMask, conn: Connectivity) -> LabelMap {
    let shape = mask.shape();
    let mut labels = LabelMap::new(shape);
    let mut queue = VecDeque::new();
    let mut next = 0u32;
    for start in 0..shape.len() {
        if !mask.data()[start] || labels.data()[start] != 0 {
            continue;
        }
        next += 1;
        labels.data_mut()[start] = next;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let (r, c) = shape.coords(idx);
            for &(dr, dc) in conn.offsets() {
                if let Some(n) = shape.checked_index(r as i64 + dr, c as i64 + dc) {
                    if mask.data()[n] && labels.data()[n] == 0 {
                        labels.data_mut()[n] = next;
                        queue.push_back(n);
                    }
                }
            }
        }
    }
    labels
}

/// Number of components in a label map produced by [`connected_components`].
pub fn component_count(labels: &LabelMap) -> usize {
    labels.max_label() as usize
}

/// Offsets `(dr, dc)` of the Euclidean disk `{dr² + dc² ≤ r²}`.
pub fn disk_offsets(radius: u32) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut out = Vec::new();
    for dr in -r..=r {
        for dc in -r..=r {
            if dr * dr + dc * dc <= r * r {
                out.push((dr, dc));
            }
        }
    }
    out
}

/// Erosion by a Euclidean disk of the given radius.
///
/// A pixel survives iff the whole disk centred on it lies in the foreground.
/// Since the nearest background pixel decides whether the disk fits, this is a
/// threshold on the squared distance transform: keep pixels with `d² > r²`.
pub fn erode(mask: &BinaryMask, radius: u32) -> Result<BinaryMask> {
    if radius == 0 {
        return Err(Error::InvalidParameter("erosion radius must be >= 1".into()));
    }
    let r2 = u64::from(radius) * u64::from(radius);
    Ok(squared_distance_transform(mask).map(|&d2| d2 > r2))
}

/// Exact squared Euclidean distance from each foreground pixel to the nearest
/// background pixel, treating everything outside the raster as background.
/// Background pixels get 0.
///
/// Two-pass separable algorithm (column scan, then a lower envelope of
/// parabolas per row) in integer arithmetic.
pub fn squared_distance_transform(mask: &BinaryMask) -> Grid<u64> {
    let shape = mask.shape();
    let (h, w) = (shape.height() as i64, shape.width() as i64);
    // Padded by one background pixel on every side.
    let ph = (h + 2) as usize;
    let pw = (w + 2) as usize;
    let fg = |r: usize, c: usize| -> bool {
        r >= 1 && c >= 1 && r <= h as usize && c <= w as usize && mask.at(r - 1, c - 1)
    };

    // Column pass: vertical distance to nearest background in the same column.
    let mut g = vec![0i64; ph * pw];
    for c in 0..pw {
        let mut run = 0i64;
        for r in 0..ph {
            run = if fg(r, c) { run + 1 } else { 0 };
            g[r * pw + c] = run;
        }
        let mut run = 0i64;
        for r in (0..ph).rev() {
            run = if fg(r, c) { run + 1 } else { 0 };
            let v = &mut g[r * pw + c];
            if run < *v {
                *v = run;
            }
        }
    }

    let mut out = Grid::<u64>::new(shape);
    let m = pw;
    let mut s = vec![0usize; m];
    let mut t = vec![0i64; m];
    let mut row_dt = vec![0i64; m];
    for r in 1..=(h as usize) {
        let gr = &g[r * pw..(r + 1) * pw];
        let f = |x: i64, i: usize| -> i64 {
            let d = x - i as i64;
            d * d + gr[i] * gr[i]
        };
        let sep = |i: usize, u: usize| -> i64 {
            let (ii, uu) = (i as i64, u as i64);
            (uu * uu - ii * ii + gr[u] * gr[u] - gr[i] * gr[i]).div_euclid(2 * (uu - ii))
        };
        let mut q: i64 = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..m {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let wv = 1 + sep(s[q as usize], u);
                if wv < m as i64 {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = wv;
                }
            }
        }
        for u in (0..m).rev() {
            row_dt[u] = f(u as i64, s[q as usize]);
            if u as i64 == t[q as usize] {
                q -= 1;
            }
        }
        for c in 1..=(w as usize) {
            if mask.at(r - 1, c - 1) {
                out.set(r - 1, c - 1, row_dt[c] as u64);
            }
        }
    }
    out
}

/// Euclidean distance transform; see [`squared_distance_transform`].
pub fn distance_transform(mask: &BinaryMask) -> ScalarField {
    squared_distance_transform(mask).map(|&d2| (d2 as f64).sqrt())
}

/// Label of the nonzero pixel of `regions` nearest to `(row, col)`.
///
/// Ties resolve by smaller squared distance, then smaller row, then smaller
/// column. Searches square rings of growing Chebyshev radius and stops once no
/// unvisited ring can hold a pixel at least as close as the best found.
pub fn nearest_label(row: usize, col: usize, regions: &LabelMap) -> Result<u32> {
    let shape = regions.shape();
    let (r0, c0) = (row as i64, col as i64);
    let max_ring = shape.height().max(shape.width()) as i64;
    // (d2, row, col, label)
    let mut best: Option<(i64, i64, i64, u32)> = None;
    for ring in 0..=max_ring {
        if let Some((d2, ..)) = best {
            if d2 < ring * ring {
                break;
            }
        }
        let mut visit = |r: i64, c: i64| {
            if let Some(i) = shape.checked_index(r, c) {
                let l = regions.data()[i];
                if l != 0 {
                    let d2 = (r - r0) * (r - r0) + (c - c0) * (c - c0);
                    let cand = (d2, r, c, l);
                    if best.is_none_or(|b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2)) {
                        best = Some(cand);
                    }
                }
            }
        };
        if ring == 0 {
            visit(r0, c0);
            continue;
        }
        for c in (c0 - ring)..=(c0 + ring) {
            visit(r0 - ring, c);
            visit(r0 + ring, c);
        }
        for r in (r0 - ring + 1)..=(r0 + ring - 1) {
            visit(r, c0 - ring);
            visit(r, c0 + ring);
        }
    }
    best.map(|b| b.3).ok_or(Error::NoCenterRegions(1))
}

/// Marks background pixels reachable from the raster border, moving through
/// background with `bg_conn`.
fn border_reachable_background(
    is_background: impl Fn(usize) -> bool,
    shape: RasterShape,
    bg_conn: Connectivity,
) -> Vec<bool> {
    let mut seen = vec![false; shape.len()];
    let mut queue = VecDeque::new();
    for idx in 0..shape.len() {
        let (r, c) = shape.coords(idx);
        if shape.on_border(r, c) && is_background(idx) {
            seen[idx] = true;
            queue.push_back(idx);
        }
    }
    while let Some(idx) = queue.pop_front() {
        let (r, c) = shape.coords(idx);
        for &(dr, dc) in bg_conn.offsets() {
            if let Some(n) = shape.checked_index(r as i64 + dr, c as i64 + dc) {
                if !seen[n] && is_background(n) {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    seen
}

/// Fills background regions that cannot reach the raster border.
///
/// `conn` is the foreground connectivity; background is traversed with its
/// complement.
pub fn fill_holes(mask: &BinaryMask, conn: Connectivity) -> BinaryMask {
    let shape = mask.shape();
    let outside = border_reachable_background(|i| !mask.data()[i], shape, conn.complement());
    let data = mask
        .data()
        .iter()
        .zip(&outside)
        .map(|(&fg, &out)| fg || !out)
        .collect();
    BinaryMask::from_vec(shape, data).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(h: usize, w: usize) -> RasterShape {
        RasterShape::new(h, w).unwrap()
    }

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let s = shape(rows.len(), rows[0].len());
        BinaryMask::from_fn(s, |r, c| rows[r].as_bytes()[c] == b'#')
    }

    #[test]
    fn components_empty_and_singleton() {
        let m = BinaryMask::new(shape(4, 4));
        let cc = connected_components(&m, Connectivity::Eight);
        assert_eq!(component_count(&cc), 0);
        assert!(cc.data().iter().all(|&l| l == 0));

        let mut m = BinaryMask::new(shape(4, 4));
        m.set(2, 1, true);
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(component_count(&cc), 1);
        assert_eq!(cc.at(2, 1), 1);
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let m = mask_from(&["#.", ".#"]);
        assert_eq!(component_count(&connected_components(&m, Connectivity::Eight)), 1);
        assert_eq!(component_count(&connected_components(&m, Connectivity::Four)), 2);
    }

    #[test]
    fn component_labels_follow_scan_order() {
        let m = mask_from(&["..#", "#..", "#.#"]);
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(cc.data(), &[0, 0, 1, 2, 0, 0, 2, 0, 3]);
    }

    #[test]
    fn erode_full_square_radius_one() {
        let m = BinaryMask::filled(shape(7, 7), true);
        let e = erode(&m, 1).unwrap();
        for r in 0..7 {
            for c in 0..7 {
                assert_eq!(e.at(r, c), (1..6).contains(&r) && (1..6).contains(&c));
            }
        }
    }

    #[test]
    fn erode_singleton_vanishes() {
        let mut m = BinaryMask::new(shape(5, 5));
        m.set(2, 2, true);
        assert!(!erode(&m, 1).unwrap().any());
        assert!(erode(&m, 0).is_err());
    }

    #[test]
    fn distance_transform_small_cases() {
        let dt = distance_transform(&BinaryMask::new(shape(3, 4)));
        assert!(dt.data().iter().all(|&v| v == 0.0));

        let mut m = BinaryMask::new(shape(5, 5));
        m.set(2, 2, true);
        assert_eq!(distance_transform(&m).at(2, 2), 1.0);

        let full = BinaryMask::filled(shape(5, 5), true);
        let dt = distance_transform(&full);
        assert_eq!(dt.at(2, 2), 3.0);
        assert_eq!(dt.at(0, 0), 1.0);
    }

    #[test]
    fn nearest_label_cases() {
        let mut regions = LabelMap::new(shape(5, 5));
        regions.set(0, 2, 1);
        regions.set(3, 0, 2);
        assert_eq!(nearest_label(0, 0, &regions).unwrap(), 1);
        assert_eq!(nearest_label(3, 0, &regions).unwrap(), 2);

        let mut tie = LabelMap::new(shape(5, 5));
        tie.set(0, 2, 5);
        tie.set(2, 0, 9);
        assert_eq!(nearest_label(0, 0, &tie).unwrap(), 5);

        assert!(nearest_label(1, 1, &LabelMap::new(shape(3, 3))).is_err());
    }

    #[test]
    fn fill_holes_ring_and_c_shape() {
        let ring = mask_from(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        let filled = fill_holes(&ring, Connectivity::Eight);
        assert!(filled.at(2, 2));
        assert_eq!(filled.count(), 9);

        let c_shape = mask_from(&[".....", ".###.", ".#...", ".###.", "....."]);
        assert_eq!(fill_holes(&c_shape, Connectivity::Eight), c_shape);

        let plain = mask_from(&["##.", "...", ".##"]);
        assert_eq!(fill_holes(&plain, Connectivity::Eight), plain);
    }

    #[test]
    fn fill_holes_respects_duality() {
        // A diagonal gap leaks background under 8-connected background (foreground 4).
        let m = mask_from(&["....", ".##.", "#..#", ".##."]);
        let f4 = fill_holes(&m, Connectivity::Four);
        let f8 = fill_holes(&m, Connectivity::Eight);
        assert!(!f4.at(2, 1));
        assert!(f8.at(2, 1));
    }
}
