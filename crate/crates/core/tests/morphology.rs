use cvenc::morph::{
    connected_components, disk_offsets, distance_transform, erode, fill_holes, nearest_label,
    squared_distance_transform,
};
use cvenc::raster::{BinaryMask, Connectivity, LabelMap, RasterShape};
use proptest::prelude::*;

fn mask_strategy(max: usize) -> impl Strategy<Value = BinaryMask> {
    (1..=max, 1..=max, 0.0f64..1.0).prop_flat_map(|(h, w, p)| {
        proptest::collection::vec(proptest::bool::weighted(p), h * w).prop_map(move |v| {
            BinaryMask::from_vec(RasterShape::new(h, w).unwrap(), v).unwrap()
        })
    })
}

fn labels_strategy(max: usize) -> impl Strategy<Value = LabelMap> {
    (1..=max, 1..=max).prop_flat_map(|(h, w)| {
        proptest::collection::vec(prop_oneof![8 => Just(0u32), 1 => 1u32..6], h * w)
            .prop_map(move |v| LabelMap::from_vec(RasterShape::new(h, w).unwrap(), v).unwrap())
    })
}

/// Squared distance to the nearest background pixel, with the outside counted as background.
fn brute_sq_edt(m: &BinaryMask) -> Vec<u64> {
    let (h, w) = (m.height() as i64, m.width() as i64);
    let mut out = vec![0u64; (h * w) as usize];
    for r in 0..h {
        for c in 0..w {
            if !m.at(r as usize, c as usize) {
                continue;
            }
            let mut best = u64::MAX;
            for br in -1..=h {
                for bc in -1..=w {
                    let outside = br < 0 || bc < 0 || br >= h || bc >= w;
                    if outside || !m.at(br as usize, bc as usize) {
                        best = best.min(((br - r).pow(2) + (bc - c).pow(2)) as u64);
                    }
                }
            }
            out[(r * w + c) as usize] = best;
        }
    }
    out
}

proptest! {
    #[test]
    fn edt_matches_brute_force(m in mask_strategy(12)) {
        let sq = squared_distance_transform(&m);
        prop_assert_eq!(sq.data(), &brute_sq_edt(&m)[..]);
        let d = distance_transform(&m);
        for (x, &s) in d.data().iter().zip(&brute_sq_edt(&m)) {
            prop_assert_eq!(*x, (s as f64).sqrt());
        }
    }

    #[test]
    fn erosion_matches_disk_definition(m in mask_strategy(12), r in 1u32..4) {
        let e = erode(&m, r).unwrap();
        prop_assert!(e.is_subset_of(&m));
        let offs = disk_offsets(r);
        for row in 0..m.height() {
            for col in 0..m.width() {
                let keep = offs.iter().all(|&(dr, dc)| {
                    m.shape().checked_index(row as i64 + dr, col as i64 + dc).is_some_and(|i| m.data()[i])
                });
                prop_assert_eq!(e.at(row, col), keep);
            }
        }
    }

    #[test]
    fn erosion_by_one_twice_is_within_erosion_by_two(m in mask_strategy(12)) {
        let twice = erode(&erode(&m, 1).unwrap(), 1).unwrap();
        let direct = erode(&m, 2).unwrap();
        prop_assert!(direct.is_subset_of(&twice));
    }

    #[test]
    fn fill_holes_is_idempotent_and_extensive(m in mask_strategy(12)) {
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let f = fill_holes(&m, conn);
            prop_assert!(m.is_subset_of(&f));
            prop_assert_eq!(fill_holes(&f, conn), f);
        }
    }

    #[test]
    fn nearest_label_matches_brute_force(l in labels_strategy(16), seed in 0usize..256) {
        prop_assume!(l.max_label() > 0);
        let (r, c) = l.shape().coords(seed % l.shape().len());
        let mut best = (i64::MAX, 0usize, 0usize, 0u32);
        for rr in 0..l.height() {
            for cc in 0..l.width() {
                let v = l.at(rr, cc);
                if v == 0 {
                    continue;
                }
                let d2 = (rr as i64 - r as i64).pow(2) + (cc as i64 - c as i64).pow(2);
                if (d2, rr, cc) < (best.0, best.1, best.2) {
                    best = (d2, rr, cc, v);
                }
            }
        }
        prop_assert_eq!(nearest_label(r, c, &l).unwrap(), best.3);
    }

    #[test]
    fn components_partition_the_foreground(m in mask_strategy(12)) {
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let cc = connected_components(&m, conn);
            prop_assert_eq!(cc.foreground(), m.clone());
            // adjacent foreground pixels share a label
            for r in 0..m.height() {
                for c in 0..m.width() {
                    if !m.at(r, c) {
                        continue;
                    }
                    for &(dr, dc) in conn.offsets() {
                        if let Some(j) = m.shape().checked_index(r as i64 + dr, c as i64 + dc) {
                            if m.data()[j] {
                                prop_assert_eq!(cc.at(r, c), cc.data()[j]);
                            }
                        }
                    }
                }
            }
            // labels are 1..=k in first-appearance order
            let mut next = 1;
            for &v in cc.data() {
                if v == next {
                    next += 1;
                }
                prop_assert!(v < next);
            }
        }
    }
}

#[test]
fn empty_regions_have_no_nearest_label() {
    let l = LabelMap::new(RasterShape::new(3, 3).unwrap());
    assert!(nearest_label(1, 1, &l).is_err());
}
