mod common;

use common::round_trip_scene;
use cvenc::encoding::{boundary_mask, compute_centroids, encode_targets, make_center_mask, EncodeParams};
use cvenc::morph::erode;
use cvenc::raster::{LabelMap, RasterShape};
use cvenc::synth::{generate_scene, perturb_annotation, CorruptionParams, SynthParams};
use proptest::prelude::*;

fn small_scene(seed: u64) -> LabelMap {
    let params = SynthParams {
        nucleus_count: 6,
        allow_touching: false,
        max_overlap_fraction: 0.0,
        ..SynthParams::new(seed, RasterShape::new(96, 96).unwrap())
    };
    generate_scene(&params).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn centroids_are_pixel_means(seed in 0u64..10_000) {
        let gt = small_scene(seed);
        for c in compute_centroids(&gt).unwrap() {
            let (mut n, mut sx, mut sy) = (0.0, 0.0, 0.0);
            for r in 0..gt.height() {
                for col in 0..gt.width() {
                    if gt.at(r, col) == c.instance_label {
                        n += 1.0;
                        sx += col as f64;
                        sy += r as f64;
                    }
                }
            }
            prop_assert!((c.cx - sx / n).abs() < 1e-9 && (c.cy - sy / n).abs() < 1e-9);
        }
    }

    #[test]
    fn vectors_average_to_zero_per_instance(seed in 0u64..10_000) {
        let gt = small_scene(seed);
        let t = encode_targets(&gt, &EncodeParams::default()).unwrap();
        for l in gt.labels() {
            let (mut n, mut sx, mut sy) = (0.0, 0.0, 0.0);
            for (i, &v) in gt.data().iter().enumerate() {
                if v == l {
                    n += 1.0;
                    sx += t.vectors.dx()[i];
                    sy += t.vectors.dy()[i];
                }
            }
            prop_assert!((sx / n).abs() < 1e-9 && (sy / n).abs() < 1e-9);
        }
    }

    #[test]
    fn encoding_is_translation_equivariant(seed in 0u64..10_000, dr in 0usize..7, dc in 0usize..7) {
        let gt = small_scene(seed);
        let s = gt.shape();
        let big = RasterShape::new(s.height() + dr, s.width() + dc).unwrap();
        let shifted = LabelMap::from_fn(big, |r, c| {
            if r >= dr && c >= dc { gt.at(r - dr, c - dc) } else { 0 }
        });
        let a = encode_targets(&gt, &EncodeParams::default()).unwrap();
        let b = encode_targets(&shifted, &EncodeParams::default()).unwrap();
        for r in 0..s.height() {
            for c in 0..s.width() {
                prop_assert_eq!(a.center.at(r, c), b.center.at(r + dr, c + dc));
                let (x0, y0) = a.vectors.at(r, c);
                let (x1, y1) = b.vectors.at(r + dr, c + dc);
                prop_assert!((x0 - x1).abs() < 1e-9 && (y0 - y1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn center_lies_inside_eroded_instance(seed in 0u64..10_000) {
        let gt = small_scene(seed);
        let params = EncodeParams::default();
        let center = make_center_mask(&gt, &params).unwrap().mask;
        for l in gt.labels() {
            let inst = gt.map(|&v| v == l);
            let eroded = erode(&inst, params.erosion_radius).unwrap();
            let own = cvenc::raster::BinaryMask::from_fn(gt.shape(), |r, c| center.at(r, c) && inst.at(r, c));
            prop_assert!(own.is_subset_of(&eroded));
        }
    }
}

#[test]
fn one_pixel_annotation_growth_barely_moves_centroids() {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let gt = small_scene(seed);
        let grown = perturb_annotation(&gt, &CorruptionParams { boundary_dilation: 1, ..CorruptionParams::clean(seed) });
        let before = compute_centroids(&gt).unwrap();
        let after = compute_centroids(&grown).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert_eq!(a.instance_label, b.instance_label);
            worst = worst.max(((a.cx - b.cx).powi(2) + (a.cy - b.cy).powi(2)).sqrt());
        }
    }
    assert!(worst < 1.0, "centroid moved {worst}");
}

#[test]
fn boundary_targets_are_more_sensitive_than_vectors() {
    let gt = small_scene(3);
    let grown = perturb_annotation(&gt, &CorruptionParams { boundary_dilation: 1, ..CorruptionParams::clean(3) });
    let (b0, b1) = (boundary_mask(&gt), boundary_mask(&grown));
    let overlap = b0.data().iter().zip(b1.data()).filter(|(a, b)| **a && **b).count();
    let boundary_kept = overlap as f64 / b0.count() as f64;

    let t0 = encode_targets(&gt, &EncodeParams::default()).unwrap();
    let t1 = encode_targets(&grown, &EncodeParams::default()).unwrap();
    let mut max_shift = 0.0f64;
    for i in 0..gt.shape().len() {
        if gt.data()[i] != 0 {
            let dx = t0.vectors.dx()[i] - t1.vectors.dx()[i];
            let dy = t0.vectors.dy()[i] - t1.vectors.dy()[i];
            max_shift = max_shift.max(dx.hypot(dy));
        }
    }
    assert!(boundary_kept < 0.2, "boundary overlap {boundary_kept}");
    assert!(max_shift < 1.0, "vector shift {max_shift}");
}

#[test]
fn dense_scenes_encode_every_instance() {
    for seed in 0..5 {
        let gt = round_trip_scene(seed);
        let t = encode_targets(&gt, &EncodeParams::default()).unwrap();
        assert_eq!(t.centroids.len(), gt.labels().len());
        assert_eq!(t.validity, t.inside);
        assert!(t.center.is_subset_of(&t.inside));
    }
}
