use cvenc::raster::RasterShape;
use cvenc::synth::{corrupt_targets, generate_scene, generate_scene_detailed, CorruptionParams, SynthParams};
use cvenc::encoding::{encode_targets, EncodeParams};
use proptest::prelude::*;

fn params(seed: u64, touching: bool, overlap: f64) -> SynthParams {
    SynthParams {
        nucleus_count: 12,
        allow_touching: touching,
        max_overlap_fraction: overlap,
        ..SynthParams::new(seed, RasterShape::new(128, 128).unwrap())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn drawn_ellipses_respect_the_overlap_bound(seed in 0u64..100_000, overlap in 0.0f64..0.29) {
        let p = params(seed, true, overlap);
        let scene = generate_scene_detailed(&p).unwrap();
        let sets: Vec<Vec<usize>> = scene.ellipses.iter().map(|e| e.pixels(p.shape)).collect();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                let shared = sets[i].iter().filter(|x| sets[j].contains(x)).count();
                prop_assert!(shared as f64 <= overlap * sets[i].len().min(sets[j].len()) as f64);
            }
        }
        prop_assert_eq!(scene.labels.labels().len(), p.nucleus_count);
    }

    #[test]
    fn non_touching_scenes_have_no_adjacent_labels(seed in 0u64..100_000) {
        let gt = generate_scene(&params(seed, false, 0.0)).unwrap();
        for r in 0..gt.height() {
            for c in 0..gt.width() {
                let a = gt.at(r, c);
                if a == 0 {
                    continue;
                }
                for (dr, dc) in [(0i64, 1i64), (1, -1), (1, 0), (1, 1)] {
                    if let Some(j) = gt.shape().checked_index(r as i64 + dr, c as i64 + dc) {
                        let b = gt.data()[j];
                        prop_assert!(b == 0 || b == a);
                    }
                }
            }
        }
    }

    #[test]
    fn ellipse_semi_axes_stay_in_range(seed in 0u64..100_000) {
        let p = params(seed, true, 0.1);
        for e in generate_scene_detailed(&p).unwrap().ellipses {
            prop_assert!(e.semi_minor >= p.radius_range.0 && e.semi_major <= p.radius_range.1);
            prop_assert!(e.semi_minor <= e.semi_major);
            let ecc = (1.0 - (e.semi_minor / e.semi_major).powi(2)).sqrt();
            prop_assert!(ecc <= p.eccentricity_max + 1e-12);
        }
    }
}

#[test]
fn same_seed_same_scene() {
    let a = generate_scene(&params(77, true, 0.1)).unwrap();
    let b = generate_scene(&params(77, true, 0.1)).unwrap();
    let c = generate_scene(&params(78, true, 0.1)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn impossible_requests_fail_cleanly() {
    let crowded = SynthParams {
        nucleus_count: 500,
        allow_touching: false,
        max_overlap_fraction: 0.0,
        ..SynthParams::new(0, RasterShape::new(64, 64).unwrap())
    };
    assert!(generate_scene(&crowded).is_err());
    assert!(generate_scene(&SynthParams { radius_range: (3.0, 6.0), ..params(0, true, 0.1) }).is_err());
    assert!(generate_scene(&SynthParams { max_overlap_fraction: 0.3, ..params(0, true, 0.1) }).is_err());
}

#[test]
fn corruption_is_seeded_and_clean_is_identity() {
    let gt = generate_scene(&params(5, true, 0.1)).unwrap();
    let t = encode_targets(&gt, &EncodeParams::default()).unwrap();
    let clean = corrupt_targets(&t, &CorruptionParams::clean(1)).unwrap();
    assert_eq!(clean.vectors, t.vectors);
    assert!(clean.inside_prob.data().iter().zip(t.inside.data()).all(|(&p, &m)| p == if m { 1.0 } else { 0.0 }));
    let noisy = CorruptionParams { mask_noise_sigma: 0.1, vector_noise_sigma: 0.5, ..CorruptionParams::clean(9) };
    let a = corrupt_targets(&t, &noisy).unwrap();
    assert_eq!(a, corrupt_targets(&t, &noisy).unwrap());
    assert!(a.inside_prob.data().iter().all(|p| (0.0..=1.0).contains(p)));
    assert_ne!(a, corrupt_targets(&t, &CorruptionParams { seed: 10, ..noisy }).unwrap());
}
