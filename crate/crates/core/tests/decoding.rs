mod common;

use common::{round_trip_scene, same_partition};
use cvenc::decoding::{decode_instances, decode_masks, extract_center_regions, DecodeParams};
use cvenc::encoding::{encode_targets, EncodeParams};
use cvenc::metrics::{aji, AjiMode};
use cvenc::morph::fill_holes;
use cvenc::raster::{Connectivity, LabelMap};
use cvenc::synth::{corrupt_targets, CorruptionParams};

#[test]
fn clean_targets_recover_the_partition() {
    let mut exact = 0;
    for seed in 0..50 {
        let gt = round_trip_scene(seed);
        let t = encode_targets(&gt, &EncodeParams::default()).unwrap();
        let (pred, _) = decode_masks(&t.inside, &t.center, &t.vectors, &DecodeParams::default()).unwrap();
        if same_partition(&gt, &pred) {
            exact += 1;
        }
    }
    assert!(exact >= 49, "{exact}/50 exact");
}

#[test]
fn decoding_is_deterministic_and_label_permutation_invariant() {
    let gt = round_trip_scene(9);
    let t = encode_targets(&gt, &EncodeParams::default()).unwrap();
    let c = corrupt_targets(
        &t,
        &CorruptionParams { mask_noise_sigma: 0.2, vector_noise_sigma: 1.5, ..CorruptionParams::clean(4) },
    )
    .unwrap();
    let p = DecodeParams::default();
    let a = decode_instances(&c.inside_prob, &c.center_prob, &c.vectors, &p).unwrap();
    let b = decode_instances(&c.inside_prob, &c.center_prob, &c.vectors, &p).unwrap();
    assert_eq!(a, b);

    let k = gt.max_label();
    let permuted = gt.map(|&v| if v == 0 { 0 } else { k + 1 - v });
    let t2 = encode_targets(&permuted, &EncodeParams::default()).unwrap();
    let (p1, _) = decode_masks(&t.inside, &t.center, &t.vectors, &p).unwrap();
    let (p2, _) = decode_masks(&t2.inside, &t2.center, &t2.vectors, &p).unwrap();
    assert_eq!(p1, p2);
}

#[test]
fn output_is_bounded_by_regions_and_filled_inside() {
    for seed in 0..10 {
        let gt = round_trip_scene(seed);
        let t = encode_targets(&gt, &EncodeParams::default()).unwrap();
        let c = corrupt_targets(
            &t,
            &CorruptionParams { mask_noise_sigma: 0.3, vector_noise_sigma: 2.0, ..CorruptionParams::clean(seed) },
        )
        .unwrap();
        let p = DecodeParams::default();
        let (pred, _) = decode_instances(&c.inside_prob, &c.center_prob, &c.vectors, &p).unwrap();
        let inside = cvenc::decoding::binarize(&c.inside_prob, p.inside_threshold);
        let regions = extract_center_regions(&cvenc::decoding::binarize(&c.center_prob, p.center_threshold), Connectivity::Eight);
        assert!(pred.labels().len() <= regions.count);
        assert!(pred.foreground().is_subset_of(&fill_holes(&inside, Connectivity::Eight)));
        // labels are sequential
        assert_eq!(pred.labels(), (1..=pred.max_label()).collect::<Vec<_>>());
    }
}

#[test]
fn heavy_vector_noise_degrades_accuracy() {
    let gt = round_trip_scene(21);
    let t = encode_targets(&gt, &EncodeParams::default()).unwrap();
    let score = |sigma: f64| {
        let c = corrupt_targets(&t, &CorruptionParams { vector_noise_sigma: sigma, ..CorruptionParams::clean(5) }).unwrap();
        let (pred, _) = decode_instances(&c.inside_prob, &c.center_prob, &c.vectors, &DecodeParams::default()).unwrap();
        aji(&gt, &pred, AjiMode::Literal).unwrap()
    };
    assert_eq!(score(0.0), 1.0);
    assert!(score(8.0) < score(0.0));
}

#[test]
fn predictions_without_centers_yield_nothing() {
    let gt = round_trip_scene(2);
    let t = encode_targets(&gt, &EncodeParams::default()).unwrap();
    let none = t.center.map(|_| false);
    let (pred, report) = decode_masks(&t.inside, &none, &t.vectors, &DecodeParams::default()).unwrap();
    assert_eq!(pred, LabelMap::new(gt.shape()));
    assert_eq!(report.suppressed_components, cvenc::morph::component_count(&cvenc::morph::connected_components(&t.inside, Connectivity::Eight)));
}
