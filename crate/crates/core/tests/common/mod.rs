//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use cvenc::raster::{LabelMap, RasterShape};
use cvenc::synth::{generate_scene, SynthParams};
use rand::Rng;

/// 256x256 scene with 25-40 touching ellipses of radius 5-12.
pub fn round_trip_scene(seed: u64) -> LabelMap {
    let shape = RasterShape::new(256, 256).unwrap();
    let params = SynthParams {
        nucleus_count: 25 + (seed % 16) as usize,
        radius_range: (5.0, 12.0),
        allow_touching: true,
        ..SynthParams::new(seed, shape)
    };
    generate_scene(&params).unwrap()
}

pub fn random_label_map<R: Rng>(rng: &mut R, max_dim: usize, max_instances: u32) -> LabelMap {
    let h = rng.random_range(1..=max_dim);
    let w = rng.random_range(1..=max_dim);
    random_label_map_with_shape(rng, RasterShape::new(h, w).unwrap(), max_instances)
}

pub fn random_label_map_with_shape<R: Rng>(rng: &mut R, shape: RasterShape, max_instances: u32) -> LabelMap {
    let k = rng.random_range(0..=max_instances);
    let density: f64 = rng.random_range(0.2..1.0);
    LabelMap::from_fn(shape, |_, _| {
        if k == 0 || rng.random::<f64>() > density {
            0
        } else {
            rng.random_range(1..=k)
        }
    })
}

fn pixel_sets(m: &LabelMap) -> BTreeMap<u32, HashSet<(usize, usize)>> {
    let mut out: BTreeMap<u32, HashSet<(usize, usize)>> = BTreeMap::new();
    for r in 0..m.height() {
        for c in 0..m.width() {
            let l = m.at(r, c);
            if l != 0 {
                out.entry(l).or_default().insert((r, c));
            }
        }
    }
    out
}

/// Literal AJI as an exact fraction `(numerator, denominator)`, by enumerating
/// every (gt, pred) pair on explicit pixel sets.
pub fn brute_aji(gt: &LabelMap, pred: &LabelMap) -> (u64, u64) {
    let g = pixel_sets(gt);
    let p = pixel_sets(pred);
    let mut num = 0u64;
    let mut den = 0u64;
    let mut used = BTreeSet::new();
    for gi in g.values() {
        // best (inter, union, label); IoU compared by cross-multiplication
        let mut best: Option<(u64, u64, u32)> = None;
        for (&pl, pj) in &p {
            let inter = gi.intersection(pj).count() as u64;
            let union = gi.union(pj).count() as u64;
            let better = match best {
                None => true,
                Some((bi, bu, _)) => inter * bu > bi * union,
            };
            if better {
                best = Some((inter, union, pl));
            }
        }
        match best {
            Some((inter, union, pl)) if inter > 0 => {
                num += inter;
                den += union;
                used.insert(pl);
            }
            _ => den += gi.len() as u64,
        }
    }
    for (pl, pj) in &p {
        if !used.contains(pl) {
            den += pj.len() as u64;
        }
    }
    (num, den)
}

fn fg_set(m: &LabelMap) -> HashSet<(usize, usize)> {
    pixel_sets(m).into_values().flatten().collect()
}

/// `(|G ∩ P|, |G ∪ P|)`
pub fn brute_iou(gt: &LabelMap, pred: &LabelMap) -> (u64, u64) {
    let g = fg_set(gt);
    let p = fg_set(pred);
    (g.intersection(&p).count() as u64, g.union(&p).count() as u64)
}

/// `(2|G ∩ P|, |G| + |P|)`
pub fn brute_dice(gt: &LabelMap, pred: &LabelMap) -> (u64, u64) {
    let g = fg_set(gt);
    let p = fg_set(pred);
    (2 * g.intersection(&p).count() as u64, (g.len() + p.len()) as u64)
}

/// Same partition up to a bijection of labels.
pub fn same_partition(a: &LabelMap, b: &LabelMap) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let mut fwd = BTreeMap::new();
    let mut bwd = BTreeMap::new();
    for (&x, &y) in a.data().iter().zip(b.data()) {
        if (x == 0) != (y == 0) {
            return false;
        }
        if x == 0 {
            continue;
        }
        if *fwd.entry(x).or_insert(y) != y || *bwd.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}

/// Central finite difference of `f` at coordinate `i` of `x`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// Relative error with a small floor on the scale.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}
