//! Training-target generation: inside mask, center mask and center vectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::{distance_transform, erode};
use crate::raster::{BinaryMask, Connectivity, Grid, LabelMap, RasterShape, VectorField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodeParams {
    /// Disk radius of the per-instance erosion, in pixels.
    pub erosion_radius: u32,
    /// Pixels of the eroded instance with distance strictly above this form the center region.
    pub center_distance_threshold: f64,
    pub connectivity: Connectivity,
}

impl Default for EncodeParams {
    fn default() -> Self {
        Self {
            erosion_radius: 1,
            center_distance_threshold: 2.0,
            connectivity: Connectivity::Eight,
        }
    }
}

impl EncodeParams {
    pub fn validate(&self) -> Result<()> {
        if self.erosion_radius < 1 {
            return Err(Error::InvalidParameter("erosion_radius must be >= 1".into()));
        }
        if !(self.center_distance_threshold >= 0.0 && self.center_distance_threshold.is_finite()) {
            return Err(Error::InvalidParameter(
                "center_distance_threshold must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Geometric center (pixel-coordinate mean) of one instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub instance_label: u32,
    pub cx: f64,
    pub cy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedTargets {
    pub inside: BinaryMask,
    pub center: BinaryMask,
    pub vectors: VectorField,
    /// Pixels where vector targets are defined; equal to `inside`.
    pub validity: BinaryMask,
    pub centroids: Vec<Centroid>,
    /// Instances whose center region vanished under erosion and thresholding.
    pub empty_center_labels: Vec<u32>,
}

pub fn make_inside_mask(gt: &LabelMap) -> BinaryMask {
    gt.foreground()
}

/// Center mask plus the labels whose center region came out empty.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterMask {
    pub mask: BinaryMask,
    pub empty_labels: Vec<u32>,
}

#[derive(Clone, Copy, Debug)]
struct BoundingBox {
    r0: usize,
    r1: usize,
    c0: usize,
    c1: usize,
}

fn bounding_boxes(gt: &LabelMap) -> BTreeMap<u32, BoundingBox> {
    let mut boxes: BTreeMap<u32, BoundingBox> = BTreeMap::new();
    for (idx, &l) in gt.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (r, c) = gt.shape().coords(idx);
        boxes
            .entry(l)
            .and_modify(|b| {
                b.r0 = b.r0.min(r);
                b.r1 = b.r1.max(r);
                b.c0 = b.c0.min(c);
                b.c1 = b.c1.max(c);
            })
            .or_insert(BoundingBox {
                r0: r,
                r1: r,
                c0: c,
                c1: c,
            });
    }
    boxes
}

/// Builds the center mask one instance at a time.
///
/// Each instance mask is eroded, distance transformed, and thresholded with a
/// strict `>`. Working on the instance's bounding box gives the same result as
/// working on the full raster: everything outside the box is background either way.
pub fn make_center_mask(gt: &LabelMap, params: &EncodeParams) -> Result<CenterMask> {
    params.validate()?;
    let shape = gt.shape();
    let mut mask = BinaryMask::new(shape);
    let mut empty_labels = Vec::new();
    for (label, bb) in bounding_boxes(gt) {
        let crop_shape = RasterShape::new(bb.r1 - bb.r0 + 1, bb.c1 - bb.c0 + 1)?;
        let crop = BinaryMask::from_fn(crop_shape, |r, c| gt.at(bb.r0 + r, bb.c0 + c) == label);
        let eroded = erode(&crop, params.erosion_radius)?;
        let dist = distance_transform(&eroded);
        let mut any = false;
        for r in 0..crop_shape.height() {
            for c in 0..crop_shape.width() {
                if dist.at(r, c) > params.center_distance_threshold {
                    mask.set(bb.r0 + r, bb.c0 + c, true);
                    any = true;
                }
            }
        }
        if !any {
            empty_labels.push(label);
        }
    }
    Ok(CenterMask { mask, empty_labels })
}

/// Pixel-coordinate mean of every instance, in ascending label order.
pub fn compute_centroids(gt: &LabelMap) -> Result<Vec<Centroid>> {
    let mut sums: BTreeMap<u32, (f64, f64, u64)> = BTreeMap::new();
    for (idx, &l) in gt.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (r, c) = gt.shape().coords(idx);
        let e = sums.entry(l).or_insert((0.0, 0.0, 0));
        e.0 += c as f64;
        e.1 += r as f64;
        e.2 += 1;
    }
    if sums.is_empty() {
        return Err(Error::NoInstances);
    }
    Ok(sums
        .into_iter()
        .map(|(label, (sx, sy, n))| Centroid {
            instance_label: label,
            cx: sx / n as f64,
            cy: sy / n as f64,
        })
        .collect())
}

/// Displacement of each instance pixel from its instance centroid: `(x − cx, y − cy)`.
/// Background is zero.
pub fn make_center_vector(gt: &LabelMap, centroids: &[Centroid]) -> Result<VectorField> {
    let lookup: BTreeMap<u32, (f64, f64)> = centroids
        .iter()
        .map(|c| (c.instance_label, (c.cx, c.cy)))
        .collect();
    let mut field = VectorField::zeros(gt.shape());
    for (idx, &l) in gt.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let &(cx, cy) = lookup.get(&l).ok_or(Error::MissingCentroid(l))?;
        let (r, c) = gt.shape().coords(idx);
        field.set(r, c, c as f64 - cx, r as f64 - cy);
    }
    Ok(field)
}

pub fn encode_targets(gt: &LabelMap, params: &EncodeParams) -> Result<EncodedTargets> {
    params.validate()?;
    let inside = make_inside_mask(gt);
    let center = make_center_mask(gt, params)?;
    let centroids = if inside.any() {
        compute_centroids(gt)?
    } else {
        Vec::new()
    };
    let vectors = make_center_vector(gt, &centroids)?;
    Ok(EncodedTargets {
        validity: inside.clone(),
        inside,
        center: center.mask,
        vectors,
        centroids,
        empty_center_labels: center.empty_labels,
    })
}

/// Boundary mask as used by three-class targets: instance pixels with a 4-neighbour carrying a
/// different label (background or raster outside included).
pub fn boundary_mask(gt: &LabelMap) -> BinaryMask {
    let shape = gt.shape();
    Grid::from_fn(shape, |r, c| {
        let l = gt.at(r, c);
        l != 0
            && Connectivity::Four.offsets().iter().any(|&(dr, dc)| {
                shape
                    .checked_index(r as i64 + dr, c as i64 + dc)
                    .is_none_or(|n| gt.data()[n] != l)
            })
    })
}
