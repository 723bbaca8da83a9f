//! Instance differentiation: predicted inside mask, center mask and center
//! vectors become an instance label map.
//!
//! The pipeline is fixed: binarize, suppress inside components without a
//! center pixel, label center regions, assign every inside pixel to a center
//! region, then refine (hole filling and an optional area filter).

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::morph::{connected_components, component_count, nearest_label};
use crate::raster::{BinaryMask, Connectivity, LabelMap, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodeParams {
    pub inside_threshold: f64,
    pub center_threshold: f64,
    pub connectivity: Connectivity,
    /// Instances smaller than this are dropped during refinement.
    pub min_instance_area: usize,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            inside_threshold: 0.5,
            center_threshold: 0.5,
            connectivity: Connectivity::Eight,
            min_instance_area: 0,
        }
    }
}

impl DecodeParams {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("inside_threshold", self.inside_threshold),
            ("center_threshold", self.center_threshold),
        ] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParameter(format!("{name} must be in [0, 1], got {t}")));
            }
        }
        Ok(())
    }
}

/// Labeled center regions, one label per region.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterRegions {
    pub labels: LabelMap,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DecodeReport {
    pub suppressed_components: usize,
    pub fallback_pixels: usize,
    pub holes_filled: usize,
}

pub fn binarize(field: &ScalarField, threshold: f64) -> BinaryMask {
    field.map(|&v| v >= threshold)
}

/// Removes inside components that contain no center pixel.
/// Returns the kept mask and the number of components removed.
pub fn suppress_false_positives(
    inside: &BinaryMask,
    center: &BinaryMask,
    conn: Connectivity,
) -> Result<(BinaryMask, usize)> {
    inside.shape().ensure_same(&center.shape())?;
    let cc = connected_components(inside, conn);
    let k = component_count(&cc);
    let mut has_center = vec![false; k + 1];
    for (&l, &c) in cc.data().iter().zip(center.data()) {
        if l != 0 && c {
            has_center[l as usize] = true;
        }
    }
    let kept = cc.map(|&l| l != 0 && has_center[l as usize]);
    let removed = has_center[1..].iter().filter(|&&h| !h).count();
    Ok((kept, removed))
}

pub fn extract_center_regions(center: &BinaryMask, conn: Connectivity) -> CenterRegions {
    let labels = connected_components(center, conn);
    let count = component_count(&labels);
    CenterRegions { labels, count }
}

/// Assigns every inside pixel to a center region.
///
/// Center pixels keep their region. Other pixels follow their vector back to
/// `(x − dx, y − dy)`, rounded half away from zero; if that lands on a region
/// they take its label, otherwise they take the nearest region.
pub fn assign_pixels(
    inside: &BinaryMask,
    regions: &CenterRegions,
    vectors: &VectorField,
) -> Result<(LabelMap, DecodeReport)> {
    let shape = inside.shape();
    shape.ensure_same(&regions.labels.shape())?;
    shape.ensure_same(&vectors.shape())?;
    let mut report = DecodeReport::default();
    let mut out = LabelMap::new(shape);
    let n_inside = inside.count();
    if n_inside == 0 {
        return Ok((out, report));
    }
    if regions.count == 0 {
        return Err(Error::NoCenterRegions(n_inside));
    }
    for idx in 0..shape.len() {
        if !inside.data()[idx] {
            continue;
        }
        let own = regions.labels.data()[idx];
        if own != 0 {
            out.data_mut()[idx] = own;
            continue;
        }
        let (r, c) = shape.coords(idx);
        let (dx, dy) = vectors.at(r, c);
        let tx = (c as f64 - dx).round();
        let ty = (r as f64 - dy).round();
        let pointed = if tx.is_finite() && ty.is_finite() {
            shape
                .checked_index(ty as i64, tx as i64)
                .map(|t| regions.labels.data()[t])
                .filter(|&l| l != 0)
        } else {
            None
        };
        out.data_mut()[idx] = match pointed {
            Some(l) => l,
            None => {
                report.fallback_pixels += 1;
                nearest_label(r, c, &regions.labels)?
            }
        };
    }
    Ok((out, report))
}

/// Fills holes owned by a single instance, drops small instances, and
/// relabels to `1..=K` in raster-scan order.
///
/// A hole is a background component (complement connectivity of `conn`) that
/// does not touch the raster border. It is filled only if every foreground
/// pixel adjacent to it carries the same label. Returns the refined map and
/// the number of filled pixels.
pub fn refine(instances: &LabelMap, params: &DecodeParams, conn: Connectivity) -> (LabelMap, usize) {
    let shape = instances.shape();
    let bg_conn = conn.complement();
    let mut out = instances.clone();
    let mut visited = vec![false; shape.len()];
    let mut filled = 0usize;
    let mut queue = VecDeque::new();
    let mut component = Vec::new();
    for start in 0..shape.len() {
        if instances.data()[start] != 0 || visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        component.clear();
        let mut touches_border = false;
        let mut owners = BTreeSet::new();
        while let Some(idx) = queue.pop_front() {
            component.push(idx);
            let (r, c) = shape.coords(idx);
            touches_border |= shape.on_border(r, c);
            for &(dr, dc) in bg_conn.offsets() {
                if let Some(n) = shape.checked_index(r as i64 + dr, c as i64 + dc) {
                    let l = instances.data()[n];
                    if l != 0 {
                        owners.insert(l);
                    } else if !visited[n] {
                        visited[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        if !touches_border && owners.len() == 1 {
            let owner = *owners.iter().next().unwrap();
            for &idx in &component {
                out.data_mut()[idx] = owner;
            }
            filled += component.len();
        }
    }

    if params.min_instance_area > 0 {
        let mut area = std::collections::HashMap::new();
        for &l in out.data() {
            if l != 0 {
                *area.entry(l).or_insert(0usize) += 1;
            }
        }
        for l in out.data_mut() {
            if *l != 0 && area[l] < params.min_instance_area {
                *l = 0;
            }
        }
    }
    (out.relabel_sequential(), filled)
}

/// Full decoding pipeline from probability fields and predicted vectors.
pub fn decode_instances(
    inside_prob: &ScalarField,
    center_prob: &ScalarField,
    vectors: &VectorField,
    params: &DecodeParams,
) -> Result<(LabelMap, DecodeReport)> {
    params.validate()?;
    let shape = inside_prob.shape();
    shape.ensure_same(&center_prob.shape())?;
    shape.ensure_same(&vectors.shape())?;
    let inside = binarize(inside_prob, params.inside_threshold);
    let center = binarize(center_prob, params.center_threshold);
    decode_masks(&inside, &center, vectors, params)
}

/// Decoding from already-binary masks.
pub fn decode_masks(
    inside: &BinaryMask,
    center: &BinaryMask,
    vectors: &VectorField,
    params: &DecodeParams,
) -> Result<(LabelMap, DecodeReport)> {
    let shape = inside.shape();
    shape.ensure_same(&center.shape())?;
    shape.ensure_same(&vectors.shape())?;
    let conn = params.connectivity;
    let (kept, suppressed) = suppress_false_positives(inside, center, conn)?;
    let regions = extract_center_regions(center, conn);
    if !kept.any() {
        return Ok((
            LabelMap::new(shape),
            DecodeReport {
                suppressed_components: suppressed,
                ..Default::default()
            },
        ));
    }
    let (assigned, mut report) = assign_pixels(&kept, &regions, vectors)?;
    let (refined, holes) = refine(&assigned, params, conn);
    report.suppressed_components = suppressed;
    report.holes_filled = holes;
    Ok((refined, report))
}
