//! Deterministic synthetic nuclei scenes and prediction corruption.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.9).
//! Scene generation draws, per attempt and in this order: major radius,
//! eccentricity, angle, center x, center y, each with `random::<f64>()`
//! mapped linearly onto its range. Gaussian noise uses `rand_distr::Normal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::encoding::EncodedTargets;
use crate::error::{Error, Result};
use crate::raster::{Connectivity, LabelMap, RasterShape, ScalarField, VectorField};

/// Placement attempts per nucleus before giving up.
pub const PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub shape: RasterShape,
    pub nucleus_count: usize,
    /// Semi-axis range in pixels; both semi-axes stay inside it.
    pub radius_range: (f64, f64),
    pub eccentricity_max: f64,
    pub allow_touching: bool,
    /// Largest pairwise overlap as a fraction of the smaller ellipse's area.
    pub max_overlap_fraction: f64,
}

impl SynthParams {
    pub fn new(seed: u64, shape: RasterShape) -> Self {
        Self {
            seed,
            shape,
            nucleus_count: 30,
            radius_range: (5.0, 12.0),
            eccentricity_max: 0.6,
            allow_touching: true,
            max_overlap_fraction: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.radius_range;
        if !(lo >= 5.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius range must satisfy 5 <= min <= max, got ({lo}, {hi})"
            )));
        }
        if self.nucleus_count == 0 {
            return Err(Error::InvalidParameter("nucleus_count must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.eccentricity_max) {
            return Err(Error::InvalidParameter("eccentricity_max must be in [0, 1)".into()));
        }
        if !(0.0..0.3).contains(&self.max_overlap_fraction) {
            return Err(Error::InvalidParameter("max_overlap_fraction must be in [0, 0.3)".into()));
        }
        let span = 2.0 * hi.ceil() + 1.0;
        if span > self.shape.height() as f64 || span > self.shape.width() as f64 {
            return Err(Error::InvalidParameter(format!(
                "raster {} too small for radius {hi}",
                self.shape
            )));
        }
        Ok(())
    }
}

/// An ellipse with pixel centers at integer coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Rotation of the major axis from the x axis, radians.
    pub angle: f64,
}

impl Ellipse {
    pub fn contains(&self, row: i64, col: i64) -> bool {
        let dx = col as f64 - self.cx;
        let dy = row as f64 - self.cy;
        let (s, c) = self.angle.sin_cos();
        let u = (dx * c + dy * s) / self.semi_major;
        let v = (-dx * s + dy * c) / self.semi_minor;
        u * u + v * v <= 1.0
    }

    /// Pixel indices covered inside `shape`, in raster order.
    pub fn pixels(&self, shape: RasterShape) -> Vec<usize> {
        let ext = self.semi_major.ceil() as i64 + 1;
        let (r0, c0) = (self.cy.round() as i64, self.cx.round() as i64);
        let mut out = Vec::new();
        for r in (r0 - ext)..=(r0 + ext) {
            for c in (c0 - ext)..=(c0 + ext) {
                if let Some(i) = shape.checked_index(r, c) {
                    if self.contains(r, c) {
                        out.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Generated label map plus the ellipses in draw order (label `k + 1` for `ellipses[k]`).
#[derive(Clone, Debug)]
pub struct Scene {
    pub labels: LabelMap,
    pub ellipses: Vec<Ellipse>,
}

/// Ellipse nuclei placed by rejection sampling; see [`SynthParams`].
pub fn generate_scene(params: &SynthParams) -> Result<LabelMap> {
    Ok(generate_scene_detailed(params)?.labels)
}

pub fn generate_scene_detailed(params: &SynthParams) -> Result<Scene> {
    params.validate()?;
    let shape = params.shape;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut labels = LabelMap::new(shape);
    let mut ellipses: Vec<Ellipse> = Vec::with_capacity(params.nucleus_count);
    let mut pixel_sets: Vec<Vec<usize>> = Vec::with_capacity(params.nucleus_count);
    let mut owner_sets = vec![Vec::<u32>::new(); shape.len()];
    let (lo, hi) = params.radius_range;

    for index in 0..params.nucleus_count {
        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let semi_major = lo + (hi - lo) * rng.random::<f64>();
            let ecc = params.eccentricity_max * rng.random::<f64>();
            let semi_minor = (semi_major * (1.0 - ecc * ecc).sqrt()).max(lo);
            let angle = std::f64::consts::PI * rng.random::<f64>();
            let margin = semi_major.ceil();
            let cx = margin + (shape.width() as f64 - 1.0 - 2.0 * margin) * rng.random::<f64>();
            let cy = margin + (shape.height() as f64 - 1.0 - 2.0 * margin) * rng.random::<f64>();
            let e = Ellipse { cx, cy, semi_major, semi_minor, angle };
            let pix = e.pixels(shape);
            if pix.is_empty() {
                continue;
            }
            if !acceptable(&pix, &labels, &pixel_sets, &owner_sets, params) {
                continue;
            }
            let label = (index + 1) as u32;
            for &i in &pix {
                labels.data_mut()[i] = label;
                owner_sets[i].push(index as u32);
            }
            ellipses.push(e);
            pixel_sets.push(pix);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::PlacementFailed {
                index,
                attempts: PLACEMENT_ATTEMPTS,
            });
        }
    }
    Ok(Scene { labels, ellipses })
}

fn acceptable(
    pix: &[usize],
    labels: &LabelMap,
    pixel_sets: &[Vec<usize>],
    owner_sets: &[Vec<u32>],
    params: &SynthParams,
) -> bool {
    let shape = labels.shape();
    if !params.allow_touching {
        // no overlap and no 8-adjacency with anything drawn so far
        return pix.iter().all(|&i| {
            let (r, c) = shape.coords(i);
            labels.data()[i] == 0
                && Connectivity::Eight.offsets().iter().all(|&(dr, dc)| {
                    shape
                        .checked_index(r as i64 + dr, c as i64 + dc)
                        .is_none_or(|n| labels.data()[n] == 0)
                })
        });
    }
    let mut overlap = vec![0usize; pixel_sets.len()];
    for &i in pix {
        for &k in &owner_sets[i] {
            overlap[k as usize] += 1;
        }
    }
    // Also reject when an earlier instance would be reduced to nothing visible.
    overlap.iter().enumerate().all(|(k, &n)| {
        let limit = params.max_overlap_fraction * pix.len().min(pixel_sets[k].len()) as f64;
        n as f64 <= limit && n < pixel_sets[k].len()
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorruptionParams {
    pub seed: u64,
    pub mask_noise_sigma: f64,
    pub vector_noise_sigma: f64,
    /// Pixels of annotation growth applied by [`perturb_annotation`].
    pub boundary_dilation: u32,
}

impl CorruptionParams {
    pub fn clean(seed: u64) -> Self {
        Self {
            seed,
            mask_noise_sigma: 0.0,
            vector_noise_sigma: 0.0,
            boundary_dilation: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mask_noise_sigma >= 0.0 && self.vector_noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise sigmas must be >= 0".into()));
        }
        Ok(())
    }
}

/// Simulated network outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct CorruptedPredictions {
    pub inside_prob: ScalarField,
    pub center_prob: ScalarField,
    pub vectors: VectorField,
}

/// Turns clean targets into noisy probability fields and vectors.
///
/// Noise is drawn in the order inside, center, dx, dy, one value per pixel in
/// raster order; a channel with sigma 0 draws nothing.
pub fn corrupt_targets(targets: &EncodedTargets, params: &CorruptionParams) -> Result<CorruptedPredictions> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noisy_mask = |mask: &crate::raster::BinaryMask, rng: &mut ChaCha8Rng| -> Result<ScalarField> {
        let mut field = mask.map(|&b| if b { 1.0 } else { 0.0 });
        if params.mask_noise_sigma > 0.0 {
            let normal = Normal::new(0.0, params.mask_noise_sigma)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            for v in field.data_mut() {
                let n: f64 = normal.sample(rng);
                *v = if *v > 0.5 { 1.0 - n.abs() } else { n.abs() }.clamp(0.0, 1.0);
            }
        }
        Ok(field)
    };
    let inside_prob = noisy_mask(&targets.inside, &mut rng)?;
    let center_prob = noisy_mask(&targets.center, &mut rng)?;
    let mut vectors = targets.vectors.clone();
    if params.vector_noise_sigma > 0.0 {
        let normal = Normal::new(0.0, params.vector_noise_sigma)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for v in vectors.dx_mut() {
            *v += normal.sample(&mut rng);
        }
        for v in vectors.dy_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(CorruptedPredictions {
        inside_prob,
        center_prob,
        vectors,
    })
}

/// Grows every instance into background by `boundary_dilation` steps of
/// 4-neighbour dilation. A background pixel claimed by several instances in
/// the same step takes the smallest label.
pub fn perturb_annotation(gt: &LabelMap, params: &CorruptionParams) -> LabelMap {
    let shape = gt.shape();
    let mut cur = gt.clone();
    for _ in 0..params.boundary_dilation {
        let prev = cur.clone();
        for idx in 0..shape.len() {
            if prev.data()[idx] != 0 {
                continue;
            }
            let (r, c) = shape.coords(idx);
            let claim = Connectivity::Four
                .offsets()
                .iter()
                .filter_map(|&(dr, dc)| shape.checked_index(r as i64 + dr, c as i64 + dc))
                .map(|n| prev.data()[n])
                .filter(|&l| l != 0)
                .min();
            if let Some(l) = claim {
                cur.data_mut()[idx] = l;
            }
        }
    }
    cur
}
