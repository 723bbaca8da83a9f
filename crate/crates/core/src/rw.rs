//! Seeded random walker segmentation over the inside-pixel graph.
//!
//! Center regions act as seeds. For each seed label the combinatorial
//! Dirichlet problem `L_U x = −B m` is solved on the unseeded pixels with
//! Jacobi-preconditioned conjugate gradient; each pixel takes the label with
//! the highest probability. With `K` labels only `K − 1` systems are solved
//! and the last probability is the complement.

use crate::decoding::{binarize, extract_center_regions, refine, suppress_false_positives, CenterRegions, DecodeParams};
use crate::error::{Error, Result};
use crate::morph::{connected_components, nearest_label};
use crate::raster::{BinaryMask, Connectivity, LabelMap, RasterShape, ScalarField};

/// Lower bound on edge weights so strongly contrasting edges keep the system definite.
const MIN_WEIGHT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwParams {
    /// Edge weight contrast: `w = exp(−beta·(g_u − g_v)²)`.
    pub beta: f64,
    /// Relative residual at which conjugate gradient stops.
    pub cg_tolerance: f64,
    pub cg_max_iters: usize,
    pub connectivity: Connectivity,
}

impl Default for RwParams {
    fn default() -> Self {
        Self {
            beta: 130.0,
            cg_tolerance: 1e-6,
            cg_max_iters: 2000,
            connectivity: Connectivity::Four,
        }
    }
}

impl RwParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter("rw beta must be finite and >= 0".into()));
        }
        if self.cg_tolerance.is_nan() || self.cg_tolerance <= 0.0 {
            return Err(Error::InvalidParameter("cg_tolerance must be > 0".into()));
        }
        if self.cg_max_iters == 0 {
            return Err(Error::InvalidParameter("cg_max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sparse symmetric system over the unseeded pixels of seeded components.
#[derive(Clone, Debug)]
pub struct RwSystem {
    shape: RasterShape,
    params: RwParams,
    /// Seed label per pixel, 0 if not a seed (or not inside).
    seeds: Vec<u32>,
    /// Pixel index of each unknown.
    unknowns: Vec<usize>,
    diag: Vec<f64>,
    /// Row-compressed off-diagonal entries: neighbours and weights.
    row_start: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    /// Per unknown, seed neighbours as (label, weight).
    seed_links: Vec<Vec<(u32, f64)>>,
    /// Inside pixels whose component holds no seed.
    orphans: Vec<usize>,
    labels: Vec<u32>,
}

impl RwSystem {
    pub fn build(
        inside: &BinaryMask,
        regions: &CenterRegions,
        guidance: &ScalarField,
        params: &RwParams,
    ) -> Result<Self> {
        params.validate()?;
        let shape = inside.shape();
        shape.ensure_same(&regions.labels.shape())?;
        shape.ensure_same(&guidance.shape())?;
        guidance.check_finite()?;
        let n_inside = inside.count();
        if n_inside > 0 && regions.count == 0 {
            return Err(Error::NoCenterRegions(n_inside));
        }

        let seeds: Vec<u32> = inside
            .data()
            .iter()
            .zip(regions.labels.data())
            .map(|(&i, &l)| if i { l } else { 0 })
            .collect();
        let mut labels: Vec<u32> = seeds.iter().copied().filter(|&l| l != 0).collect();
        labels.sort_unstable();
        labels.dedup();

        let comps = connected_components(inside, params.connectivity);
        let mut seeded = vec![false; comps.max_label() as usize + 1];
        for (&c, &s) in comps.data().iter().zip(&seeds) {
            if s != 0 {
                seeded[c as usize] = true;
            }
        }

        let mut node_of = vec![usize::MAX; shape.len()];
        let mut unknowns = Vec::new();
        let mut orphans = Vec::new();
        for idx in 0..shape.len() {
            let c = comps.data()[idx] as usize;
            if c == 0 || seeds[idx] != 0 {
                continue;
            }
            if seeded[c] {
                node_of[idx] = unknowns.len();
                unknowns.push(idx);
            } else {
                orphans.push(idx);
            }
        }

        let g = guidance.data();
        let weight = |a: usize, b: usize| {
            let d = g[a] - g[b];
            (-params.beta * d * d).exp().max(MIN_WEIGHT)
        };
        let mut diag = vec![0.0; unknowns.len()];
        let mut row_start = Vec::with_capacity(unknowns.len() + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut seed_links = vec![Vec::new(); unknowns.len()];
        for (k, &idx) in unknowns.iter().enumerate() {
            row_start.push(cols.len());
            let (r, c) = shape.coords(idx);
            for &(dr, dc) in params.connectivity.offsets() {
                let Some(n) = shape.checked_index(r as i64 + dr, c as i64 + dc) else {
                    continue;
                };
                if !inside.data()[n] {
                    continue;
                }
                let w = weight(idx, n);
                diag[k] += w;
                if seeds[n] != 0 {
                    seed_links[k].push((seeds[n], w));
                } else {
                    cols.push(node_of[n]);
                    weights.push(w);
                }
            }
        }
        row_start.push(cols.len());

        Ok(Self {
            shape,
            params: *params,
            seeds,
            unknowns,
            diag,
            row_start,
            cols,
            weights,
            seed_links,
            orphans,
            labels,
        })
    }

    /// Seed labels present in the graph, ascending.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for k in 0..self.unknowns.len() {
            let mut acc = self.diag[k] * x[k];
            for e in self.row_start[k]..self.row_start[k + 1] {
                acc -= self.weights[e] * x[self.cols[e]];
            }
            out[k] = acc;
        }
    }

    /// Probability that a walker from each pixel first reaches a seed of `label`.
    ///
    /// Returned over the whole raster: seeds hold 1 or 0, unknowns the solved
    /// value, and every other pixel (background and seedless components) 0.
    pub fn solve(&self, label: u32) -> Result<Vec<f64>> {
        let n = self.unknowns.len();
        let rhs: Vec<f64> = self
            .seed_links
            .iter()
            .map(|links| links.iter().filter(|(l, _)| *l == label).map(|(_, w)| w).sum())
            .collect();
        let x = self.conjugate_gradient(&rhs)?;
        let mut out = vec![0.0; self.shape.len()];
        for (idx, &s) in self.seeds.iter().enumerate() {
            if s == label {
                out[idx] = 1.0;
            }
        }
        // exact solutions lie in [0, 1]; clip solver error
        for k in 0..n {
            out[self.unknowns[k]] = x[k].clamp(0.0, 1.0);
        }
        Ok(out)
    }

    fn conjugate_gradient(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let b_norm = norm(b);
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(ri, d)| ri / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let tol = self.params.cg_tolerance;
        let mut residual = 1.0;
        for _ in 0..self.params.cg_max_iters {
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            residual = norm(&r) / b_norm;
            if residual <= tol {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NotConverged {
            iterations: self.params.cg_max_iters,
            residual,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Label probabilities for every seed label.
#[derive(Clone, Debug)]
pub struct RwProbabilities {
    pub labels: Vec<u32>,
    /// `probabilities[k][pixel]` for `labels[k]`.
    pub probabilities: Vec<Vec<f64>>,
    /// Pixels that belong to a seeded component.
    pub solved: BinaryMask,
}

/// Solves `K − 1` systems and fills the last label by complement.
pub fn random_walker_probabilities(system: &RwSystem) -> Result<RwProbabilities> {
    let labels = system.labels.clone();
    let mut probabilities = Vec::with_capacity(labels.len());
    if let Some((_, head)) = labels.split_last() {
        for &l in head {
            probabilities.push(system.solve(l)?);
        }
        let mut last = vec![0.0; system.shape.len()];
        for &idx in system.unknowns.iter() {
            last[idx] = (1.0 - probabilities.iter().map(|p| p[idx]).sum::<f64>()).clamp(0.0, 1.0);
        }
        let last_label = *labels.last().unwrap();
        for (idx, &s) in system.seeds.iter().enumerate() {
            if s == last_label {
                last[idx] = 1.0;
            }
        }
        probabilities.push(last);
    }
    let mut solved = BinaryMask::new(system.shape);
    for (idx, &s) in system.seeds.iter().enumerate() {
        if s != 0 {
            solved.data_mut()[idx] = true;
        }
    }
    for &idx in &system.unknowns {
        solved.data_mut()[idx] = true;
    }
    Ok(RwProbabilities {
        labels,
        probabilities,
        solved,
    })
}

/// Assigns every inside pixel to a center region with the random walker.
///
/// Seeds keep their label. Unseeded pixels take the most probable label;
/// probabilities closer than `cg_tolerance` count as tied and the smaller
/// label wins. Pixels in components without any seed take the nearest
/// region label.
pub fn random_walker_segment(
    inside: &BinaryMask,
    regions: &CenterRegions,
    guidance: &ScalarField,
    params: &RwParams,
) -> Result<LabelMap> {
    let system = RwSystem::build(inside, regions, guidance, params)?;
    let probs = random_walker_probabilities(&system)?;
    let mut out = LabelMap::new(system.shape);
    for (idx, &s) in system.seeds.iter().enumerate() {
        if s != 0 {
            out.data_mut()[idx] = s;
        }
    }
    for &idx in &system.unknowns {
        let mut best = (probs.labels[0], probs.probabilities[0][idx]);
        for (k, &l) in probs.labels.iter().enumerate().skip(1) {
            let p = probs.probabilities[k][idx];
            if p > best.1 + params.cg_tolerance {
                best = (l, p);
            }
        }
        out.data_mut()[idx] = best.0;
    }
    for &idx in &system.orphans {
        let (r, c) = system.shape.coords(idx);
        out.data_mut()[idx] = nearest_label(r, c, &regions.labels)?;
    }
    Ok(out)
}

/// Baseline instance map from probability fields: binarize, suppress
/// centerless inside components, seed the walker with the center regions and
/// refine like the vector decoder. The inside probabilities guide the edge
/// weights.
pub fn rw_instances(
    inside_prob: &ScalarField,
    center_prob: &ScalarField,
    decode: &DecodeParams,
    params: &RwParams,
) -> Result<LabelMap> {
    decode.validate()?;
    inside_prob.shape().ensure_same(&center_prob.shape())?;
    let inside = binarize(inside_prob, decode.inside_threshold);
    let center = binarize(center_prob, decode.center_threshold);
    let (kept, _) = suppress_false_positives(&inside, &center, decode.connectivity)?;
    if !kept.any() {
        return Ok(LabelMap::new(inside.shape()));
    }
    let regions = extract_center_regions(&center, decode.connectivity);
    let labels = random_walker_segment(&kept, &regions, inside_prob, params)?;
    Ok(refine(&labels, decode, decode.connectivity).0)
}
