//! Temporal refinement of initial maps over superpixel correspondences.
//!
//! Each frame is decomposed once into superpixels and its map averaged per
//! superpixel. Temporally adjacent frames are linked by reversible flows;
//! every frame's scores are blended with the flowed scores of its previous
//! and next frame in one simultaneous pass, projected back to pixels, and
//! thresholded at a fixed fraction of the frame's maximum.

mod flow;
mod superpixel;

use rayon::prelude::*;

pub use flow::{build_flow, reversible_weight, Flow, NeighborTerm};
pub use superpixel::{superpixels, Feature, SuperpixelDecomposition, FEATURE_DIM};

use crate::error::{Error, Result};
use crate::imagery::{BinaryMask, Frame, ProbabilityMap};

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementParams {
    /// Weight of the previous frame.
    pub lambda_p: f64,
    /// Weight of the subsequent frame.
    pub lambda_s: f64,
    /// Binarization threshold as a fraction of the frame maximum.
    pub threshold_ratio: f64,
    pub superpixel_target: usize,
    pub slic_compactness: f64,
    pub slic_iters: usize,
    /// Neighbors ranked on each side when building flows.
    pub knn_k: usize,
    /// Mutual-rank cutoff and decay of flow weights.
    pub sigma: f64,
}

impl Default for RefinementParams {
    fn default() -> Self {
        RefinementParams {
            lambda_p: 0.5,
            lambda_s: 0.5,
            threshold_ratio: 0.2,
            superpixel_target: 400,
            slic_compactness: 10.0,
            slic_iters: 10,
            knn_k: 15,
            sigma: 15.0,
        }
    }
}

impl RefinementParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.lambda_p >= 0.0 && self.lambda_p.is_finite())
            || !(self.lambda_s >= 0.0 && self.lambda_s.is_finite())
        {
            return bad(format!(
                "lambdas must be finite and >= 0, got {} and {}",
                self.lambda_p, self.lambda_s
            ));
        }
        if !(self.threshold_ratio > 0.0 && self.threshold_ratio < 1.0) {
            return bad(format!("threshold ratio must be in (0, 1), got {}", self.threshold_ratio));
        }
        if self.superpixel_target == 0 || self.slic_iters == 0 || self.knn_k == 0 {
            return bad("superpixel target, SLIC iterations and kNN k must be >= 1".into());
        }
        if ![self.slic_compactness, self.sigma].iter().all(|&v| v > 0.0) {
            return bad("compactness and sigma must be > 0".into());
        }
        Ok(())
    }
}

/// Mean map value inside each superpixel.
pub fn pixel_to_superpixel(map: &ProbabilityMap, decomp: &SuperpixelDecomposition) -> Result<Vec<f64>> {
    map.same_dims(decomp.width(), decomp.height())?;
    // Accumulate deviations from the first value seen in each superpixel so
    // piecewise-constant maps come back exactly.
    let mut reference = vec![f64::NAN; decomp.count()];
    let mut deviation = vec![0.0; decomp.count()];
    for (&l, &v) in decomp.labels().iter().zip(map.values()) {
        let l = l as usize;
        if reference[l].is_nan() {
            reference[l] = v;
        }
        deviation[l] += v - reference[l];
    }
    Ok(reference
        .into_iter()
        .zip(deviation)
        .zip(decomp.sizes())
        .map(|((r, d), &n)| r + d / n as f64)
        .collect())
}

/// Paints every pixel with its superpixel's score, clamped to `[0, 1]`.
pub fn project(decomp: &SuperpixelDecomposition, scores: &[f64]) -> Result<ProbabilityMap> {
    if scores.len() != decomp.count() {
        return Err(Error::LengthMismatch {
            expected: decomp.count(),
            got: scores.len(),
        });
    }
    let values = decomp
        .labels()
        .iter()
        .map(|&l| scores[l as usize])
        .collect();
    ProbabilityMap::from_clamped(decomp.width(), decomp.height(), values)
}

/// Binarizes at `ratio * max`. An all-zero map gives an empty mask.
pub fn adaptive_threshold(map: &ProbabilityMap, ratio: f64) -> BinaryMask {
    let max = map.max_value();
    let bits = if max > 0.0 {
        let t = ratio * max;
        map.values().iter().map(|&v| v >= t).collect()
    } else {
        vec![false; map.values().len()]
    };
    BinaryMask::new(map.width(), map.height(), bits).expect("mask sized from map")
}

/// One propagation step from precomputed neighbor terms. A missing neighbor,
/// or a superpixel without reversible links to it, drops that term and its
/// weight from the denominator.
pub fn propagate_terms(
    x: &[f64],
    prev: Option<&NeighborTerm>,
    next: Option<&NeighborTerm>,
    params: &RefinementParams,
) -> Result<Vec<f64>> {
    for term in [prev, next].into_iter().flatten() {
        if term.values.len() != x.len() || term.active.len() != x.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                got: term.values.len(),
            });
        }
    }
    Ok((0..x.len())
        .map(|i| {
            let mut num = x[i];
            let mut den = 1.0;
            if let Some(t) = prev.filter(|t| t.active[i]) {
                num += params.lambda_p * t.values[i];
                den += params.lambda_p;
            }
            if let Some(t) = next.filter(|t| t.active[i]) {
                num += params.lambda_s * t.values[i];
                den += params.lambda_s;
            }
            num / den
        })
        .collect())
}

/// Updates `x_cur` from its neighbors' scores through the row-normalized
/// flows `F_{cur,prev}` and `F_{cur,next}`.
pub fn propagate(
    x_prev: Option<(&Flow, &[f64])>,
    x_cur: &[f64],
    x_next: Option<(&Flow, &[f64])>,
    params: &RefinementParams,
) -> Result<Vec<f64>> {
    let term = |side: Option<(&Flow, &[f64])>| -> Result<Option<NeighborTerm>> {
        side.map(|(f, x)| {
            if f.rows() != x_cur.len() {
                return Err(Error::LengthMismatch {
                    expected: x_cur.len(),
                    got: f.rows(),
                });
            }
            f.apply(x)
        })
        .transpose()
    };
    let prev = term(x_prev)?;
    let next = term(x_next)?;
    propagate_terms(x_cur, prev.as_ref(), next.as_ref(), params)
}

/// Called for each normalized flow built during refinement with the
/// positions `(from, to)` inside the refined sequence.
pub type FlowObserver<'a> = &'a (dyn Fn(usize, usize, &Flow) -> Result<()> + Sync);

/// Refines maps of a temporally ordered sequence whose frames are already
/// decomposed. A single-frame sequence has no neighbors and is returned
/// unchanged.
pub fn refine_decomposed(
    decomps: &[&SuperpixelDecomposition],
    maps: &[&ProbabilityMap],
    params: &RefinementParams,
    observer: Option<FlowObserver<'_>>,
) -> Result<Vec<ProbabilityMap>> {
    if decomps.len() != maps.len() {
        return Err(Error::LengthMismatch {
            expected: decomps.len(),
            got: maps.len(),
        });
    }
    if decomps.len() <= 1 {
        return Ok(maps.iter().map(|&m| m.clone()).collect());
    }
    let scores: Vec<Vec<f64>> = decomps
        .par_iter()
        .zip(maps.par_iter())
        .map(|(d, m)| pixel_to_superpixel(m, d))
        .collect::<Result<_>>()?;

    // For each adjacent pair (u, u+1): the term u receives from u+1 and the
    // term u+1 receives from u.
    let links: Vec<(NeighborTerm, NeighborTerm)> = (0..decomps.len() - 1)
        .into_par_iter()
        .map(|u| {
            let raw = Flow::raw(decomps[u], decomps[u + 1], params);
            let backward = raw.transpose().normalized();
            let forward = raw.normalized();
            if let Some(obs) = observer {
                obs(u, u + 1, &forward)?;
                obs(u + 1, u, &backward)?;
            }
            Ok((forward.apply(&scores[u + 1])?, backward.apply(&scores[u])?))
        })
        .collect::<Result<_>>()?;

    (0..decomps.len())
        .into_par_iter()
        .map(|u| {
            let prev = u.checked_sub(1).map(|p| &links[p].1);
            let next = links.get(u).map(|l| &l.0);
            let x = propagate_terms(&scores[u], prev, next, params)?;
            project(decomps[u], &x)
        })
        .collect()
}

/// Refined maps and their thresholded masks.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub maps: Vec<ProbabilityMap>,
    pub masks: Vec<BinaryMask>,
}

/// Decomposes each frame, refines over adjacent pairs in the given order,
/// projects and thresholds.
pub fn refine_sequence(
    frames: &[Frame],
    initial: &[ProbabilityMap],
    params: &RefinementParams,
) -> Result<Refinement> {
    params.validate()?;
    if frames.len() != initial.len() {
        return Err(Error::LengthMismatch {
            expected: frames.len(),
            got: initial.len(),
        });
    }
    let decomps: Vec<SuperpixelDecomposition> = frames
        .par_iter()
        .map(|f| superpixels(f, params))
        .collect::<Result<_>>()?;
    let d: Vec<&SuperpixelDecomposition> = decomps.iter().collect();
    let m: Vec<&ProbabilityMap> = initial.iter().collect();
    let maps = refine_decomposed(&d, &m, params, None)?;
    let masks = maps
        .iter()
        .map(|m| adaptive_threshold(m, params.threshold_ratio))
        .collect();
    Ok(Refinement { maps, masks })
}
