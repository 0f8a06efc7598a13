//! Neighborhood reversible flow between the superpixels of two frames.
//!
//! Superpixels `i` (frame u) and `j` (frame v) are linked when each lies
//! within the other's `k` nearest neighbors under the l1 feature distance.
//! With `k` the larger of the two one-directional ranks, the link weight is
//! `exp(-2k/sigma)` for `k <= sigma` and 0 otherwise. Rows are then
//! normalized to sum to 1.

use std::cmp::Ordering;
use std::fmt::Write as _;

use super::superpixel::{Feature, SuperpixelDecomposition};
use super::RefinementParams;
use crate::error::{Error, Result};

/// Weight of a link with mutual rank `k`.
pub fn reversible_weight(k: usize, sigma: f64) -> f64 {
    if k as f64 <= sigma {
        (-2.0 * k as f64 / sigma).exp()
    } else {
        0.0
    }
}

fn l1(a: &Feature, b: &Feature) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Dense `rows x cols` correspondence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    rows: usize,
    cols: usize,
    sigma: f64,
    weights: Vec<f64>,
}

/// A flow applied to a neighbor's score vector. `active[i]` is false when
/// row `i` has no reversible neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTerm {
    pub values: Vec<f64>,
    pub active: Vec<bool>,
}

impl Flow {
    /// Unnormalized flow between two descriptor sets. Ranks are 1-based and
    /// ties go to the smaller superpixel id; only the `knn` nearest on each
    /// side are ranked.
    pub fn from_features(u: &[Feature], v: &[Feature], knn: usize, sigma: f64) -> Flow {
        let (rows, cols) = (u.len(), v.len());
        let dist: Vec<f64> = u
            .iter()
            .flat_map(|fu| v.iter().map(move |fv| l1(fu, fv)))
            .collect();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };

        let nearest = |mut cand: Vec<(f64, usize)>| -> Vec<usize> {
            let keep = knn.min(cand.len());
            if keep == 0 {
                return Vec::new();
            }
            if keep < cand.len() {
                cand.select_nth_unstable_by(keep - 1, by_dist);
                cand.truncate(keep);
            }
            cand.sort_unstable_by(by_dist);
            cand.into_iter().map(|(_, id)| id).collect()
        };

        // col_rank[i * cols + j]: rank of i among j's nearest in u (0 = unranked).
        let mut col_rank = vec![0u32; rows * cols];
        for j in 0..cols {
            let cand = (0..rows).map(|i| (dist[i * cols + j], i)).collect();
            for (r, i) in nearest(cand).into_iter().enumerate() {
                col_rank[i * cols + j] = r as u32 + 1;
            }
        }

        let mut weights = vec![0.0; rows * cols];
        for i in 0..rows {
            let cand = (0..cols).map(|j| (dist[i * cols + j], j)).collect();
            for (r, j) in nearest(cand).into_iter().enumerate() {
                let back = col_rank[i * cols + j];
                if back == 0 {
                    continue;
                }
                let k = (r + 1).max(back as usize);
                weights[i * cols + j] = reversible_weight(k, sigma);
            }
        }
        Flow {
            rows,
            cols,
            sigma,
            weights,
        }
    }

    /// Unnormalized flow between two decompositions.
    pub fn raw(
        u: &SuperpixelDecomposition,
        v: &SuperpixelDecomposition,
        params: &RefinementParams,
    ) -> Flow {
        Flow::from_features(u.features(), v.features(), params.knn_k, params.sigma)
    }

    /// Scales each nonzero row to sum 1; all-zero rows stay zero.
    pub fn normalized(mut self) -> Flow {
        for row in self.weights.chunks_exact_mut(self.cols.max(1)) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|w| *w /= s);
            }
        }
        self
    }

    pub fn transpose(&self) -> Flow {
        let mut weights = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                weights[j * self.rows + i] = self.weights[i * self.cols + j];
            }
        }
        Flow {
            rows: self.cols,
            cols: self.rows,
            sigma: self.sigma,
            weights,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.cols..(i + 1) * self.cols]
    }

    /// `F x` for a score vector over the flow's columns.
    pub fn apply(&self, x: &[f64]) -> Result<NeighborTerm> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        let (values, active) = (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let active = row.iter().any(|&w| w > 0.0);
                (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>(), active)
            })
            .unzip();
        Ok(NeighborTerm { values, active })
    }

    /// Nonzero entries as `row col weight` lines.
    pub fn to_triples(&self) -> String {
        let mut out = format!("# rows {} cols {} sigma {}\n", self.rows, self.cols, self.sigma);
        for i in 0..self.rows {
            for (j, &w) in self.row(i).iter().enumerate() {
                if w > 0.0 {
                    let _ = writeln!(out, "{i} {j} {w:.17e}");
                }
            }
        }
        out
    }
}

/// Row-normalized reversible flow from `u` to `v`.
pub fn build_flow(
    u: &SuperpixelDecomposition,
    v: &SuperpixelDecomposition,
    params: &RefinementParams,
) -> Flow {
    Flow::raw(u, v, params).normalized()
}
