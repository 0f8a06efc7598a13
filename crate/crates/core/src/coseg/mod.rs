//! Frame-pair co-segmentation and per-frame fusion.
//!
//! A backend maps a frame pair `(A, B)` to two probability maps: the objects
//! of `A` shared with `B`, and the objects of `B` shared with `A`. A frame's
//! initial map is the per-pixel mean of its maps against every frame of the
//! sibling leaf.

mod baseline;
mod external;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

pub use baseline::BaselineBackend;
pub use external::{pair_dir_name, write_external_pair, ExternalBackend};

use crate::error::{Error, Result};
use crate::hierarchy::SliceTree;
use crate::imagery::{Frame, FrameSequence, ProbabilityMap};

/// Output of one co-segmentation call.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    /// Objects of the first frame shared with the second.
    pub map_a: ProbabilityMap,
    /// Objects of the second frame shared with the first.
    pub map_b: ProbabilityMap,
}

pub trait CosegBackend: Send + Sync {
    fn coseg(&self, a: &Frame, b: &Frame) -> Result<PairResult>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendKind {
    /// Deterministic color-commonness heuristic with a boundary prior.
    Baseline,
    /// Precomputed maps read from a directory.
    External(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Resolution the backend works at; `None` keeps the native size.
    pub processing: Option<(usize, usize)>,
    /// Color bins per channel for the baseline.
    pub bins: usize,
    /// Border band width for the baseline, as a fraction of the shorter side.
    pub border_fraction: f64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Baseline,
            processing: Some((320, 320)),
            bins: 12,
            border_fraction: 0.05,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=256).contains(&self.bins) {
            return Err(Error::Config(format!("bins must be in 2..=256, got {}", self.bins)));
        }
        if !(self.border_fraction > 0.0 && self.border_fraction < 0.5) {
            return Err(Error::Config(format!(
                "border fraction must be in (0, 0.5), got {}",
                self.border_fraction
            )));
        }
        if let Some((w, h)) = self.processing {
            if w == 0 || h == 0 {
                return Err(Error::Config("processing resolution must be nonzero".into()));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn CosegBackend>> {
        self.validate()?;
        Ok(match &self.kind {
            BackendKind::Baseline => Box::new(BaselineBackend::new(
                self.bins,
                self.border_fraction,
                self.processing,
            )),
            BackendKind::External(dir) => {
                Box::new(ExternalBackend::new(dir.clone(), self.processing))
            }
        })
    }
}

fn with_pair_context(err: Error, a: usize, b: usize) -> Error {
    match err {
        e @ Error::Pair { .. } => e,
        e => Error::Pair {
            a,
            b,
            source: Box::new(e),
        },
    }
}

/// Co-segments one frame pair with the backend described by `cfg`.
pub fn coseg_pair(a: &Frame, b: &Frame, cfg: &BackendConfig) -> Result<PairResult> {
    cfg.build()?
        .coseg(a, b)
        .map_err(|e| with_pair_context(e, a.index(), b.index()))
}

/// Running per-pixel mean. Values are summed in insertion order and the
/// result is clamped to the per-pixel range of the inputs.
#[derive(Debug, Clone)]
pub struct FusionAccumulator {
    width: usize,
    height: usize,
    sum: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    count: usize,
}

impl FusionAccumulator {
    pub fn new(width: usize, height: usize) -> Self {
        FusionAccumulator {
            width,
            height,
            sum: vec![0.0; width * height],
            lo: vec![f64::INFINITY; width * height],
            hi: vec![f64::NEG_INFINITY; width * height],
            count: 0,
        }
    }

    pub fn add(&mut self, map: &ProbabilityMap) -> Result<()> {
        map.same_dims(self.width, self.height)?;
        for (((s, lo), hi), &v) in self
            .sum
            .iter_mut()
            .zip(&mut self.lo)
            .zip(&mut self.hi)
            .zip(map.values())
        {
            *s += v;
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(self) -> Result<ProbabilityMap> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("no maps to fuse".into()));
        }
        let n = self.count as f64;
        let values = self
            .sum
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&s, (&lo, &hi))| (s / n).clamp(lo, hi))
            .collect();
        ProbabilityMap::new(self.width, self.height, values)
    }
}

/// Per-pixel average of a frame's maps against every sibling-leaf frame,
/// summed in the given order.
pub fn fuse_masks(maps: &[ProbabilityMap]) -> Result<ProbabilityMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidArgument("sibling set is empty".into()))?;
    let mut acc = FusionAccumulator::new(first.width(), first.height());
    for m in maps {
        acc.add(m)?;
    }
    acc.finish()
}

/// One initial map per frame plus the number of backend calls spent.
#[derive(Debug, Clone)]
pub struct Initialization {
    pub maps: Vec<ProbabilityMap>,
    pub coseg_calls: u64,
}

/// Co-segments every frame pair across each pair of sibling leaves and fuses
/// the results. Each unordered pair is evaluated once; both directional maps
/// come from that call.
///
/// A depth-0 tree has no siblings; every frame is then co-segmented with
/// itself.
pub fn initialize_all(
    seq: &FrameSequence,
    tree: &SliceTree,
    backend: &dyn CosegBackend,
) -> Result<Initialization> {
    if tree.length() != seq.len() {
        return Err(Error::LengthMismatch {
            expected: seq.len(),
            got: tree.length(),
        });
    }
    let frames = seq.frames();
    let (w, h) = (seq.width(), seq.height());
    let calls = AtomicU64::new(0);
    let call = |i: usize, j: usize| -> Result<PairResult> {
        calls.fetch_add(1, Ordering::Relaxed);
        let r = backend
            .coseg(&frames[i], &frames[j])
            .map_err(|e| with_pair_context(e, i, j))?;
        r.map_a
            .same_dims(w, h)
            .and_then(|_| r.map_b.same_dims(w, h))
            .map_err(|e| with_pair_context(e, i, j))?;
        Ok(r)
    };

    let mut maps: Vec<Option<ProbabilityMap>> = vec![None; seq.len()];

    if tree.depth() == 0 {
        let own: Vec<ProbabilityMap> = (0..seq.len())
            .into_par_iter()
            .map(|i| call(i, i).map(|r| r.map_a))
            .collect::<Result<_>>()?;
        for (slot, m) in maps.iter_mut().zip(own) {
            *slot = Some(m);
        }
    } else {
        let fused: Vec<Vec<(usize, ProbabilityMap)>> = tree
            .sibling_pairs()?
            .into_par_iter()
            .map(|(leaf_a, leaf_b)| {
                let mut acc_a: Vec<_> = leaf_a.iter().map(|_| FusionAccumulator::new(w, h)).collect();
                let mut acc_b: Vec<_> = leaf_b.iter().map(|_| FusionAccumulator::new(w, h)).collect();
                for (ia, &i) in leaf_a.iter().enumerate() {
                    let row: Vec<PairResult> = leaf_b
                        .par_iter()
                        .map(|&j| call(i, j))
                        .collect::<Result<_>>()?;
                    for (jb, r) in row.iter().enumerate() {
                        acc_a[ia].add(&r.map_a)?;
                        acc_b[jb].add(&r.map_b)?;
                    }
                }
                let mut out = Vec::with_capacity(leaf_a.len() + leaf_b.len());
                for (&i, acc) in leaf_a.iter().zip(acc_a).chain(leaf_b.iter().zip(acc_b)) {
                    out.push((i, acc.finish()?));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (i, m) in fused.into_iter().flatten() {
            maps[i] = Some(m);
        }
    }

    let maps = maps
        .into_iter()
        .enumerate()
        .map(|(i, m)| m.ok_or_else(|| Error::Sequence(format!("frame {i} received no map"))))
        .collect::<Result<_>>()?;
    Ok(Initialization {
        maps,
        coseg_calls: calls.into_inner(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::coseg_call_count;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ProbabilityMap {
        ProbabilityMap::new(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn fuse_examples() {
        let a = ProbabilityMap::constant(3, 2, 0.2).unwrap();
        let b = ProbabilityMap::constant(3, 2, 0.6).unwrap();
        let f = fuse_masks(&[a.clone(), b]).unwrap();
        assert!(f.values().iter().all(|&v| (v - 0.4).abs() < 1e-15));
        assert_eq!(fuse_masks(std::slice::from_ref(&a)).unwrap(), a);
        assert!(fuse_masks(&[]).is_err());
        let c = ProbabilityMap::constant(2, 3, 0.6).unwrap();
        assert!(matches!(
            fuse_masks(&[a, c]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fuse_matches_per_pixel_oracle_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let maps: Vec<_> = (0..3).map(|_| random_map(&mut rng, 9, 7)).collect();
            let fused = fuse_masks(&maps).unwrap();
            for p in 0..63 {
                let vals: Vec<f64> = maps.iter().map(|m| m.values()[p]).collect();
                let mut s = 0.0;
                for v in &vals {
                    s += v;
                }
                let oracle = s / 3.0;
                let got = fused.values()[p];
                assert!((got - oracle).abs() <= 1e-12);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                assert!(got >= lo && got <= hi);
            }
        }
    }

    /// Returns a constant map per frame, tagged by the pair's indices.
    struct Tagging;

    impl CosegBackend for Tagging {
        fn coseg(&self, a: &Frame, b: &Frame) -> Result<PairResult> {
            let v = |x: usize, y: usize| (x * 1000 + y) as f64 / 1e6;
            Ok(PairResult {
                map_a: ProbabilityMap::constant(a.width(), a.height(), v(a.index(), b.index()))?,
                map_b: ProbabilityMap::constant(b.width(), b.height(), v(b.index(), a.index()))?,
            })
        }
    }

    fn blank_sequence(len: usize) -> FrameSequence {
        let frames = (0..len).map(|i| Frame::filled(4, 4, [9, 9, 9], i).unwrap()).collect();
        FrameSequence::new("blank", frames).unwrap()
    }

    #[test]
    fn initialize_fuses_against_sibling_leaf() {
        let seq = blank_sequence(8);
        let tree = SliceTree::build(8, 2).unwrap();
        let init = initialize_all(&seq, &tree, &Tagging).unwrap();
        assert_eq!(init.coseg_calls, 8);
        // Frame 0 sits in leaf {0,4}; its sibling is {2,6}.
        let expected = (0.000002 + 0.000006) / 2.0;
        assert!((init.maps[0].values()[0] - expected).abs() < 1e-15);
        // Frame 6 sits in leaf {2,6}; its sibling is {0,4}.
        let expected = (0.006 + 0.006004) / 2.0;
        assert!((init.maps[6].values()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn call_count_matches_hierarchy() {
        for (len, depth) in [(4, 1), (8, 3), (37, 5), (181, 5)] {
            let seq = blank_sequence(len);
            let tree = SliceTree::build(len, depth).unwrap();
            let init = initialize_all(&seq, &tree, &Tagging).unwrap();
            assert_eq!(init.maps.len(), len);
            assert_eq!(init.coseg_calls, coseg_call_count(len, tree.depth()).unwrap());
        }
    }

    #[test]
    fn depth_zero_pairs_frames_with_themselves() {
        let seq = blank_sequence(1);
        let tree = SliceTree::build(1, 5).unwrap();
        let init = initialize_all(&seq, &tree, &Tagging).unwrap();
        assert_eq!(init.coseg_calls, 1);
        assert_eq!(init.maps[0].values()[0], 0.0);
    }

    struct Failing;

    impl CosegBackend for Failing {
        fn coseg(&self, _: &Frame, _: &Frame) -> Result<PairResult> {
            Err(Error::InvalidArgument("nope".into()))
        }
    }

    #[test]
    fn backend_errors_name_the_pair() {
        let seq = blank_sequence(2);
        let tree = SliceTree::build(2, 1).unwrap();
        let err = initialize_all(&seq, &tree, &Failing).unwrap_err();
        assert!(matches!(err, Error::Pair { a: 0, b: 1, .. }), "{err}");
    }

    #[test]
    fn config_validation() {
        let mut cfg = BackendConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.bins = 1;
        assert!(cfg.validate().is_err());
        cfg.bins = 12;
        cfg.border_fraction = 0.5;
        assert!(cfg.validate().is_err());
    }
}
