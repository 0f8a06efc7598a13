//! End-to-end segmentation: slice, initialize, refine, threshold.

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::coseg::initialize_all;
use crate::error::{Error, Result};
use crate::flowrefine::{adaptive_threshold, refine_decomposed, superpixels, Flow, SuperpixelDecomposition};
use crate::hierarchy::SliceTree;
use crate::imagery::io::{list_files, read_frame, stem_index};
use crate::imagery::{BinaryMask, FrameSequence, ProbabilityMap};

pub const FRAME_PREFIX: &str = "frame_";

#[derive(Debug, Clone, Default)]
pub struct StageTimings {
    pub slice: Duration,
    pub initialize: Duration,
    pub refine: Duration,
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub requested_depth: usize,
    pub tree: SliceTree,
    pub coseg_calls: u64,
    pub initial: Vec<ProbabilityMap>,
    pub maps: Vec<ProbabilityMap>,
    pub masks: Vec<BinaryMask>,
    pub timings: StageTimings,
}

impl Segmentation {
    pub fn summary(&self) -> String {
        format!(
            "segment: {} frames, depth {} (requested {}), {} co-segmentation calls; \
             slice {:.3}s, initialize {:.3}s, refine {:.3}s",
            self.tree.length(),
            self.tree.depth(),
            self.requested_depth,
            self.coseg_calls,
            self.timings.slice.as_secs_f64(),
            self.timings.initialize.as_secs_f64(),
            self.timings.refine.as_secs_f64(),
        )
    }
}

/// Receives the normalized flow from frame `from` to frame `to` built during
/// the final (full-video) refinement pass.
pub type FlowSink<'a> = &'a (dyn Fn(usize, usize, &Flow) -> Result<()> + Sync);

/// Runs the three stages on `seq`. Work runs on the current rayon pool;
/// results do not depend on its size.
pub fn segment(seq: &FrameSequence, cfg: &PipelineConfig, flow_sink: Option<FlowSink<'_>>) -> Result<Segmentation> {
    cfg.validate()?;
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let tree = SliceTree::build(seq.len(), cfg.depth).map_err(|e| e.in_stage("slice"))?;
    timings.slice = t.elapsed();

    let t = Instant::now();
    let backend = cfg.backend.build().map_err(|e| e.in_stage("initialize"))?;
    let init = initialize_all(seq, &tree, backend.as_ref()).map_err(|e| e.in_stage("initialize"))?;
    timings.initialize = t.elapsed();

    let t = Instant::now();
    let maps = refine_tree(seq, &tree, &init.maps, cfg, flow_sink).map_err(|e| e.in_stage("refine"))?;
    let masks = maps
        .iter()
        .map(|m| adaptive_threshold(m, cfg.refine.threshold_ratio))
        .collect();
    timings.refine = t.elapsed();

    Ok(Segmentation {
        requested_depth: cfg.depth,
        tree,
        coseg_calls: init.coseg_calls,
        initial: init.maps,
        maps,
        masks,
        timings,
    })
}

/// Refines over the full video, and first over every intermediate tree node
/// bottom-up when recursive refinement is on.
fn refine_tree(
    seq: &FrameSequence,
    tree: &SliceTree,
    initial: &[ProbabilityMap],
    cfg: &PipelineConfig,
    flow_sink: Option<FlowSink<'_>>,
) -> Result<Vec<ProbabilityMap>> {
    let decomps: Vec<SuperpixelDecomposition> = seq
        .frames()
        .par_iter()
        .map(|f| superpixels(f, &cfg.refine))
        .collect::<Result<_>>()?;
    let mut maps = initial.to_vec();

    let first_level = if cfg.recursive_refine {
        tree.depth().saturating_sub(1)
    } else {
        0
    };
    for level in (0..=first_level).rev() {
        let mut next = maps.clone();
        for node in tree.level_nodes(level) {
            let d: Vec<&SuperpixelDecomposition> = node.iter().map(|&i| &decomps[i]).collect();
            let m: Vec<&ProbabilityMap> = node.iter().map(|&i| &maps[i]).collect();
            let observer = |from: usize, to: usize, flow: &Flow| -> Result<()> {
                match flow_sink {
                    Some(sink) if level == 0 => sink(node[from], node[to], flow),
                    _ => Ok(()),
                }
            };
            let refined = refine_decomposed(&d, &m, &cfg.refine, Some(&observer))?;
            for (&i, r) in node.iter().zip(refined) {
                next[i] = r;
            }
        }
        maps = next;
    }
    Ok(maps)
}

/// Loads `frame_000000.png`, `frame_000001.png`, ... from `dir`. Numbering
/// must start at 0 and be contiguous.
pub fn load_frames(dir: &Path) -> Result<FrameSequence> {
    let mut numbered: Vec<(usize, std::path::PathBuf)> = list_files(dir, "png")?
        .into_iter()
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(FRAME_PREFIX))
        })
        .filter_map(|p| stem_index(&p).map(|i| (i, p)))
        .collect();
    numbered.sort();
    if numbered.is_empty() {
        return Err(Error::Sequence(format!(
            "no {FRAME_PREFIX}NNNNNN.png files in {}",
            dir.display()
        )));
    }
    for (expected, (i, path)) in numbered.iter().enumerate() {
        if *i != expected {
            let what = if *i < expected {
                format!("duplicate frame number {i} ({})", path.display())
            } else {
                format!("missing {FRAME_PREFIX}{expected:06}.png (gap in numbering)")
            };
            return Err(Error::Sequence(what));
        }
    }
    let frames = numbered
        .par_iter()
        .map(|(i, p)| read_frame(p, *i))
        .collect::<Result<Vec<_>>>()?;
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    FrameSequence::new(id, frames)
}
