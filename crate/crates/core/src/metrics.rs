//! Evaluation: per-frame IoU and F-beta on binarized masks, averaged first
//! within each video and then across videos.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::flowrefine::adaptive_threshold;
use crate::imagery::io::{read_map, read_mask, stem_index, video_tree};
use crate::imagery::{BinaryMask, ProbabilityMap};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Binarization threshold for soft predictions, as a fraction of the max.
    pub binarize_ratio: f64,
    pub beta2: f64,
    /// Only frames whose index is a multiple of this are scored.
    pub keyframe_stride: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            binarize_ratio: 0.2,
            beta2: 0.3,
            keyframe_stride: 15,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.binarize_ratio > 0.0 && self.binarize_ratio < 1.0) {
            return Err(Error::Config(format!(
                "binarization ratio must be in (0, 1), got {}",
                self.binarize_ratio
            )));
        }
        if !(self.beta2 > 0.0 && self.beta2.is_finite()) {
            return Err(Error::Config(format!("beta^2 must be > 0, got {}", self.beta2)));
        }
        if self.keyframe_stride == 0 {
            return Err(Error::Config("keyframe stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub video: String,
    pub frame: String,
    pub iou: f64,
    pub f: f64,
}

fn overlap(pred: &BinaryMask, gt: &BinaryMask) -> Result<(usize, usize, usize)> {
    pred.same_dims(gt)?;
    let (mut inter, mut np, mut ng) = (0, 0, 0);
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        inter += (p && g) as usize;
        np += p as usize;
        ng += g as usize;
    }
    Ok((inter, np, ng))
}

/// `|pred & gt| / |pred | gt|`; 1 when both masks are empty.
pub fn frame_iou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    let (inter, np, ng) = overlap(pred, gt)?;
    let union = np + ng - inter;
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// F-beta on binary masks, `(1+b2) P R / (b2 P + R)`. Both empty gives 1.
pub fn frame_f(pred: &BinaryMask, gt: &BinaryMask, beta2: f64) -> Result<f64> {
    let (inter, np, ng) = overlap(pred, gt)?;
    if np == 0 && ng == 0 {
        return Ok(1.0);
    }
    let precision = if np == 0 { 0.0 } else { inter as f64 / np as f64 };
    let recall = if ng == 0 { 0.0 } else { inter as f64 / ng as f64 };
    let den = beta2 * precision + recall;
    Ok(if den == 0.0 {
        0.0
    } else {
        (1.0 + beta2) * precision * recall / den
    })
}

/// Same rule as the refinement threshold.
pub fn binarize_for_eval(map: &ProbabilityMap, ratio: f64) -> BinaryMask {
    adaptive_threshold(map, ratio)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoScore {
    pub video: String,
    pub frames: usize,
    pub iou: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetScores {
    pub miou: f64,
    pub mf: f64,
    pub videos: Vec<VideoScore>,
}

/// Mean over frames within each video, then unweighted mean over videos.
pub fn dataset_scores(records: &[EvalRecord]) -> Result<DatasetScores> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no evaluated frames".into()));
    }
    let mut by_video: BTreeMap<&str, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        by_video.entry(&r.video).or_default().push(r);
    }
    let videos: Vec<VideoScore> = by_video
        .into_iter()
        .map(|(video, rs)| {
            let n = rs.len() as f64;
            VideoScore {
                video: video.to_string(),
                frames: rs.len(),
                iou: rs.iter().map(|r| r.iou).sum::<f64>() / n,
                f: rs.iter().map(|r| r.f).sum::<f64>() / n,
            }
        })
        .collect();
    let n = videos.len() as f64;
    Ok(DatasetScores {
        miou: videos.iter().map(|v| v.iou).sum::<f64>() / n,
        mf: videos.iter().map(|v| v.f).sum::<f64>() / n,
        videos,
    })
}

/// Loads a prediction next to `gt_name`: a mask PNG of the same name, or a
/// PFM map with the same stem which is then binarized.
fn load_prediction(dir: &Path, gt_name: &Path, ratio: f64) -> Result<BinaryMask> {
    let png = dir.join(gt_name);
    if png.is_file() {
        return read_mask(&png);
    }
    let pfm = png.with_extension("pfm");
    if pfm.is_file() {
        return Ok(binarize_for_eval(&read_map(&pfm)?, ratio));
    }
    Err(Error::MissingFile(png))
}

/// Scores every ground-truth keyframe under `gt_root` against the
/// prediction of the same video and file name under `pred_root`.
pub fn evaluate_dirs(pred_root: &Path, gt_root: &Path, cfg: &EvalConfig) -> Result<Vec<EvalRecord>> {
    cfg.validate()?;
    let tree = video_tree(gt_root, "png")?;
    let single = tree.len() == 1 && !gt_root.join(&tree[0].0).is_dir();
    let mut records = Vec::new();
    for (video, files) in tree {
        let pred_dir = if single {
            pred_root.to_path_buf()
        } else {
            pred_root.join(&video)
        };
        for gt_path in files {
            if let Some(i) = stem_index(&gt_path) {
                if i % cfg.keyframe_stride != 0 {
                    continue;
                }
            }
            let name = Path::new(gt_path.file_name().expect("listed file"));
            let gt = read_mask(&gt_path)?;
            let pred = load_prediction(&pred_dir, name, cfg.binarize_ratio)?;
            records.push(EvalRecord {
                video: video.clone(),
                frame: name.to_string_lossy().into_owned(),
                iou: frame_iou(&pred, &gt)?,
                f: frame_f(&pred, &gt, cfg.beta2)?,
            });
        }
    }
    Ok(records)
}

pub fn report_text(scores: &DatasetScores, cfg: &EvalConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# IoU = |P&G|/|P|G| (1 if both empty); F = (1+b2)PR/(b2 P+R) on binarized masks, b2 = {}",
        cfg.beta2
    );
    let _ = writeln!(
        out,
        "# frame means per video, then unweighted mean over videos; keyframe stride {}",
        cfg.keyframe_stride
    );
    for v in &scores.videos {
        let _ = writeln!(out, "{}\tframes {}\tmIoU {:.4}\tF {:.4}", v.video, v.frames, v.iou, v.f);
    }
    let _ = writeln!(
        out,
        "overall\tvideos {}\tmIoU {:.4}\tF {:.4}",
        scores.videos.len(),
        scores.miou,
        scores.mf
    );
    out
}

pub fn records_csv(records: &[EvalRecord]) -> String {
    let mut out = String::from("video,frame,iou,f\n");
    for r in records {
        let _ = writeln!(out, "{},{},{:.6},{:.6}", r.video, r.frame, r.iou, r.f);
    }
    out
}
