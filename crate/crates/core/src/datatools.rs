//! Dataset statistics: keyframe sampling, object counts, foreground area and
//! average annotation maps.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imagery::io::{read_mask, video_tree};
use crate::imagery::{resize_bilinear, BinaryMask, ProbabilityMap};

/// `0, stride, 2*stride, ...` below `len`.
pub fn sample_keyframes(len: usize, stride: usize) -> Result<Vec<usize>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("keyframe stride must be >= 1".into()));
    }
    Ok((0..len).step_by(stride).collect())
}

/// Number of 8-connected foreground components.
pub fn count_objects(mask: &BinaryMask) -> usize {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in 0..w * h {
        if !mask.bits()[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if mask.bits()[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
    }
    count
}

/// Foreground share of the frame, in percent.
pub fn area_fraction(mask: &BinaryMask) -> f64 {
    100.0 * mask.count() as f64 / mask.bits().len() as f64
}

/// Mean of the masks after resizing to a common size, scaled so the maximum
/// is 1. All-empty inputs give a zero map.
pub fn average_annotation_map(masks: &[BinaryMask], width: usize, height: usize) -> Result<ProbabilityMap> {
    if masks.is_empty() {
        return Err(Error::InvalidArgument("no masks to average".into()));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument("output size must be nonzero".into()));
    }
    let mut sum = vec![0.0; width * height];
    for m in masks {
        let r = resize_bilinear(&m.to_map(), width, height);
        sum.iter_mut().zip(r.values()).for_each(|(s, v)| *s += v);
    }
    let max = sum.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        sum.iter_mut().for_each(|s| *s /= max);
    }
    ProbabilityMap::from_clamped(width, height, sum)
}

/// Population mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }
}

impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameStat {
    pub video: String,
    pub frame: String,
    pub objects: usize,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub avg_objects: MeanStd,
    /// Percent of frame area.
    pub avg_area: MeanStd,
    pub annot_count: usize,
    pub frames: Vec<FrameStat>,
}

impl DatasetStats {
    pub fn from_frames(frames: Vec<FrameStat>) -> Result<DatasetStats> {
        if frames.is_empty() {
            return Err(Error::InvalidArgument("dataset has no annotated masks".into()));
        }
        let objects: Vec<f64> = frames.iter().map(|f| f.objects as f64).collect();
        let areas: Vec<f64> = frames.iter().map(|f| f.area).collect();
        Ok(DatasetStats {
            avg_objects: MeanStd::of(&objects),
            avg_area: MeanStd::of(&areas),
            annot_count: frames.len(),
            frames,
        })
    }

    pub fn table_text(&self, name: &str) -> String {
        format!(
            "Dataset\t#Annot\t#Avg-Obj\t#Avg-Area\n{name}\t{}\t{}\t{}\n",
            self.annot_count, self.avg_objects, self.avg_area
        )
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("video,frame,objects,area_percent\n");
        for f in &self.frames {
            let _ = writeln!(out, "{},{},{},{:.6}", f.video, f.frame, f.objects, f.area);
        }
        out
    }
}

pub fn masks_in_tree(root: &Path) -> Result<Vec<(String, String, BinaryMask)>> {
    let mut out = Vec::new();
    for (video, files) in video_tree(root, "png")? {
        for path in files {
            let name = path.file_name().expect("listed file").to_string_lossy().into_owned();
            out.push((video.clone(), name, read_mask(&path)?));
        }
    }
    Ok(out)
}

/// Statistics over every mask PNG of a ground-truth tree.
pub fn dataset_stats(root: &Path) -> Result<DatasetStats> {
    let frames = masks_in_tree(root)?
        .into_iter()
        .map(|(video, frame, mask)| FrameStat {
            video,
            frame,
            objects: count_objects(&mask),
            area: area_fraction(&mask),
        })
        .collect();
    DatasetStats::from_frames(frames)
}
