//! Subcommand implementations behind the `hcoseg` binary. Each returns the
//! text to print on success; files are staged under temporary names and
//! renamed into place only once every output has been written.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::config::PipelineConfig;
use crate::datatools::{average_annotation_map, dataset_stats, masks_in_tree};
use crate::error::{Error, Result};
use crate::hierarchy::{coseg_call_count, floor_log2, SliceTree};
use crate::imagery::io::{
    encode_frame_png, encode_map_png, encode_mask_png, encode_pfm, list_files, read_frame, read_mask,
    stem_index,
};
use crate::imagery::{BinaryMask, Frame};
use crate::metrics::{dataset_scores, evaluate_dirs, records_csv, report_text};
use crate::pipeline::{load_frames, segment};

/// Collects output files under hidden temporary names; `commit` renames them
/// into place. Dropping without committing removes the temporaries.
#[derive(Debug, Default)]
pub struct StagedWriter {
    staged: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

impl StagedWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stage(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        let name = path
            .file_name()
            .ok_or_else(|| Error::InvalidArgument(format!("no file name in {}", path.display())))?;
        let tmp = path.with_file_name(format!(".{}.partial", name.to_string_lossy()));
        fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
        self.staged.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn commit(mut self) -> Result<usize> {
        for (tmp, dst) in &self.staged {
            fs::rename(tmp, dst).map_err(|e| Error::io(dst, e))?;
        }
        self.committed = true;
        Ok(self.staged.len())
    }
}

impl Drop for StagedWriter {
    fn drop(&mut self) {
        if !self.committed {
            for (tmp, _) in &self.staged {
                let _ = fs::remove_file(tmp);
            }
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Segments `frames/frame_NNNNNN.png` into `out/prob_NNNNNN.pfm` and
/// `out/mask_NNNNNN.png`. With `dump_flows`, the final pass's superpixel
/// flows are written there as `flow_FROM_TO.txt`.
pub fn cmd_segment(frames: &Path, out: &Path, cfg: &PipelineConfig, dump_flows: Option<&Path>) -> Result<String> {
    cfg.validate()?;
    let seq = load_frames(frames).map_err(|e| e.in_stage("load"))?;
    ensure_dir(out)?;
    let flow_writer = Mutex::new(StagedWriter::new());
    if let Some(dir) = dump_flows {
        ensure_dir(dir)?;
    }
    let sink = |from: usize, to: usize, flow: &crate::flowrefine::Flow| -> Result<()> {
        let dir = dump_flows.expect("sink installed only with a dump directory");
        let path = dir.join(format!("flow_{from:06}_{to:06}.txt"));
        flow_writer
            .lock()
            .expect("flow writer lock")
            .stage(&path, flow.to_triples().as_bytes())
    };
    let result = segment(&seq, cfg, dump_flows.map(|_| &sink as _))?;

    let mut writer = StagedWriter::new();
    for (i, (map, mask)) in result.maps.iter().zip(&result.masks).enumerate() {
        writer
            .stage(&out.join(format!("prob_{i:06}.pfm")), &encode_pfm(map))
            .and_then(|_| writer.stage(&out.join(format!("mask_{i:06}.png")), &encode_mask_png(mask)?))
            .map_err(|e| e.in_stage("write"))?;
    }
    writer.commit().map_err(|e| e.in_stage("write"))?;
    flow_writer
        .into_inner()
        .expect("flow writer lock")
        .commit()
        .map_err(|e| e.in_stage("write"))?;
    Ok(result.summary())
}

pub fn cmd_eval(pred: &Path, gt: &Path, cfg: &PipelineConfig, csv: Option<&Path>) -> Result<String> {
    let records = evaluate_dirs(pred, gt, &cfg.eval)?;
    let scores = dataset_scores(&records)?;
    if let Some(path) = csv {
        let mut w = StagedWriter::new();
        w.stage(path, records_csv(&records).as_bytes())?;
        w.commit()?;
    }
    Ok(report_text(&scores, &cfg.eval))
}

pub fn cmd_stats(gt: &Path, csv: Option<&Path>) -> Result<String> {
    let stats = dataset_stats(gt)?;
    if let Some(path) = csv {
        let mut w = StagedWriter::new();
        w.stage(path, stats.csv().as_bytes())?;
        w.commit()?;
    }
    let name = gt
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| ".".into());
    Ok(stats.table_text(&name))
}

/// Writes the average annotation map as PFM at `out` and as a grayscale PNG
/// next to it.
pub fn cmd_avgmap(gt: &Path, width: usize, height: usize, out: &Path) -> Result<String> {
    let masks: Vec<BinaryMask> = masks_in_tree(gt)?.into_iter().map(|(_, _, m)| m).collect();
    let map = average_annotation_map(&masks, width, height)?;
    let mut w = StagedWriter::new();
    w.stage(&out.with_extension("pfm"), &encode_pfm(&map))?;
    w.stage(&out.with_extension("png"), &encode_map_png(&map)?)?;
    w.commit()?;
    Ok(format!(
        "avgmap: {} masks -> {}x{} ({})",
        masks.len(),
        width,
        height,
        out.with_extension("pfm").display()
    ))
}

pub const OVERLAY_COLOR: [u8; 3] = [255, 0, 0];
pub const OVERLAY_ALPHA: f64 = 0.5;

/// Blends `color` over the masked pixels with weight `alpha`.
pub fn overlay(frame: &Frame, mask: &BinaryMask, color: [u8; 3], alpha: f64) -> Result<Frame> {
    crate::imagery::check_dims(
        (frame.width(), frame.height()),
        (mask.width(), mask.height()),
    )?;
    let mut pixels = frame.pixels().to_vec();
    for (px, &on) in pixels.chunks_exact_mut(3).zip(mask.bits()) {
        if on {
            for (c, &k) in px.iter_mut().zip(&color) {
                *c = ((1.0 - alpha) * *c as f64 + alpha * k as f64).round() as u8;
            }
        }
    }
    Frame::new(frame.width(), frame.height(), pixels, frame.index())
}

/// Pairs frames and masks by the number at the end of their file names.
pub fn cmd_overlay(frames: &Path, masks: &Path, out: &Path) -> Result<String> {
    let mask_files: Vec<(usize, PathBuf)> = list_files(masks, "png")?
        .into_iter()
        .filter_map(|p| stem_index(&p).map(|i| (i, p)))
        .collect();
    let frame_files = list_files(frames, "png")?;
    if frame_files.is_empty() {
        return Err(Error::Sequence(format!("no PNG frames in {}", frames.display())));
    }
    ensure_dir(out)?;
    let mut w = StagedWriter::new();
    for path in &frame_files {
        let i = stem_index(path)
            .ok_or_else(|| Error::Sequence(format!("{} has no frame number", path.display())))?;
        let mask_path = mask_files
            .iter()
            .find(|(j, _)| *j == i)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::MissingFile(masks.join(format!("mask_{i:06}.png"))))?;
        let blended = overlay(&read_frame(path, i)?, &read_mask(mask_path)?, OVERLAY_COLOR, OVERLAY_ALPHA)?;
        let name = path.file_name().expect("listed file");
        w.stage(&out.join(name), &encode_frame_png(&blended)?)?;
    }
    let n = w.commit()?;
    Ok(format!("overlay: {n} frames written to {}", out.display()))
}

pub fn cmd_complexity(length: usize, min_depth: usize, max_depth: usize) -> Result<String> {
    if min_depth > max_depth {
        return Err(Error::InvalidArgument(format!(
            "empty depth range {min_depth}..={max_depth}"
        )));
    }
    let mut out = format!("# length {length}: co-segmentation calls = sum over sibling leaves of |A|*|B|\ndepth\tcalls\n");
    for d in min_depth..=max_depth {
        out.push_str(&format!("{d}\t{}\n", coseg_call_count(length, d)?));
    }
    Ok(out)
}

pub fn cmd_slice_dump(length: usize, depth: usize) -> Result<String> {
    Ok(SliceTree::build(length, depth)?.dump())
}

/// Largest depth a `length`-frame video supports.
pub fn max_depth(length: usize) -> usize {
    floor_log2(length.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_blend() {
        let frame = Frame::from_fn(4, 4, 0, |x, y| [(x * 60) as u8, (y * 50) as u8, 200]).unwrap();
        let none = BinaryMask::filled(4, 4, false).unwrap();
        assert_eq!(overlay(&frame, &none, OVERLAY_COLOR, 0.5).unwrap(), frame);

        let diag = BinaryMask::from_fn(4, 4, |x, y| x == y).unwrap();
        let out = overlay(&frame, &diag, OVERLAY_COLOR, 0.5).unwrap();
        // (0,0,200) -> (127.5, 0, 100) -> rounds half away from zero.
        assert_eq!(out.pixel(0, 0), [128, 0, 100]);
        // (180,150,200) -> (217.5, 75, 100)
        assert_eq!(out.pixel(3, 3), [218, 75, 100]);
        assert_eq!(out.pixel(1, 0), frame.pixel(1, 0));

        let all = BinaryMask::filled(4, 4, true).unwrap();
        let flat = Frame::filled(4, 4, [10, 20, 30], 0).unwrap();
        let out = overlay(&flat, &all, OVERLAY_COLOR, 0.5).unwrap();
        assert!(out.iter_pixels().all(|p| p == [133, 10, 15]));
    }

    #[test]
    fn complexity_table() {
        let t = cmd_complexity(8, 1, 3).unwrap();
        assert!(t.ends_with("depth\tcalls\n1\t16\n2\t8\n3\t4\n"), "{t}");
        assert!(cmd_complexity(8, 3, 1).is_err());
        assert!(cmd_complexity(8, 1, 4).is_err());
    }

    #[test]
    fn staged_writer_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out.txt");
        {
            let mut w = StagedWriter::new();
            w.stage(&target, b"x").unwrap();
            assert!(!target.exists());
        }
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
        let mut w = StagedWriter::new();
        w.stage(&target, b"x").unwrap();
        w.commit().unwrap();
        assert_eq!(fs::read(&target).unwrap(), b"x");
    }
}
