//! Pipeline configuration. Files are flat `key = value` lines; `#` starts a
//! comment. Command-line flags are applied after the file and win.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::coseg::{BackendConfig, BackendKind};
use crate::error::{Error, Result};
use crate::flowrefine::RefinementParams;
use crate::hierarchy::DEFAULT_DEPTH;
use crate::metrics::EvalConfig;

/// Recognized keys, in documentation order.
pub const KEYS: &[&str] = &[
    "depth",
    "backend",
    "external_dir",
    "processing_width",
    "processing_height",
    "bins",
    "border_fraction",
    "lambda_p",
    "lambda_s",
    "sigma",
    "knn_k",
    "threshold_ratio",
    "superpixels",
    "compactness",
    "slic_iters",
    "recursive_refine",
    "jobs",
    "eval_ratio",
    "beta2",
    "keyframe_stride",
    "input",
    "output",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub depth: usize,
    pub backend: BackendConfig,
    pub refine: RefinementParams,
    pub eval: EvalConfig,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Refine at every merge level of the tree, not only over the full video.
    pub recursive_refine: bool,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            depth: DEFAULT_DEPTH,
            backend: BackendConfig::default(),
            refine: RefinementParams::default(),
            eval: EvalConfig::default(),
            input: None,
            output: None,
            recursive_refine: false,
            jobs: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean '{value}' for '{key}'"))),
    }
}

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "depth" => self.depth = parse(key, value)?,
            "backend" => {
                self.backend.kind = match value {
                    "baseline" => BackendKind::Baseline,
                    "external" => match &self.backend.kind {
                        BackendKind::External(dir) => BackendKind::External(dir.clone()),
                        BackendKind::Baseline => BackendKind::External(PathBuf::new()),
                    },
                    _ => return Err(Error::Config(format!("unknown backend '{value}'"))),
                }
            }
            "external_dir" => self.backend.kind = BackendKind::External(PathBuf::from(value)),
            "processing_width" | "processing_height" => {
                let n: usize = parse(key, value)?;
                let (w, h) = self.backend.processing.unwrap_or((320, 320));
                self.backend.processing = match (n, key) {
                    (0, _) => None,
                    (n, "processing_width") => Some((n, h)),
                    (n, _) => Some((w, n)),
                };
            }
            "bins" => self.backend.bins = parse(key, value)?,
            "border_fraction" => self.backend.border_fraction = parse(key, value)?,
            "lambda_p" => self.refine.lambda_p = parse(key, value)?,
            "lambda_s" => self.refine.lambda_s = parse(key, value)?,
            "sigma" => self.refine.sigma = parse(key, value)?,
            "knn_k" => self.refine.knn_k = parse(key, value)?,
            "threshold_ratio" => self.refine.threshold_ratio = parse(key, value)?,
            "superpixels" => self.refine.superpixel_target = parse(key, value)?,
            "compactness" => self.refine.slic_compactness = parse(key, value)?,
            "slic_iters" => self.refine.slic_iters = parse(key, value)?,
            "recursive_refine" => self.recursive_refine = parse_bool(key, value)?,
            "jobs" => {
                let n: usize = parse(key, value)?;
                self.jobs = (n > 0).then_some(n);
            }
            "eval_ratio" => self.eval.binarize_ratio = parse(key, value)?,
            "beta2" => self.eval.beta2 = parse(key, value)?,
            "keyframe_stride" => self.eval.keyframe_stride = parse(key, value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.backend.validate()?;
        self.refine.validate()?;
        self.eval.validate()?;
        if let BackendKind::External(dir) = &self.backend.kind {
            if dir.as_os_str().is_empty() {
                return Err(Error::Config("external backend needs external_dir".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(
            "# comment\ndepth = 3\nbackend = external\nexternal_dir = /maps\n\
             lambda_p=0.25 # inline\nrecursive_refine = yes\nprocessing_width = 64\n",
        )
        .unwrap();
        assert_eq!(cfg.depth, 3);
        assert_eq!(cfg.backend.kind, BackendKind::External("/maps".into()));
        assert_eq!(cfg.refine.lambda_p, 0.25);
        assert!(cfg.recursive_refine);
        assert_eq!(cfg.backend.processing, Some((64, 320)));
        cfg.set("depth", "7").unwrap();
        assert_eq!(cfg.depth, 7);
        cfg.set("processing_height", "0").unwrap();
        assert_eq!(cfg.backend.processing, None);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn every_documented_key_is_accepted() {
        let mut cfg = PipelineConfig::default();
        for key in KEYS {
            let value = match *key {
                "backend" => "baseline",
                "recursive_refine" => "false",
                "external_dir" | "input" | "output" => "x",
                "eval_ratio" | "threshold_ratio" | "border_fraction" | "beta2" => "0.3",
                _ => "2",
            };
            cfg.set(key, value).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }

    #[test]
    fn bad_input_is_a_usage_error() {
        let mut cfg = PipelineConfig::default();
        let err = cfg.apply_text("depth 3").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("depth", "-1").is_err());
        cfg.set("backend", "external").unwrap();
        assert!(cfg.validate().is_err());
    }
}
