//! Backend that reads maps produced elsewhere (for example by a trained
//! network).
//!
//! Layout: `<dir>/pair_<lo>_<hi>/a.pfm` and `b.pfm`, indices zero-padded to
//! six digits with `lo < hi`. `a.pfm` belongs to frame `lo`. Querying the
//! pair in the other order swaps the roles.

use std::fs;
use std::path::{Path, PathBuf};

use super::{CosegBackend, PairResult};
use crate::error::{Error, Result};
use crate::imagery::io::{read_map, write_map};
use crate::imagery::{check_dims, resize_bilinear, Frame, ProbabilityMap};

pub fn pair_dir_name(lo: usize, hi: usize) -> String {
    format!("pair_{lo:06}_{hi:06}")
}

/// Stores maps for a pair under the canonical ordering.
pub fn write_external_pair(
    dir: &Path,
    a_index: usize,
    b_index: usize,
    map_a: &ProbabilityMap,
    map_b: &ProbabilityMap,
) -> Result<()> {
    let (lo, hi, first, second) = if a_index <= b_index {
        (a_index, b_index, map_a, map_b)
    } else {
        (b_index, a_index, map_b, map_a)
    };
    let pair = dir.join(pair_dir_name(lo, hi));
    fs::create_dir_all(&pair).map_err(|e| Error::io(&pair, e))?;
    write_map(&pair.join("a.pfm"), first)?;
    write_map(&pair.join("b.pfm"), second)
}

#[derive(Debug, Clone)]
pub struct ExternalBackend {
    dir: PathBuf,
    processing: Option<(usize, usize)>,
}

impl ExternalBackend {
    pub fn new(dir: PathBuf, processing: Option<(usize, usize)>) -> Self {
        ExternalBackend { dir, processing }
    }

    /// Loads a map stored at native or processing resolution and returns it
    /// at native resolution.
    fn load(&self, path: &Path, frame: &Frame) -> Result<ProbabilityMap> {
        let map = read_map(path)?;
        let native = (frame.width(), frame.height());
        let got = (map.width(), map.height());
        if got == native {
            return Ok(map);
        }
        match self.processing {
            Some(p) if p == got => Ok(resize_bilinear(&map, native.0, native.1)),
            _ => check_dims(native, got).map(|_| map),
        }
    }
}

impl CosegBackend for ExternalBackend {
    fn coseg(&self, a: &Frame, b: &Frame) -> Result<PairResult> {
        let swapped = a.index() > b.index();
        let (lo, hi) = if swapped {
            (b.index(), a.index())
        } else {
            (a.index(), b.index())
        };
        let pair = self.dir.join(pair_dir_name(lo, hi));
        let (file_a, file_b) = if swapped {
            ("b.pfm", "a.pfm")
        } else {
            ("a.pfm", "b.pfm")
        };
        Ok(PairResult {
            map_a: self.load(&pair.join(file_a), a)?,
            map_b: self.load(&pair.join(file_b), b)?,
        })
    }
}
