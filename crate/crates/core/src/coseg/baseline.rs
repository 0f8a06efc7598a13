//! Reference backend: boundary-prior saliency weighted by shared colors.
//!
//! For each frame, RGB is quantized into `Q^3` bins. The histogram of a band
//! along the frame border estimates the background; a pixel's saliency is one
//! minus its bin's border frequency relative to the most frequent border bin.
//! Commonness is the bin-wise minimum of the two frames' normalized
//! histograms, rescaled so the largest bin is 1. The output is
//! saliency times commonness.

use super::{CosegBackend, PairResult};
use crate::error::Result;
use crate::imagery::{resize_bilinear, resize_frame, Frame, ProbabilityMap};

#[derive(Debug, Clone)]
pub struct BaselineBackend {
    bins: usize,
    border_fraction: f64,
    processing: Option<(usize, usize)>,
}

impl BaselineBackend {
    pub fn new(bins: usize, border_fraction: f64, processing: Option<(usize, usize)>) -> Self {
        assert!((2..=256).contains(&bins));
        BaselineBackend {
            bins,
            border_fraction,
            processing,
        }
    }

    fn bin_of(&self, rgb: [u8; 3]) -> usize {
        let q = self.bins;
        let b = rgb.map(|c| c as usize * q / 256);
        (b[0] * q + b[1]) * q + b[2]
    }

    fn band_width(&self, w: usize, h: usize) -> usize {
        ((self.border_fraction * w.min(h) as f64).round() as usize).max(1)
    }

    fn bins_of(&self, frame: &Frame) -> Vec<usize> {
        frame.iter_pixels().map(|p| self.bin_of(p)).collect()
    }

    /// Whole-frame histogram normalized to sum 1.
    fn histogram(&self, bins: &[usize]) -> Vec<f64> {
        let mut hist = vec![0.0; self.bins.pow(3)];
        for &b in bins {
            hist[b] += 1.0;
        }
        let n = bins.len() as f64;
        hist.iter_mut().for_each(|v| *v /= n);
        hist
    }

    /// `1 - border_hist(bin) / max(border_hist)` per pixel.
    fn saliency(&self, bins: &[usize], w: usize, h: usize) -> Vec<f64> {
        let band = self.band_width(w, h);
        let mut border = vec![0u32; self.bins.pow(3)];
        for y in 0..h {
            for x in 0..w {
                if x < band || y < band || x + band >= w || y + band >= h {
                    border[bins[y * w + x]] += 1;
                }
            }
        }
        let max = *border.iter().max().expect("nonempty histogram") as f64;
        bins.iter()
            .map(|&b| 1.0 - border[b] as f64 / max)
            .collect()
    }

    /// Maps at the frames' working resolution.
    pub fn maps_at_native(&self, a: &Frame, b: &Frame) -> Result<PairResult> {
        let bins_a = self.bins_of(a);
        let bins_b = self.bins_of(b);
        let ha = self.histogram(&bins_a);
        let hb = self.histogram(&bins_b);
        let mut common: Vec<f64> = ha.iter().zip(&hb).map(|(x, y)| x.min(*y)).collect();
        let max = common.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            common.iter_mut().for_each(|c| *c /= max);
        }

        let score = |frame: &Frame, bins: &[usize]| -> Result<ProbabilityMap> {
            let sal = self.saliency(bins, frame.width(), frame.height());
            let values = sal
                .iter()
                .zip(bins)
                .map(|(s, &b)| (s * common[b]).clamp(0.0, 1.0))
                .collect();
            ProbabilityMap::new(frame.width(), frame.height(), values)
        };
        Ok(PairResult {
            map_a: score(a, &bins_a)?,
            map_b: score(b, &bins_b)?,
        })
    }
}

impl CosegBackend for BaselineBackend {
    fn coseg(&self, a: &Frame, b: &Frame) -> Result<PairResult> {
        let Some((pw, ph)) = self.processing else {
            return self.maps_at_native(a, b);
        };
        let r = self.maps_at_native(&resize_frame(a, pw, ph), &resize_frame(b, pw, ph))?;
        Ok(PairResult {
            map_a: resize_bilinear(&r.map_a, a.width(), a.height()),
            map_b: resize_bilinear(&r.map_b, b.width(), b.height()),
        })
    }
}
