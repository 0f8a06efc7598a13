//! Separable bilinear (tent) resampling with half-pixel alignment.
//!
//! When upscaling, this is plain bilinear interpolation with edge clamping.
//! When downscaling, the tent widens to the source footprint so every source
//! pixel contributes to at least one output pixel.

use super::{Frame, ProbabilityMap};

/// Normalized contributions of source samples for one output sample.
struct Taps {
    start: usize,
    weights: Vec<f64>,
}

fn taps(src: usize, dst: usize) -> Vec<Taps> {
    let scale = src as f64 / dst as f64;
    let support = scale.max(1.0);
    (0..dst)
        .map(|i| {
            let center = (i as f64 + 0.5) * scale;
            let lo = ((center - support).floor().max(0.0)) as usize;
            let hi = ((center + support).ceil() as usize).min(src);
            let mut weights: Vec<f64> = (lo..hi)
                .map(|j| (1.0 - ((j as f64 + 0.5) - center).abs() / support).max(0.0))
                .collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            Taps { start: lo, weights }
        })
        .collect()
}

/// Resamples `channels` interleaved planes of size `sw`x`sh` to `dw`x`dh`.
fn resample(data: &[f64], channels: usize, sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<f64> {
    let xt = taps(sw, dw);
    let yt = taps(sh, dh);

    let mut horiz = vec![0.0; dw * sh * channels];
    for y in 0..sh {
        let row = &data[y * sw * channels..(y + 1) * sw * channels];
        for (x, t) in xt.iter().enumerate() {
            let out = &mut horiz[(y * dw + x) * channels..(y * dw + x + 1) * channels];
            for (k, &w) in t.weights.iter().enumerate() {
                let src = &row[(t.start + k) * channels..(t.start + k + 1) * channels];
                for c in 0..channels {
                    out[c] += w * src[c];
                }
            }
        }
    }

    let mut out = vec![0.0; dw * dh * channels];
    for (y, t) in yt.iter().enumerate() {
        let dst = &mut out[y * dw * channels..(y + 1) * dw * channels];
        for (k, &w) in t.weights.iter().enumerate() {
            let src = &horiz[(t.start + k) * dw * channels..(t.start + k + 1) * dw * channels];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    out
}

/// Bilinear resize of a probability map. Output stays within the input's
/// value range.
pub fn resize_bilinear(map: &ProbabilityMap, width: usize, height: usize) -> ProbabilityMap {
    assert!(width >= 1 && height >= 1, "target size must be at least 1x1");
    if (width, height) == (map.width(), map.height()) {
        return map.clone();
    }
    let lo = map.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = map.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = resample(map.values(), 1, map.width(), map.height(), width, height)
        .into_iter()
        .map(|v| v.clamp(lo, hi))
        .collect();
    ProbabilityMap::new(width, height, values).expect("resampled values stay in [0, 1]")
}

/// Bilinear resize of an RGB frame; the temporal index is kept.
pub fn resize_frame(frame: &Frame, width: usize, height: usize) -> Frame {
    assert!(width >= 1 && height >= 1, "target size must be at least 1x1");
    if (width, height) == (frame.width(), frame.height()) {
        return frame.clone();
    }
    let data: Vec<f64> = frame.pixels().iter().map(|&c| c as f64).collect();
    let pixels = resample(&data, 3, frame.width(), frame.height(), width, height)
        .into_iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    Frame::new(width, height, pixels, frame.index()).expect("buffer sized for target")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_map_stays_constant() {
        let m = ProbabilityMap::constant(7, 5, 0.7).unwrap();
        for (w, h) in [(1, 1), (3, 9), (20, 13), (7, 5)] {
            let r = resize_bilinear(&m, w, h);
            assert!(r.values().iter().all(|&v| (v - 0.7).abs() < 1e-12));
        }
        let one = ProbabilityMap::constant(1, 1, 0.3).unwrap();
        let r = resize_bilinear(&one, 6, 4);
        assert!(r.values().iter().all(|&v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn two_to_four_upsample() {
        // Half-pixel centers: outputs sample source positions -0.25, 0.25,
        // 0.75, 1.25 (clamped at the edges).
        let m = ProbabilityMap::new(2, 1, vec![0.0, 1.0]).unwrap();
        let r = resize_bilinear(&m, 4, 1);
        assert_eq!(r.values(), &[0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn downsample_sees_isolated_pixel() {
        let mut v = vec![0.0; 100 * 100];
        v[37 * 100 + 53] = 1.0;
        let m = ProbabilityMap::new(100, 100, v).unwrap();
        let r = resize_bilinear(&m, 10, 10);
        assert!(r.max_value() > 0.0);
    }

    #[test]
    fn frame_resize_keeps_solid_color() {
        let f = Frame::filled(5, 3, [10, 200, 30], 4).unwrap();
        let r = resize_frame(&f, 9, 11);
        assert_eq!(r.index(), 4);
        assert!(r.iter_pixels().all(|p| p == [10, 200, 30]));
    }

    proptest! {
        #[test]
        fn output_within_input_bounds(
            (w, h, values) in (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
                (Just(w), Just(h), proptest::collection::vec(0.0f64..=1.0, w * h))
            }),
            tw in 1usize..20,
            th in 1usize..20,
        ) {
            let m = ProbabilityMap::new(w, h, values).unwrap();
            let lo = m.values().iter().copied().fold(f64::INFINITY, f64::min);
            let hi = m.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let r = resize_bilinear(&m, tw, th);
            prop_assert!(r.values().iter().all(|&v| v >= lo && v <= hi));
        }
    }
}
