#![allow(dead_code)]

use hcoseg::{BinaryMask, Frame, FrameSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A moving bright square over a static blocky, noisy background.
pub struct Synthetic {
    pub seq: FrameSequence,
    pub truth: Vec<BinaryMask>,
}

pub fn moving_square(len: usize, width: usize, height: usize, side: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Tones sit at quantization bin centers and noise stays inside a bin, so
    // every tone is equally represented along the border.
    let palette: [[u8; 3]; 3] = [[75, 96, 53], [96, 75, 53], [53, 75, 96]];
    let cell = 8;
    let background: Vec<[u8; 3]> = (0..width * height)
        .map(|p| {
            let (x, y) = (p % width, p / width);
            let c = palette[(x / cell + 2 * (y / cell)) % palette.len()];
            let n: i16 = rng.random_range(-4..=4);
            c.map(|v| (v as i16 + n).clamp(0, 255) as u8)
        })
        .collect();

    let mut frames = Vec::with_capacity(len);
    let mut truth = Vec::with_capacity(len);
    // Keeps the square clear of the border band.
    let margin = width.min(height) / 10;
    let span_x = width - side - 2 * margin;
    let span_y = height - side - 2 * margin;
    for t in 0..len {
        let phase = if len > 1 { t as f64 / (len - 1) as f64 } else { 0.0 };
        let sx = margin + (phase * span_x as f64).round() as usize;
        let sy = margin + ((0.5 + 0.5 * (phase * std::f64::consts::TAU).sin()) * span_y as f64).round() as usize;
        let inside = |x: usize, y: usize| (sx..sx + side).contains(&x) && (sy..sy + side).contains(&y);
        frames.push(
            Frame::from_fn(width, height, t, |x, y| {
                if inside(x, y) {
                    [250, 222, 48]
                } else {
                    background[y * width + x]
                }
            })
            .unwrap(),
        );
        truth.push(BinaryMask::from_fn(width, height, inside).unwrap());
    }
    Synthetic {
        seq: FrameSequence::new("synthetic", frames).unwrap(),
        truth,
    }
}
