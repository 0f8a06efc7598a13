//! sRGB (D65) to CIE L*a*b* and HSV.

// D65 reference white, Y normalized to 1.
const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// CIE L*a*b* of an sRGB pixel; L in `[0, 100]`.
pub fn rgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let mut xyz = [0.0; 3];
    for (out, row) in xyz.iter_mut().zip(SRGB_TO_XYZ.iter()) {
        *out = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    let l = (116.0 * fy - 16.0).clamp(0.0, 100.0);
    [l, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Hexcone HSV: H in `[0, 360)`, S and V in `[0, 1]`. Hue is 0 for grays.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return [0.0, s, max];
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h >= 360.0 {
        h -= 360.0;
    }
    [h, s, max]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn lab_reference_points() {
        assert!(close(rgb_to_lab([255, 255, 255]), [100.0, 0.0, 0.0], 0.01));
        assert_eq!(rgb_to_lab([0, 0, 0]), [0.0, 0.0, 0.0]);
        // Reference values for sRGB primaries under D65.
        assert!(close(rgb_to_lab([255, 0, 0]), [53.2408, 80.0925, 67.2032], 0.05));
        assert!(close(rgb_to_lab([0, 255, 0]), [87.7347, -86.1827, 83.1793], 0.05));
        assert!(close(rgb_to_lab([0, 0, 255]), [32.2970, 79.1875, -107.8602], 0.05));
    }

    #[test]
    fn hsv_reference_points() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), [0.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([128, 128, 128]), [0.0, 0.0, 128.0 / 255.0]);
        assert_eq!(rgb_to_hsv([0, 255, 255]), [180.0, 1.0, 1.0]);
        assert!(close(rgb_to_hsv([255, 0, 1]), [359.76, 1.0, 1.0], 0.01));
    }

    #[test]
    fn all_colors_total_and_in_range() {
        // Every 3rd level per channel plus the channel extremes.
        let levels: Vec<u8> = (0..=255u8).step_by(3).chain([255]).collect();
        for &r in &levels {
            for &g in &levels {
                for &b in &levels {
                    let [l, a, bb] = rgb_to_lab([r, g, b]);
                    assert!(l.is_finite() && a.is_finite() && bb.is_finite());
                    assert!((0.0..=100.0).contains(&l));
                    let [h, s, v] = rgb_to_hsv([r, g, b]);
                    assert!((0.0..360.0).contains(&h), "{r} {g} {b} -> h {h}");
                    assert!((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
