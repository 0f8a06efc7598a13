//! SLIC superpixels with connectivity enforcement, and the per-superpixel
//! appearance/position descriptors used for flow matching.

use super::RefinementParams;
use crate::error::{Error, Result};
use crate::imagery::{rgb_to_hsv, rgb_to_lab, Frame};

/// Descriptor length: RGB, Lab, HSV, x, y.
pub const FEATURE_DIM: usize = 11;

pub type Feature = [f64; FEATURE_DIM];

pub const MIN_SIDE: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelDecomposition {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    features: Vec<Feature>,
    sizes: Vec<usize>,
}

impl SuperpixelDecomposition {
    /// Builds a decomposition from an existing label raster. Labels must
    /// cover `0..count` with every id used.
    pub fn from_labels(frame: &Frame, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != frame.width() * frame.height() {
            return Err(Error::LengthMismatch {
                expected: frame.width() * frame.height(),
                got: labels.len(),
            });
        }
        let count = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidArgument(format!("superpixel {empty} is empty")));
        }
        let features = describe(frame, &labels, &sizes);
        Ok(SuperpixelDecomposition {
            width: frame.width(),
            height: frame.height(),
            labels,
            features,
            sizes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }
}

/// Mean RGB/255, L/100, a/128, b/128, H/360, S, V, and the centroid
/// normalized by width and height.
fn describe(frame: &Frame, labels: &[u32], sizes: &[usize]) -> Vec<Feature> {
    let (w, h) = (frame.width(), frame.height());
    let mut acc = vec![[0.0f64; FEATURE_DIM]; sizes.len()];
    for (p, rgb) in frame.iter_pixels().enumerate() {
        let f = &mut acc[labels[p] as usize];
        let lab = rgb_to_lab(rgb);
        let hsv = rgb_to_hsv(rgb);
        f[0] += rgb[0] as f64 / 255.0;
        f[1] += rgb[1] as f64 / 255.0;
        f[2] += rgb[2] as f64 / 255.0;
        f[3] += lab[0] / 100.0;
        f[4] += lab[1] / 128.0;
        f[5] += lab[2] / 128.0;
        f[6] += hsv[0] / 360.0;
        f[7] += hsv[1];
        f[8] += hsv[2];
        f[9] += ((p % w) as f64 + 0.5) / w as f64;
        f[10] += ((p / w) as f64 + 0.5) / h as f64;
    }
    for (f, &n) in acc.iter_mut().zip(sizes) {
        f.iter_mut().for_each(|v| *v /= n as f64);
    }
    acc
}

#[derive(Clone, Copy)]
struct Center {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

/// Grid-seeded SLIC in (Lab, x, y), then connectivity enforcement.
pub fn superpixels(frame: &Frame, params: &RefinementParams) -> Result<SuperpixelDecomposition> {
    let (w, h) = (frame.width(), frame.height());
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(Error::InvalidArgument(format!(
            "superpixels need at least {MIN_SIDE}x{MIN_SIDE} frames, got {w}x{h}"
        )));
    }
    let n = w * h;
    let lab: Vec<[f64; 3]> = frame.iter_pixels().map(rgb_to_lab).collect();

    let target = params.superpixel_target.max(1) as f64;
    let step = (n as f64 / target).sqrt();
    let nx = ((w as f64 / step).round() as usize).clamp(1, w);
    let ny = ((h as f64 / step).round() as usize).clamp(1, h);
    let step = (n as f64 / (nx * ny) as f64).sqrt();

    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = (i as f64 + 0.5) * w as f64 / nx as f64;
            let y = (j as f64 + 0.5) * h as f64 / ny as f64;
            let (px, py) = ((x as usize).min(w - 1), (y as usize).min(h - 1));
            centers.push(Center {
                lab: lab[py * w + px],
                x,
                y,
            });
        }
    }

    // Start from the seed grid cells so no pixel is ever unlabeled.
    let mut labels: Vec<u32> = (0..n)
        .map(|p| {
            let (x, y) = (p % w, p / w);
            let cx = (x * nx / w).min(nx - 1);
            let cy = (y * ny / h).min(ny - 1);
            (cy * nx + cx) as u32
        })
        .collect();

    let spatial = (params.slic_compactness / step).powi(2);
    let radius = step.ceil() as isize;
    let mut dist = vec![f64::INFINITY; n];
    for _ in 0..params.slic_iters {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (k, c) in centers.iter().enumerate() {
            let (cx, cy) = (c.x.floor() as isize, c.y.floor() as isize);
            let y0 = (cy - radius).max(0) as usize;
            let y1 = ((cy + radius + 1).max(0) as usize).min(h);
            let x0 = (cx - radius).max(0) as usize;
            let x1 = ((cx + radius + 1).max(0) as usize).min(w);
            for y in y0..y1 {
                let dy = y as f64 + 0.5 - c.y;
                for x in x0..x1 {
                    let p = y * w + x;
                    let dx = x as f64 + 0.5 - c.x;
                    let l = &lab[p];
                    let dc = (l[0] - c.lab[0]).powi(2)
                        + (l[1] - c.lab[1]).powi(2)
                        + (l[2] - c.lab[2]).powi(2);
                    let d = dc + (dx * dx + dy * dy) * spatial;
                    if d < dist[p] {
                        dist[p] = d;
                        labels[p] = k as u32;
                    }
                }
            }
        }

        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (p, &l) in labels.iter().enumerate() {
            let s = &mut sums[l as usize];
            s[0] += lab[p][0];
            s[1] += lab[p][1];
            s[2] += lab[p][2];
            s[3] += (p % w) as f64 + 0.5;
            s[4] += (p / w) as f64 + 0.5;
            s[5] += 1.0;
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                *c = Center {
                    lab: [s[0] / s[5], s[1] / s[5], s[2] / s[5]],
                    x: s[3] / s[5],
                    y: s[4] / s[5],
                };
            }
        }
    }

    let min_size = ((step * step / 4.0) as usize).max(1);
    let labels = enforce_connectivity(&labels, w, h, min_size);
    SuperpixelDecomposition::from_labels(frame, labels)
}

struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges `from` into `into`.
    fn absorb(&mut self, from: usize, into: usize) {
        self.parent[from] = into;
        self.size[into] += self.size[from];
    }
}

/// Splits labels into 4-connected regions, folds regions smaller than
/// `min_size` into their largest touching neighbor, and renumbers the result
/// `0..count` in scan order.
fn enforce_connectivity(labels: &[u32], w: usize, h: usize, min_size: usize) -> Vec<u32> {
    let n = w * h;
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let label = labels[start];
        comp[start] = id;
        stack.push(start);
        let mut size = 0;
        while let Some(p) = stack.pop() {
            size += 1;
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if comp[q] == usize::MAX && labels[q] == label {
                    comp[q] = id;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        sizes.push(size);
    }

    let count = sizes.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); count];
    for p in 0..n {
        let (x, y) = (p % w, p / w);
        let c = comp[p];
        for q in [(x + 1 < w).then(|| p + 1), (y + 1 < h).then(|| p + w)]
            .into_iter()
            .flatten()
        {
            let d = comp[q];
            if d != c {
                adjacency[c].push(d);
                adjacency[d].push(c);
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }

    let mut dsu = Dsu {
        parent: (0..count).collect(),
        size: sizes,
    };
    for (c, neighbors) in adjacency.iter().enumerate() {
        let root = dsu.find(c);
        if dsu.size[root] >= min_size {
            continue;
        }
        let mut best: Option<usize> = None;
        for &d in neighbors {
            let r = dsu.find(d);
            if r == root {
                continue;
            }
            best = match best {
                Some(b) if dsu.size[b] > dsu.size[r] || (dsu.size[b] == dsu.size[r] && b < r) => {
                    Some(b)
                }
                _ => Some(r),
            };
        }
        if let Some(target) = best {
            dsu.absorb(root, target);
        }
    }

    let mut renumber = vec![u32::MAX; count];
    let mut next = 0u32;
    comp.iter()
        .map(|&c| {
            let r = dsu.find(c);
            if renumber[r] == u32::MAX {
                renumber[r] = next;
                next += 1;
            }
            renumber[r]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(target: usize) -> RefinementParams {
        RefinementParams {
            superpixel_target: target,
            ..RefinementParams::default()
        }
    }

    fn assert_partition(d: &SuperpixelDecomposition) {
        assert_eq!(d.labels().len(), d.width() * d.height());
        assert!(d.labels().iter().all(|&l| (l as usize) < d.count()));
        assert_eq!(d.sizes().iter().sum::<usize>(), d.width() * d.height());
        assert!(d.sizes().iter().all(|&s| s > 0));
        for f in d.features() {
            assert!((0.0..=1.0).contains(&f[9]) && (0.0..=1.0).contains(&f[10]));
            assert!((0.0..=1.0).contains(&f[6]));
        }
    }

    #[test]
    fn uniform_frame_gives_grid_cells() {
        let f = Frame::filled(64, 64, [120, 80, 200], 0).unwrap();
        let d = superpixels(&f, &params(16)).unwrap();
        assert_partition(&d);
        assert_eq!(d.count(), 16);
        assert!(d.sizes().iter().all(|&s| (128..=512).contains(&s)), "{:?}", d.sizes());
    }

    #[test]
    fn default_target_on_working_resolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cells: Vec<[u8; 3]> = (0..100).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let f = Frame::from_fn(320, 320, 0, |x, y| {
            let c = cells[(y / 32) * 10 + x / 32];
            let n: u8 = rng.random_range(0..12);
            [c[0].saturating_add(n), c[1].saturating_add(n), c[2]]
        })
        .unwrap();
        let d = superpixels(&f, &RefinementParams::default()).unwrap();
        assert_partition(&d);
        assert!((200..=800).contains(&d.count()), "count {}", d.count());
    }

    #[test]
    fn regions_are_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = Frame::from_fn(48, 40, 0, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap();
        let d = superpixels(&f, &params(30)).unwrap();
        assert_partition(&d);
        // Relabeling 4-connected components must not increase the count.
        let again = enforce_connectivity(d.labels(), 48, 40, 1);
        let distinct = again.iter().copied().max().unwrap() as usize + 1;
        assert_eq!(distinct, d.count());
    }

    #[test]
    fn small_frames_are_rejected() {
        let f = Frame::filled(15, 40, [0, 0, 0], 0).unwrap();
        assert!(superpixels(&f, &params(4)).is_err());
    }

    #[test]
    fn orphans_join_largest_neighbor() {
        // A 1-pixel island of label 2 between label 0 (3 px) and label 1 (5 px).
        let labels = [0, 0, 0, 2, 1, 1, 1, 1, 1];
        let out = enforce_connectivity(&labels, 9, 1, 2);
        assert_eq!(out, vec![0, 0, 0, 1, 1, 1, 1, 1, 1]);
    }
}
