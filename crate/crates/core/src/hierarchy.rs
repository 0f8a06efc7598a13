//! Odd-even temporal slicing.
//!
//! A video is split into the frames at even positions and the frames at odd
//! positions; each half is split again, down to a fixed depth. At depth `d`
//! every leaf holds the frame indices sharing one residue modulo `2^d`.
//! Co-segmentation only runs between the two leaves of one parent.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Depth used when the caller does not pick one.
pub const DEFAULT_DEPTH: usize = 5;

/// Assumed minimum persistence of a primary object, in frames.
pub const MIN_DURATION_CAP: usize = 32;

/// Splits an index list into its even-position and odd-position elements.
pub fn slice(indices: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument("cannot slice an empty index list".into()));
    }
    let even = indices.iter().step_by(2).copied().collect();
    let odd = indices.iter().skip(1).step_by(2).copied().collect();
    Ok((even, odd))
}

/// `floor(log2(n))` for `n >= 1`.
pub fn floor_log2(n: usize) -> usize {
    assert!(n >= 1);
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceTree {
    depth: usize,
    length: usize,
    min_duration: usize,
    leaves: Vec<Vec<usize>>,
}

impl SliceTree {
    /// Builds the tree over `0..length`. The depth is clamped to
    /// `floor(log2(length))` so that no leaf is empty.
    pub fn build(length: usize, requested_depth: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument("video has no frames".into()));
        }
        let depth = requested_depth.min(floor_log2(length));
        let mut leaves = vec![(0..length).collect::<Vec<_>>()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(leaves.len() * 2);
            for node in &leaves {
                let (even, odd) = slice(node)?;
                next.push(even);
                next.push(odd);
            }
            leaves = next;
        }
        Ok(SliceTree {
            depth,
            length,
            min_duration: MIN_DURATION_CAP.min(length),
            leaves,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// `min(32, length)`: the persistence assumption behind the default depth.
    pub fn min_duration(&self) -> usize {
        self.min_duration
    }

    /// Leaves in depth-first order, even child first.
    pub fn leaves(&self) -> &[Vec<usize>] {
        &self.leaves
    }

    /// Residue modulo `2^depth` shared by every index of leaf `k`.
    pub fn residue(&self, k: usize) -> usize {
        self.leaves[k][0]
    }

    /// Pairs of sibling leaves, in tree order.
    pub fn sibling_pairs(&self) -> Result<Vec<(&[usize], &[usize])>> {
        if self.depth == 0 {
            return Err(Error::InvalidArgument(
                "a depth-0 tree has a single leaf and no sibling pairs".into(),
            ));
        }
        Ok(self
            .leaves
            .chunks_exact(2)
            .map(|p| (p[0].as_slice(), p[1].as_slice()))
            .collect())
    }

    /// Index lists of every node at `level` (0 = root), in tree order.
    /// Each node is its descendants' leaves merged in ascending order.
    pub fn level_nodes(&self, level: usize) -> Vec<Vec<usize>> {
        assert!(level <= self.depth);
        let group = 1 << (self.depth - level);
        self.leaves
            .chunks_exact(group)
            .map(|leaves| {
                let mut node: Vec<usize> = leaves.iter().flatten().copied().collect();
                node.sort_unstable();
                node
            })
            .collect()
    }

    /// One line per leaf: `residue<TAB>i0 i1 ...`.
    pub fn dump(&self) -> String {
        let mut out = format!(
            "# length {} depth {} leaves {}\n",
            self.length,
            self.depth,
            self.leaves.len()
        );
        for (k, leaf) in self.leaves.iter().enumerate() {
            let idx: Vec<String> = leaf.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "{}\t{}", self.residue(k), idx.join(" "));
        }
        out
    }
}

/// Number of frames in `0..length` congruent to `residue` modulo `modulus`.
fn residue_class_size(length: usize, residue: usize, modulus: usize) -> usize {
    if residue >= length {
        0
    } else {
        (length - residue).div_ceil(modulus)
    }
}

/// Co-segmentation calls made at depth `depth`: the sum over sibling leaf
/// pairs of `|A| * |B|`. Computed from residue-class sizes without building
/// the tree.
pub fn coseg_call_count(length: usize, depth: usize) -> Result<u64> {
    if length == 0 || depth == 0 || depth > floor_log2(length) {
        return Err(Error::InvalidArgument(format!(
            "depth {depth} outside 1..={} for a {length}-frame video",
            if length == 0 { 0 } else { floor_log2(length) }
        )));
    }
    let modulus = 1usize << depth;
    let half = modulus / 2;
    Ok((0..half)
        .map(|r| {
            residue_class_size(length, r, modulus) as u64
                * residue_class_size(length, r + half, modulus) as u64
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn slice_examples() {
        assert_eq!(slice(&[0, 1, 2, 3, 4]).unwrap(), (vec![0, 2, 4], vec![1, 3]));
        assert_eq!(slice(&[7]).unwrap(), (vec![7], vec![]));
        assert_eq!(slice(&[0, 2, 4, 6]).unwrap(), (vec![0, 4], vec![2, 6]));
        assert!(slice(&[]).is_err());
    }

    #[test]
    fn build_examples() {
        let t = SliceTree::build(8, 2).unwrap();
        assert_eq!(t.leaves(), &[vec![0, 4], vec![2, 6], vec![1, 5], vec![3, 7]]);

        let t = SliceTree::build(5, 10).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.leaves(), &[vec![0, 4], vec![2], vec![1], vec![3]]);

        let t = SliceTree::build(1, 5).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.leaves(), &[vec![0]]);
        assert!(t.sibling_pairs().is_err());
        assert!(SliceTree::build(0, 1).is_err());
    }

    #[test]
    fn long_video_leaf_sizes() {
        let t = SliceTree::build(181, 5).unwrap();
        assert_eq!(t.leaves().len(), 32);
        for (k, leaf) in t.leaves().iter().enumerate() {
            let r = t.residue(k);
            // Enumerate 0..181 directly for the expected class.
            let expected: Vec<usize> = (0..181).filter(|i| i % 32 == r).collect();
            assert_eq!(leaf, &expected);
            assert_eq!(leaf.len(), if r <= 20 { 6 } else { 5 });
        }
        assert_eq!(t.min_duration(), 32);
    }

    #[test]
    fn sibling_pair_examples() {
        let t = SliceTree::build(8, 2).unwrap();
        let pairs = t.sibling_pairs().unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0], (&[0, 4][..], &[2, 6][..]));
        assert_eq!(pairs[1], (&[1, 5][..], &[3, 7][..]));

        let t = SliceTree::build(4, 1).unwrap();
        assert_eq!(t.sibling_pairs().unwrap(), vec![(&[0, 2][..], &[1, 3][..])]);

        assert_eq!(SliceTree::build(181, 5).unwrap().sibling_pairs().unwrap().len(), 16);
    }

    #[test]
    fn call_count_examples() {
        assert_eq!(coseg_call_count(8, 1).unwrap(), 16);
        assert_eq!(coseg_call_count(8, 2).unwrap(), 8);
        assert_eq!(coseg_call_count(8, 3).unwrap(), 4);
        assert_eq!(coseg_call_count(181, 5).unwrap(), 510);
        let counts: Vec<u64> = (2..=6).map(|d| coseg_call_count(181, d).unwrap()).collect();
        assert!(counts.windows(2).all(|w| w[0] > w[1]), "{counts:?}");
        assert!(coseg_call_count(8, 0).is_err());
        assert!(coseg_call_count(8, 4).is_err());
    }

    #[test]
    fn level_nodes_merge_children() {
        let t = SliceTree::build(8, 2).unwrap();
        assert_eq!(t.level_nodes(2), t.leaves().to_vec());
        assert_eq!(t.level_nodes(1), vec![vec![0, 2, 4, 6], vec![1, 3, 5, 7]]);
        assert_eq!(t.level_nodes(0), vec![(0..8).collect::<Vec<_>>()]);
    }

    #[test]
    fn dump_lists_residues() {
        let t = SliceTree::build(5, 2).unwrap();
        assert_eq!(t.dump(), "# length 5 depth 2 leaves 4\n0\t0 4\n2\t2\n1\t1\n3\t3\n");
    }

    proptest! {
        #[test]
        fn leaves_partition_with_residues(len in 1usize..1000, req in 0usize..12) {
            let t = SliceTree::build(len, req).unwrap();
            let m = 1usize << t.depth();
            prop_assert_eq!(t.leaves().len(), m);
            let mut all: Vec<usize> = t.leaves().iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..len).collect::<Vec<_>>());
            let mut residues = Vec::new();
            for (k, leaf) in t.leaves().iter().enumerate() {
                prop_assert!(!leaf.is_empty());
                prop_assert!(leaf.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(leaf.iter().all(|i| i % m == t.residue(k)));
                residues.push(t.residue(k));
            }
            residues.sort_unstable();
            residues.dedup();
            prop_assert_eq!(residues.len(), m);
        }

        #[test]
        fn children_interleave_to_parent(len in 2usize..600, req in 1usize..10) {
            let t = SliceTree::build(len, req).unwrap();
            for level in 0..t.depth() {
                let parents = t.level_nodes(level);
                let children = t.level_nodes(level + 1);
                for (p, pair) in parents.iter().zip(children.chunks_exact(2)) {
                    let mut merged = [pair[0].clone(), pair[1].clone()].concat();
                    merged.sort_unstable();
                    prop_assert_eq!(&merged, p);
                }
            }
        }

        #[test]
        fn closed_count_matches_materialized(len in 2usize..700, req in 1usize..10) {
            let t = SliceTree::build(len, req).unwrap();
            let brute: u64 = t
                .sibling_pairs()
                .unwrap()
                .iter()
                .map(|(a, b)| (a.len() * b.len()) as u64)
                .sum();
            prop_assert_eq!(coseg_call_count(len, t.depth()).unwrap(), brute);
        }
    }
}
