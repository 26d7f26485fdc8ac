use std::fmt::Write as _;

use crate::distributions::{GeomVariant, Geometric, DEFAULT_PARTITION_EPSILON};
use crate::error::{domain, Error, Result, WindowSide};
use crate::permutations::{
    assemble_two_sided, finite_from_stream, records, OneSidedStream, PermWindow, TwoSidedTriplet,
};
use crate::rng::{fork, SimRng};

use super::{build_bst, BinaryTree, NodeId};

/// Largest half-width tried by [`sample_redwood_two_sided`].
const MAX_HALF_WIDTH: i64 = 1 << 26;

/// A vertex of a redwood tree: spine node `k`, or a node of the left subtree
/// hanging below spine node `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RedwoodNode {
    Spine(i64),
    Off(i64, NodeId),
}

/// Finite piece `k_min..=k_max` of a two-sided tree made of a bi-infinite
/// right spine with a finite left subtree under each spine node.
#[derive(Debug, Clone)]
pub struct RedwoodTree {
    k_min: i64,
    spine_labels: Vec<Option<i64>>,
    left_subtrees: Vec<BinaryTree>,
    stabilized_range: Option<(i64, i64)>,
}

impl RedwoodTree {
    pub fn new(
        k_min: i64,
        spine_labels: Vec<Option<i64>>,
        left_subtrees: Vec<BinaryTree>,
        stabilized_range: Option<(i64, i64)>,
    ) -> Self {
        assert_eq!(spine_labels.len(), left_subtrees.len());
        assert!(!left_subtrees.is_empty(), "a redwood piece needs at least one spine node");
        RedwoodTree {
            k_min,
            spine_labels,
            left_subtrees,
            stabilized_range,
        }
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.left_subtrees.len() as i64 - 1
    }

    /// Spine range on which the content no longer depends on the window.
    pub fn stabilized_range(&self) -> Option<(i64, i64)> {
        self.stabilized_range
    }

    pub fn has_spine(&self, k: i64) -> bool {
        (self.k_min..=self.k_max()).contains(&k)
    }

    fn slot(&self, k: i64) -> Option<usize> {
        self.has_spine(k).then(|| (k - self.k_min) as usize)
    }

    pub fn left_subtree(&self, k: i64) -> Option<&BinaryTree> {
        self.slot(k).map(|i| &self.left_subtrees[i])
    }

    pub fn spine_label(&self, k: i64) -> Option<i64> {
        self.slot(k).and_then(|i| self.spine_labels[i])
    }

    /// `|left subtree at k|`.
    pub fn size_at(&self, k: i64) -> Option<usize> {
        self.left_subtree(k).map(BinaryTree::len)
    }

    /// Left subtree sizes for `k_min..=k_max`.
    pub fn sizes(&self) -> Vec<usize> {
        self.left_subtrees.iter().map(BinaryTree::len).collect()
    }

    /// Spine nodes plus all left subtree nodes.
    pub fn node_count(&self) -> usize {
        self.left_subtrees.iter().map(|t| t.len() + 1).sum()
    }

    pub fn contains(&self, v: RedwoodNode) -> bool {
        match v {
            RedwoodNode::Spine(k) => self.has_spine(k),
            RedwoodNode::Off(k, id) => self.left_subtree(k).is_some_and(|t| id.index() < t.len()),
        }
    }

    /// Spine index and word of a node; off-spine words start with `0`.
    pub fn address(&self, v: RedwoodNode) -> (i64, String) {
        match v {
            RedwoodNode::Spine(k) => (k, String::new()),
            RedwoodNode::Off(k, id) => {
                let t = self.left_subtree(k).expect("node in range");
                (k, format!("0{}", t.word(id)))
            }
        }
    }

    pub fn find(&self, k: i64, word: &str) -> Option<RedwoodNode> {
        if word.is_empty() {
            return self.has_spine(k).then_some(RedwoodNode::Spine(k));
        }
        let rest = word.strip_prefix('0')?;
        self.left_subtree(k)?
            .find(rest)
            .map(|id| RedwoodNode::Off(k, id))
    }

    /// Same spine range, labels and subtrees.
    pub fn same_content(&self, other: &RedwoodTree, lo: i64, hi: i64) -> bool {
        (lo..=hi).all(|k| {
            self.spine_label(k) == other.spine_label(k)
                && matches!((self.left_subtree(k), other.left_subtree(k)), (Some(a), Some(b)) if a.same_as(b))
        })
    }

    /// One `k<TAB>label<TAB>left subtree` line per spine node.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.left_subtrees.iter().enumerate() {
            let k = self.k_min + i as i64;
            let label = self.spine_labels[i].map_or_else(|| "*".to_string(), |l| l.to_string());
            writeln!(out, "{k}\t{label}\t{t}").expect("writing to a String cannot fail");
        }
        out
    }
}

/// Redwood tree of a two-sided window for spine indices `|k| <= radius`.
///
/// Spine node `k` carries the record value at slot `k + 1`; its left subtree
/// is the search tree of the values strictly between the record values at
/// slots `k` and `k + 1`, in window order. The certified range is the largest
/// `[-K, K]` whose delimiting records are present with every value between
/// them inside the window. The certificate assumes that no positive value
/// sits to the left of the window, which holds for two-sided samples when
/// the window starts left of the first positive position.
pub fn build_redwood(w: &PermWindow, radius: usize) -> Result<RedwoodTree> {
    let rec = records(w);
    let r = radius as i64;
    let (lo_slot, hi_slot) = rec.slot_range();
    let left_found = (-lo_slot + 1).max(0) as usize;
    let right_found = (hi_slot.max(0)) as usize;
    let needed = radius + 1;
    match (left_found < needed, right_found < needed) {
        (true, true) => {
            return Err(Error::InsufficientWindow {
                side: WindowSide::Both,
                needed: 2 * needed,
                found: left_found + right_found,
            })
        }
        (true, false) => {
            return Err(Error::InsufficientWindow {
                side: WindowSide::Left,
                needed,
                found: left_found,
            })
        }
        (false, true) => {
            return Err(Error::InsufficientWindow {
                side: WindowSide::Right,
                needed,
                found: right_found,
            })
        }
        (false, false) => {}
    }
    let value = |k: i64| rec.slot(k).expect("slot checked above").1;

    let mut sorted = w.values.clone();
    sorted.sort_unstable();
    let count_between = |a: i64, b: i64| {
        sorted.partition_point(|&v| v < b) - sorted.partition_point(|&v| v <= a)
    };
    let certified = (0..=r)
        .rev()
        .find(|&k| {
            let (a, b) = (value(-k), value(k + 1));
            count_between(a, b) as i64 == b - a - 1
        })
        .map(|k| (-k, k));

    let mut labels = Vec::with_capacity(2 * radius + 1);
    let mut subtrees = Vec::with_capacity(2 * radius + 1);
    for k in -r..=r {
        let (a, b) = (value(k), value(k + 1));
        let segment: Vec<i64> = w.values.iter().copied().filter(|&v| a < v && v < b).collect();
        labels.push(Some(b));
        subtrees.push(build_bst(&PermWindow::finite(segment)));
    }
    Ok(RedwoodTree::new(-r, labels, subtrees, certified))
}

/// Redwood tree of a fresh two-sided sample, growing the window until the
/// whole radius is certified.
pub fn sample_redwood_two_sided(q: f64, radius: usize, rng: &mut SimRng) -> Result<RedwoodTree> {
    let mut t = TwoSidedTriplet::sample(q, DEFAULT_PARTITION_EPSILON, rng)?;
    let mut half = (t.partition.largest() as i64 + 1).max(4 * (radius as i64 + 1));
    loop {
        let w = assemble_two_sided(&mut t, -half, half)?;
        match build_redwood(&w, radius) {
            Ok(tree) if tree.stabilized_range() == Some((-(radius as i64), radius as i64)) => {
                return Ok(tree)
            }
            Ok(_) | Err(Error::InsufficientWindow { .. }) => {}
            Err(e) => return Err(e),
        }
        half *= 2;
        if half > MAX_HALF_WIDTH {
            return Err(Error::StreamCap {
                cap: MAX_HALF_WIDTH as usize,
                context: "growing a two-sided window",
            });
        }
    }
}

/// Independent left subtrees for `|k| <= radius`: sizes are geometric, except
/// at `k = 0` where the size is size-biased, and each subtree is a Mallows
/// tree of its size.
pub fn sample_redwood_direct(q: f64, radius: usize, rng: &mut SimRng) -> Result<RedwoodTree> {
    if !(0.0..1.0).contains(&q) {
        return Err(domain(format!("q = {q} must lie in [0, 1)")));
    }
    let plain = Geometric::new(GeomVariant::GeomZero, 1.0 - q)?;
    let biased = Geometric::new(GeomVariant::SizeBiased, 1.0 - q)?;
    let r = radius as i64;
    let mut subtrees = Vec::with_capacity(2 * radius + 1);
    for k in -r..=r {
        let size = if k == 0 { biased.sample(rng) } else { plain.sample(rng) } as usize;
        let tree = if size == 0 {
            BinaryTree::new()
        } else {
            let mut s = OneSidedStream::new(q, fork(rng))?;
            build_bst(&finite_from_stream(&mut s, size))
        };
        subtrees.push(tree);
    }
    Ok(RedwoodTree::new(-r, vec![None; 2 * radius + 1], subtrees, Some((-r, r))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    #[test]
    fn identity_window_gives_bare_spine() {
        let t = build_redwood(&PermWindow::identity(-5, 5), 2).unwrap();
        assert_eq!(t.sizes(), vec![0; 5]);
        assert_eq!((t.k_min(), t.k_max()), (-2, 2));
        assert_eq!(t.spine_label(0), Some(1));
        assert_eq!(t.spine_label(-2), Some(-1));
        assert_eq!(t.stabilized_range(), Some((-2, 2)));
        assert_eq!(t.node_count(), 5);
    }

    #[test]
    fn identity_extension_of_a_finite_permutation() {
        let mut values: Vec<i64> = (-5..=0).collect();
        values.extend([4, 2, 5, 1, 6, 3]);
        let w = PermWindow { offset: -5, values };
        let t = build_redwood(&w, 2).unwrap();
        let finite = build_bst(&PermWindow::finite(vec![4, 2, 5, 1, 6, 3]));
        let spine = finite.right_spine();
        for k in 0..=2 {
            let id = spine[k as usize];
            assert_eq!(t.spine_label(k), finite.label(id));
            assert!(t.left_subtree(k).unwrap().same_as(&finite.subtree(finite.left(id))));
        }
        for k in -2..0 {
            assert_eq!(t.size_at(k), Some(0));
            assert_eq!(t.spine_label(k), Some(k + 1));
        }
        assert_eq!(t.stabilized_range(), Some((-2, 2)));
        assert_eq!(t.find(0, "00"), t.find(0, "00"));
        assert_eq!(t.address(t.find(0, "01").unwrap()), (0, "01".to_string()));
    }

    #[test]
    fn missing_records_name_the_side() {
        let w = PermWindow::identity(-1, 5);
        let err = build_redwood(&w, 2).unwrap_err();
        assert!(matches!(err, Error::InsufficientWindow { side: WindowSide::Left, needed: 3, found: 2 }));
        let w = PermWindow::identity(-5, 1);
        assert!(matches!(
            build_redwood(&w, 2),
            Err(Error::InsufficientWindow { side: WindowSide::Right, .. })
        ));
        let w = PermWindow::identity(0, 0);
        assert!(matches!(
            build_redwood(&w, 2),
            Err(Error::InsufficientWindow { side: WindowSide::Both, .. })
        ));
    }

    #[test]
    fn gaps_in_values_withhold_the_certificate() {
        // value 2 is missing from the window
        let w = PermWindow { offset: -2, values: vec![-2, -1, 0, 1, 3, 4, 5] };
        let t = build_redwood(&w, 1).unwrap();
        assert_eq!(t.stabilized_range(), Some((0, 0)));
    }

    #[test]
    fn certified_content_survives_window_doubling() {
        for trial in 0..100 {
            let mut rng = trial_rng(21, trial);
            let mut t = TwoSidedTriplet::sample(0.5, DEFAULT_PARTITION_EPSILON, &mut rng).unwrap();
            let mut half = t.partition.largest() as i64 + 4;
            let radius = 2;
            let small = loop {
                let w = assemble_two_sided(&mut t, -half, half).unwrap();
                if let Ok(tree) = build_redwood(&w, radius) {
                    if tree.stabilized_range().is_some() {
                        break tree;
                    }
                }
                half *= 2;
            };
            let (lo, hi) = small.stabilized_range().unwrap();
            for _ in 0..3 {
                half *= 2;
                let w = assemble_two_sided(&mut t, -half, half).unwrap();
                let big = build_redwood(&w, radius).unwrap();
                assert!(small.same_content(&big, lo, hi), "trial {trial}");
            }
        }
    }

    #[test]
    fn direct_sampler_at_q_zero_is_bare() {
        let t = sample_redwood_direct(0.0, 3, &mut trial_rng(22, 0)).unwrap();
        assert_eq!(t.sizes(), vec![0; 7]);
        assert!(sample_redwood_direct(1.0, 3, &mut trial_rng(22, 0)).is_err());
    }

    #[test]
    fn two_sided_sampler_certifies_full_radius() {
        for trial in 0..50 {
            let t = sample_redwood_two_sided(0.7, 3, &mut trial_rng(23, trial)).unwrap();
            assert_eq!(t.stabilized_range(), Some((-3, 3)));
            assert!(t.left_subtrees.iter().all(BinaryTree::is_search_tree));
        }
    }
}
