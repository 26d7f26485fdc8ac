//! Binary search trees, their spine decomposition and two-sided redwood
//! extensions.

mod format;
mod redwood;

use serde::Serialize;

use crate::error::Result;
use crate::permutations::{OneSidedStream, PermWindow};

pub use format::parse_tree;
pub use redwood::{
    build_redwood, sample_redwood_direct, sample_redwood_two_sided, RedwoodNode, RedwoodTree,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
    pub label: Option<i64>,
}

/// A finite binary tree stored as an arena. Node words are the left (`0`) and
/// right (`1`) steps from the root.
#[derive(Debug, Clone, Default)]
pub struct BinaryTree {
    nodes: Vec<Node>,
    root: Option<NodeId>,
}

impl BinaryTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        BinaryTree {
            nodes: Vec::with_capacity(n),
            root: None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn left(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].left
    }

    pub fn right(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].right
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn label(&self, id: NodeId) -> Option<i64> {
        self.nodes[id.index()].label
    }

    pub fn child(&self, id: NodeId, side: Side) -> Option<NodeId> {
        match side {
            Side::Left => self.left(id),
            Side::Right => self.right(id),
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    fn push(&mut self, parent: Option<NodeId>, label: Option<i64>) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("tree exceeds u32 nodes"));
        self.nodes.push(Node {
            parent,
            label,
            ..Node::default()
        });
        id
    }

    /// Creates the root. Panics if one exists.
    pub fn add_root(&mut self, label: Option<i64>) -> NodeId {
        assert!(self.root.is_none(), "tree already has a root");
        let id = self.push(None, label);
        self.root = Some(id);
        id
    }

    /// Attaches a new leaf. Panics if the slot is taken.
    pub fn add_child(&mut self, parent: NodeId, side: Side, label: Option<i64>) -> NodeId {
        assert!(self.child(parent, side).is_none(), "child slot already occupied");
        let id = self.push(Some(parent), label);
        let p = &mut self.nodes[parent.index()];
        match side {
            Side::Left => p.left = Some(id),
            Side::Right => p.right = Some(id),
        }
        id
    }

    pub fn set_label(&mut self, id: NodeId, label: Option<i64>) {
        self.nodes[id.index()].label = label;
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        let n = &self.nodes[id.index()];
        n.left.into_iter().chain(n.right)
    }

    pub fn depth(&self, mut id: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent(id) {
            d += 1;
            id = p;
        }
        d
    }

    /// Address of `id` as a `0`/`1` word.
    pub fn word(&self, mut id: NodeId) -> String {
        let mut steps = Vec::new();
        while let Some(p) = self.parent(id) {
            steps.push(if self.left(p) == Some(id) { '0' } else { '1' });
            id = p;
        }
        steps.iter().rev().collect()
    }

    /// Node at a `0`/`1` word, if present.
    pub fn find(&self, word: &str) -> Option<NodeId> {
        let mut id = self.root?;
        for c in word.chars() {
            id = match c {
                '0' => self.left(id)?,
                '1' => self.right(id)?,
                _ => return None,
            };
        }
        Some(id)
    }

    /// Preorder (node, left subtree, right subtree).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack: Vec<NodeId> = self.root.into_iter().collect();
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.right(id));
            stack.extend(self.left(id));
        }
        out
    }

    /// In-order (left subtree, node, right subtree).
    pub fn inorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut cur = self.root;
        loop {
            while let Some(id) = cur {
                stack.push(id);
                cur = self.left(id);
            }
            let Some(id) = stack.pop() else { break };
            out.push(id);
            cur = self.right(id);
        }
        out
    }

    /// Breadth-first order of the subtree at `start`.
    pub fn bfs_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = vec![start];
        let mut i = 0;
        while i < out.len() {
            let id = out[i];
            out.extend(self.children(id));
            i += 1;
        }
        out
    }

    /// Size of the subtree rooted at every node, indexed by node id.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![1usize; self.len()];
        for &id in self.preorder().iter().rev() {
            if let Some(p) = self.parent(id) {
                sizes[p.index()] += sizes[id.index()];
            }
        }
        sizes
    }

    /// Nodes along the rightmost path, starting at the root.
    pub fn right_spine(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.root;
        while let Some(id) = cur {
            out.push(id);
            cur = self.right(id);
        }
        out
    }

    pub fn labels_inorder(&self) -> Vec<Option<i64>> {
        self.inorder().into_iter().map(|id| self.label(id)).collect()
    }

    /// Every node is labeled and the in-order labels strictly increase.
    pub fn is_search_tree(&self) -> bool {
        let labels = self.labels_inorder();
        labels.iter().all(Option::is_some) && labels.windows(2).all(|w| w[0] < w[1])
    }

    /// Links are mutually consistent and every node hangs below the root.
    pub fn is_consistent(&self) -> bool {
        let reachable = self.preorder().len();
        let links_ok = self.ids().all(|id| {
            self.children(id).all(|c| self.parent(c) == Some(id))
                && self.parent(id).is_some_and(|p| self.children(p).any(|c| c == id))
                    != (Some(id) == self.root)
        });
        reachable == self.len() && links_ok
    }

    /// Same shape and labels, regardless of arena layout.
    pub fn same_as(&self, other: &BinaryTree) -> bool {
        self.same_shape_impl(other, true)
    }

    /// Same shape, labels ignored.
    pub fn same_shape(&self, other: &BinaryTree) -> bool {
        self.same_shape_impl(other, false)
    }

    fn same_shape_impl(&self, other: &BinaryTree, labels: bool) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut stack = vec![(self.root, other.root)];
        while let Some(pair) = stack.pop() {
            match pair {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    if labels && self.label(a) != other.label(b) {
                        return false;
                    }
                    stack.push((self.left(a), other.left(b)));
                    stack.push((self.right(a), other.right(b)));
                }
                _ => return false,
            }
        }
        true
    }

    /// True when every word of `self` is a word of `other`.
    pub fn shape_contained_in(&self, other: &BinaryTree) -> bool {
        let mut stack = vec![(self.root, other.root)];
        while let Some(pair) = stack.pop() {
            match pair {
                (None, _) => {}
                (Some(_), None) => return false,
                (Some(a), Some(b)) => {
                    stack.push((self.left(a), other.left(b)));
                    stack.push((self.right(a), other.right(b)));
                }
            }
        }
        true
    }

    /// Copy of the subtree at `start` as a standalone tree.
    pub fn subtree(&self, start: Option<NodeId>) -> BinaryTree {
        let mut out = BinaryTree::new();
        let Some(start) = start else { return out };
        let root = out.add_root(self.label(start));
        let mut stack = vec![(start, root)];
        while let Some((src, dst)) = stack.pop() {
            for side in [Side::Left, Side::Right] {
                if let Some(c) = self.child(src, side) {
                    let nc = out.add_child(dst, side, self.label(c));
                    stack.push((c, nc));
                }
            }
        }
        out
    }

    /// Labels dropped.
    pub fn unlabeled(&self) -> BinaryTree {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.label = None;
        }
        out
    }

    /// Parenthesized form `(left)label(right)`, `·` for an empty tree and
    /// `*` for a missing label.
    pub fn to_paren_string(&self) -> String {
        format::write_tree(self)
    }
}

impl PartialEq for BinaryTree {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for BinaryTree {}

impl std::fmt::Display for BinaryTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_paren_string())
    }
}

/// Binary search tree of a sequence of distinct values: the first value is
/// the root, smaller values go left and larger ones right.
///
/// Built as a Cartesian tree keyed by value with the position as priority, so
/// the cost is one sort plus a linear stack pass.
pub fn build_bst(w: &PermWindow) -> BinaryTree {
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&i| w.values[i]);
    let mut left = vec![usize::MAX; n];
    let mut right = vec![usize::MAX; n];
    // Right flank of the tree built so far, positions increasing upward.
    let mut stack: Vec<usize> = Vec::new();
    for &i in &order {
        let mut last = usize::MAX;
        while let Some(&top) = stack.last() {
            if top < i {
                break;
            }
            last = stack.pop().unwrap();
        }
        left[i] = last;
        if let Some(&top) = stack.last() {
            right[top] = i;
        }
        stack.push(i);
    }
    let mut tree = BinaryTree::with_capacity(n);
    let Some(&root) = stack.first() else {
        return tree;
    };
    let r = tree.add_root(Some(w.values[root]));
    let mut todo = vec![(root, r)];
    while let Some((src, dst)) = todo.pop() {
        for (side, c) in [(Side::Left, left[src]), (Side::Right, right[src])] {
            if c != usize::MAX {
                let id = tree.add_child(dst, side, Some(w.values[c]));
                todo.push((c, id));
            }
        }
    }
    tree
}

/// The same tree by inserting each value as a new leaf in turn. Quadratic in
/// the worst case.
pub fn build_bst_by_insertion(w: &PermWindow) -> BinaryTree {
    let mut tree = BinaryTree::with_capacity(w.len());
    for &v in &w.values {
        let Some(mut cur) = tree.root() else {
            tree.add_root(Some(v));
            continue;
        };
        loop {
            let side = if v < tree.label(cur).expect("labeled") { Side::Left } else { Side::Right };
            match tree.child(cur, side) {
                Some(c) => cur = c,
                None => {
                    tree.add_child(cur, side, Some(v));
                    break;
                }
            }
        }
    }
    tree
}

/// The same tree by splitting directly: the first value becomes the root and
/// the smaller and larger values, in their original order, form the two
/// subtrees. Quadratic in the worst case.
pub fn build_bst_by_splitting(w: &PermWindow) -> BinaryTree {
    let mut tree = BinaryTree::with_capacity(w.len());
    type Pending = (Option<(NodeId, Side)>, Vec<i64>);
    let mut todo: Vec<Pending> = vec![(None, w.values.clone())];
    while let Some((at, values)) = todo.pop() {
        let Some((&first, rest)) = values.split_first() else { continue };
        let id = match at {
            None => tree.add_root(Some(first)),
            Some((p, side)) => tree.add_child(p, side, Some(first)),
        };
        let (smaller, larger): (Vec<i64>, Vec<i64>) = rest.iter().partition(|&&v| v < first);
        todo.push((Some((id, Side::Left)), smaller));
        todo.push((Some((id, Side::Right)), larger));
    }
    tree
}

/// Vertices that the one-sided limit tree adds to the left subtrees of the
/// first `R_n` spine nodes of the tree of `(I_1, ..., I_n)`, counted as a set
/// difference of node words.
pub fn free_space_set_difference(s: &mut OneSidedStream, n: usize) -> Result<usize> {
    s.extend_to(n);
    let Some(max) = s.drawn()[..n].iter().copied().max() else {
        return Ok(0);
    };
    let small = build_bst(&PermWindow::finite(s.drawn()[..n].iter().map(|&c| c as i64).collect()));
    s.fill_columns_through(max)?;
    let limit: Vec<i64> = s
        .drawn()
        .iter()
        .filter(|&&c| c <= max)
        .map(|&c| c as i64)
        .collect();
    let big = build_bst(&PermWindow::finite(limit));
    let mut missing = 0;
    for (a, b) in small.right_spine().into_iter().zip(big.right_spine()) {
        let mut stack = vec![(small.left(a), big.left(b))];
        while let Some((x, y)) = stack.pop() {
            let Some(y) = y else { continue };
            match x {
                Some(x) => {
                    stack.push((small.left(x), big.left(y)));
                    stack.push((small.right(x), big.right(y)));
                }
                None => missing += big.subtree(Some(y)).len(),
            }
        }
    }
    Ok(missing)
}

/// Sizes of the left subtrees hanging off the rightmost path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpineDecomposition {
    pub sizes: Vec<usize>,
    pub record_count: usize,
}

impl SpineDecomposition {
    pub fn total(&self) -> usize {
        self.sizes.iter().map(|s| s + 1).sum()
    }
}

pub fn spine_decompose(t: &BinaryTree) -> SpineDecomposition {
    let all = t.subtree_sizes();
    let spine = t.right_spine();
    let sizes = spine
        .iter()
        .map(|&id| t.left(id).map_or(0, |l| all[l.index()]))
        .collect();
    SpineDecomposition {
        sizes,
        record_count: spine.len(),
    }
}

/// Left and right swapped everywhere, labels negated.
pub fn mirror(t: &BinaryTree) -> BinaryTree {
    let mut out = t.clone();
    for n in &mut out.nodes {
        std::mem::swap(&mut n.left, &mut n.right);
        n.label = n.label.map(|l| -l);
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    use super::*;
    use crate::permutations::records;
    use crate::rng::trial_rng;

    fn example_tree() -> BinaryTree {
        build_bst(&PermWindow::finite(vec![4, 2, 5, 1, 6, 3]))
    }

    #[test]
    fn six_node_example() {
        let t = example_tree();
        let expect = [("", 4), ("0", 2), ("00", 1), ("01", 3), ("1", 5), ("11", 6)];
        assert_eq!(t.len(), 6);
        for (word, label) in expect {
            assert_eq!(t.label(t.find(word).unwrap()), Some(label), "word {word:?}");
        }
        assert!(t.find("10").is_none());
        assert_eq!(t.to_paren_string(), "(((·)1(·))2((·)3(·)))4((·)5((·)6(·)))");
    }

    #[test]
    fn trivial_shapes() {
        let path = build_bst(&PermWindow::finite(vec![1, 2, 3]));
        assert!(path.find("11").is_some());
        assert_eq!(path.len(), 3);
        assert_eq!(path.right_spine().len(), 3);
        assert!(build_bst(&PermWindow::finite(vec![])).is_empty());
        assert_eq!(build_bst(&PermWindow::finite(vec![])).to_paren_string(), "·");
    }

    #[test]
    fn spine_examples() {
        let d = spine_decompose(&example_tree());
        assert_eq!(d.record_count, 3);
        assert_eq!(d.sizes, vec![3, 0, 0]);
        assert_eq!(d.total(), 6);
        let path = spine_decompose(&build_bst(&PermWindow::identity(1, 10)));
        assert_eq!(path.sizes, vec![0; 10]);
        assert!(spine_decompose(&BinaryTree::new()).sizes.is_empty());
    }

    fn random_window(seed: u64, n: usize) -> PermWindow {
        let mut v: Vec<i64> = (1..=n as i64).collect();
        v.shuffle(&mut trial_rng(seed, n as u64));
        PermWindow::finite(v)
    }

    #[test]
    fn three_constructions_agree() {
        for s in 0..300 {
            let w = random_window(s, (s % 40) as usize);
            let a = build_bst(&w);
            assert!(a.is_consistent());
            assert!(a.same_as(&build_bst_by_insertion(&w)));
            assert!(a.same_as(&build_bst_by_splitting(&w)));
            assert_eq!(spine_decompose(&a).record_count, records(&w).count());
        }
    }

    proptest! {
        #[test]
        fn bst_is_search_tree_of_full_size(v in proptest::collection::hash_set(-500i64..500, 0..80)) {
            let w = PermWindow::finite(v.into_iter().collect());
            let t = build_bst(&w);
            prop_assert_eq!(t.len(), w.len());
            prop_assert!(t.is_search_tree());
            prop_assert_eq!(spine_decompose(&t).total(), w.len());
        }

        #[test]
        fn mirror_is_an_involution(v in proptest::collection::hash_set(-500i64..500, 0..60)) {
            let t = build_bst(&PermWindow::finite(v.into_iter().collect()));
            let m = mirror(&t);
            prop_assert!(m.is_search_tree());
            prop_assert!(mirror(&m).same_as(&t));
        }
    }

    #[test]
    fn mirror_of_right_path_is_left_path() {
        let m = mirror(&build_bst(&PermWindow::identity(1, 5)));
        assert!(m.find("0000").is_some());
        assert_eq!(m.label(m.root().unwrap()), Some(-1));
    }

    #[test]
    fn words_round_trip() {
        let t = example_tree();
        for id in t.ids() {
            assert_eq!(t.find(&t.word(id)), Some(id));
            assert_eq!(t.depth(id), t.word(id).len());
        }
        let sub = t.subtree(t.find("0"));
        assert_eq!(sub.to_paren_string(), "((·)1(·))2((·)3(·))");
        assert!(sub.shape_contained_in(&t));
        assert!(!t.shape_contained_in(&sub));
    }

    #[test]
    fn set_difference_matches_free_spaces() {
        use crate::permutations::{free_space_profile, OneSidedStream};
        let mut s = OneSidedStream::from_prefix(0.5, &[4, 2, 5, 1, 6, 3], trial_rng(0, 0)).unwrap();
        let spaces: Vec<usize> = (1..=6).map(|n| free_space_set_difference(&mut s, n).unwrap()).collect();
        assert_eq!(spaces, vec![3, 2, 2, 1, 1, 0]);
        for seed in 0..10 {
            let mut s = OneSidedStream::new(0.6, trial_rng(24, seed)).unwrap();
            let f = free_space_profile(&mut s, 300);
            for n in 1..=300 {
                assert_eq!(free_space_set_difference(&mut s, n).unwrap() as u64, f[n - 1]);
            }
        }
    }

    #[test]
    fn deep_trees_do_not_recurse() {
        let n = 200_000;
        let t = build_bst(&PermWindow::identity(1, n));
        assert_eq!(t.right_spine().len(), n as usize);
        let text = t.to_paren_string();
        assert!(parse_tree(&text).unwrap().same_as(&t));
    }
}
