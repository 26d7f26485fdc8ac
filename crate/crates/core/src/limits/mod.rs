//! Functionals of finite and two-sided trees whose convergence is checked by
//! the verification suites: radius-`r` ball statistics, root balls, the
//! distortion of the spine-order correspondence and subtree-size ratios. The
//! gap-sequence rearrangement used to characterize geometric record gaps also
//! lives here.

mod enumerate;
mod ghp;
mod laws;
mod phi;
mod subtree;

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::stats::EmpiricalDist;
use crate::trees::{BinaryTree, NodeId, RedwoodNode, RedwoodTree};

pub use enumerate::{all_rooted_trees, isomorphic};
pub use ghp::{ghp_distortion, spine_order, DEFAULT_PAIR_BUDGET};
pub use laws::{redwood_ball_law, rooted_ball_law, stabilized_root_ball};
pub use phi::{apply_phi, phi_invariance_test, SpacedSequence, PHI_TAIL_MASS, PHI_TV_THRESHOLD};
pub use subtree::{ssc_deviation, subtree_sizes, SubtreeSizeMap};

/// Undirected view of a tree.
pub trait TreeGraph {
    type Vertex: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync;

    fn has_vertex(&self, v: Self::Vertex) -> bool;

    /// Appends the neighbours of `v` to `out`.
    fn neighbors(&self, v: Self::Vertex, out: &mut Vec<Self::Vertex>);

    fn vertices(&self) -> Vec<Self::Vertex>;
}

impl TreeGraph for BinaryTree {
    type Vertex = NodeId;

    fn has_vertex(&self, v: NodeId) -> bool {
        v.index() < self.len()
    }

    fn neighbors(&self, v: NodeId, out: &mut Vec<NodeId>) {
        out.extend(self.parent(v));
        out.extend(self.children(v));
    }

    fn vertices(&self) -> Vec<NodeId> {
        self.ids().collect()
    }
}

impl TreeGraph for RedwoodTree {
    type Vertex = RedwoodNode;

    fn has_vertex(&self, v: RedwoodNode) -> bool {
        self.contains(v)
    }

    fn neighbors(&self, v: RedwoodNode, out: &mut Vec<RedwoodNode>) {
        match v {
            RedwoodNode::Spine(k) => {
                for j in [k - 1, k + 1] {
                    if self.has_spine(j) {
                        out.push(RedwoodNode::Spine(j));
                    }
                }
                if let Some(root) = self.left_subtree(k).and_then(BinaryTree::root) {
                    out.push(RedwoodNode::Off(k, root));
                }
            }
            RedwoodNode::Off(k, id) => {
                let t = self.left_subtree(k).expect("vertex checked by caller");
                out.push(t.parent(id).map_or(RedwoodNode::Spine(k), |p| RedwoodNode::Off(k, p)));
                out.extend(t.children(id).map(|c| RedwoodNode::Off(k, c)));
            }
        }
    }

    fn vertices(&self) -> Vec<RedwoodNode> {
        let mut out = Vec::with_capacity(self.node_count());
        for k in self.k_min()..=self.k_max() {
            out.push(RedwoodNode::Spine(k));
            let t = self.left_subtree(k).expect("k in range");
            out.extend(t.ids().map(|id| RedwoodNode::Off(k, id)));
        }
        out
    }
}

/// An unordered rooted tree; vertex 0 is the root and vertices are numbered
/// in breadth-first order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedBall {
    children: Vec<Vec<u32>>,
}

impl RootedBall {
    /// Builds a rooted tree from child lists. Panics unless every child id
    /// exceeds its parent's and every non-root vertex has one parent.
    pub fn from_children(children: Vec<Vec<u32>>) -> Self {
        let mut parents = vec![0u32; children.len()];
        for (v, cs) in children.iter().enumerate() {
            for &c in cs {
                assert!(c as usize > v, "children must follow their parent");
                parents[c as usize] += 1;
            }
        }
        assert!(parents.iter().skip(1).all(|&p| p == 1), "not a tree");
        RootedBall { children }
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.children[v]
    }

    /// Same tree with the child lists of each vertex reordered by `perm`.
    pub fn with_child_order(&self, mut perm: impl FnMut(&mut Vec<u32>)) -> Self {
        let mut children = self.children.clone();
        for cs in &mut children {
            perm(cs);
        }
        RootedBall { children }
    }
}

/// Rooted ball of radius `r` around `v`.
pub fn ball<G: TreeGraph>(t: &G, v: G::Vertex, r: usize) -> Result<RootedBall> {
    if !t.has_vertex(v) {
        return Err(Error::AddressNotInTree(format!("{v:?}")));
    }
    let mut order = vec![(v, None::<G::Vertex>, 0usize)];
    let mut children: Vec<Vec<u32>> = vec![Vec::new()];
    let mut buf = Vec::with_capacity(3);
    let mut i = 0;
    while i < order.len() {
        let (u, from, d) = order[i];
        if d < r {
            buf.clear();
            t.neighbors(u, &mut buf);
            for &w in &buf {
                if Some(w) != from {
                    let id = order.len() as u32;
                    order.push((w, Some(u), d + 1));
                    children.push(Vec::new());
                    children[i].push(id);
                }
            }
        }
        i += 1;
    }
    Ok(RootedBall { children })
}

/// Canonical code of an unordered rooted tree.
///
/// A vertex encodes as its number of children followed by the codes of its
/// children in sorted order. The codes are prefix-free, so equal codes mean
/// isomorphic trees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BallSignature {
    pub code: Vec<u8>,
}

impl BallSignature {
    pub fn single_vertex() -> Self {
        BallSignature { code: vec![0] }
    }

    pub fn vertex_count(&self) -> usize {
        self.code.len()
    }

    pub fn root_degree(&self) -> usize {
        self.code.first().map_or(0, |&d| d as usize)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.code)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        hex::decode(s)
            .map(|code| BallSignature { code })
            .map_err(|e| crate::error::domain(format!("bad signature {s:?}: {e}")))
    }
}

impl fmt::Display for BallSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn signature(b: &RootedBall) -> BallSignature {
    let n = b.len();
    let mut codes: Vec<Vec<u8>> = vec![Vec::new(); n];
    for v in (0..n).rev() {
        let mut kids: Vec<Vec<u8>> = b.children[v]
            .iter()
            .map(|&c| std::mem::take(&mut codes[c as usize]))
            .collect();
        kids.sort_unstable();
        let len = 1 + kids.iter().map(Vec::len).sum::<usize>();
        let mut code = Vec::with_capacity(len);
        code.push(u8::try_from(kids.len()).expect("vertex degree fits a byte"));
        for k in kids {
            code.extend_from_slice(&k);
        }
        codes[v] = code;
    }
    BallSignature {
        code: codes.into_iter().next().unwrap_or_default(),
    }
}

/// Counts of ball types.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusResult {
    pub radius: usize,
    pub counts: BTreeMap<BallSignature, u64>,
    pub sample_size: u64,
}

impl CensusResult {
    pub fn from_dist(radius: usize, d: EmpiricalDist<BallSignature>) -> Self {
        CensusResult {
            radius,
            sample_size: d.total(),
            counts: d.iter().map(|(k, c)| (k.clone(), c)).collect(),
        }
    }

    pub fn to_dist(&self) -> EmpiricalDist<BallSignature> {
        let mut d = EmpiricalDist::new();
        for (k, &c) in &self.counts {
            d.add_n(k.clone(), c);
        }
        d
    }

    pub fn frequency(&self, sig: &BallSignature) -> f64 {
        self.counts.get(sig).map_or(0.0, |&c| c as f64 / self.sample_size as f64)
    }

    pub fn frequencies(&self) -> impl Iterator<Item = (BallSignature, f64)> + '_ {
        let n = self.sample_size as f64;
        self.counts.iter().map(move |(k, &c)| (k.clone(), c as f64 / n))
    }

    /// `{"radius", "sample_size", "signatures": {hex: {count, frequency}}}`
    /// with keys in sorted order.
    pub fn to_json(&self) -> Value {
        let n = self.sample_size as f64;
        let sigs: serde_json::Map<String, Value> = self
            .counts
            .iter()
            .map(|(k, &c)| (k.to_hex(), json!({"count": c, "frequency": c as f64 / n})))
            .collect();
        json!({"radius": self.radius, "sample_size": self.sample_size, "signatures": sigs})
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("signature,count,frequency\n");
        for (k, &c) in &self.counts {
            out.push_str(&format!("{},{},{}\n", k.to_hex(), c, c as f64 / self.sample_size as f64));
        }
        out
    }
}

/// Ball types around every vertex of a finite tree.
pub fn census<G: TreeGraph + Sync>(t: &G, r: usize) -> CensusResult {
    let d = t
        .vertices()
        .par_iter()
        .fold(EmpiricalDist::new, |mut d, &v| {
            d.add(signature(&ball(t, v, r).expect("vertex listed by the tree")));
            d
        })
        .reduce(EmpiricalDist::new, EmpiricalDist::merge);
    CensusResult::from_dist(r, d)
}
