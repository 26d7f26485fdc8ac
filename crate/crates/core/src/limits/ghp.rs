use rand::Rng;
use rayon::prelude::*;

use crate::rng::SimRng;
use crate::trees::{BinaryTree, NodeId};

/// Pairs inspected by [`ghp_distortion`] unless told otherwise.
pub const DEFAULT_PAIR_BUDGET: u64 = 1_000_000;

/// Vertices ordered spine node by spine node, each spine node followed by its
/// left subtree in breadth-first order.
pub fn spine_order(t: &BinaryTree) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(t.len());
    for s in t.right_spine() {
        out.push(s);
        if let Some(l) = t.left(s) {
            out.extend(t.bfs_from(l));
        }
    }
    out
}

/// Ancestor table for distance queries.
struct Lifting {
    depth: Vec<u32>,
    up: Vec<Vec<u32>>,
}

impl Lifting {
    fn new(t: &BinaryTree) -> Self {
        let n = t.len();
        let mut depth = vec![0u32; n];
        let mut parent = vec![0u32; n];
        for id in t.preorder() {
            if let Some(p) = t.parent(id) {
                depth[id.index()] = depth[p.index()] + 1;
                parent[id.index()] = p.0;
            } else {
                parent[id.index()] = id.0;
            }
        }
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        let levels = (u32::BITS - max_depth.leading_zeros()).max(1) as usize;
        let mut up = vec![parent];
        for j in 1..levels {
            let prev = &up[j - 1];
            let next = prev.iter().map(|&a| prev[a as usize]).collect();
            up.push(next);
        }
        Lifting { depth, up }
    }

    fn distance(&self, a: u32, b: u32) -> u32 {
        let (mut x, mut y) = (a, b);
        if self.depth[x as usize] < self.depth[y as usize] {
            std::mem::swap(&mut x, &mut y);
        }
        let mut diff = self.depth[x as usize] - self.depth[y as usize];
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                x = self.up[j][x as usize];
            }
            diff >>= 1;
            j += 1;
        }
        if x != y {
            for level in self.up.iter().rev() {
                if level[x as usize] != level[y as usize] {
                    x = level[x as usize];
                    y = level[y as usize];
                }
            }
            x = self.up[0][x as usize];
        }
        self.depth[a as usize] + self.depth[b as usize] - 2 * self.depth[x as usize]
    }
}

/// Largest gap between tree distance, rescaled by `(1 - q) n`, and index
/// distance divided by `n`, over pairs of vertices in spine order. All pairs
/// are checked when `n^2` fits the budget; otherwise `pair_budget` uniformly
/// drawn pairs.
pub fn ghp_distortion(t: &BinaryTree, q: f64, pair_budget: u64, rng: &mut SimRng) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    let order: Vec<u32> = spine_order(t).into_iter().map(|id| id.0).collect();
    let lift = Lifting::new(t);
    let scale = (1.0 - q) * n as f64;
    let nf = n as f64;
    let gap = |i: usize, j: usize| {
        let d = lift.distance(order[i], order[j]) as f64;
        (d / scale - i.abs_diff(j) as f64 / nf).abs()
    };
    if (n as u64).saturating_mul(n as u64) <= pair_budget {
        (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| gap(i, j)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    } else {
        let pairs: Vec<(u32, u32)> = (0..pair_budget)
            .map(|_| (rng.random_range(0..n as u32), rng.random_range(0..n as u32)))
            .collect();
        pairs
            .par_iter()
            .map(|&(i, j)| gap(i as usize, j as usize))
            .reduce(|| 0.0, f64::max)
    }
}
