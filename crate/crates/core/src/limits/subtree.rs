use std::collections::BTreeMap;

use crate::error::{domain, Result};
use crate::trees::BinaryTree;

/// Subtree counts at every word of length at most `depth`, including words
/// that are not vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeSizeMap {
    pub n: usize,
    pub depth: usize,
    pub counts: BTreeMap<String, usize>,
}

impl SubtreeSizeMap {
    /// Fraction of vertices at or below `word`.
    pub fn value(&self, word: &str) -> f64 {
        self.counts.get(word).map_or(0.0, |&c| c as f64 / self.n as f64)
    }

    /// `value(v) - value(v0) - value(v1)`, computed on counts.
    pub fn deficit(&self, word: &str) -> Option<f64> {
        if word.len() >= self.depth {
            return None;
        }
        let c = |w: &str| self.counts[w] as i64;
        let d = c(word) - c(&format!("{word}0")) - c(&format!("{word}1"));
        Some(d as f64 / self.n as f64)
    }
}

fn words(depth: usize) -> impl Iterator<Item = String> {
    (0..=depth).flat_map(|len| {
        (0..1u64 << len).map(move |bits| {
            (0..len)
                .map(|i| if bits >> (len - 1 - i) & 1 == 1 { '1' } else { '0' })
                .collect()
        })
    })
}

pub fn subtree_sizes(t: &BinaryTree, depth: usize) -> Result<SubtreeSizeMap> {
    if t.is_empty() {
        return Err(domain("subtree sizes need a non-empty tree"));
    }
    if depth > 24 {
        return Err(domain(format!("depth {depth} is too large to tabulate")));
    }
    let sizes = t.subtree_sizes();
    let counts = words(depth)
        .map(|w| {
            let c = t.find(&w).map_or(0, |id| sizes[id.index()]);
            (w, c)
        })
        .collect();
    Ok(SubtreeSizeMap {
        n: t.len(),
        depth,
        counts,
    })
}

/// Largest gap between the subtree fractions and the indicator of the
/// rightmost branch, over words of length at most `depth`.
pub fn ssc_deviation(t: &BinaryTree, depth: usize) -> Result<f64> {
    let map = subtree_sizes(t, depth)?;
    Ok(map
        .counts
        .keys()
        .map(|w| {
            let target = if w.bytes().all(|b| b == b'1') { 1.0 } else { 0.0 };
            (map.value(w) - target).abs()
        })
        .fold(0.0, f64::max))
}
