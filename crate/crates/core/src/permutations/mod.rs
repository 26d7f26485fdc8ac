//! Finite, one-sided and two-sided Mallows permutations and their records.

mod stream;
mod two_sided;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use stream::{
    finite_from_stream, free_space_profile, free_spaces, incomplete_left_subtrees,
    sample_one_sided, OneSidedStream, EXTENSION_CAP,
};
pub use two_sided::{assemble_two_sided, srr_from_triplet, Slot, TwoSidedTriplet};

/// Largest `n` accepted by [`exact_pmf`].
pub const EXACT_PMF_LIMIT: usize = 12;

/// A finite stretch of a permutation: `values[i]` is the image of
/// `offset + i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermWindow {
    pub offset: i64,
    pub values: Vec<i64>,
}

impl PermWindow {
    /// A finite permutation written in one-line notation, indexed from 1.
    pub fn finite(values: Vec<i64>) -> Self {
        PermWindow { offset: 1, values }
    }

    /// The identity on `lo..=hi`.
    pub fn identity(lo: i64, hi: i64) -> Self {
        PermWindow {
            offset: lo,
            values: (lo..=hi).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the last entry.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64 - 1
    }

    pub fn get(&self, index: i64) -> Option<i64> {
        let pos = index.checked_sub(self.offset)?;
        usize::try_from(pos).ok().and_then(|p| self.values.get(p).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    pub fn is_injective(&self) -> bool {
        let mut sorted = self.values.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    /// True when the values are exactly `1..=len`.
    pub fn is_permutation_of_range(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        self.values.iter().all(|&v| {
            if v < 1 || v as usize > n || seen[v as usize - 1] {
                return false;
            }
            seen[v as usize - 1] = true;
            true
        })
    }

    /// `index value` lines, one per entry.
    pub fn to_lines(&self) -> String {
        let mut out = String::with_capacity(self.len() * 8);
        for (i, v) in self.iter() {
            writeln!(out, "{i} {v}").expect("writing to a String cannot fail");
        }
        out
    }

    /// Inverse of [`PermWindow::to_lines`]. Indices must be consecutive.
    pub fn from_lines(text: &str) -> Result<Self> {
        let mut offset = None;
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<i64> {
                s.and_then(|s| s.parse().ok())
                    .ok_or_else(|| domain(format!("line {}: expected `index value`", lineno + 1)))
            };
            let index = parse(parts.next())?;
            let value = parse(parts.next())?;
            let start = *offset.get_or_insert(index);
            if index != start + values.len() as i64 {
                return Err(domain(format!("line {}: index {index} is not consecutive", lineno + 1)));
            }
            values.push(value);
        }
        Ok(PermWindow {
            offset: offset.unwrap_or(1),
            values,
        })
    }
}

/// Number of pairs `i < j` with `w(i) > w(j)`.
pub fn inversions(w: &PermWindow) -> u64 {
    fn sort_count(v: &mut [i64], buf: &mut Vec<i64>) -> u64 {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut count = sort_count(&mut v[..mid], buf) + sort_count(&mut v[mid..], buf);
        buf.clear();
        let (mut i, mut j) = (0, mid);
        while i < mid && j < n {
            if v[i] <= v[j] {
                buf.push(v[i]);
                i += 1;
            } else {
                // every remaining left element exceeds v[j]
                count += (mid - i) as u64;
                buf.push(v[j]);
                j += 1;
            }
        }
        buf.extend_from_slice(&v[i..mid]);
        buf.extend_from_slice(&v[j..n]);
        v.copy_from_slice(buf);
        count
    }
    let mut values = w.values.clone();
    let mut buf = Vec::with_capacity(values.len());
    sort_count(&mut values, &mut buf)
}

/// `Z_{n,q} = prod_{k=1}^n (1 + q + ... + q^(k-1))`.
pub fn q_factorial(n: usize, q: f64) -> f64 {
    (1..=n)
        .map(|k| (0..k).map(|j| q.powi(j as i32)).sum::<f64>())
        .product()
}

/// Mallows probability `q^Inv(w) / Z_{n,q}` of a permutation of `1..=n`.
pub fn exact_pmf(n: usize, q: f64, w: &PermWindow) -> Result<f64> {
    if n > EXACT_PMF_LIMIT {
        return Err(Error::SizeGuard {
            size: n,
            limit: EXACT_PMF_LIMIT,
        });
    }
    if !(q >= 0.0 && q.is_finite()) {
        return Err(domain(format!("q = {q} must be a non-negative real")));
    }
    if w.len() != n || !w.is_permutation_of_range() {
        return Err(domain(format!("window is not a permutation of 1..={n}")));
    }
    let inv = inversions(w);
    Ok(q.powi(inv as i32) / q_factorial(n, q))
}

/// Record indices of a window (left-to-right maxima) with the two-sided slot
/// convention: the entry at `zero_slot` has value `<= 0` and the next one has
/// value `> 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordRepresentation {
    pub indices: Vec<i64>,
    pub values: Vec<i64>,
    /// Position in `indices` of the last non-positive record; `None` when every
    /// record is positive (slot 0 then sits just before the first entry).
    pub zero_slot: Option<usize>,
    /// False when entries outside the inspected range could invalidate
    /// records near the left edge.
    pub complete: bool,
}

impl RecordRepresentation {
    pub fn count(&self) -> usize {
        self.indices.len()
    }

    /// Array position of slot 0, `-1` for the virtual boundary.
    fn zero_position(&self) -> i64 {
        self.zero_slot.map_or(-1, |z| z as i64)
    }

    /// `(r_k, value at r_k)` in the two-sided numbering, if present.
    pub fn slot(&self, k: i64) -> Option<(i64, i64)> {
        let pos = usize::try_from(self.zero_position() + k).ok()?;
        Some((*self.indices.get(pos)?, self.values[pos]))
    }

    /// Smallest and largest slot numbers present.
    pub fn slot_range(&self) -> (i64, i64) {
        let z = self.zero_position();
        (-z, self.count() as i64 - 1 - z)
    }

    /// Record values strictly increase and the sign changes right after slot 0.
    pub fn is_well_formed(&self) -> bool {
        let increasing = self.indices.windows(2).all(|w| w[0] < w[1])
            && self.values.windows(2).all(|w| w[0] < w[1]);
        let zero_ok = self.slot(0).is_none_or(|(_, v)| v <= 0);
        let one_ok = self.slot(1).is_none_or(|(_, v)| v > 0);
        increasing && zero_ok && one_ok && self.indices.len() == self.values.len()
    }
}

pub fn records(w: &PermWindow) -> RecordRepresentation {
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut best = i64::MIN;
    for (i, v) in w.iter() {
        if v > best {
            best = v;
            indices.push(i);
            values.push(v);
        }
    }
    let non_positive = values.iter().take_while(|&&v| v <= 0).count();
    RecordRepresentation {
        indices,
        values,
        zero_slot: non_positive.checked_sub(1),
        complete: w.offset >= 1,
    }
}

/// `sum_{k=2}^n (1-q)/(1-q^k)`, the centring term of the record count.
pub fn expected_records(n: usize, q: f64) -> f64 {
    (2..=n).map(|k| (1.0 - q) / (1.0 - q.powi(k as i32))).sum()
}

/// Mean of the free-space count, read off its product generating function.
pub fn expected_free_spaces(n: usize, q: f64) -> f64 {
    (1..=n)
        .map(|k| {
            let qk = q.powi(k as i32);
            qk / (1.0 - qk)
        })
        .sum()
}

/// Variance of the free-space count: a sum of independent geometric variances.
pub fn free_spaces_variance(n: usize, q: f64) -> f64 {
    (1..=n)
        .map(|k| {
            let qk = q.powi(k as i32);
            qk / ((1.0 - qk) * (1.0 - qk))
        })
        .sum()
}
