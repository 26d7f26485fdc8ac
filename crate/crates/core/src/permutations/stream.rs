use crate::distributions::{GeomVariant, Geometric};
use crate::error::{domain, Error, Result};
use crate::rng::SimRng;

use super::PermWindow;

/// Extra draws allowed when a stream is extended on demand.
pub const EXTENSION_CAP: usize = 1 << 22;

/// The infinite Bernoulli model read row by row: `I_i` is the first column
/// of row `i` whose coin succeeds, among columns not used by earlier rows.
#[derive(Debug, Clone)]
pub struct OneSidedStream {
    q: f64,
    rank: Option<Geometric>,
    drawn: Vec<u64>,
    /// Unused columns below `frontier`, ascending.
    gaps: Vec<u64>,
    /// Every column `>= frontier` is unused.
    frontier: u64,
    /// `position[c - 1]` is the row that took column `c`, or 0.
    position: Vec<usize>,
    rng: SimRng,
}

pub fn sample_one_sided(q: f64, rng: SimRng) -> Result<OneSidedStream> {
    OneSidedStream::new(q, rng)
}

impl OneSidedStream {
    pub fn new(q: f64, rng: SimRng) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(domain(format!("q = {q} must lie in [0, 1)")));
        }
        let rank = if q == 0.0 {
            None
        } else {
            Some(Geometric::new(GeomVariant::GeomOne, 1.0 - q)?)
        };
        Ok(OneSidedStream {
            q,
            rank,
            drawn: Vec::new(),
            gaps: Vec::new(),
            frontier: 1,
            position: Vec::new(),
            rng,
        })
    }

    /// A stream whose first draws are fixed; later draws follow the model.
    pub fn from_prefix(q: f64, prefix: &[u64], rng: SimRng) -> Result<Self> {
        let mut s = Self::new(q, rng)?;
        let max = prefix.iter().copied().max().unwrap_or(0);
        let mut used = vec![false; max as usize];
        for &c in prefix {
            if c == 0 || std::mem::replace(&mut used[c as usize - 1], true) {
                return Err(domain(format!("prefix entry {c} is zero or repeated")));
            }
        }
        s.gaps = (1..=max).filter(|&c| !used[c as usize - 1]).collect();
        s.frontier = max + 1;
        s.position = vec![0; max as usize];
        for (i, &c) in prefix.iter().enumerate() {
            s.position[c as usize - 1] = i + 1;
        }
        s.drawn = prefix.to_vec();
        Ok(s)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.drawn.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drawn.is_empty()
    }

    /// `I_1, I_2, ...` drawn so far.
    pub fn drawn(&self) -> &[u64] {
        &self.drawn
    }

    fn draw(&mut self) -> u64 {
        let r = match &self.rank {
            Some(g) => g.sample(&mut self.rng),
            None => 1,
        } as usize;
        let col = if r <= self.gaps.len() {
            self.gaps.remove(r - 1)
        } else {
            let col = self.frontier + (r - self.gaps.len() - 1) as u64;
            self.gaps.extend(self.frontier..col);
            self.frontier = col + 1;
            col
        };
        if self.position.len() < col as usize {
            self.position.resize(col as usize, 0);
        }
        self.drawn.push(col);
        self.position[col as usize - 1] = self.drawn.len();
        col
    }

    /// Draws until at least `n` entries exist.
    pub fn extend_to(&mut self, n: usize) {
        while self.drawn.len() < n {
            self.draw();
        }
    }

    /// `I_i` for `i >= 1`, drawing as needed.
    pub fn value(&mut self, i: usize) -> u64 {
        assert!(i >= 1, "stream indices start at 1");
        self.extend_to(i);
        self.drawn[i - 1]
    }

    /// Row that uses column `c`, drawing until it appears.
    pub fn position_of(&mut self, c: u64) -> Result<usize> {
        let start = self.drawn.len();
        loop {
            if let Some(&p) = self.position.get(c as usize - 1) {
                if p != 0 {
                    return Ok(p);
                }
            }
            if self.drawn.len() - start >= EXTENSION_CAP {
                return Err(Error::StreamCap {
                    cap: EXTENSION_CAP,
                    context: "waiting for a column to be used",
                });
            }
            self.draw();
        }
    }

    /// True when every column `<= c` has been used.
    pub fn columns_used_through(&self, c: u64) -> bool {
        c < self.frontier && self.gaps.first().is_none_or(|&g| g > c)
    }

    /// Draws until every column `<= c` is used.
    pub fn fill_columns_through(&mut self, c: u64) -> Result<()> {
        let start = self.drawn.len();
        while !self.columns_used_through(c) {
            if self.drawn.len() - start >= EXTENSION_CAP {
                return Err(Error::StreamCap {
                    cap: EXTENSION_CAP,
                    context: "filling columns below the prefix maximum",
                });
            }
            self.draw();
        }
        Ok(())
    }
}

/// `(I_1, ..., I_n)` re-ranked to a permutation of `1..=n`.
pub fn finite_from_stream(s: &mut OneSidedStream, n: usize) -> PermWindow {
    s.extend_to(n);
    let prefix = &s.drawn[..n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&i| prefix[i]);
    let mut values = vec![0i64; n];
    for (rank, &i) in order.iter().enumerate() {
        values[i] = rank as i64 + 1;
    }
    PermWindow::finite(values)
}

/// `max(I_1, ..., I_n) - n`.
pub fn free_spaces(s: &mut OneSidedStream, n: usize) -> u64 {
    s.extend_to(n);
    let max = s.drawn[..n].iter().copied().max().unwrap_or(0);
    max - n as u64
}

/// `free_spaces(s, n)` for every `n` in `1..=n_max`, in one pass.
pub fn free_space_profile(s: &mut OneSidedStream, n_max: usize) -> Vec<u64> {
    s.extend_to(n_max);
    let mut max = 0;
    s.drawn[..n_max]
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            max = max.max(c);
            max - (i as u64 + 1)
        })
        .collect()
}

/// Number of spine positions `k < R_n` whose left subtree in `bst(σ_n)`
/// is not yet its final form in `bst(σ_∞)`.
///
/// The left subtree under the record with value `rec_k` eventually holds every
/// column strictly between the previous record value and `rec_k`. The stream
/// is extended until all columns up to the prefix maximum are used, and the
/// in-prefix counts are compared with those of the extension.
pub fn incomplete_left_subtrees(s: &mut OneSidedStream, n: usize) -> Result<usize> {
    s.extend_to(n);
    let prefix = &s.drawn[..n];
    let mut rec = Vec::new();
    for &c in prefix {
        if rec.last().is_none_or(|&m| c > m) {
            rec.push(c);
        }
    }
    let Some(&max) = rec.last() else {
        return Ok(0);
    };
    let mut in_prefix = vec![0usize; rec.len()];
    for &c in prefix {
        in_prefix[rec.partition_point(|&r| r < c)] += 1;
    }
    s.fill_columns_through(max)?;
    let mut eventual = vec![0usize; rec.len()];
    for &c in &s.drawn {
        if c <= max {
            eventual[rec.partition_point(|&r| r < c)] += 1;
        }
    }
    Ok(in_prefix
        .iter()
        .zip(&eventual)
        .filter(|(a, b)| a != b)
        .count())
}
