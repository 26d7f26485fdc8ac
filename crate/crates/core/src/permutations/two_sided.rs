use crate::distributions::{sample_partition, PartitionSample};
use crate::error::{domain, Result};
use crate::rng::{fork, SimRng};

use super::{OneSidedStream, PermWindow, RecordRepresentation};

/// Which family a position of the two-sided permutation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// Position `ℓ_i`, `i >= 1`.
    Plus(u64),
    /// Position `k_j`, `j <= 0`.
    Minus(i64),
}

/// Ingredients of the two-sided Mallows permutation: two independent
/// one-sided streams and an independent partition `Λ`.
///
/// Positions `ℓ_i = i - Λ_i` carry `σ⁺(i)`; the remaining positions, listed
/// in decreasing order as `k_0 > k_{-1} > ...`, carry `1 - σ⁻(1 - j)`.
#[derive(Debug, Clone)]
pub struct TwoSidedTriplet {
    pub sigma_plus: OneSidedStream,
    pub sigma_minus: OneSidedStream,
    pub partition: PartitionSample,
    /// `ℓ_1, ..., ℓ_L` for the `L` parts.
    ell: Vec<i64>,
    /// `k_0, k_{-1}, ..., k_{1-Λ_1}`; below that `k_j = j`.
    kpos: Vec<i64>,
    /// Slot of every position in `ℓ_1..=L`.
    table: Vec<Slot>,
}

impl TwoSidedTriplet {
    pub fn new(
        sigma_plus: OneSidedStream,
        sigma_minus: OneSidedStream,
        partition: PartitionSample,
    ) -> Result<Self> {
        if sigma_plus.q() != sigma_minus.q() {
            return Err(domain("the two streams must share q"));
        }
        let parts = partition.parts();
        let ell: Vec<i64> = parts
            .iter()
            .enumerate()
            .map(|(i, &p)| i as i64 + 1 - p as i64)
            .collect();
        let ell_1 = ell.first().copied().unwrap_or(1);
        let top = ell.len() as i64;
        let mut table = vec![Slot::Minus(0); (top - ell_1 + 1).max(0) as usize];
        for (i, &x) in ell.iter().enumerate() {
            table[(x - ell_1) as usize] = Slot::Plus(i as u64 + 1);
        }
        let mut kpos = Vec::new();
        for x in (ell_1..=top).rev() {
            let cell = &mut table[(x - ell_1) as usize];
            if let Slot::Minus(_) = cell {
                *cell = Slot::Minus(-(kpos.len() as i64));
                kpos.push(x);
            }
        }
        Ok(TwoSidedTriplet {
            sigma_plus,
            sigma_minus,
            partition,
            ell,
            kpos,
            table,
        })
    }

    /// Draws a fresh triplet; each component gets its own child generator.
    pub fn sample(q: f64, epsilon: f64, rng: &mut SimRng) -> Result<Self> {
        let plus = OneSidedStream::new(q, fork(rng))?;
        let minus = OneSidedStream::new(q, fork(rng))?;
        let partition = sample_partition(q, epsilon, rng)?;
        Self::new(plus, minus, partition)
    }

    /// Identity streams with the empty partition.
    pub fn trivial(rng: &mut SimRng) -> Self {
        let plus = OneSidedStream::new(0.0, fork(rng)).expect("q = 0 is valid");
        let minus = OneSidedStream::new(0.0, fork(rng)).expect("q = 0 is valid");
        Self::new(plus, minus, PartitionSample::empty()).expect("streams share q")
    }

    pub fn q(&self) -> f64 {
        self.sigma_plus.q()
    }

    /// `ℓ_i` for `i >= 1`.
    pub fn ell(&self, i: u64) -> i64 {
        assert!(i >= 1);
        self.ell.get(i as usize - 1).copied().unwrap_or(i as i64)
    }

    /// `k_j` for `j <= 0`.
    pub fn k(&self, j: i64) -> i64 {
        assert!(j <= 0);
        self.kpos.get((-j) as usize).copied().unwrap_or(j)
    }

    pub fn locate(&self, x: i64) -> Slot {
        let ell_1 = self.ell(1);
        if x < ell_1 {
            Slot::Minus(x)
        } else if x > self.ell.len() as i64 {
            Slot::Plus(x as u64)
        } else {
            self.table[(x - ell_1) as usize]
        }
    }

    /// Value of the two-sided permutation at position `x`.
    pub fn value_at(&mut self, x: i64) -> i64 {
        match self.locate(x) {
            Slot::Plus(i) => self.sigma_plus.value(i as usize) as i64,
            Slot::Minus(j) => 1 - self.sigma_minus.value((1 - j) as usize) as i64,
        }
    }
}

/// Window `[lo, hi]` of the two-sided permutation, extending streams as needed.
pub fn assemble_two_sided(t: &mut TwoSidedTriplet, lo: i64, hi: i64) -> Result<PermWindow> {
    if !(lo <= 0 && 0 <= hi) {
        return Err(domain(format!("window [{lo}, {hi}] must contain 0")));
    }
    Ok(PermWindow {
        offset: lo,
        values: (lo..=hi).map(|x| t.value_at(x)).collect(),
    })
}

/// Anti-records of a stream (positions whose value is below every later
/// value), generated inductively: each one is the position of the smallest
/// value not yet seen. Stops after the first `count` positions exceeding
/// `after`.
pub fn anti_records(s: &mut OneSidedStream, after: usize, count: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    let mut seen: Vec<bool> = Vec::new();
    let mut covered = 0usize;
    let mut mex = 1u64;
    let mut beyond = 0usize;
    while beyond < count {
        let rho = s.position_of(mex)?;
        for p in covered + 1..=rho {
            let v = s.value(p) as usize;
            if seen.len() < v {
                seen.resize(v, false);
            }
            seen[v - 1] = true;
        }
        covered = covered.max(rho);
        out.push(rho);
        if rho > after {
            beyond += 1;
        }
        while seen.get(mex as usize - 1).copied().unwrap_or(false) {
            mex += 1;
        }
    }
    Ok(out)
}

/// Standard record representation read directly from the triplet, with
/// `depth` records on each side of slot 0.
pub fn srr_from_triplet(t: &mut TwoSidedTriplet, depth: usize) -> Result<RecordRepresentation> {
    if depth == 0 {
        return Err(domain("depth must be at least 1"));
    }
    let lambda_1 = t.partition.largest() as usize;
    let rhos = anti_records(&mut t.sigma_minus, lambda_1, depth)?;
    let first = rhos.iter().position(|&r| r > lambda_1).expect("anti_records stops past Λ_1");

    let mut indices = Vec::with_capacity(2 * depth);
    for &rho in rhos[first..first + depth].iter().rev() {
        indices.push(t.k(1 - rho as i64));
    }
    let mut best = 0;
    let mut i = 0u64;
    while indices.len() < 2 * depth {
        i += 1;
        let v = t.sigma_plus.value(i as usize);
        if v > best {
            best = v;
            indices.push(t.ell(i));
        }
    }
    let values = indices.iter().map(|&x| t.value_at(x)).collect();
    Ok(RecordRepresentation {
        indices,
        values,
        zero_slot: Some(depth - 1),
        complete: true,
    })
}
