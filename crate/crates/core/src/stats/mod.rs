//! Empirical distributions, goodness-of-fit tests, distances and exact
//! enumeration oracles.

mod oracle;
mod report;

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Error, Result};

pub use oracle::{
    oracle_census_law, oracle_enumerate, size_biased_pick_law, size_biased_pmf, truncated_table,
    OracleLaws, ORACLE_LIMIT,
};
pub use report::TestReport;

/// Default significance level of a single test.
pub const DEFAULT_ALPHA: f64 = 1e-3;
/// Minimum expected count of a retained chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;
/// Cumulative mass kept when an infinite support is truncated.
pub const TAIL_MASS: f64 = 0.9999;

/// Counts of outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDist<K: Ord> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for EmpiricalDist<K> {
    fn default() -> Self {
        EmpiricalDist {
            counts: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<K: Ord> EmpiricalDist<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K) {
        self.add_n(key, 1);
    }

    pub fn add_n(&mut self, key: K, n: u64) {
        if n > 0 {
            *self.counts.entry(key).or_insert(0) += n;
            self.total += n;
        }
    }

    /// Adds another counter into this one.
    pub fn merge(mut self, other: Self) -> Self {
        for (k, c) in other.counts {
            self.add_n(k, c);
        }
        self
    }

    pub fn count(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of distinct outcomes.
    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn frequency(&self, key: &K) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(key) as f64 / self.total as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }

    pub fn mean_by(&self, f: impl Fn(&K) -> f64) -> f64 {
        let s = kahan_sum(self.counts.iter().map(|(k, &c)| f(k) * c as f64));
        s / self.total as f64
    }

    /// Pushes the counts forward through `f`.
    pub fn map_keys<L: Ord>(&self, f: impl Fn(&K) -> L) -> EmpiricalDist<L> {
        let mut out = EmpiricalDist::new();
        for (k, &c) in &self.counts {
            out.add_n(f(k), c);
        }
        out
    }
}

impl<K: Ord> FromIterator<K> for EmpiricalDist<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut d = EmpiricalDist::new();
        for k in iter {
            d.add(k);
        }
        d
    }
}

/// Compensated sum.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Chi-square goodness of fit of `e` against the law listing `expected`.
///
/// Outcomes are binned in order of decreasing probability, and consecutive
/// bins are merged until each expects at least [`MIN_EXPECTED`] counts. Mass
/// missing from `expected` and observations outside it share an overflow bin.
/// The report's statistic is the chi-square value and its threshold the
/// critical value at level `alpha`.
pub fn chi_square_gof<K: Ord>(
    e: &EmpiricalDist<K>,
    expected: &[(K, f64)],
    alpha: f64,
) -> Result<TestReport> {
    if e.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let n = e.total() as f64;
    let mut order: Vec<usize> = (0..expected.len()).collect();
    order.sort_by(|&a, &b| expected[b].1.total_cmp(&expected[a].1));

    let listed_mass = kahan_sum(expected.iter().map(|(_, p)| *p));
    let listed_obs: u64 = expected.iter().map(|(k, _)| e.count(k)).sum();
    let overflow = ((1.0 - listed_mass).max(0.0) * n, (e.total() - listed_obs) as f64);

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for &i in &order {
        let (k, p) = &expected[i];
        acc.0 += p * n;
        acc.1 += e.count(k) as f64;
        if acc.0 >= MIN_EXPECTED {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    acc.0 += overflow.0;
    acc.1 += overflow.1;
    if acc.0 >= MIN_EXPECTED || bins.is_empty() {
        bins.push(acc);
    } else if acc != (0.0, 0.0) {
        let last = bins.last_mut().expect("non-empty");
        last.0 += acc.0;
        last.1 += acc.1;
    }

    // observations the law calls impossible
    let impossible = expected
        .iter()
        .filter(|(_, p)| *p <= 0.0)
        .map(|(k, _)| e.count(k))
        .sum::<u64>() as f64
        + if overflow.0 > 0.0 { 0.0 } else { overflow.1 };
    let outcomes = expected.iter().filter(|(_, p)| *p > 0.0).count() + usize::from(overflow.0 > 0.0);
    let (statistic, df, p_value, critical) = if bins.len() < 2 {
        if outcomes > 1 {
            return Err(Error::Degenerate);
        }
        let stat = if impossible > 0.0 { f64::INFINITY } else { 0.0 };
        (stat, 0usize, if impossible > 0.0 { 0.0 } else { 1.0 }, 0.0)
    } else {
        let stat = if impossible > 0.0 {
            f64::INFINITY
        } else {
            kahan_sum(bins.iter().map(|&(ex, ob)| (ob - ex) * (ob - ex) / ex))
        };
        let df = bins.len() - 1;
        let dist = ChiSquared::new(df as f64).map_err(|e| domain(e.to_string()))?;
        let p = if stat.is_finite() { dist.sf(stat) } else { 0.0 };
        (stat, df, p, dist.inverse_cdf(1.0 - alpha))
    };
    Ok(TestReport::new("chi_square_gof")
        .param("df", df)
        .param("p_value", p_value)
        .param("alpha", alpha)
        .verdict(statistic, critical, statistic <= critical)
        .sample_size(e.total()))
}

/// Half the L1 distance between the normalized counts.
pub fn tv_distance<K: Ord>(a: &EmpiricalDist<K>, b: &EmpiricalDist<K>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let (na, nb) = (a.total() as f64, b.total() as f64);
    let only_b = b
        .iter()
        .filter(|(k, _)| a.count(k) == 0)
        .map(|(_, c)| c as f64 / nb);
    let shared = a.iter().map(|(k, c)| (c as f64 / na - b.count(k) as f64 / nb).abs());
    Ok(0.5 * kahan_sum(shared.chain(only_b)))
}

/// Half the L1 distance between an empirical law and an exact one given on
/// a (possibly truncated) support; mass missing from `exact` counts fully.
pub fn tv_to_exact<K: Ord>(e: &EmpiricalDist<K>, exact: &BTreeMap<K, f64>) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let n = e.total() as f64;
    let listed = kahan_sum(exact.values().copied());
    let on_support = exact.iter().map(|(k, p)| (e.count(k) as f64 / n - p).abs());
    let off_support = e
        .iter()
        .filter(|(k, _)| !exact.contains_key(k))
        .map(|(_, c)| c as f64 / n);
    let missing = (1.0 - listed).max(0.0);
    Ok(0.5 * (kahan_sum(on_support.chain(off_support)) + missing).min(2.0))
}

/// Significance level of each of `tests` tests sharing `alpha` in total.
pub fn bonferroni(alpha: f64, tests: usize) -> f64 {
    alpha / tests.max(1) as f64
}
