use std::collections::BTreeMap;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::limits::{census, BallSignature};
use crate::permutations::{inversions, q_factorial, PermWindow};
use crate::rng::trial_rng;
use crate::trees::{build_bst, parse_tree};

use super::{chi_square_gof, kahan_sum, EmpiricalDist, TestReport};

/// Largest `n` accepted by [`oracle_enumerate`].
pub const ORACLE_LIMIT: usize = 7;

/// Exact Mallows laws of a small size.
#[derive(Debug, Clone)]
pub struct OracleLaws {
    pub n: usize,
    pub q: f64,
    /// Normalizing constant summed over all permutations.
    pub z_sum: f64,
    /// The same constant from the product formula.
    pub z_product: f64,
    /// Every permutation with its probability.
    pub perms: Vec<(Vec<i64>, f64)>,
    /// Law of the unlabeled search-tree shape, keyed by its parenthesized form.
    pub shapes: BTreeMap<String, f64>,
}

pub fn oracle_enumerate(n: usize, q: f64) -> Result<OracleLaws> {
    if n > ORACLE_LIMIT {
        return Err(Error::SizeGuard {
            size: n,
            limit: ORACLE_LIMIT,
        });
    }
    if !(q >= 0.0 && q.is_finite()) {
        return Err(domain(format!("q = {q} must be a non-negative real")));
    }
    let weighted: Vec<(Vec<i64>, f64)> = (1..=n as i64)
        .permutations(n)
        .map(|p| {
            let inv = inversions(&PermWindow::finite(p.clone()));
            (p, q.powi(inv as i32))
        })
        .collect();
    let z_sum = kahan_sum(weighted.iter().map(|(_, w)| *w));
    let perms: Vec<(Vec<i64>, f64)> = weighted.into_iter().map(|(p, w)| (p, w / z_sum)).collect();
    let mut shapes = BTreeMap::new();
    for (p, pr) in &perms {
        let key = build_bst(&PermWindow::finite(p.clone())).unlabeled().to_paren_string();
        *shapes.entry(key).or_insert(0.0) += pr;
    }
    Ok(OracleLaws {
        n,
        q,
        z_sum,
        z_product: q_factorial(n, q),
        perms,
        shapes,
    })
}

/// Expected radius-`r` ball census of a Mallows tree: the shape law mixed
/// with the census of each shape.
pub fn oracle_census_law(laws: &OracleLaws, r: usize) -> BTreeMap<BallSignature, f64> {
    let mut out = BTreeMap::new();
    for (shape, pr) in &laws.shapes {
        let tree = parse_tree(shape).expect("shapes are written by the tree printer");
        let c = census(&tree, r);
        for (sig, freq) in c.frequencies() {
            *out.entry(sig).or_insert(0.0) += pr * freq;
        }
    }
    out
}

/// `pmf` on `1, 2, ...` cut where the cumulative mass reaches `mass`, then
/// renormalized.
pub fn truncated_table(pmf: impl Fn(u64) -> f64, mass: f64) -> Result<Vec<(u64, f64)>> {
    const MAX_SUPPORT: u64 = 1 << 20;
    let mut table = Vec::new();
    let mut total = 0.0;
    let mut k = 1;
    while total < mass {
        if k > MAX_SUPPORT {
            return Err(domain("pmf does not reach the requested mass"));
        }
        let p = pmf(k);
        if p > 0.0 {
            table.push((k, p));
            total += p;
        }
        k += 1;
    }
    Ok(table.into_iter().map(|(k, p)| (k, p / total)).collect())
}

/// Size-biased law `l π(l) / µ` at `l`.
pub fn size_biased_pmf(table: &[(u64, f64)], l: u64) -> f64 {
    let mean = kahan_sum(table.iter().map(|&(k, p)| k as f64 * p));
    table
        .iter()
        .find(|&&(k, _)| k == l)
        .map_or(0.0, |&(k, p)| k as f64 * p / mean)
}

/// Sizes of the slot holding a uniformly chosen element and of the `r` slots
/// after it, among `slots` cyclically arranged slots with independent sizes
/// drawn from `table`, tested against the size-biased product law.
///
/// Choosing the element uniformly and rotating its slot to position 0 gives
/// the law conditioned on the element landing in slot 0.
pub fn size_biased_pick_law(
    table: &[(u64, f64)],
    r: usize,
    slots: usize,
    trials: u64,
    seed: u64,
    alpha: f64,
) -> Result<TestReport> {
    const MAX_TUPLES: usize = 1 << 20;
    if table.is_empty() || slots <= r {
        return Err(domain("need a non-empty table and more slots than r"));
    }
    if table.len().checked_pow(r as u32 + 1).is_none_or(|m| m > MAX_TUPLES) {
        return Err(Error::SizeGuard {
            size: table.len(),
            limit: MAX_TUPLES,
        });
    }
    let mut cdf = Vec::with_capacity(table.len());
    let mut acc = 0.0;
    for &(_, p) in table {
        acc += p;
        cdf.push(acc);
    }
    let draw = |rng: &mut crate::rng::SimRng| {
        let u: f64 = rng.random::<f64>() * acc;
        let i = cdf.partition_point(|&c| c <= u).min(table.len() - 1);
        table[i].0
    };
    let observed = (0..trials)
        .into_par_iter()
        .fold(EmpiricalDist::new, |mut d, t| {
            let mut rng = trial_rng(seed, t);
            let sizes: Vec<u64> = (0..slots).map(|_| draw(&mut rng)).collect();
            let total: u64 = sizes.iter().sum();
            let mut u = rng.random_range(0..total);
            let mut j = 0;
            while u >= sizes[j] {
                u -= sizes[j];
                j += 1;
            }
            d.add((0..=r).map(|i| sizes[(j + i) % slots]).collect::<Vec<u64>>());
            d
        })
        .reduce(EmpiricalDist::new, EmpiricalDist::merge);

    let mean = kahan_sum(table.iter().map(|&(k, p)| k as f64 * p));
    let expected: Vec<(Vec<u64>, f64)> = (0..=r)
        .map(|_| table.iter())
        .multi_cartesian_product()
        .map(|tuple| {
            let key: Vec<u64> = tuple.iter().map(|&&(k, _)| k).collect();
            let pr = tuple
                .iter()
                .enumerate()
                .map(|(i, &&(k, p))| if i == 0 { k as f64 * p / mean } else { p })
                .product();
            (key, pr)
        })
        .collect();
    Ok(chi_square_gof(&observed, &expected, alpha)?
        .named("size_biased_pick")
        .param("r", r)
        .param("slots", slots)
        .seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{GeomVariant, Geometric};
    use crate::permutations::exact_pmf;
    use crate::stats::{DEFAULT_ALPHA, TAIL_MASS};

    #[test]
    fn normalizers_agree() {
        for n in 1..=ORACLE_LIMIT {
            for &q in &[0.2, 0.5, 0.8] {
                let laws = oracle_enumerate(n, q).unwrap();
                assert!((laws.z_sum - laws.z_product).abs() <= 1e-12 * laws.z_product);
            }
        }
        let two = oracle_enumerate(2, 0.3).unwrap();
        assert!((two.z_sum - 1.3).abs() < 1e-15);
        assert!((oracle_enumerate(3, 0.5).unwrap().z_product - 2.625).abs() < 1e-15);
        assert!(matches!(oracle_enumerate(8, 0.5), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn permutation_law_matches_closed_form() {
        let laws = oracle_enumerate(5, 0.7).unwrap();
        for (p, pr) in &laws.perms {
            let direct = exact_pmf(5, 0.7, &PermWindow::finite(p.clone())).unwrap();
            assert!((pr - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_law_at_q_zero_is_the_right_path() {
        let laws = oracle_enumerate(3, 0.0).unwrap();
        assert_eq!(laws.shapes.len(), 5);
        assert_eq!(laws.shapes["(·)*((·)*((·)*(·)))"], 1.0);
        let total: f64 = oracle_enumerate(6, 0.4).unwrap().shapes.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn census_law_sums_to_one() {
        let laws = oracle_enumerate(5, 0.5).unwrap();
        let total: f64 = oracle_census_law(&laws, 1).values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_biased_formula() {
        let g = Geometric::new(GeomVariant::GeomOne, 0.5).unwrap();
        let table = truncated_table(|k| g.pmf(k), 1.0 - 1e-15).unwrap();
        assert!((size_biased_pmf(&table, 1) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn point_mass_stays_put() {
        let r = size_biased_pick_law(&[(1, 1.0)], 1, 10, 1000, 3, DEFAULT_ALPHA).unwrap();
        assert!(r.pass);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn geometric_slots_pass() {
        let g = Geometric::new(GeomVariant::GeomOne, 0.5).unwrap();
        let table = truncated_table(|k| g.pmf(k), TAIL_MASS).unwrap();
        let r = size_biased_pick_law(&table, 1, 200, 20_000, 4, DEFAULT_ALPHA).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
