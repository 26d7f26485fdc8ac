use std::collections::BTreeMap;

use mallows::distributions::{GeomVariant, Geometric};
use mallows::limits::{redwood_ball_law, rooted_ball_law};
use mallows::permutations::{finite_from_stream, OneSidedStream};
use mallows::rng::trial_rng;
use mallows::stats::{
    chi_square_gof, oracle_census_law, oracle_enumerate, size_biased_pick_law, truncated_table,
    tv_to_exact, EmpiricalDist, DEFAULT_ALPHA, TAIL_MASS,
};
use mallows::trees::{build_bst, mirror, sample_redwood_two_sided};

fn shape_sample(q: f64, n: usize, trials: u64, seed: u64, flip: bool) -> EmpiricalDist<String> {
    (0..trials)
        .map(|t| {
            let mut s = OneSidedStream::new(q, trial_rng(seed, t)).unwrap();
            let tree = build_bst(&finite_from_stream(&mut s, n));
            let tree = if flip { mirror(&tree) } else { tree };
            tree.unlabeled().to_paren_string()
        })
        .collect()
}

#[test]
fn tree_shapes_match_enumeration() {
    for q in [0.3, 0.7] {
        let laws = oracle_enumerate(5, q).unwrap();
        let expected: Vec<(String, f64)> = laws.shapes.into_iter().collect();
        let r = chi_square_gof(&shape_sample(q, 5, 50_000, 1, false), &expected, DEFAULT_ALPHA).unwrap();
        assert!(r.pass, "{}", r.to_json_line());
    }
}

#[test]
fn mirrored_shapes_follow_the_inverse_parameter() {
    // weights 2^Inv, un-normalized enumeration at q = 2
    let laws = oracle_enumerate(4, 2.0).unwrap();
    let expected: Vec<(String, f64)> = laws.shapes.into_iter().collect();
    let r = chi_square_gof(&shape_sample(0.5, 4, 50_000, 2, true), &expected, DEFAULT_ALPHA).unwrap();
    assert!(r.pass, "{}", r.to_json_line());
}

#[test]
fn root_ball_of_small_trees_matches_enumeration() {
    let laws = oracle_enumerate(6, 0.5).unwrap();
    let law = rooted_ball_law(0.5, 2, Some(6), 40_000, 3).unwrap();
    // root balls of n = 6 are a push-forward of the shape law
    let mut exact: BTreeMap<_, f64> = BTreeMap::new();
    for (shape, p) in &laws.shapes {
        let t = mallows::trees::parse_tree(shape).unwrap();
        let b = mallows::limits::ball(&t, t.root().unwrap(), 2).unwrap();
        *exact.entry(mallows::limits::signature(&b)).or_default() += p;
    }
    let expected: Vec<_> = exact.into_iter().collect();
    let r = chi_square_gof(&law.to_dist(), &expected, DEFAULT_ALPHA).unwrap();
    assert!(r.pass, "{}", r.to_json_line());
}

#[test]
fn census_law_of_small_trees_matches_enumeration() {
    let laws = oracle_enumerate(5, 0.4).unwrap();
    let exact = oracle_census_law(&laws, 1);
    let total: f64 = exact.values().sum();
    assert!((total - 1.0).abs() < 1e-12);
    // a uniform vertex of a sampled tree
    let d: EmpiricalDist<_> = (0..40_000u64)
        .map(|t| {
            let mut rng = trial_rng(5, t);
            let mut s = OneSidedStream::new(0.4, rng.clone()).unwrap();
            let tree = build_bst(&finite_from_stream(&mut s, 5));
            use rand::Rng;
            let v = mallows::trees::NodeId(rng.random_range(0..5));
            mallows::limits::signature(&mallows::limits::ball(&tree, v, 1).unwrap())
        })
        .collect();
    let expected: Vec<_> = exact.into_iter().collect();
    let r = chi_square_gof(&d, &expected, DEFAULT_ALPHA).unwrap();
    assert!(r.pass, "{}", r.to_json_line());
}

#[test]
fn two_sided_marginals_fit_geometric_laws() {
    let q = 0.6;
    let d: EmpiricalDist<Vec<usize>> = (0..20_000u64)
        .map(|t| sample_redwood_two_sided(q, 1, &mut trial_rng(6, t)).unwrap().sizes())
        .collect();
    let zero = Geometric::new(GeomVariant::GeomZero, 1.0 - q).unwrap();
    let biased = Geometric::new(GeomVariant::SizeBiased, 1.0 - q).unwrap();
    for (i, law) in [(0, zero), (1, biased), (2, zero)] {
        let r = chi_square_gof(&d.map_keys(|v| v[i] as u64), &law.truncated_support(TAIL_MASS), DEFAULT_ALPHA / 3.0)
            .unwrap();
        assert!(r.pass, "slot {i}: {}", r.to_json_line());
    }
}

#[test]
fn redwood_ball_law_is_exact_at_q_zero() {
    let c = redwood_ball_law(0.0, 2, 1_000, 7).unwrap();
    assert_eq!(c.counts.len(), 1);
    let sig = c.counts.keys().next().unwrap();
    assert_eq!(sig.vertex_count(), 5);
}

#[test]
fn size_biased_pick_limit_law() {
    let g = Geometric::new(GeomVariant::GeomOne, 0.5).unwrap();
    let table = truncated_table(|k| g.pmf(k), TAIL_MASS).unwrap();
    let r = size_biased_pick_law(&table, 1, 1_000, 100_000, 8, DEFAULT_ALPHA).unwrap();
    assert!(r.pass, "{}", r.to_json_line());
}

#[test]
fn geometric_samples_fail_a_wrong_law() {
    let g = Geometric::new(GeomVariant::GeomOne, 0.5).unwrap();
    let wrong = Geometric::new(GeomVariant::GeomOne, 0.3).unwrap();
    let d: EmpiricalDist<u64> = (0..100_000u64).map(|t| g.sample(&mut trial_rng(9, t))).collect();
    let r = chi_square_gof(&d, &wrong.truncated_support(TAIL_MASS), DEFAULT_ALPHA).unwrap();
    assert!(!r.pass);
    assert!(chi_square_gof(&d, &g.truncated_support(TAIL_MASS), DEFAULT_ALPHA).unwrap().pass);
}

#[test]
fn finite_laws_agree_with_exact_tv() {
    let laws = oracle_enumerate(4, 0.5).unwrap();
    let d: EmpiricalDist<Vec<i64>> = (0..100_000u64)
        .map(|t| {
            let mut s = OneSidedStream::new(0.5, trial_rng(10, t)).unwrap();
            finite_from_stream(&mut s, 4).values
        })
        .collect();
    let exact: BTreeMap<Vec<i64>, f64> = laws.perms.into_iter().collect();
    assert!(tv_to_exact(&d, &exact).unwrap() < 0.01);
}
