//! Verification suites.
//!
//! Each suite returns one [`TestReport`] per checked claim. Suites are pure
//! functions of their parameters and master seed; every report draws from its
//! own stream derived from the master seed and a label.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::distributions::{GeomVariant, Geometric, DEFAULT_PARTITION_EPSILON};
use crate::error::{domain, Result};
use crate::limits::{
    all_rooted_trees, apply_phi, ball, census, ghp_distortion, isomorphic, phi_invariance_test,
    redwood_ball_law, rooted_ball_law, signature, ssc_deviation, BallSignature, SpacedSequence,
    DEFAULT_PAIR_BUDGET, PHI_TV_THRESHOLD,
};
use crate::permutations::{
    assemble_two_sided, finite_from_stream, free_space_profile, free_spaces, incomplete_left_subtrees,
    records, srr_from_triplet, OneSidedStream, PermWindow, TwoSidedTriplet,
};
use crate::rng::{derive_seed, trial_rng};
use crate::stats::{
    bonferroni, chi_square_gof, oracle_enumerate, tv_distance, tv_to_exact, EmpiricalDist,
    TestReport, DEFAULT_ALPHA, TAIL_MASS,
};
use crate::trees::{
    build_bst, build_bst_by_insertion, build_bst_by_splitting, build_redwood,
    free_space_set_difference, mirror, sample_redwood_direct, sample_redwood_two_sided, BinaryTree,
    NodeId,
};

/// Family-wise false-failure rate shared by the tests of one suite.
pub const FAMILY_ALPHA: f64 = 0.01;

/// Total variation tolerance for comparisons between two empirical laws.
pub const TV_TOLERANCE: f64 = 0.02;

/// Per-test level for a suite of `tests` chi-square tests.
pub fn suite_alpha(tests: usize) -> f64 {
    bonferroni(FAMILY_ALPHA, tests).min(DEFAULT_ALPHA)
}

/// Command-line values that replace suite defaults when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub q: Option<f64>,
    pub n: Option<usize>,
    pub radius: Option<usize>,
    pub depth: Option<usize>,
    pub trials: Option<u64>,
    pub window: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Imt,
    Local,
    Rooted,
    Ghp,
    Ssc,
    Phi,
    Records,
    Structural,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Oracle,
        Suite::Imt,
        Suite::Local,
        Suite::Rooted,
        Suite::Ghp,
        Suite::Ssc,
        Suite::Phi,
        Suite::Records,
        Suite::Structural,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Imt => "imt",
            Suite::Local => "local",
            Suite::Rooted => "rooted",
            Suite::Ghp => "ghp",
            Suite::Ssc => "ssc",
            Suite::Phi => "phi",
            Suite::Records => "records",
            Suite::Structural => "structural",
        }
    }
}

/// Runs one suite with its defaults adjusted by `o`.
pub fn run_suite(suite: Suite, o: &Overrides, seed: u64) -> Result<Vec<TestReport>> {
    if let Some(q) = o.q {
        if !(0.0..1.0).contains(&q) {
            return Err(domain(format!("q = {q} must lie in [0, 1) for verification")));
        }
    }
    match suite {
        Suite::Oracle => {
            let mut p = OracleParams::default();
            p.qs = o.q.map_or(p.qs, |q| vec![q]);
            p.ns = o.n.map_or(p.ns, |n| vec![n]);
            p.trials = o.trials.unwrap_or(p.trials);
            oracle_suite(&p, seed)
        }
        Suite::Imt => {
            let mut p = ImtParams::default();
            p.q = o.q.unwrap_or(p.q);
            p.radius = o.radius.unwrap_or(p.radius);
            p.trials = o.trials.unwrap_or(p.trials);
            imt_suite(&p, seed)
        }
        Suite::Local => {
            let mut p = LocalParams::default();
            p.qs = o.q.map_or(p.qs, |q| vec![q]);
            p.radii = o.radius.map_or(p.radii, |r| vec![r]);
            p.n = o.n.unwrap_or(p.n);
            p.trials = o.trials.unwrap_or(p.trials);
            local_suite(&p, seed)
        }
        Suite::Rooted => {
            let mut p = RootedParams::default();
            p.q = o.q.unwrap_or(p.q);
            p.radius = o.radius.unwrap_or(p.radius);
            p.n = o.n.unwrap_or(p.n);
            p.trials = o.trials.unwrap_or(p.trials);
            rooted_suite(&p, seed)
        }
        Suite::Ghp => {
            let mut p = GhpParams::default();
            p.q = o.q.unwrap_or(p.q);
            p.n_large = o.n.unwrap_or(p.n_large);
            p.trials = o.trials.map_or(p.trials, |t| t as usize);
            ghp_suite(&p, seed)
        }
        Suite::Ssc => {
            let mut p = SscParams::default();
            p.q = o.q.unwrap_or(p.q);
            p.n = o.n.unwrap_or(p.n);
            p.depth = o.depth.unwrap_or(p.depth);
            p.trials = o.trials.map_or(p.trials, |t| t as usize);
            ssc_suite(&p, seed)
        }
        Suite::Phi => {
            let mut p = PhiParams::default();
            if let Some(q) = o.q {
                p.q = q;
            }
            if let Some(n) = o.n {
                p.ns = vec![n as u64];
                p.power_n = n as u64;
            }
            p.window = o.window.unwrap_or(p.window);
            p.trials = o.trials.unwrap_or(p.trials);
            phi_suite(&p, seed)
        }
        Suite::Records => {
            let mut p = RecordsParams::default();
            p.qs = o.q.map_or(p.qs, |q| vec![q]);
            p.n = o.n.unwrap_or(p.n);
            p.streams = o.trials.map_or(p.streams, |t| t as usize);
            records_suite(&p, seed)
        }
        Suite::Structural => structural_suite(seed),
    }
}

/// Every suite in order.
pub fn run_all(o: &Overrides, seed: u64) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    for s in Suite::ALL {
        out.extend(run_suite(s, o, seed)?);
    }
    Ok(out)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, u64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_millis() as u64))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mallows_tree(q: f64, n: usize, seed: u64, t: u64) -> Result<BinaryTree> {
    let mut s = OneSidedStream::new(q, trial_rng(seed, t))?;
    Ok(build_bst(&finite_from_stream(&mut s, n)))
}

fn collect<K: Ord + Send>(
    trials: u64,
    one: impl Fn(u64) -> Result<K> + Sync + Send,
) -> Result<EmpiricalDist<K>> {
    (0..trials)
        .into_par_iter()
        .try_fold(EmpiricalDist::new, |mut d, t| {
            d.add(one(t)?);
            Ok::<_, crate::Error>(d)
        })
        .try_reduce(EmpiricalDist::new, |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone)]
pub struct OracleParams {
    pub qs: Vec<f64>,
    pub ns: Vec<usize>,
    pub trials: u64,
    /// Per-test level; `None` splits [`FAMILY_ALPHA`] over the suite.
    pub alpha: Option<f64>,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            qs: vec![0.2, 0.5, 0.8],
            ns: vec![2, 3, 4, 5],
            trials: 200_000,
            alpha: None,
        }
    }
}

/// Law of `σ_n` read off the one-sided stream against exact enumeration,
/// plus agreement of the two normalizing constants.
pub fn oracle_suite(p: &OracleParams, seed: u64) -> Result<Vec<TestReport>> {
    let alpha = p.alpha.unwrap_or_else(|| suite_alpha(p.qs.len() * p.ns.len()));
    let mut out = Vec::new();
    for &n in &p.ns {
        for &q in &p.qs {
            let s = derive_seed(seed, &format!("oracle/{n}/{q}"));
            let ((laws, report), ms) = timed(|| {
                let laws = oracle_enumerate(n, q)?;
                let d = collect(p.trials, |t| {
                    let mut st = OneSidedStream::new(q, trial_rng(s, t))?;
                    Ok(finite_from_stream(&mut st, n).values)
                })?;
                let r = chi_square_gof(&d, &laws.perms, alpha)?;
                Ok((laws, r))
            })?;
            out.push(
                report
                    .named("oracle_permutation_law")
                    .param("n", n)
                    .param("q", q)
                    .seed(s)
                    .runtime_ms(ms),
            );
            let rel = (laws.z_sum - laws.z_product).abs() / laws.z_product;
            out.push(
                TestReport::new("oracle_partition_function")
                    .param("n", n)
                    .param("q", q)
                    .param("z_sum", laws.z_sum)
                    .param("z_product", laws.z_product)
                    .verdict(rel, 1e-12, rel <= 1e-12)
                    .sample_size(laws.perms.len() as u64)
                    .seed(s),
            );
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ImtParams {
    pub q: f64,
    pub radius: usize,
    pub trials: u64,
    pub alpha: Option<f64>,
}

impl Default for ImtParams {
    fn default() -> Self {
        ImtParams {
            q: 0.5,
            radius: 2,
            trials: 100_000,
            alpha: None,
        }
    }
}

fn product_law(q: f64, radius: usize, keys: impl Iterator<Item = Vec<usize>>) -> Result<BTreeMap<Vec<usize>, f64>> {
    let zero = Geometric::new(GeomVariant::GeomZero, 1.0 - q)?;
    let biased = Geometric::new(GeomVariant::SizeBiased, 1.0 - q)?;
    Ok(keys
        .map(|k| {
            let p = k
                .iter()
                .enumerate()
                .map(|(i, &x)| if i == radius { biased.pmf(x as u64) } else { zero.pmf(x as u64) })
                .product();
            (k, p)
        })
        .collect())
}

/// Left subtree sizes along the spine of the limiting two-sided tree: the
/// distinguished one is size-biased geometric, the others geometric, and the
/// construction from a sampled two-sided permutation gives the same joint law.
pub fn imt_suite(p: &ImtParams, seed: u64) -> Result<Vec<TestReport>> {
    let r = p.radius;
    let k_range: Vec<i64> = (-(r as i64)..=r as i64).collect();
    let alpha = p.alpha.unwrap_or_else(|| suite_alpha(k_range.len()));
    let mut out = Vec::new();

    let s_direct = derive_seed(seed, "imt/direct");
    let (direct, ms) = timed(|| {
        collect(p.trials, |t| {
            Ok(sample_redwood_direct(p.q, r, &mut trial_rng(s_direct, t))?.sizes())
        })
    })?;
    let zero = Geometric::new(GeomVariant::GeomZero, 1.0 - p.q)?;
    let biased = Geometric::new(GeomVariant::SizeBiased, 1.0 - p.q)?;
    for (i, &k) in k_range.iter().enumerate() {
        let law = if k == 0 { &biased } else { &zero };
        let marginal = direct.map_keys(|v| v[i] as u64);
        let report = chi_square_gof(&marginal, &law.truncated_support(TAIL_MASS), alpha)?;
        out.push(
            report
                .named("imt_spine_size")
                .param("q", p.q)
                .param("k", k)
                .param("law", if k == 0 { "size_biased_geometric" } else { "geometric" })
                .seed(s_direct)
                .runtime_ms(ms),
        );
    }

    let s_two = derive_seed(seed, "imt/two_sided");
    let s_null = derive_seed(seed, "imt/null");
    let ((two, null), ms) = timed(|| {
        let two = collect(p.trials, |t| {
            Ok(sample_redwood_two_sided(p.q, r, &mut trial_rng(s_two, t))?.sizes())
        })?;
        let null = collect(p.trials, |t| {
            Ok(sample_redwood_direct(p.q, r, &mut trial_rng(s_null, t))?.sizes())
        })?;
        Ok((two, null))
    })?;
    let tv = tv_distance(&two, &direct)?;
    let floor = tv_distance(&null, &direct)?;
    let exact_two = product_law(p.q, r, two.iter().map(|(k, _)| k.clone()))?;
    let exact_direct = product_law(p.q, r, direct.iter().map(|(k, _)| k.clone()))?;
    let max_marginal = (0..k_range.len())
        .map(|i| {
            tv_distance(&two.map_keys(|v| v[i]), &direct.map_keys(|v| v[i]))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(
        TestReport::new("imt_joint_two_sided")
            .param("q", p.q)
            .param("radius", r)
            .param("support_size", two.support_size().max(direct.support_size()))
            .param("tv_two_sided_exact", tv_to_exact(&two, &exact_two)?)
            .param("tv_direct_exact", tv_to_exact(&direct, &exact_direct)?)
            .param("tv_direct_vs_direct", floor)
            .param("max_marginal_tv", max_marginal)
            .verdict(tv, TV_TOLERANCE, tv <= TV_TOLERANCE)
            .sample_size(p.trials)
            .seed(s_two)
            .runtime_ms(ms),
    );
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LocalParams {
    pub qs: Vec<f64>,
    pub radii: Vec<usize>,
    pub n: usize,
    pub trials: u64,
}

impl Default for LocalParams {
    fn default() -> Self {
        LocalParams {
            qs: vec![0.3, 0.5, 0.8],
            radii: vec![1, 2],
            n: 100_000,
            trials: 100_000,
        }
    }
}

/// Ball census of one large Mallows tree against the ball law around a
/// uniform vertex of the limiting two-sided tree.
pub fn local_suite(p: &LocalParams, seed: u64) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    for &q in &p.qs {
        let s_tree = derive_seed(seed, &format!("local/tree/{q}"));
        let tree = mallows_tree(q, p.n, s_tree, 0)?;
        for &r in &p.radii {
            let s_law = derive_seed(seed, &format!("local/law/{q}/{r}"));
            let (tv, ms) = timed(|| {
                let c = census(&tree, r);
                let law = redwood_ball_law(q, r, p.trials, s_law)?;
                tv_distance(&c.to_dist(), &law.to_dist())
            })?;
            out.push(
                TestReport::new("local_census")
                    .param("q", q)
                    .param("radius", r)
                    .param("n", p.n)
                    .param("tree_seed", s_tree)
                    .verdict(tv, TV_TOLERANCE, tv <= TV_TOLERANCE)
                    .sample_size(p.trials)
                    .seed(s_law)
                    .runtime_ms(ms),
            );
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RootedParams {
    pub q: f64,
    pub radius: usize,
    pub n: usize,
    pub trials: u64,
}

impl Default for RootedParams {
    fn default() -> Self {
        RootedParams {
            q: 0.5,
            radius: 2,
            n: 10_000,
            trials: 10_000,
        }
    }
}

/// Root ball of a finite Mallows tree against that of the one-sided
/// infinite tree.
pub fn rooted_suite(p: &RootedParams, seed: u64) -> Result<Vec<TestReport>> {
    let s_finite = derive_seed(seed, "rooted/finite");
    let s_limit = derive_seed(seed, "rooted/limit");
    let (tv, ms) = timed(|| {
        let finite = rooted_ball_law(p.q, p.radius, Some(p.n), p.trials, s_finite)?;
        let limit = rooted_ball_law(p.q, p.radius, None, p.trials, s_limit)?;
        tv_distance(&finite.to_dist(), &limit.to_dist())
    })?;
    Ok(vec![TestReport::new("rooted_ball")
        .param("q", p.q)
        .param("radius", p.radius)
        .param("n", p.n)
        .param("limit_seed", s_limit)
        .verdict(tv, TV_TOLERANCE, tv <= TV_TOLERANCE)
        .sample_size(p.trials)
        .seed(s_finite)
        .runtime_ms(ms)])
}

#[derive(Debug, Clone)]
pub struct GhpParams {
    pub q: f64,
    pub n_small: usize,
    pub n_large: usize,
    pub trials: usize,
    pub pair_budget: u64,
    pub tolerance: f64,
}

impl Default for GhpParams {
    fn default() -> Self {
        GhpParams {
            q: 0.5,
            n_small: 1_000,
            n_large: 100_000,
            trials: 20,
            pair_budget: DEFAULT_PAIR_BUDGET,
            tolerance: 0.05,
        }
    }
}

fn median_distortion(q: f64, n: usize, trials: usize, budget: u64, seed: u64) -> Result<Vec<f64>> {
    (0..trials as u64)
        .map(|t| {
            let tree = mallows_tree(q, n, seed, t)?;
            let mut rng = trial_rng(seed ^ 0x5eed, t);
            Ok(ghp_distortion(&tree, q, budget, &mut rng))
        })
        .collect()
}

/// Distortion of the spine-order correspondence between a rescaled Mallows
/// tree and the unit interval: small at large `n`, decreasing in `n`, and
/// zero on the path.
pub fn ghp_suite(p: &GhpParams, seed: u64) -> Result<Vec<TestReport>> {
    let s_small = derive_seed(seed, "ghp/small");
    let s_large = derive_seed(seed, "ghp/large");
    let ((small, large), ms) = timed(|| {
        Ok((
            median_distortion(p.q, p.n_small, p.trials, p.pair_budget, s_small)?,
            median_distortion(p.q, p.n_large, p.trials, p.pair_budget, s_large)?,
        ))
    })?;
    let (m_small, m_large) = (median(small), median(large));
    let mut out = vec![TestReport::new("ghp_distortion")
        .param("q", p.q)
        .param("n_small", p.n_small)
        .param("n_large", p.n_large)
        .param("median_small", m_small)
        .param("pair_budget", p.pair_budget)
        .verdict(m_large, p.tolerance, m_large <= p.tolerance && m_large < m_small)
        .sample_size(p.trials as u64)
        .seed(s_large)
        .runtime_ms(ms)];
    let s_path = derive_seed(seed, "ghp/path");
    let path = mallows_tree(0.0, p.n_large, s_path, 0)?;
    let d = ghp_distortion(&path, 0.0, p.pair_budget, &mut trial_rng(s_path, 1));
    out.push(
        TestReport::new("ghp_path")
            .param("q", 0.0)
            .param("n", p.n_large)
            .verdict(d, 0.0, d == 0.0)
            .sample_size(1)
            .seed(s_path),
    );
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SscParams {
    pub q: f64,
    pub depth: usize,
    pub n: usize,
    pub trials: usize,
    pub tolerance: f64,
    pub required: usize,
}

impl Default for SscParams {
    fn default() -> Self {
        SscParams {
            q: 0.5,
            depth: 3,
            n: 100_000,
            trials: 20,
            tolerance: 0.01,
            required: 19,
        }
    }
}

/// Subtree-size ratios of Mallows trees against the indicator of the
/// rightmost path. The statistic is the number of trials within tolerance.
pub fn ssc_suite(p: &SscParams, seed: u64) -> Result<Vec<TestReport>> {
    let s = derive_seed(seed, "ssc");
    let (devs, ms) = timed(|| {
        (0..p.trials as u64)
            .map(|t| ssc_deviation(&mallows_tree(p.q, p.n, s, t)?, p.depth))
            .collect::<Result<Vec<f64>>>()
    })?;
    let within = devs.iter().filter(|&&d| d <= p.tolerance).count();
    let required = p.required.min(p.trials);
    Ok(vec![TestReport::new("ssc_deviation")
        .param("q", p.q)
        .param("depth", p.depth)
        .param("n", p.n)
        .param("tolerance", p.tolerance)
        .param("max_deviation", devs.iter().copied().fold(0.0, f64::max))
        .param("rule", "statistic >= threshold")
        .verdict(within as f64, required as f64, within >= required)
        .sample_size(p.trials as u64)
        .seed(s)
        .runtime_ms(ms)])
}

#[derive(Debug, Clone)]
pub struct PhiParams {
    pub q: f64,
    pub ns: Vec<u64>,
    pub window: usize,
    pub trials: u64,
    pub power_n: u64,
    pub perturbed_p: f64,
    pub power_threshold: f64,
}

impl Default for PhiParams {
    fn default() -> Self {
        PhiParams {
            q: 0.5,
            ns: vec![1, 3, 10],
            window: 1,
            trials: 100_000,
            power_n: 3,
            perturbed_p: 0.3,
            power_threshold: 0.05,
        }
    }
}

/// Invariance of iid geometric gaps under the rearrangements, and detection
/// of a perturbed gap.
pub fn phi_suite(p: &PhiParams, seed: u64) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    for &n in &p.ns {
        let s = derive_seed(seed, &format!("phi/{n}"));
        let (r, ms) = timed(|| phi_invariance_test(p.q, n, p.window, p.trials, s, None))?;
        out.push(r.runtime_ms(ms));
    }
    let s = derive_seed(seed, "phi/power");
    let (r, ms) = timed(|| {
        phi_invariance_test(p.q, p.power_n, p.window, p.trials, s, Some(p.perturbed_p))
    })?;
    let tv = r.statistic;
    out.push(
        r.named("phi_power")
            .param("invariance_threshold", PHI_TV_THRESHOLD)
            .param("rule", "statistic > threshold")
            .verdict(tv, p.power_threshold, tv > p.power_threshold)
            .runtime_ms(ms),
    );
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RecordsParams {
    pub qs: Vec<f64>,
    pub n: usize,
    pub streams: usize,
    pub horizon: usize,
    pub record_tolerance: f64,
    pub free_space_tolerance: f64,
}

impl Default for RecordsParams {
    fn default() -> Self {
        RecordsParams {
            qs: vec![0.3, 0.5, 0.8],
            n: 100_000,
            streams: 100,
            horizon: 1_000,
            record_tolerance: 0.01,
            free_space_tolerance: 0.005,
        }
    }
}

/// Growth of the record count, decay of the free-space fraction, and the
/// bound of incomplete left subtrees by free spaces along coupled streams.
pub fn records_suite(p: &RecordsParams, seed: u64) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    for &q in &p.qs {
        let s = derive_seed(seed, &format!("records/{q}"));
        let mut st = OneSidedStream::new(q, trial_rng(s, 0))?;
        let w = finite_from_stream(&mut st, p.n);
        let nf = p.n as f64;
        let rate = records(&w).count() as f64 / nf;
        let dev = (rate - (1.0 - q)).abs();
        out.push(
            TestReport::new("records_growth")
                .param("q", q)
                .param("n", p.n)
                .param("records_per_n", rate)
                .verdict(dev, p.record_tolerance, dev <= p.record_tolerance)
                .sample_size(1)
                .seed(s),
        );
        let f = free_spaces(&mut st, p.n) as f64 / nf;
        out.push(
            TestReport::new("free_space_decay")
                .param("q", q)
                .param("n", p.n)
                .verdict(f, p.free_space_tolerance, f <= p.free_space_tolerance)
                .sample_size(1)
                .seed(s),
        );

        let sb = derive_seed(seed, &format!("records/bound/{q}"));
        let (violations, ms) = timed(|| {
            (0..p.streams as u64)
                .into_par_iter()
                .map(|t| {
                    let mut st = OneSidedStream::new(q, trial_rng(sb, t))?;
                    let f = free_space_profile(&mut st, p.horizon);
                    let mut bad = 0u64;
                    for n in 1..=p.horizon {
                        if incomplete_left_subtrees(&mut st, n)? as u64 > f[n - 1] {
                            bad += 1;
                        }
                    }
                    Ok(bad)
                })
                .try_reduce(|| 0, |a, b| Ok(a + b))
        })?;
        out.push(
            TestReport::new("incomplete_subtrees_bound")
                .param("q", q)
                .param("horizon", p.horizon)
                .verdict(violations as f64, 0.0, violations == 0)
                .sample_size((p.streams * p.horizon) as u64)
                .seed(sb)
                .runtime_ms(ms),
        );
    }
    Ok(out)
}

fn exact_check(name: &str, seed: u64, cases: u64, violations: u64) -> TestReport {
    TestReport::new(name)
        .verdict(violations as f64, 0.0, violations == 0)
        .sample_size(cases)
        .seed(seed)
}

const STRUCTURAL_QS: [f64; 5] = [0.0, 0.3, 0.5, 0.8, 0.95];

fn mallows_window(seed: u64, t: u64) -> Result<PermWindow> {
    let q = STRUCTURAL_QS[(t % 5) as usize];
    let n = 1 + (t as usize * 37) % 200;
    let mut s = OneSidedStream::new(q, trial_rng(seed, t))?;
    Ok(finite_from_stream(&mut s, n))
}

/// Exact structural identities, each reported as a violation count.
pub fn structural_suite(seed: u64) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();

    let s = derive_seed(seed, "structural/bst");
    let mut bad = 0;
    for t in 0..1_000 {
        let w = mallows_window(s, t)?;
        let a = build_bst(&w);
        if !(a.same_as(&build_bst_by_insertion(&w)) && a.same_as(&build_bst_by_splitting(&w))) {
            bad += 1;
        }
    }
    out.push(exact_check("bst_dual_construction", s, 1_000, bad));

    let s = derive_seed(seed, "structural/coupling");
    let mut bad = 0;
    let mut cases = 0;
    for t in 0..50 {
        let mut st = OneSidedStream::new(STRUCTURAL_QS[t as usize % 5], trial_rng(s, t))?;
        st.extend_to(300);
        let mut prev = BinaryTree::new();
        for n in 1..=300 {
            let cur = build_bst(&PermWindow::finite(
                st.drawn()[..n].iter().map(|&c| c as i64).collect(),
            ));
            cases += 1;
            if !prev.shape_contained_in(&cur) || cur.len() != n {
                bad += 1;
            }
            prev = cur;
        }
    }
    out.push(exact_check("monotone_coupling", s, cases, bad));

    let s = derive_seed(seed, "structural/free_spaces");
    let mut bad = 0;
    let mut cases = 0;
    for t in 0..20 {
        let mut st = OneSidedStream::new(STRUCTURAL_QS[1 + t as usize % 4], trial_rng(s, t))?;
        let f = free_space_profile(&mut st, 1_000);
        for n in 1..=1_000 {
            cases += 1;
            if free_space_set_difference(&mut st, n)? as u64 != f[n - 1] {
                bad += 1;
            }
        }
    }
    out.push(exact_check("free_space_definitions", s, cases, bad));

    let s = derive_seed(seed, "structural/srr");
    let mut bad = 0;
    let mut cases = 0;
    for t in 0..300 {
        let q = STRUCTURAL_QS[1 + t as usize % 3];
        let mut tr = TwoSidedTriplet::sample(q, DEFAULT_PARTITION_EPSILON, &mut trial_rng(s, t))?;
        let srr = srr_from_triplet(&mut tr, 4)?;
        let (lo, hi) = (-80, 80);
        let rec = records(&assemble_two_sided(&mut tr, lo, hi)?);
        let inside: Vec<i64> = srr.indices.iter().copied().filter(|&x| lo <= x && x <= hi).collect();
        let (Some(&first), Some(&last)) = (inside.first(), inside.last()) else {
            continue;
        };
        cases += 1;
        let scanned: Vec<i64> = rec
            .indices
            .iter()
            .copied()
            .filter(|&x| first <= x && x <= last)
            .collect();
        if inside != scanned || !srr.is_well_formed() {
            bad += 1;
        }
    }
    out.push(exact_check("srr_cross_validation", s, cases, bad));

    let s = derive_seed(seed, "structural/doubling");
    let mut bad = 0;
    let radius = 2;
    for t in 0..100 {
        let mut rng = trial_rng(s, t);
        let mut tr = TwoSidedTriplet::sample(0.5, DEFAULT_PARTITION_EPSILON, &mut rng)?;
        let mut half = tr.partition.largest() as i64 + 4;
        let small = loop {
            let w = assemble_two_sided(&mut tr, -half, half)?;
            if let Ok(tree) = build_redwood(&w, radius) {
                if tree.stabilized_range().is_some() {
                    break tree;
                }
            }
            half *= 2;
        };
        let (lo, hi) = small.stabilized_range().expect("loop exits on a certificate");
        for _ in 0..3 {
            half *= 2;
            let big = build_redwood(&assemble_two_sided(&mut tr, -half, half)?, radius)?;
            if !small.same_content(&big, lo, hi) {
                bad += 1;
                break;
            }
        }
    }
    out.push(exact_check("window_doubling_stabilization", s, 100, bad));

    let s = derive_seed(seed, "structural/signature");
    let mut rng = trial_rng(s, u64::MAX);
    let mut bad = 0;
    for t in 0..1_000u64 {
        let tree = build_bst(&mallows_window(s, t)?);
        let v = NodeId(rng.random_range(0..tree.len() as u32));
        let b = ball(&tree, v, (t % 5) as usize)?;
        let shuffled = b.with_child_order(|cs| cs.shuffle(&mut rng));
        if signature(&b) != signature(&shuffled) {
            bad += 1;
        }
    }
    out.push(exact_check("signature_invariance", s, 1_000, bad));

    let mut bad = 0;
    let mut cases = 0;
    for n in 1..=7 {
        let trees = all_rooted_trees(n);
        let codes: Vec<BallSignature> = trees.iter().map(signature).collect();
        for i in 0..trees.len() {
            for j in i + 1..trees.len() {
                cases += 1;
                if (codes[i] == codes[j]) != isomorphic(&trees[i], &trees[j]) {
                    bad += 1;
                }
            }
        }
    }
    out.push(exact_check("signature_injectivity", 0, cases, bad));

    let s = derive_seed(seed, "structural/mirror");
    let mut bad = 0;
    for t in 0..1_000 {
        let tree = build_bst(&mallows_window(s, t)?);
        let m = mirror(&tree);
        if !(m.is_search_tree() && mirror(&m).same_as(&tree)) {
            bad += 1;
        }
    }
    out.push(exact_check("mirror_involution", s, 1_000, bad));

    let s = derive_seed(seed, "structural/phi");
    let mut rng = trial_rng(s, 0);
    let (mut bad_identity, mut bad_sum) = (0, 0);
    for _ in 0..1_000 {
        let right: Vec<u64> = (0..rng.random_range(2..40)).map(|_| rng.random_range(1..6u64)).collect();
        let left = right.len() + 2;
        let mut entries: Vec<u64> = (0..left).map(|_| rng.random_range(1..6u64)).collect();
        entries.extend(&right);
        let g = SpacedSequence::new(-(left as i64), entries)?;
        if apply_phi(&g, 0)? != g {
            bad_identity += 1;
        }
        // keep s_n + 1 inside the sequence
        let n = rng.random_range(0..right[..right.len() - 1].iter().sum::<u64>());
        let phi = apply_phi(&g, n)?;
        let sn = g.offset - phi.offset;
        let lhs: u64 = (-sn - 1..=0).map(|i| phi.get(i).unwrap_or(0)).sum();
        let rhs: u64 = (-1..=sn).map(|i| g.get(i).unwrap_or(0)).sum();
        if lhs != rhs || phi.entries.contains(&0) {
            bad_sum += 1;
        }
    }
    out.push(exact_check("phi_zero_identity", s, 1_000, bad_identity));
    out.push(exact_check("phi_window_sum", s, 1_000, bad_sum));
    Ok(out)
}
