use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::distributions::{GeomVariant, Geometric};
use crate::error::{domain, Error, Result, WindowSide};
use crate::rng::trial_rng;
use crate::stats::{EmpiricalDist, TestReport};

/// Cumulative mass of the exact tuple law kept as separate bins.
pub const PHI_TAIL_MASS: f64 = 0.999;
/// Largest total variation accepted by [`phi_invariance_test`].
pub const PHI_TV_THRESHOLD: f64 = 0.02;

/// A window of a two-sided sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpacedSequence {
    pub offset: i64,
    pub entries: Vec<u64>,
}

impl SpacedSequence {
    pub fn new(offset: i64, entries: Vec<u64>) -> Result<Self> {
        if entries.contains(&0) {
            return Err(domain("sequence entries must be at least 1"));
        }
        Ok(SpacedSequence { offset, entries })
    }

    pub fn get(&self, i: i64) -> Option<u64> {
        let pos = usize::try_from(i - self.offset).ok()?;
        self.entries.get(pos).copied()
    }

    pub fn end(&self) -> i64 {
        self.offset + self.entries.len() as i64 - 1
    }

    /// Entries at `lo..=hi`.
    pub fn slice(&self, lo: i64, hi: i64) -> Option<Vec<u64>> {
        (lo..=hi).map(|i| self.get(i)).collect()
    }
}

/// The re-rooting rearrangement of a gap sequence at level `n`.
///
/// With `s = min{i >= 0 : g_0 + ... + g_i > n}`, the output has
/// `φ_0 = g_0 + ... + g_s - n`, `φ_{-1} = n + 1 - (g_0 + ... + g_{s-1})`,
/// `φ_{-s-1} = g_{-1} + g_0 - 1`, and otherwise shifts entries by `s` (by
/// `s + 1` on `-s..=-2`). For `s = 0` the two middle cases merge into
/// `φ_{-1} = n + g_{-1}`. The window `[a, b]` maps to `[a - s, b - s]`.
pub fn apply_phi(g: &SpacedSequence, n: u64) -> Result<SpacedSequence> {
    let (a, b) = (g.offset, g.end());
    if a > -1 {
        return Err(Error::InsufficientWindow {
            side: WindowSide::Left,
            needed: 1,
            found: 0,
        });
    }
    let mut sum = 0u64;
    let mut s = None;
    for i in 0..=b.max(-1) {
        sum += g.get(i).expect("index inside window");
        if sum > n {
            s = Some(i);
            break;
        }
    }
    let Some(s) = s else {
        return Err(Error::InsufficientWindow {
            side: WindowSide::Right,
            needed: 1,
            found: 0,
        });
    };
    let at = |i: i64| g.get(i).expect("index inside window");
    let prefix = |upto: i64| (0..=upto).map(at).sum::<u64>();
    let entries = (a - s..=b - s)
        .map(|i| {
            if i >= 1 {
                at(s + i)
            } else if i == 0 {
                prefix(s) - n
            } else if s == 0 && i == -1 {
                n + at(-1)
            } else if i == -1 {
                n + 1 - prefix(s - 1)
            } else if i == -s - 1 {
                at(-1) + at(0) - 1
            } else if i >= -s {
                at(s + i + 1)
            } else {
                at(s + i)
            }
        })
        .collect();
    Ok(SpacedSequence {
        offset: a - s,
        entries,
    })
}

/// Total variation between the law of `(G_i)_{|i| <= window}` for iid
/// geometric `G` on `1, 2, ...` with mean `1/(1-q)` and the law of the same
/// coordinates of `Φ_n(G)`, both estimated from the same `trials` samples.
///
/// Tuples outside the most likely ones holding [`PHI_TAIL_MASS`] of the exact
/// law share one bin. Distances of both laws to the exact iid law are
/// reported alongside. With
/// `perturb = Some(p)`, `G_{-1}` is drawn with success probability `p`
/// instead, which the test should detect.
pub fn phi_invariance_test(
    q: f64,
    n: u64,
    window: usize,
    trials: u64,
    seed: u64,
    perturb: Option<f64>,
) -> Result<TestReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(domain(format!("q = {q} must lie in (0, 1)")));
    }
    let gap = Geometric::new(GeomVariant::GeomOne, 1.0 - q)?;
    let odd = match perturb {
        Some(p) => Geometric::new(GeomVariant::GeomOne, p)?,
        None => gap,
    };
    let w = window as i64;
    let (support, kept) = likely_tuples(&gap, 2 * window + 1, PHI_TAIL_MASS)?;
    let bin = |t: Vec<u64>| if support.contains(&t) { Some(t) } else { None };

    let (before, after) = (0..trials)
        .into_par_iter()
        .fold(
            || (EmpiricalDist::new(), EmpiricalDist::new()),
            |(mut before, mut after), t| {
                let mut rng = trial_rng(seed, t);
                let lo = -w - 1;
                let mut entries: Vec<u64> = (lo..0)
                    .map(|i| if i == -1 { odd.sample(&mut rng) } else { gap.sample(&mut rng) })
                    .collect();
                let mut sum = 0;
                let mut s = None;
                let mut i = 0i64;
                // enough entries to locate s and keep `window` more
                while s.is_none_or(|s| i <= s + w) {
                    let x = gap.sample(&mut rng);
                    entries.push(x);
                    sum += x;
                    if s.is_none() && sum > n {
                        s = Some(i);
                    }
                    i += 1;
                }
                let g = SpacedSequence { offset: lo, entries };
                let phi = apply_phi(&g, n).expect("window covers s");
                before.add(bin(g.slice(-w, w).expect("inside window")));
                after.add(bin(phi.slice(-w, w).expect("inside window")));
                (before, after)
            },
        )
        .reduce(
            || (EmpiricalDist::new(), EmpiricalDist::new()),
            |a, b| (a.0.merge(b.0), a.1.merge(b.1)),
        );
    let tv = crate::stats::tv_distance(&before, &after)?;
    let mut exact: BTreeMap<Option<Vec<u64>>, f64> = support
        .iter()
        .map(|t| (Some(t.clone()), t.iter().map(|&k| gap.pmf(k)).product()))
        .collect();
    exact.insert(None, 1.0 - kept);
    Ok(TestReport::new("phi_invariance")
        .param("q", q)
        .param("n", n)
        .param("window", window)
        .param("truncated_mass", 1.0 - kept)
        .param("tv_before_exact", crate::stats::tv_to_exact(&before, &exact)?)
        .param("tv_after_exact", crate::stats::tv_to_exact(&after, &exact)?)
        .param("perturbed_p", perturb)
        .verdict(tv, PHI_TV_THRESHOLD, tv < PHI_TV_THRESHOLD)
        .sample_size(trials)
        .seed(seed))
}

/// Most likely tuples of iid draws until their mass reaches `mass`.
fn likely_tuples(g: &Geometric, len: usize, mass: f64) -> Result<(BTreeSet<Vec<u64>>, f64)> {
    const MAX_TUPLES: usize = 1 << 22;
    let marginal = g.truncated_support(1.0 - (1.0 - mass) / (10.0 * len as f64));
    let mut tuples: Vec<(Vec<u64>, f64)> = vec![(Vec::new(), 1.0)];
    for _ in 0..len {
        let mut next = Vec::with_capacity(tuples.len() * marginal.len());
        for (t, p) in &tuples {
            for &(k, pk) in &marginal {
                let mut t = t.clone();
                t.push(k);
                next.push((t, p * pk));
            }
        }
        if next.len() > MAX_TUPLES {
            return Err(Error::SizeGuard {
                size: next.len(),
                limit: MAX_TUPLES,
            });
        }
        tuples = next;
    }
    tuples.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut kept = Vec::new();
    let mut acc = 0.0;
    for (t, p) in tuples {
        if acc >= mass {
            break;
        }
        acc += p;
        kept.push(t);
    }
    Ok((kept.into_iter().collect(), acc))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn seq(offset: i64, entries: &[u64]) -> SpacedSequence {
        SpacedSequence::new(offset, entries.to_vec()).unwrap()
    }

    #[test]
    fn level_zero_is_the_identity() {
        let g = seq(-3, &[3, 2, 1, 2, 5, 4]);
        assert_eq!(apply_phi(&g, 0).unwrap(), g);
    }

    #[test]
    fn hand_worked_shift() {
        let g = seq(-2, &[3, 2, 1, 2, 5]);
        let phi = apply_phi(&g, 1).unwrap();
        assert_eq!(phi.offset, -3);
        assert_eq!(phi.entries, vec![3, 2, 1, 2, 5]);
        assert_eq!(phi.get(0), Some(2));
        assert_eq!(phi.get(1), Some(5));
    }

    #[test]
    fn first_gap_above_level() {
        // s = 0: φ_{-1} = n + g_{-1}, φ_0 = g_0 - n
        let g = seq(-2, &[4, 3, 7, 2]);
        let phi = apply_phi(&g, 5).unwrap();
        assert_eq!(phi.offset, -2);
        assert_eq!(phi.entries, vec![4, 8, 2, 2]);
    }

    #[test]
    fn window_errors() {
        assert!(matches!(
            apply_phi(&seq(0, &[1, 1]), 0),
            Err(Error::InsufficientWindow { side: WindowSide::Left, .. })
        ));
        assert!(matches!(
            apply_phi(&seq(-1, &[1, 1, 1]), 5),
            Err(Error::InsufficientWindow { side: WindowSide::Right, .. })
        ));
        assert!(SpacedSequence::new(0, vec![1, 0]).is_err());
    }

    proptest! {
        #[test]
        fn sums_and_positivity(
            left in proptest::collection::vec(1u64..6, 1..6),
            right in proptest::collection::vec(1u64..6, 1..30),
            n in 0u64..40,
        ) {
            let offset = -(left.len() as i64);
            let entries: Vec<u64> = left.iter().chain(&right).copied().collect();
            let g = seq(offset, &entries);
            let total: u64 = right.iter().sum();
            prop_assume!(total > n);
            let phi = apply_phi(&g, n).unwrap();
            prop_assert!(phi.entries.iter().all(|&x| x >= 1));
            let s = -(phi.offset - offset);
            let lhs: u64 = (-s - 1..=0).map(|i| phi.get(i).unwrap()).sum();
            let rhs: u64 = (-1..=s).map(|i| g.get(i).unwrap()).sum();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(phi.entries.len(), g.entries.len());
        }
    }

    #[test]
    fn level_zero_test_reports_zero() {
        let r = phi_invariance_test(0.5, 0, 1, 5_000, 9, None).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn tuple_support_reaches_mass() {
        let g = Geometric::new(GeomVariant::GeomOne, 0.5).unwrap();
        let (set, kept) = likely_tuples(&g, 3, PHI_TAIL_MASS).unwrap();
        assert!((PHI_TAIL_MASS..1.0).contains(&kept));
        assert!(set.contains(&vec![1, 1, 1]));
        let exact: f64 = set.iter().map(|t| t.iter().map(|&k| g.pmf(k)).product::<f64>()).sum();
        assert!((exact - kept).abs() < 1e-12);
    }
}
