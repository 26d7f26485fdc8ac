use rand::Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::permutations::{finite_from_stream, OneSidedStream, PermWindow};
use crate::rng::{trial_rng, SimRng};
use crate::stats::EmpiricalDist;
use crate::trees::{build_bst, sample_redwood_direct, BinaryTree, NodeId, RedwoodNode};

use super::{ball, signature, BallSignature, CensusResult, RootedBall};

fn check_q(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(domain(format!("q = {q} must lie in [0, 1)")))
    }
}

fn collect<F>(trials: u64, seed: u64, radius: usize, one: F) -> Result<CensusResult>
where
    F: Fn(&mut SimRng) -> Result<BallSignature> + Sync,
{
    let d = (0..trials)
        .into_par_iter()
        .try_fold(EmpiricalDist::new, |mut d, t| {
            d.add(one(&mut trial_rng(seed, t))?);
            Ok::<_, crate::Error>(d)
        })
        .try_reduce(EmpiricalDist::new, |a, b| Ok(a.merge(b)))?;
    Ok(CensusResult::from_dist(radius, d))
}

/// Law of the radius-`r` ball around a uniform vertex of the limiting
/// two-sided tree: spine node 0 or a node of its left subtree, chosen
/// uniformly. Only spine indices `|k| <= r` can be reached.
pub fn redwood_ball_law(q: f64, r: usize, trials: u64, seed: u64) -> Result<CensusResult> {
    check_q(q)?;
    collect(trials, seed, r, |rng| {
        let tree = sample_redwood_direct(q, r, rng)?;
        let size = tree.size_at(0).expect("spine 0 is sampled");
        let u = rng.random_range(0..=size);
        let o = if u == 0 {
            RedwoodNode::Spine(0)
        } else {
            RedwoodNode::Off(0, NodeId(u as u32 - 1))
        };
        Ok(signature(&ball(&tree, o, r)?))
    })
}

/// Ball of radius `r` at the root of the one-sided infinite tree.
///
/// Nodes within depth `r` are final once the stream has `r + 1` records and
/// every column up to the last of them is used: later values are larger and
/// land below depth `r` on the right.
pub fn stabilized_root_ball(s: &mut OneSidedStream, r: usize) -> Result<RootedBall> {
    let mut records = 0;
    let mut best = 0;
    let mut i = 0;
    while records <= r {
        i += 1;
        let c = s.value(i);
        if c > best {
            best = c;
            records += 1;
        }
    }
    s.fill_columns_through(best)?;
    let values: Vec<i64> = s
        .drawn()
        .iter()
        .filter(|&&c| c <= best)
        .map(|&c| c as i64)
        .collect();
    let tree = build_bst(&PermWindow::finite(values));
    ball(&tree, tree.root().expect("at least one value"), r)
}

/// Law of the radius-`r` ball at the root of a Mallows tree of size `n`, or
/// of the one-sided infinite tree when `n` is `None`.
pub fn rooted_ball_law(
    q: f64,
    r: usize,
    n: Option<usize>,
    trials: u64,
    seed: u64,
) -> Result<CensusResult> {
    check_q(q)?;
    if n == Some(0) {
        return Err(domain("a tree needs at least one vertex"));
    }
    collect(trials, seed, r, |rng| {
        let mut s = OneSidedStream::new(q, rng.clone())?;
        let b = match n {
            Some(n) => {
                let tree: BinaryTree = build_bst(&finite_from_stream(&mut s, n));
                ball(&tree, tree.root().expect("n >= 1"), r)?
            }
            None => stabilized_root_ball(&mut s, r)?,
        };
        Ok(signature(&b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::tv_distance;

    fn only(c: &CensusResult) -> BallSignature {
        assert_eq!(c.counts.len(), 1, "{c:?}");
        c.counts.keys().next().unwrap().clone()
    }

    #[test]
    fn q_zero_laws_are_point_masses() {
        let three_path = RootedBall::from_children(vec![vec![1, 2], vec![], vec![]]);
        assert_eq!(only(&redwood_ball_law(0.0, 1, 200, 1).unwrap()), signature(&three_path));
        let right_path = RootedBall::from_children(vec![vec![1], vec![2], vec![]]);
        assert_eq!(only(&rooted_ball_law(0.0, 2, Some(50), 100, 1).unwrap()), signature(&right_path));
        assert_eq!(only(&rooted_ball_law(0.0, 2, None, 100, 1).unwrap()), signature(&right_path));
    }

    #[test]
    fn radius_zero_is_a_point() {
        assert_eq!(only(&redwood_ball_law(0.5, 0, 300, 2).unwrap()), BallSignature::single_vertex());
        assert_eq!(only(&rooted_ball_law(0.5, 0, None, 300, 2).unwrap()), BallSignature::single_vertex());
    }

    #[test]
    fn stabilized_ball_does_not_change_with_more_stream() {
        for t in 0..200 {
            let mut s = OneSidedStream::new(0.7, trial_rng(50, t)).unwrap();
            let b = stabilized_root_ball(&mut s, 3).unwrap();
            s.extend_to(s.len() + 500);
            let values: Vec<i64> = s.drawn().iter().map(|&c| c as i64).collect();
            let tree = build_bst(&PermWindow::finite(values));
            let later = ball(&tree, tree.root().unwrap(), 3).unwrap();
            assert_eq!(signature(&b), signature(&later));
        }
    }

    #[test]
    fn finite_root_law_is_close_to_the_limit() {
        let a = rooted_ball_law(0.5, 1, Some(200), 20_000, 3).unwrap();
        let b = rooted_ball_law(0.5, 1, None, 20_000, 4).unwrap();
        assert!(tv_distance(&a.to_dist(), &b.to_dist()).unwrap() < 0.03);
    }
}
