//! The three geometric laws used throughout the crate and the random integer
//! partition driving the two-sided construction.
//!
//! | variant      | support      | pmf                      |
//! |--------------|--------------|--------------------------|
//! | `GeomZero`   | `{0,1,...}`  | `(1-p)^k p`              |
//! | `GeomOne`    | `{1,2,...}`  | `(1-p)^(k-1) p`          |
//! | `SizeBiased` | `{0,1,...}`  | `(k+1)(1-p)^k p^2`       |

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Default tail bound for [`sample_partition`].
pub const DEFAULT_PARTITION_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeomVariant {
    GeomZero,
    GeomOne,
    SizeBiased,
}

impl GeomVariant {
    /// Smallest value in the support.
    pub fn min_support(self) -> u64 {
        match self {
            GeomVariant::GeomOne => 1,
            _ => 0,
        }
    }

    pub fn mean(self, p: f64) -> f64 {
        let q = 1.0 - p;
        match self {
            GeomVariant::GeomZero => q / p,
            GeomVariant::GeomOne => 1.0 / p,
            GeomVariant::SizeBiased => 2.0 * q / p,
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("success probability {p} is not in (0,1]")))
    }
}

/// A geometric law with a fixed parameter, cached for repeated sampling.
#[derive(Debug, Clone, Copy)]
pub struct Geometric {
    variant: GeomVariant,
    p: f64,
    // ln(1-p); None for the degenerate p = 1 law.
    log_fail: Option<f64>,
}

impl Geometric {
    pub fn new(variant: GeomVariant, p: f64) -> Result<Self> {
        check_probability(p)?;
        let log_fail = if p == 1.0 { None } else { Some((1.0 - p).ln()) };
        Ok(Geometric {
            variant,
            p,
            log_fail,
        })
    }

    pub fn variant(&self) -> GeomVariant {
        self.variant
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pmf(&self, k: u64) -> f64 {
        let q = 1.0 - self.p;
        match self.variant {
            GeomVariant::GeomZero => q.powf(k as f64) * self.p,
            GeomVariant::GeomOne => {
                if k == 0 {
                    0.0
                } else {
                    q.powf((k - 1) as f64) * self.p
                }
            }
            GeomVariant::SizeBiased => (k as f64 + 1.0) * q.powf(k as f64) * self.p * self.p,
        }
    }

    /// `P(X > k)` in closed form.
    pub fn tail(&self, k: u64) -> f64 {
        let q = 1.0 - self.p;
        let kf = k as f64;
        match self.variant {
            GeomVariant::GeomZero => q.powf(kf + 1.0),
            GeomVariant::GeomOne => q.powf(kf),
            GeomVariant::SizeBiased => q.powf(kf + 1.0) * (1.0 + (kf + 1.0) * self.p),
        }
    }

    /// One `GeomZero` draw by inversion.
    fn draw_zero<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.log_fail {
            None => 0,
            Some(log_fail) => {
                // 1 - [0,1) lies in (0,1], so the logarithm is finite.
                let u: f64 = 1.0 - rng.random::<f64>();
                (u.ln() / log_fail).floor() as u64
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.variant {
            GeomVariant::GeomZero => self.draw_zero(rng),
            GeomVariant::GeomOne => self.draw_zero(rng) + 1,
            GeomVariant::SizeBiased => self.draw_zero(rng) + self.draw_zero(rng),
        }
    }

    /// Values `min_support..=k_max` whose cumulative mass first reaches `mass`.
    pub fn truncated_support(&self, mass: f64) -> Vec<(u64, f64)> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut k = self.variant.min_support();
        while acc < mass {
            let pk = self.pmf(k);
            out.push((k, pk));
            acc += pk;
            k += 1;
            if pk == 0.0 && acc >= mass - 1e-15 {
                break;
            }
        }
        out
    }
}

/// Probability of `k` under `variant` with parameter `p`.
pub fn pmf(variant: GeomVariant, p: f64, k: u64) -> Result<f64> {
    let g = Geometric::new(variant, p)?;
    if k < variant.min_support() {
        return Err(domain(format!("{k} is outside the support of {variant:?}")));
    }
    Ok(g.pmf(k))
}

pub fn sample<R: Rng + ?Sized>(variant: GeomVariant, p: f64, rng: &mut R) -> Result<u64> {
    Ok(Geometric::new(variant, p)?.sample(rng))
}

/// Multiplicities of a random partition `Λ` with `P(Λ = λ) ∝ q^|λ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSample {
    /// `multiplicities[i - 1]` is the number of parts equal to `i`.
    pub multiplicities: Vec<u64>,
    /// Bound on the probability that an omitted multiplicity is non-zero.
    pub truncation_epsilon: f64,
}

impl PartitionSample {
    pub fn empty() -> Self {
        PartitionSample {
            multiplicities: Vec::new(),
            truncation_epsilon: 0.0,
        }
    }

    /// Parts in non-increasing order.
    pub fn parts(&self) -> Vec<u64> {
        let mut parts = Vec::with_capacity(self.num_parts());
        for (i, &m) in self.multiplicities.iter().enumerate().rev() {
            for _ in 0..m {
                parts.push(i as u64 + 1);
            }
        }
        parts
    }

    pub fn num_parts(&self) -> usize {
        self.multiplicities.iter().sum::<u64>() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.num_parts() == 0
    }

    /// `|Λ|`, the sum of the parts.
    pub fn weight(&self) -> u64 {
        self.multiplicities
            .iter()
            .enumerate()
            .map(|(i, &m)| (i as u64 + 1) * m)
            .sum()
    }

    /// Largest part `Λ_1`, zero for the empty partition.
    pub fn largest(&self) -> u64 {
        self.multiplicities
            .iter()
            .rposition(|&m| m > 0)
            .map_or(0, |i| i as u64 + 1)
    }
}

/// Smallest `i_max` with `q^(i_max+1) / (1-q) < epsilon`.
pub fn partition_truncation(q: f64, epsilon: f64) -> usize {
    let mut i = 0usize;
    while q.powi(i as i32 + 1) / (1.0 - q) >= epsilon {
        i += 1;
    }
    i
}

/// Draws `M_i ~ GeomZero(1 - q^i)` independently for `i = 1..=i_max`.
pub fn sample_partition<R: Rng + ?Sized>(
    q: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<PartitionSample> {
    if !(0.0..1.0).contains(&q) {
        return Err(domain(format!("q = {q} is not in [0,1)")));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(domain(format!("epsilon = {epsilon} must be positive")));
    }
    let i_max = partition_truncation(q, epsilon);
    let multiplicities = (1..=i_max)
        .map(|i| Geometric::new(GeomVariant::GeomZero, 1.0 - q.powi(i as i32)).map(|g| g.sample(rng)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionSample {
        multiplicities,
        truncation_epsilon: epsilon,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::SimRng;

    const VARIANTS: [GeomVariant; 3] = [
        GeomVariant::GeomZero,
        GeomVariant::GeomOne,
        GeomVariant::SizeBiased,
    ];

    #[test]
    fn pmf_examples() {
        assert_eq!(pmf(GeomVariant::GeomZero, 0.5, 0).unwrap(), 0.5);
        assert_eq!(pmf(GeomVariant::SizeBiased, 0.5, 1).unwrap(), 0.25);
        assert_eq!(pmf(GeomVariant::GeomOne, 1.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn pmf_domain_errors() {
        assert!(pmf(GeomVariant::GeomZero, 0.0, 0).is_err());
        assert!(pmf(GeomVariant::GeomZero, 1.5, 0).is_err());
        assert!(pmf(GeomVariant::GeomZero, f64::NAN, 0).is_err());
        assert!(pmf(GeomVariant::GeomOne, 0.5, 0).is_err());
        assert!(sample(GeomVariant::GeomOne, -0.1, &mut SimRng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn partial_sums_respect_closed_form_tails() {
        for &variant in &VARIANTS {
            for &p in &[0.1, 0.5, 0.9] {
                let g = Geometric::new(variant, p).unwrap();
                let k_max = 200;
                let partial: f64 = (variant.min_support()..=k_max).map(|k| g.pmf(k)).sum();
                let tail = g.tail(k_max);
                assert!((partial + tail - 1.0).abs() < 1e-12, "{variant:?} {p}");
                assert!(partial >= 1.0 - tail - 1e-12);
            }
        }
    }

    #[test]
    fn size_biased_is_convolution_of_two_geometrics() {
        for &p in &[0.1, 0.3, 0.5, 0.9] {
            let g0 = Geometric::new(GeomVariant::GeomZero, p).unwrap();
            let sb = Geometric::new(GeomVariant::SizeBiased, p).unwrap();
            for k in 0..=50 {
                let conv: f64 = (0..=k).map(|g| g0.pmf(g) * g0.pmf(k - g)).sum();
                let direct = sb.pmf(k);
                assert!(
                    ((conv - direct) / direct).abs() < 1e-12,
                    "p={p} k={k}: {conv} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn degenerate_parameter_is_deterministic() {
        let mut rng = SimRng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample(GeomVariant::GeomZero, 1.0, &mut rng).unwrap(), 0);
            assert_eq!(sample(GeomVariant::GeomOne, 1.0, &mut rng).unwrap(), 1);
            assert_eq!(sample(GeomVariant::SizeBiased, 1.0, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn geom_zero_mean() {
        let mut rng = SimRng::seed_from_u64(11);
        let g = Geometric::new(GeomVariant::GeomZero, 0.5).unwrap();
        let n = 100_000;
        let mean = (0..n).map(|_| g.sample(&mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn truncation_index() {
        assert_eq!(partition_truncation(0.0, 1e-12), 0);
        // 0.5^(i+1) / 0.5 < 1e-3  <=>  0.5^i < 1e-3  <=>  i >= 10
        assert_eq!(partition_truncation(0.5, 1e-3), 10);
    }

    #[test]
    fn zero_q_partition_is_empty() {
        let mut rng = SimRng::seed_from_u64(3);
        let lambda = sample_partition(0.0, DEFAULT_PARTITION_EPSILON, &mut rng).unwrap();
        assert!(lambda.is_empty());
        assert_eq!(lambda.largest(), 0);
    }

    #[test]
    fn partition_accessors() {
        let lambda = PartitionSample {
            multiplicities: vec![2, 0, 1],
            truncation_epsilon: 1e-12,
        };
        assert_eq!(lambda.parts(), vec![3, 1, 1]);
        assert_eq!(lambda.weight(), 5);
        assert_eq!(lambda.largest(), 3);
        assert_eq!(lambda.num_parts(), 3);
    }

    #[test]
    fn partition_statistics_at_half() {
        let mut rng = SimRng::seed_from_u64(5);
        let trials = 100_000;
        let mut m1 = 0u64;
        let mut empty = 0u64;
        for _ in 0..trials {
            let lambda = sample_partition(0.5, DEFAULT_PARTITION_EPSILON, &mut rng).unwrap();
            m1 += lambda.multiplicities[0];
            empty += u64::from(lambda.is_empty());
        }
        let mean_m1 = m1 as f64 / trials as f64;
        assert!((mean_m1 - 1.0).abs() < 0.05, "{mean_m1}");
        // prod_{k>=1} (1 - 2^-k), truncated where the factors are 1 to double precision.
        let product: f64 = (1..64).map(|k| 1.0 - 0.5f64.powi(k)).product();
        assert!((product - 0.288788).abs() < 1e-6);
        let p_empty = empty as f64 / trials as f64;
        assert!((p_empty - product).abs() < 0.01, "{p_empty}");
    }
}
