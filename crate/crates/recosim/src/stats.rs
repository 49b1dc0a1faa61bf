//! Small statistics helpers shared by the simulators and the acceptance
//! suites: confidence intervals, a two-sample Kolmogorov-Smirnov test, and
//! deterministic seed derivation for parallel trials.

/// z-score for a two-sided 95% interval.
pub const Z_95: f64 = 1.959963984540054;

/// Sample mean and 95% half-width under the normal approximation.
///
/// Returns `(mean, half_width)`; the half-width is 0 for fewer than two
/// samples.
pub fn mean_ci95(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, Z_95 * (var / n as f64).sqrt())
}

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n as f64 - 1.0)
        }
    }

    /// 95% half-width of the mean under the normal approximation.
    pub fn ci95_half(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            Z_95 * (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Wilson score interval for a binomial proportion at 95% confidence.
///
/// Returns `(center, half_width)`.
pub fn wilson_ci95(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z_95 * ((p * (1.0 - p) + z2 / (4.0 * nf)) / nf).sqrt() / denom;
    (center, half)
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
///
/// Ties are handled by advancing both pointers through equal values before
/// measuring the gap. The p-value uses the classic series approximation with
/// the small-sample correction of the effective size.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample for ks test");
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("nan in ks sample"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("nan in ks sample"));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    (d, ks_q(lambda))
}

fn ks_q(lambda: f64) -> f64 {
    if lambda < 1e-9 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let t = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * t;
        sign = -sign;
        if t < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// SplitMix64 step, used to derive independent seeds from a master seed.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derive a child seed from `(master, stream)`.
///
/// Deterministic and independent of evaluation order, so parallel trials can
/// each take `derive_seed(master, trial_index)` regardless of scheduling.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(0x517c_c1b7_2722_0a95)))
}

/// FNV-1a hash of a string; used as a stable per-policy stream id.
pub fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in name.as_bytes() {
        h ^= *byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn mean_ci_basic() {
        let (m, h) = mean_ci95(&[1.0, 1.0, 1.0]);
        assert_eq!(m, 1.0);
        assert_eq!(h, 0.0);
        let (m, h) = mean_ci95(&[0.0, 2.0]);
        assert!((m - 1.0).abs() < 1e-12);
        assert!(h > 0.0);
    }

    #[test]
    fn accumulator_matches_batch() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut acc = Accumulator::default();
        for &x in &xs {
            acc.push(x);
        }
        let (m, h) = mean_ci95(&xs);
        assert!((acc.mean() - m).abs() < 1e-12);
        assert!((acc.ci95_half() - h).abs() < 1e-12);
    }

    #[test]
    fn accumulator_merge_matches_sequential() {
        let xs: Vec<f64> = (0..57).map(|i| (i as f64).sqrt()).collect();
        let mut whole = Accumulator::default();
        let mut left = Accumulator::default();
        let mut right = Accumulator::default();
        for (i, &x) in xs.iter().enumerate() {
            whole.push(x);
            if i < 20 {
                left.push(x)
            } else {
                right.push(x)
            }
        }
        left.merge(&right);
        assert_eq!(left.count(), whole.count());
        assert!((left.mean() - whole.mean()).abs() < 1e-12);
        assert!((left.variance() - whole.variance()).abs() < 1e-10);
    }

    #[test]
    fn wilson_reasonable() {
        let (c, h) = wilson_ci95(50, 100);
        assert!((c - 0.5).abs() < 0.01);
        assert!(h > 0.05 && h < 0.15);
        // Near-boundary proportion stays inside [0, 1].
        let (c, h) = wilson_ci95(0, 100);
        assert!(c - h >= 0.0);
    }

    #[test]
    fn ks_same_distribution_high_p() {
        let mut rng = StdRng::seed_from_u64(7);
        let a: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.01, "p={p}");
    }

    #[test]
    fn ks_different_distribution_low_p() {
        let mut rng = StdRng::seed_from_u64(7);
        let a: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..5000).map(|_| rng.random::<f64>() * 0.8).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p < 1e-6, "p={p}");
    }

    #[test]
    fn ks_handles_heavy_ties() {
        // Discrete distributions with identical mass: should not reject.
        let a: Vec<f64> = (0..3000).map(|i| if i % 3 == 0 { 0.0 } else { 1.0 }).collect();
        let b: Vec<f64> = (0..3000).map(|i| if i % 3 == 2 { 0.0 } else { 1.0 }).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.5, "p={p}");
    }

    #[test]
    fn derive_seed_is_stable_and_spread() {
        let s1 = derive_seed(42, 0);
        let s2 = derive_seed(42, 1);
        assert_eq!(s1, derive_seed(42, 0));
        assert_ne!(s1, s2);
        assert_ne!(derive_seed(43, 0), s1);
    }
}
