//! Counting sign sequences of `2n` unit oscillations by their endpoint
//! difference.
//!
//! With `Σ⁺ − Σ⁻ = 2z` and `Σ⁺ + Σ⁻ = 2n` (both in units of the average
//! oscillation), the number of sequences with difference `z` is
//! `C(2n, z + n)` out of `2^(2n)`.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

/// Largest `n` whose `2^(2n)` sequences are enumerated.
pub const ENUMERATION_LIMIT: u32 = 12;

/// Above this `n` probabilities come from log-gamma instead of exact ratios.
pub const DEFAULT_EXACT_CAP: u32 = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CountingError {
    #[error("n must be at least 1")]
    ZeroN,
    #[error("n = {0} exceeds the enumeration limit of {ENUMERATION_LIMIT}")]
    TooLargeForEnumeration(u32),
}

/// Distribution of the difference `z ∈ [−n, n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    n: u32,
    counts: Vec<BigUint>,
    probabilities: Vec<f64>,
}

impl CountDistribution {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn z_range(&self) -> std::ops::RangeInclusive<i64> {
        -(self.n as i64)..=self.n as i64
    }

    fn slot(&self, z: i64) -> Option<usize> {
        let k = z + self.n as i64;
        (0..self.counts.len() as i64)
            .contains(&k)
            .then_some(k as usize)
    }

    /// Exact number of sequences with difference `z` (zero outside the range).
    pub fn count(&self, z: i64) -> BigUint {
        self.slot(z)
            .map_or_else(BigUint::zero, |k| self.counts[k].clone())
    }

    pub fn probability(&self, z: i64) -> f64 {
        self.slot(z).map_or(0.0, |k| self.probabilities[k])
    }

    /// `(z, count)` pairs in increasing `z`.
    pub fn counts(&self) -> impl Iterator<Item = (i64, &BigUint)> + '_ {
        self.z_range().zip(self.counts.iter())
    }

    /// `(z, p(z))` pairs in increasing `z`.
    pub fn probabilities(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.z_range().zip(self.probabilities.iter().copied())
    }

    /// `2^(2n)`.
    pub fn total(&self) -> BigUint {
        BigUint::one() << (2 * self.n as usize)
    }
}

/// Binomial row `C(m, 0..=m)` by the multiplicative recurrence.
fn binomial_row(m: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(m as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..m {
        c = c * (m - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

/// `C(2n, z + n)`; zero when `|z| > n`.
pub fn exact_count(n: u32, z: i64) -> BigUint {
    let n = n as i64;
    if z.abs() > n {
        return BigUint::zero();
    }
    let m = (2 * n) as u64;
    let k = ((z + n) as u64).min(m - (z + n) as u64);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (m - i) / (i + 1);
    }
    c
}

/// `count / 2^bits` as a double without overflowing the intermediate.
fn ratio_to_pow2(count: &BigUint, bits: u64) -> f64 {
    let len = count.bits();
    if len == 0 {
        return 0.0;
    }
    let shift = len.saturating_sub(64);
    let top = (count >> shift).to_f64().unwrap_or(f64::INFINITY);
    // top · 2^shift / 2^bits, split so no factor leaves the normal range early
    let exponent = shift as i64 + 64 - bits as i64;
    top * 2f64.powi(-64) * 2f64.powi(exponent as i32)
}

fn log_binomial_probability(n: u32, z: i64) -> f64 {
    let m = 2.0 * n as f64;
    // fold onto z ≥ 0 so p(z) and p(−z) are bit-identical
    let k = (z.abs() + n as i64) as f64;
    let ln = libm::lgamma(m + 1.0)
        - libm::lgamma(k + 1.0)
        - libm::lgamma(m - k + 1.0)
        - m * std::f64::consts::LN_2;
    ln.exp()
}

/// Full distribution over `z ∈ [−n, n]`, using the default exact-probability cap.
pub fn distribution(n: u32) -> Result<CountDistribution, CountingError> {
    distribution_with_cap(n, DEFAULT_EXACT_CAP)
}

/// Full distribution; probabilities are exact ratios for `n ≤ exact_cap` and
/// log-gamma evaluations above it. Counts are always exact.
pub fn distribution_with_cap(n: u32, exact_cap: u32) -> Result<CountDistribution, CountingError> {
    if n == 0 {
        return Err(CountingError::ZeroN);
    }
    let counts = binomial_row(2 * n as u64);
    let probabilities = if n <= exact_cap {
        counts
            .iter()
            .map(|c| ratio_to_pow2(c, 2 * n as u64))
            .collect()
    } else {
        (-(n as i64)..=n as i64)
            .map(|z| log_binomial_probability(n, z))
            .collect()
    };
    Ok(CountDistribution {
        n,
        counts,
        probabilities,
    })
}

/// `e^{−z²/n} / √(πn)`.
pub fn gaussian_approx(n: u32, z: i64) -> f64 {
    let n = n as f64;
    let z = z as f64;
    (-z * z / n).exp() / (PI * n).sqrt()
}

/// `ζ_z = z·√(2/n)` with constant spacing `Δζ = √(2/n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaScale {
    pub n: u32,
}

impl ZetaScale {
    pub fn new(n: u32) -> Self {
        Self { n }
    }

    pub fn delta(&self) -> f64 {
        (2.0 / self.n as f64).sqrt()
    }

    pub fn zeta_of(&self, z: i64) -> f64 {
        z as f64 * self.delta()
    }

    /// `(1/√(2π))·e^{−ζ_z²/2}·Δζ`, the same quantity as [`gaussian_approx`].
    pub fn density_mass(&self, z: i64) -> f64 {
        let zeta = self.zeta_of(z);
        crate::normal::normal_pdf(zeta) * self.delta()
    }
}

/// Walks every one of the `2^(2n)` up/down sequences of unit oscillations and
/// bins each by half its signed sum.
pub fn enumerate_paths(n: u32) -> Result<CountDistribution, CountingError> {
    if n == 0 {
        return Err(CountingError::ZeroN);
    }
    if n > ENUMERATION_LIMIT {
        return Err(CountingError::TooLargeForEnumeration(n));
    }
    let steps = 2 * n;
    let total: u64 = 1 << steps;
    let bins = (2 * n + 1) as usize;
    const CHUNK: u64 = 1 << 14;

    let tally = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut local = vec![0u64; bins];
            let start = chunk * CHUNK;
            for seq in start..(start + CHUNK).min(total) {
                let mut sum: i64 = 0;
                for step in 0..steps {
                    sum += if seq >> step & 1 == 1 { 1 } else { -1 };
                }
                local[(sum / 2 + n as i64) as usize] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let probabilities = tally.iter().map(|&c| c as f64 / total as f64).collect();
    let counts = tally.into_iter().map(BigUint::from).collect();
    Ok(CountDistribution {
        n,
        counts,
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn exact_count_by_hand() {
        assert_eq!(exact_count(1, 0), big(2));
        assert_eq!(exact_count(3, 1), big(15));
        assert_eq!(exact_count(5, 7), big(0));
        assert_eq!(exact_count(5, -5), big(1));
    }

    #[test]
    fn small_distributions() {
        let d = distribution(1).unwrap();
        let p: Vec<_> = d.probabilities().collect();
        assert_eq!(p, vec![(-1, 0.25), (0, 0.5), (1, 0.25)]);
        assert_eq!(distribution(2).unwrap().probability(0), 0.375);
        assert_eq!(distribution(0), Err(CountingError::ZeroN));
    }

    #[test]
    fn probabilities_sum_to_one_and_are_symmetric() {
        for n in [1, 2, 7, 31, 32, 100, 512, 513, 800] {
            let d = distribution(n).unwrap();
            let sum: f64 = d.probabilities().map(|(_, p)| p).sum();
            assert!((sum - 1.0).abs() < 1e-12, "n = {n}, sum = {sum}");
            let total: BigUint = d.counts().map(|(_, c)| c.clone()).sum();
            assert_eq!(total, d.total());
            for z in d.z_range() {
                assert_eq!(d.probability(z), d.probability(-z));
            }
        }
    }

    #[test]
    fn large_n_probabilities_match_reference() {
        // Reference values from 40-digit arbitrary precision evaluation.
        let p = distribution(200).unwrap().probability(0);
        assert!((p - 0.039_869_301_963_792_93).abs() < 1e-15);
        let p = distribution(512).unwrap().probability(0);
        assert!((p - 0.024_927_805_892_979_544).abs() < 1e-15);
        let p = distribution(600).unwrap().probability(3);
        assert!((p - 0.022_685_582_847_186_113).abs() < 1e-12);
    }

    #[test]
    fn exact_and_log_space_agree_near_cap() {
        let exact = distribution_with_cap(300, 512).unwrap();
        let logged = distribution_with_cap(300, 10).unwrap();
        for z in [-40, -3, 0, 17, 60] {
            let (a, b) = (exact.probability(z), logged.probability(z));
            assert!(((a - b) / a).abs() < 1e-11, "z = {z}");
        }
    }

    #[test]
    fn gaussian_closed_forms() {
        assert!((gaussian_approx(100, 0) - 0.056_418_958_354_775_6).abs() < 1e-15);
        assert!((gaussian_approx(100, 10) - 0.020_755_374_871_029_7).abs() < 1e-15);
        for (n, z) in [(1, 0), (5, 3), (100, -17), (999, 40)] {
            let a = gaussian_approx(n, z);
            let b = ZetaScale::new(n).density_mass(z);
            assert!((a - b).abs() < 1e-15 * a.max(1e-300), "n={n} z={z}");
        }
    }

    #[test]
    fn zeta_scale_spacing() {
        let s = ZetaScale::new(50);
        assert!((s.zeta_of(4) - s.zeta_of(3) - s.delta()).abs() < 1e-15);
        assert!((s.zeta_of(5).powi(2) - 2.0 * 25.0 / 50.0).abs() < 1e-14);
    }

    #[test]
    fn enumeration_small() {
        let d = enumerate_paths(2).unwrap();
        let c: Vec<_> = d.counts().map(|(z, c)| (z, c.clone())).collect();
        assert_eq!(
            c,
            vec![
                (-2, big(1)),
                (-1, big(4)),
                (0, big(6)),
                (1, big(4)),
                (2, big(1))
            ]
        );
        let d = enumerate_paths(1).unwrap();
        let c: Vec<_> = d.counts().map(|(_, c)| c.clone()).collect();
        assert_eq!(c, vec![big(1), big(2), big(1)]);
        assert_eq!(
            enumerate_paths(13),
            Err(CountingError::TooLargeForEnumeration(13))
        );
    }
}
