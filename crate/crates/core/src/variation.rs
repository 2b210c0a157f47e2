//! Total variation and the Jordan decomposition of a sampled price path.
//!
//! A tick series is treated as the function itself: the partition made of
//! every sample point is the finest one available, so the supremum in the
//! definition of total variation is the full-resolution sum of absolute
//! increments. Timestamps only order the samples.

use serde::Serialize;
use thiserror::Error;

/// Absolute tolerance for identity checks, applied after scaling by `max(1, V)`.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariationError {
    #[error("series has {len} ticks, at least 2 are required")]
    SeriesTooShort { len: usize },
    #[error("timestamps and prices differ in length ({timestamps} vs {prices})")]
    LengthMismatch { timestamps: usize, prices: usize },
    #[error("timestamp at index {index} does not strictly increase")]
    NonIncreasingTimestamp { index: usize },
    #[error("price at index {index} is not finite")]
    NonFinitePrice { index: usize },
}

/// Timestamped tick prices sampled on `T = [a, b]`.
///
/// Timestamps are epoch milliseconds and strictly increasing; prices are
/// finite. `a` and `b` are the first and last timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    timestamps: Vec<i64>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(timestamps: Vec<i64>, prices: Vec<f64>) -> Result<Self, VariationError> {
        if timestamps.len() != prices.len() {
            return Err(VariationError::LengthMismatch {
                timestamps: timestamps.len(),
                prices: prices.len(),
            });
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(VariationError::NonIncreasingTimestamp { index: i + 1 });
        }
        if let Some(i) = prices.iter().position(|p| !p.is_finite()) {
            return Err(VariationError::NonFinitePrice { index: i });
        }
        Ok(Self { timestamps, prices })
    }

    /// Series with timestamps `0, 1, 2, ...` ms.
    pub fn from_prices(prices: Vec<f64>) -> Result<Self, VariationError> {
        let timestamps = (0..prices.len() as i64).collect();
        Self::new(timestamps, prices)
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// First and last timestamps, if any.
    pub fn span(&self) -> Option<(i64, i64)> {
        Some((*self.timestamps.first()?, *self.timestamps.last()?))
    }

    /// Sub-series of ticks at indices `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> PriceSeries {
        PriceSeries {
            timestamps: self.timestamps[range.clone()].to_vec(),
            prices: self.prices[range].to_vec(),
        }
    }

    fn require_variation_len(&self) -> Result<(), VariationError> {
        if self.len() < 2 {
            Err(VariationError::SeriesTooShort { len: self.len() })
        } else {
            Ok(())
        }
    }
}

/// Running total variation `V(t)` at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationProfile {
    pub cumulative: Vec<f64>,
}

impl VariationProfile {
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Non-decreasing parts of `f = f⁺ − f⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanPair {
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
}

/// Endpoint difference, total variation and the Jordan gains `Σ⁺`, `Σ⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationSummary {
    #[serde(rename = "d")]
    pub difference: f64,
    #[serde(rename = "v")]
    pub total: f64,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
}

impl VariationSummary {
    /// `Σ⁺ · Σ⁻`, which equals `(V² − D²)/4`.
    pub fn hyperbola_product(&self) -> f64 {
        self.sigma_plus * self.sigma_minus
    }

    /// Largest normalized residual among `Σ⁺ − Σ⁻ = D`, `Σ⁺ + Σ⁻ = V` and the
    /// hyperbola product.
    pub fn identity_residual(&self) -> f64 {
        let scale = self.total.max(1.0);
        let diff = (self.sigma_plus - self.sigma_minus - self.difference).abs() / scale;
        let sum = (self.sigma_plus + self.sigma_minus - self.total).abs() / scale;
        let hyperbola = (self.hyperbola_product()
            - (self.total * self.total - self.difference * self.difference) / 4.0)
            .abs()
            / (scale * scale);
        diff.max(sum).max(hyperbola)
    }

    pub fn identities_hold(&self) -> bool {
        self.identity_residual() < IDENTITY_TOLERANCE
    }
}

pub fn total_variation(series: &PriceSeries) -> Result<VariationProfile, VariationError> {
    series.require_variation_len()?;
    let mut acc = 0.0;
    let mut cumulative = Vec::with_capacity(series.len());
    cumulative.push(0.0);
    for w in series.prices().windows(2) {
        acc += (w[1] - w[0]).abs();
        cumulative.push(acc);
    }
    Ok(VariationProfile { cumulative })
}

/// `f⁺ = (V(t) + f(t))/2`, `f⁻ = (V(t) − f(t))/2`.
pub fn jordan_decompose(series: &PriceSeries) -> Result<JordanPair, VariationError> {
    let profile = total_variation(series)?;
    Ok(split(&profile, series))
}

fn split(profile: &VariationProfile, series: &PriceSeries) -> JordanPair {
    let (f_plus, f_minus) = profile
        .cumulative
        .iter()
        .zip(series.prices())
        .map(|(v, f)| ((v + f) / 2.0, (v - f) / 2.0))
        .unzip();
    JordanPair { f_plus, f_minus }
}

pub fn variation_summary(series: &PriceSeries) -> Result<VariationSummary, VariationError> {
    let profile = total_variation(series)?;
    let pair = split(&profile, series);
    let last = series.len() - 1;
    let prices = series.prices();
    Ok(VariationSummary {
        difference: prices[last] - prices[0],
        total: profile.total(),
        sigma_plus: pair.f_plus[last] - pair.f_plus[0],
        sigma_minus: pair.f_minus[last] - pair.f_minus[0],
    })
}

/// True when the series never changes direction.
pub fn is_monotone(series: &PriceSeries) -> bool {
    let p = series.prices();
    p.windows(2).all(|w| w[1] >= w[0]) || p.windows(2).all(|w| w[1] <= w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(prices: &[f64]) -> PriceSeries {
        PriceSeries::from_prices(prices.to_vec()).unwrap()
    }

    #[test]
    fn total_variation_by_hand() {
        let p = total_variation(&series(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(p.cumulative, vec![0.0, 2.0, 3.0]);
        assert_eq!(p.total(), 3.0);

        let p = total_variation(&series(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(p.cumulative, vec![0.0, 0.0, 0.0]);

        let p = total_variation(&series(&[1.0, 2.0, 4.0])).unwrap();
        assert_eq!(p.total(), 3.0);
    }

    #[test]
    fn jordan_by_hand() {
        let j = jordan_decompose(&series(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(j.f_plus, vec![0.5, 2.5, 2.5]);
        assert_eq!(j.f_minus, vec![-0.5, -0.5, 0.5]);

        let j = jordan_decompose(&series(&[5.0, 5.0])).unwrap();
        assert_eq!(j.f_plus, vec![2.5, 2.5]);
        assert_eq!(j.f_minus, vec![-2.5, -2.5]);
    }

    #[test]
    fn summary_by_hand() {
        let s = variation_summary(&series(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(
            (s.difference, s.total, s.sigma_plus, s.sigma_minus),
            (1.0, 3.0, 2.0, 1.0)
        );
        assert_eq!(s.hyperbola_product(), (9.0 - 1.0) / 4.0);

        let s = variation_summary(&series(&[1.0, 1.5, 7.0, 7.0])).unwrap();
        assert_eq!(s.sigma_minus, 0.0);

        let s = variation_summary(&series(&[4.0, 4.0, 4.0])).unwrap();
        assert_eq!(
            (s.difference, s.total, s.sigma_plus, s.sigma_minus),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn too_short() {
        let one = series(&[1.0]);
        assert_eq!(
            total_variation(&one),
            Err(VariationError::SeriesTooShort { len: 1 })
        );
        assert!(jordan_decompose(&one).is_err());
        assert!(variation_summary(&one).is_err());
    }

    #[test]
    fn construction_is_validated() {
        assert_eq!(
            PriceSeries::new(vec![0, 5, 5], vec![1.0, 2.0, 3.0]),
            Err(VariationError::NonIncreasingTimestamp { index: 2 })
        );
        assert_eq!(
            PriceSeries::new(vec![0, 5], vec![1.0, f64::NAN]),
            Err(VariationError::NonFinitePrice { index: 1 })
        );
        assert!(PriceSeries::new(vec![0], vec![1.0, 2.0]).is_err());
    }
}
