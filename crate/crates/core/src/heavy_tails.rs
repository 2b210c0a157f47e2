//! Heavy-tailed law seen from the relative frame.
//!
//! The observed variable `ζ` relates to the frame-invariant one through a
//! `ζ`-dependent shift `α√(2n) = −sign(ζ)·(C₁ + C₂ζ²/2)`. With the closed
//! form used here the distribution function is `Φ(g(ζ))`,
//!
//! ```text
//! g(ζ) = ζ − sign(ζ)·(ζ² − ζ₀²)/12,      |ζ| ≤ 6
//! ```
//!
//! `g` is increasing on `[−6, 6]` (its slope `1 − |ζ|/6` vanishes at the
//! edge) and jumps by `ζ₀²/6` at zero, which leaves an atom of mass
//! `Φ(ζ₀²/12) − Φ(−ζ₀²/12)` there. The distribution function is defined as
//! 1/2 exactly at zero.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::normal::{normal_cdf, normal_pdf, normal_quantile};

/// Edge of the monotone domain of `g`.
pub const DOMAIN_EDGE: f64 = 6.0;

/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeavyTailError {
    #[error("zeta0 = {0} makes the constants system singular")]
    SingularSystem(f64),
    #[error("|zeta| = {0} lies outside the monotone domain [-6, 6]")]
    OutsideMonotoneDomain(f64),
    #[error("zeta0 = {0} is outside [0, 1)")]
    InvalidZetaZero(f64),
    #[error("tail ratio needs 0 < zeta, got {0}")]
    NonPositiveZeta(f64),
    #[error("no samples to bin")]
    NoSamples,
    #[error("bin width must be positive, got {0}")]
    NonPositiveBinWidth(f64),
}

/// Anomaly scale `ζ₀` with the constants solved from its linear system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTailSpec {
    pub zeta0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl HeavyTailSpec {
    pub fn new(zeta0: f64) -> Result<Self, HeavyTailError> {
        check_zeta0(zeta0)?;
        let (c1, c2) = solve_constants(zeta0)?;
        Ok(Self { zeta0, c1, c2 })
    }

    /// Residuals of `C₁ + 18C₂ = 3` and `C₁ + (ζ₀²/2)C₂ = ζ₀`.
    pub fn residuals(&self) -> (f64, f64) {
        (
            self.c1 + 18.0 * self.c2 - 3.0,
            self.c1 + self.zeta0 * self.zeta0 / 2.0 * self.c2 - self.zeta0,
        )
    }
}

fn check_zeta0(zeta0: f64) -> Result<(), HeavyTailError> {
    if (0.0..1.0).contains(&zeta0) {
        Ok(())
    } else {
        Err(HeavyTailError::InvalidZetaZero(zeta0))
    }
}

fn check_domain(zeta: f64) -> Result<(), HeavyTailError> {
    if zeta.abs() <= DOMAIN_EDGE {
        Ok(())
    } else {
        Err(HeavyTailError::OutsideMonotoneDomain(zeta))
    }
}

/// Solves `C₁ + 18C₂ = 3`, `C₁ + (ζ₀²/2)C₂ = ζ₀` by Cramer's rule.
pub fn solve_constants(zeta0: f64) -> Result<(f64, f64), HeavyTailError> {
    let a = zeta0 * zeta0 / 2.0;
    let det = 18.0 - a;
    if det == 0.0 || !det.is_finite() {
        return Err(HeavyTailError::SingularSystem(zeta0));
    }
    Ok(((18.0 * zeta0 - 3.0 * a) / det, (3.0 - zeta0) / det))
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `−sign(ζ)·(C₁ + C₂ζ²/2)`, zero at `ζ = 0`.
pub fn rfr_shift(zeta: f64, c1: f64, c2: f64) -> f64 {
    -sign(zeta) * (c1 + c2 * zeta * zeta / 2.0)
}

/// `g(ζ) = ζ − sign(ζ)(ζ² − ζ₀²)/12`, with `g(0) = 0`.
pub fn transform(zeta: f64, zeta0: f64) -> f64 {
    zeta - sign(zeta) * (zeta * zeta - zeta0 * zeta0) / 12.0
}

/// `Φ(g(ζ))` on `|ζ| ≤ 6`; exactly 1/2 at `ζ = 0`.
pub fn heavy_cdf(zeta: f64, zeta0: f64) -> Result<f64, HeavyTailError> {
    check_domain(zeta)?;
    check_zeta0(zeta0)?;
    if zeta == 0.0 {
        return Ok(0.5);
    }
    Ok(normal_cdf(transform(zeta, zeta0)))
}

/// Right-continuous version of [`heavy_cdf`]: includes the atom at zero.
pub fn heavy_cdf_right(zeta: f64, zeta0: f64) -> Result<f64, HeavyTailError> {
    if zeta == 0.0 {
        check_zeta0(zeta0)?;
        return Ok(normal_cdf(zeta0 * zeta0 / 12.0));
    }
    heavy_cdf(zeta, zeta0)
}

/// Mass of the atom at zero.
pub fn atom_at_zero(zeta0: f64) -> f64 {
    let h = zeta0 * zeta0 / 12.0;
    normal_cdf(h) - normal_cdf(-h)
}

/// Upper-tail probability relative to the normal law,
/// `(1 − P(ζ)) / (1 − Φ(ζ))`.
pub fn tail_ratio(zeta: f64, zeta0: f64) -> Result<f64, HeavyTailError> {
    if zeta.is_nan() || zeta <= 0.0 {
        return Err(HeavyTailError::NonPositiveZeta(zeta));
    }
    heavy_cdf(zeta, zeta0)?;
    // 1 − Φ(x) evaluated as Φ(−x) to keep precision in the far tail
    Ok(normal_cdf(-transform(zeta, zeta0)) / normal_cdf(-zeta))
}

/// How `ζ₀` is chosen per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaZero {
    Fixed(f64),
    /// Uniform on `[0, 1)`, drawn afresh for every sample.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeavySamples {
    pub values: Vec<f64>,
    /// Samples whose normal quantile fell beyond `g(±6)` and were pinned to ±6.
    pub clamped: usize,
}

/// Inverse-transform sampling: `ζ = g⁻¹(Φ⁻¹(u))` with `u` uniform on `(0, 1)`,
/// inverted by bisection. Quantiles inside the jump of `g` map to the atom
/// at zero. Fixed by `seed`.
pub fn sample_heavy(
    count: usize,
    mode: ZetaZero,
    seed: u64,
) -> Result<HeavySamples, HeavyTailError> {
    if let ZetaZero::Fixed(z) = mode {
        check_zeta0(z)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clamped = 0;
    let values = (0..count)
        .map(|_| {
            let zeta0 = match mode {
                ZetaZero::Fixed(z) => z,
                ZetaZero::Uniform => rng.random::<f64>(),
            };
            let u: f64 = Open01.sample(&mut rng);
            let (zeta, pinned) = invert_transform(normal_quantile(u), zeta0);
            clamped += pinned as usize;
            zeta
        })
        .collect();
    Ok(HeavySamples { values, clamped })
}

/// Solves `g(ζ) = x` on `[−6, 6]`; the flag reports clamping at the edge.
pub fn invert_transform(x: f64, zeta0: f64) -> (f64, bool) {
    let jump = zeta0 * zeta0 / 12.0;
    let top = transform(DOMAIN_EDGE, zeta0);
    if x >= top {
        return (DOMAIN_EDGE, x > top);
    }
    if x <= -top {
        return (-DOMAIN_EDGE, x < -top);
    }
    if x.abs() <= jump {
        return (0.0, false);
    }
    let (mut lo, mut hi) = if x > 0.0 {
        (0.0, DOMAIN_EDGE)
    } else {
        (-DOMAIN_EDGE, 0.0)
    };
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if transform(mid, zeta0) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Binned samples over `[−6, 6]` with density overlays.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub empirical_density: Vec<f64>,
    /// Bin-averaged density of the heavy-tailed law, when attached.
    pub model_density: Option<Vec<f64>>,
    /// Standard normal density at each bin midpoint.
    pub normal_density: Vec<f64>,
}

impl Histogram {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn bins(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.edges.windows(2).map(|w| (w[0], w[1]))
    }

    /// Fills `model_density` with bin masses of the heavy-tailed law divided
    /// by the bin width. Under `Uniform`, the law is averaged over `ζ₀` with a
    /// 64-node midpoint rule.
    pub fn attach_model(&mut self, mode: ZetaZero) -> Result<(), HeavyTailError> {
        let nodes: Vec<f64> = match mode {
            ZetaZero::Fixed(z) => {
                check_zeta0(z)?;
                vec![z]
            }
            ZetaZero::Uniform => (0..64).map(|i| (i as f64 + 0.5) / 64.0).collect(),
        };
        let cdf = |x: f64| -> f64 {
            let x = x.clamp(-DOMAIN_EDGE, DOMAIN_EDGE);
            nodes
                .iter()
                .map(|&z0| heavy_cdf_right(x, z0).expect("clamped into domain"))
                .sum::<f64>()
                / nodes.len() as f64
        };
        let density = self
            .bins()
            .map(|(l, r)| {
                // the outermost bins absorb the clamped mass at ±6
                let lo = if l <= -DOMAIN_EDGE { 0.0 } else { cdf(l) };
                let hi = if r >= DOMAIN_EDGE { 1.0 } else { cdf(r) };
                (hi - lo) / (r - l)
            })
            .collect();
        self.model_density = Some(density);
        Ok(())
    }
}

/// Bins covering `[−6, 6]` of width `bin_width`, left-closed; the last bin
/// also takes its right edge. Samples outside the cover are dropped.
pub fn build_histogram(samples: &[f64], bin_width: f64) -> Result<Histogram, HeavyTailError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(HeavyTailError::NonPositiveBinWidth(bin_width));
    }
    if samples.is_empty() {
        return Err(HeavyTailError::NoSamples);
    }
    let bins = ((2.0 * DOMAIN_EDGE / bin_width) - 1e-9).ceil().max(1.0) as usize;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| -DOMAIN_EDGE + i as f64 * bin_width)
        .collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if !(x >= -DOMAIN_EDGE && x <= edges[bins]) {
            continue;
        }
        let i = (((x + DOMAIN_EDGE) / bin_width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let total = samples.len() as f64;
    let empirical_density = counts
        .iter()
        .map(|&c| c as f64 / total / bin_width)
        .collect();
    let normal_density = edges
        .windows(2)
        .map(|w| normal_pdf(0.5 * (w[0] + w[1])))
        .collect();
    Ok(Histogram {
        edges,
        counts,
        empirical_density,
        model_density: None,
        normal_density,
    })
}

/// `%g`-style rendering with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let sci = format!("{:.5e}", x);
    // rounding may bump the exponent (e.g. 9.999996 → 1.00000e1)
    let exp = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse::<i32>().ok())
        .unwrap_or(exp);
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let (mantissa, _) = sci.split_once('e').expect("scientific format");
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            sign,
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Histogram as CSV: `bin_left,bin_right,count,empirical_density,normal_density`.
pub fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_left,bin_right,count,empirical_density,normal_density\n");
    for (i, (l, r)) in h.bins().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_sig6(l),
            format_sig6(r),
            h.counts[i],
            format_sig6(h.empirical_density[i]),
            format_sig6(h.normal_density[i]),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_by_hand() {
        assert_eq!(solve_constants(0.0).unwrap(), (0.0, 1.0 / 6.0));
        let (c1, c2) = solve_constants(1.0).unwrap();
        assert!((c1 - 33.0 / 35.0).abs() < 1e-15);
        assert!((c2 - 4.0 / 35.0).abs() < 1e-15);
        assert_eq!(
            solve_constants(6.0),
            Err(HeavyTailError::SingularSystem(6.0))
        );
        assert!(solve_constants(-6.0).is_err());
    }

    #[test]
    fn spec_residuals_vanish() {
        for z0 in [0.0, 0.1, 0.5, 0.99] {
            let (r1, r2) = HeavyTailSpec::new(z0).unwrap().residuals();
            assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        }
        assert!(HeavyTailSpec::new(1.0).is_err());
    }

    #[test]
    fn shift_values() {
        assert_eq!(rfr_shift(3.0, 0.0, 1.0 / 6.0), -0.75);
        assert_eq!(rfr_shift(-3.0, 0.0, 1.0 / 6.0), 0.75);
        assert_eq!(rfr_shift(0.0, 0.3, 1.0 / 6.0), 0.0);
    }

    #[test]
    fn cdf_values() {
        let z0 = 0.4;
        assert_eq!(heavy_cdf(z0, z0).unwrap(), normal_cdf(z0));
        let p = heavy_cdf(3.0, 0.0).unwrap();
        assert!((p - 0.987_775_527_344_955_3).abs() < 1e-12);
        assert_eq!(heavy_cdf(0.0, 0.7).unwrap(), 0.5);
        assert_eq!(
            heavy_cdf(6.5, 0.0),
            Err(HeavyTailError::OutsideMonotoneDomain(6.5))
        );
        assert!(heavy_cdf(1.0, 1.0).is_err());
    }

    #[test]
    fn tail_ratio_values() {
        let r = tail_ratio(3.0, 0.0).unwrap();
        assert!((r - 9.055_848_937_184_4).abs() < 1e-9);
        assert!((tail_ratio(0.5, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(tail_ratio(0.3, 0.8).unwrap() < 1.0);
        assert!(tail_ratio(0.0, 0.8).is_err());
    }

    #[test]
    fn inversion_matches_quadratic_root() {
        // For x > ζ₀²/12 the positive branch solves ζ² − 12ζ + 12x − ζ₀² = 0.
        for &z0 in &[0.0, 0.3, 0.9] {
            for i in 1..60 {
                let x = i as f64 * 0.05;
                if x <= z0 * z0 / 12.0 || x >= transform(6.0, z0) {
                    continue;
                }
                let root = 6.0 - (36.0 - 12.0 * x + z0 * z0).sqrt();
                let (got, pinned) = invert_transform(x, z0);
                assert!(!pinned);
                assert!((got - root).abs() < 1e-9, "x={x} z0={z0}");
                let (neg, _) = invert_transform(-x, z0);
                assert!((neg + root).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn inversion_edges() {
        assert_eq!(invert_transform(0.01, 0.9), (0.0, false));
        assert_eq!(invert_transform(10.0, 0.5), (6.0, true));
        assert_eq!(invert_transform(-10.0, 0.5), (-6.0, true));
    }

    #[test]
    fn sampler_is_deterministic_and_bounded() {
        let a = sample_heavy(2000, ZetaZero::Uniform, 11).unwrap();
        let b = sample_heavy(2000, ZetaZero::Uniform, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.values.iter().all(|z| z.abs() <= 6.0));
        assert!(sample_heavy(10, ZetaZero::Fixed(1.5), 0).is_err());
    }

    #[test]
    fn histogram_basics() {
        let h = build_histogram(&[0.1], 0.25).unwrap();
        assert_eq!(h.bin_count(), 48);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(h.counts[24], 1);

        let h = build_histogram(&[-6.0, 6.0, 0.0, 2.9], 0.5).unwrap();
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[23], 1);
        let mass: f64 = h.empirical_density.iter().map(|d| d * 0.5).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((h.normal_density[12] - normal_pdf(0.25)).abs() < 1e-15);

        assert_eq!(build_histogram(&[], 0.5), Err(HeavyTailError::NoSamples));
        assert_eq!(
            build_histogram(&[1.0], 0.0),
            Err(HeavyTailError::NonPositiveBinWidth(0.0))
        );
    }

    #[test]
    fn model_density_integrates_to_one() {
        for mode in [ZetaZero::Fixed(0.5), ZetaZero::Uniform] {
            let mut h = build_histogram(&[0.0], 0.25).unwrap();
            h.attach_model(mode).unwrap();
            let mass: f64 = h.model_density.unwrap().iter().map(|d| d * 0.25).sum();
            assert!((mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(-6.0), "-6");
        assert_eq!(format_sig6(0.25), "0.25");
        assert_eq!(format_sig6(0.398942280401), "0.398942");
        assert_eq!(format_sig6(1.2345678e-7), "1.23457e-07");
        assert_eq!(format_sig6(123456789.0), "1.23457e+08");
        assert_eq!(format_sig6(9.9999996), "10");
        assert_eq!(format_sig6(0.00012345678), "0.000123457");
        assert_eq!(format_sig6(0.000027834), "2.7834e-05");
    }
}
