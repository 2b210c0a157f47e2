//! The shifted frame for `α ≠ 0`: admissible differences, the primed
//! variables, the directional probability `P(ζ ≤ 0)`, moments of `D`, the
//! band prototype and a path simulator.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::grid::{self, GridError, SegmentGrid};
use crate::normal::normal_cdf;
use crate::variation::PriceSeries;

/// Distance from ±1 used when clamping `α` into the open unit interval.
pub const CLAMP_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftError {
    #[error("|z0| = {z0} exceeds 2n = {two_n}, no admissible differences")]
    EmptyRange { z0: i64, two_n: i64 },
    #[error("z = {z} is outside the admissible range {lo}..={hi}")]
    OutOfRange { z: i64, lo: i64, hi: i64 },
    #[error("alpha = {0} is outside (-1, 1); pass --clamp to pull it to ±(1 - 1e-9)")]
    AlphaOutOfUnitInterval(f64),
    #[error("omega must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("n must be at least 1")]
    ZeroN,
    #[error("band window of {window} segments needs at least 2 and at most {available}")]
    WindowTooLarge { window: usize, available: usize },
    #[error("band multiplier k must be finite and non-negative, got {0}")]
    InvalidBandWidth(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn check_alpha(alpha: f64) -> Result<(), ShiftError> {
    if alpha.is_finite() && alpha > -1.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(ShiftError::AlphaOutOfUnitInterval(alpha))
    }
}

/// Pull `alpha` into `[−1 + 1e−9, 1 − 1e−9]`.
pub fn clamp_alpha(alpha: f64) -> f64 {
    alpha.clamp(-1.0 + CLAMP_MARGIN, 1.0 - CLAMP_MARGIN)
}

/// Integers `z` with `|2z − z0| ≤ 2n − |z0|`.
pub fn admissible_range(n: u32, z0: i64) -> Result<RangeInclusive<i64>, ShiftError> {
    let two_n = 2 * n as i64;
    let room = two_n - z0.abs();
    if room < 0 {
        return Err(ShiftError::EmptyRange { z0, two_n });
    }
    let lo = (z0 - room).div_euclid(2) + (z0 - room).rem_euclid(2);
    let hi = (z0 + room).div_euclid(2);
    Ok(lo..=hi)
}

/// Difference `z` expressed in the primed frame: `2z′ = 2z − z0`,
/// `2n′ = 2n − |z0|`. Doubled values keep odd shifts exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrameShift {
    pub n: u32,
    pub z0: i64,
    pub doubled_z_prime: i64,
    pub doubled_n_prime: i64,
}

impl FrameShift {
    /// Jordan gains in the primed frame, `(Σ⁺, Σ⁻) = (n′ + z′, n′ − z′)`.
    pub fn primed_gains(&self) -> (f64, f64) {
        let (z, n) = (
            self.doubled_z_prime as f64 / 2.0,
            self.doubled_n_prime as f64 / 2.0,
        );
        (n + z, n - z)
    }
}

pub fn shift_frame(z: i64, n: u32, z0: i64) -> Result<FrameShift, ShiftError> {
    let range = admissible_range(n, z0)?;
    if !range.contains(&z) {
        return Err(ShiftError::OutOfRange {
            z,
            lo: *range.start(),
            hi: *range.end(),
        });
    }
    Ok(FrameShift {
        n,
        z0,
        doubled_z_prime: 2 * z - z0,
        doubled_n_prime: 2 * n as i64 - z0.abs(),
    })
}

/// Unrounded frame offset `z0 = −2nα`.
pub fn frame_offset(alpha: f64, n: u32) -> f64 {
    -2.0 * n as f64 * alpha
}

/// `ζ′ = (ζ + α√(2n)) / √(1 − |α|)`.
pub fn zeta_prime(zeta: f64, alpha: f64, n: u32) -> Result<f64, ShiftError> {
    check_alpha(alpha)?;
    Ok((zeta + alpha * (2.0 * n as f64).sqrt()) / (1.0 - alpha.abs()).sqrt())
}

/// `P(ζ ≤ 0) = Φ(α√(2n) / √(1 − |α|))`.
pub fn p_leq_zero(alpha: f64, n: u32) -> Result<f64, ShiftError> {
    if n == 0 {
        return Err(ShiftError::ZeroN);
    }
    Ok(normal_cdf(zeta_prime(0.0, alpha, n)?))
}

/// Mean and standard deviation of `D`, in price units and in units of `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelMoments {
    pub mu: f64,
    pub sigma: f64,
    pub mu_omega: f64,
    pub sigma_omega: f64,
}

/// `μ_ω = −2nα`, `σ_ω² = 2n(1 − |α|)`.
pub fn moments(alpha: f64, n: u32, omega: f64) -> Result<ModelMoments, ShiftError> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(ShiftError::ZeroN);
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(ShiftError::NonPositiveOmega(omega));
    }
    let mu_omega = frame_offset(alpha, n);
    let sigma_omega = (2.0 * n as f64 * (1.0 - alpha.abs())).sqrt();
    Ok(ModelMoments {
        mu: mu_omega * omega,
        sigma: sigma_omega * omega,
        mu_omega,
        sigma_omega,
    })
}

/// `P(ζ ≤ 0) = Φ(−μ/σ)`.
pub fn p_leq_zero_from_moments(mu: f64, sigma: f64) -> Result<f64, ShiftError> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(ShiftError::NonPositiveSigma(sigma));
    }
    Ok(normal_cdf(-mu / sigma))
}

/// Forecast interval `price + μ ± kσ` at the end of one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPoint {
    pub timestamp: i64,
    pub center: f64,
    pub upper: f64,
    pub lower: f64,
    pub k: f64,
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
    pub condition_fraction: f64,
}

/// One rolling window: the segment it ends on and its band, or the reason
/// the model could not be fitted there.
#[derive(Debug, Clone, PartialEq)]
pub struct BandWindow {
    pub end_segment: usize,
    pub timestamp: i64,
    pub band: Result<BandPoint, ShiftError>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandConfig {
    /// Segments in the grid laid over the whole series.
    pub segment_count: usize,
    /// Segments per rolling window (`n + 1`).
    pub window_segments: usize,
    pub k: f64,
    pub epsilon_rho: f64,
}

/// Fits the model on each run of `window_segments` consecutive segments and
/// emits `close + μ ± kσ`, with the signed `α` clamped into `(−1, 1)`.
pub fn rolling_bands(
    series: &PriceSeries,
    config: &BandConfig,
) -> Result<Vec<BandWindow>, ShiftError> {
    if !(config.k >= 0.0 && config.k.is_finite()) {
        return Err(ShiftError::InvalidBandWidth(config.k));
    }
    if !(config.epsilon_rho > 0.0 && config.epsilon_rho < 1.0) {
        return Err(GridError::EpsilonOutOfRange(config.epsilon_rho).into());
    }
    let full = grid::build_grid(series, config.segment_count)?;
    let available = full.segments().len();
    if config.window_segments < 2 || config.window_segments > available {
        return Err(ShiftError::WindowTooLarge {
            window: config.window_segments,
            available,
        });
    }

    let (a, _) = series.span().expect("grid built from non-empty series");
    let windows = (config.window_segments - 1..available)
        .map(|end| {
            let window = full.window(end + 1 - config.window_segments..end + 1);
            let close = window.segments().last().expect("window is non-empty").close;
            let timestamp = a + ((end + 1) as f64 * full.width_ms()).round() as i64;
            BandWindow {
                end_segment: end,
                timestamp,
                band: band_for(&window, close, timestamp, config),
            }
        })
        .collect();
    Ok(windows)
}

fn band_for(
    window: &SegmentGrid,
    close: f64,
    timestamp: i64,
    config: &BandConfig,
) -> Result<BandPoint, ShiftError> {
    let params = grid::estimate_params(window)?;
    let condition = grid::check_density_condition(window, config.epsilon_rho)?;
    let alpha = clamp_alpha(params.alpha_signed());
    let m = moments(alpha, params.n as u32, params.omega)?;
    let center = close + m.mu;
    Ok(BandPoint {
        timestamp,
        center,
        upper: center + config.k * m.sigma,
        lower: center - config.k * m.sigma,
        k: config.k,
        alpha,
        mu: m.mu,
        sigma: m.sigma,
        condition_fraction: condition.fraction,
    })
}

/// Samples of `D` drawn from the shifted walk.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub n: u32,
    pub alpha: f64,
    pub omega: f64,
    /// `z0 = round(−2nα)`.
    pub z0: i64,
    /// `2n′ = 2n − |z0|` fair steps per path.
    pub steps: u64,
    /// `−z0 / (2n)`, the `α` the rounded offset actually realizes.
    pub realized_alpha: f64,
    pub samples: Vec<f64>,
}

impl Simulation {
    /// Bias of the mean of `D` caused by rounding `z0`, in price units (≤ ω/2).
    pub fn rounding_bias(&self) -> f64 {
        (self.z0 as f64 - frame_offset(self.alpha, self.n)) * self.omega
    }
}

/// Each sample is `ω·(z0 + S)` where `S` sums `2n − |z0|` fair ±1 steps, so
/// `D/ω` has mean `z0 ≈ −2nα` and variance `2n − |z0| ≈ 2n(1 − |α|)`.
/// `D/ω` is always even. Output is fixed by `seed`.
pub fn simulate_differences(
    n: u32,
    alpha: f64,
    omega: f64,
    count: usize,
    seed: u64,
) -> Result<Simulation, ShiftError> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(ShiftError::ZeroN);
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(ShiftError::NonPositiveOmega(omega));
    }
    let z0 = frame_offset(alpha, n).round() as i64;
    let steps = (2 * n as i64 - z0.abs()) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..count)
        .map(|_| omega * (z0 + fair_walk(&mut rng, steps)) as f64)
        .collect();
    Ok(Simulation {
        n,
        alpha,
        omega,
        z0,
        steps,
        realized_alpha: -(z0 as f64) / (2.0 * n as f64),
        samples,
    })
}

/// Signed sum of `steps` fair ±1 steps, one random bit per step.
fn fair_walk<R: Rng>(rng: &mut R, steps: u64) -> i64 {
    let mut ups = 0u64;
    let mut left = steps;
    while left > 0 {
        let take = left.min(64);
        let word: u64 = rng.random();
        let mask = if take == 64 {
            u64::MAX
        } else {
            (1u64 << take) - 1
        };
        ups += (word & mask).count_ones() as u64;
        left -= take;
    }
    2 * ups as i64 - steps as i64
}
