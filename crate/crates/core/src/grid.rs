//! Elementary segments, their oscillations and the grid parameters
//! `λ, ρ̄, α₁, α₂` of the variation-by-oscillation decomposition.
//!
//! A grid over `[a, b]` holds `n + 1` segments indexed `0..=n`, so there are
//! `n` adjacent pairs. The grid variation is
//!
//! ```text
//! V = Σ_{k=1..n} (ω_{k−1} + ω_k) + Σ_{k=1..n} min(|M_k − m_{k−1}|, |M_{k−1} − m_k|)
//! ```
//!
//! and it is rewritten as `V = 2nλρ̄(1 + α₁ + α₂)`.

use serde::Serialize;
use thiserror::Error;

use crate::variation::PriceSeries;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("series has {len} ticks, at least 2 are required")]
    SeriesTooShort { len: usize },
    #[error("series holds no ticks")]
    NoTicksAtAll,
    #[error("segment count must be at least 1")]
    ZeroSegments,
    #[error("first segment holds no ticks")]
    LeadingEmptySegment,
    #[error("grid has a single segment, no adjacent pairs")]
    SingleSegment,
    #[error("every segment has zero oscillation, λ is undefined")]
    DegenerateGrid,
    #[error("epsilon_rho = {0} is outside (0, 1)")]
    EpsilonOutOfRange(f64),
}

/// Extrema of the function over one elementary segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentStats {
    pub index: usize,
    /// Least upper bound `M_k`.
    pub sup: f64,
    /// Greatest lower bound `m_k`.
    pub inf: f64,
    /// Last price seen in the segment (carried into empty successors).
    pub close: f64,
    pub ticks: usize,
}

impl SegmentStats {
    pub fn new(index: usize, sup: f64, inf: f64) -> Self {
        debug_assert!(inf <= sup);
        Self {
            index,
            sup,
            inf,
            close: inf,
            ticks: 0,
        }
    }

    /// `ω_k = M_k − m_k`.
    pub fn oscillation(&self) -> f64 {
        self.sup - self.inf
    }

    fn midpoint_sum(&self) -> f64 {
        self.sup + self.inf
    }
}

/// Uniform partition of `[a, b]` into elementary segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGrid {
    segments: Vec<SegmentStats>,
    /// Segment width Δ in milliseconds.
    width_ms: f64,
}

impl SegmentGrid {
    /// Grid from explicit segments; indices are rewritten to `0..len`.
    pub fn from_segments(mut segments: Vec<SegmentStats>, width_ms: f64) -> Self {
        for (i, s) in segments.iter_mut().enumerate() {
            s.index = i;
        }
        Self { segments, width_ms }
    }

    pub fn segments(&self) -> &[SegmentStats] {
        &self.segments
    }

    pub fn width_ms(&self) -> f64 {
        self.width_ms
    }

    /// Number of adjacent pairs `n`.
    pub fn pair_count(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    pub fn oscillations(&self) -> Vec<f64> {
        self.segments
            .iter()
            .map(SegmentStats::oscillation)
            .collect()
    }

    /// Contiguous sub-grid of segments `range`, re-indexed from zero.
    pub fn window(&self, range: std::ops::Range<usize>) -> SegmentGrid {
        SegmentGrid::from_segments(self.segments[range].to_vec(), self.width_ms)
    }

    /// `λ = max ω_k` and densities `ρ_k = ω_k / λ`.
    pub fn densities(&self) -> Result<(f64, Vec<f64>), GridError> {
        let lambda = self
            .segments
            .iter()
            .map(SegmentStats::oscillation)
            .fold(0.0, f64::max);
        if lambda <= 0.0 {
            return Err(GridError::DegenerateGrid);
        }
        let rho = self
            .segments
            .iter()
            .map(|s| s.oscillation() / lambda)
            .collect();
        Ok((lambda, rho))
    }

    fn require_pairs(&self) -> Result<(), GridError> {
        if self.segments.len() < 2 {
            Err(GridError::SingleSegment)
        } else {
            Ok(())
        }
    }
}

/// Split `[a, b]` into `segment_count` equal half-open intervals (the last one
/// closed) and record the extrema of the ticks inside each.
///
/// Empty segments carry the previous close forward with zero oscillation.
pub fn build_grid(series: &PriceSeries, segment_count: usize) -> Result<SegmentGrid, GridError> {
    if series.is_empty() {
        return Err(GridError::NoTicksAtAll);
    }
    if series.len() < 2 {
        return Err(GridError::SeriesTooShort { len: series.len() });
    }
    if segment_count == 0 {
        return Err(GridError::ZeroSegments);
    }
    let (a, b) = series.span().expect("non-empty series");
    let span = (b - a) as i128;
    let count = segment_count as i128;

    let mut slots: Vec<Option<SegmentStats>> = vec![None; segment_count];
    for (&t, &price) in series.timestamps().iter().zip(series.prices()) {
        let k = (((t - a) as i128 * count) / span).min(count - 1) as usize;
        let slot = slots[k].get_or_insert(SegmentStats {
            index: k,
            sup: price,
            inf: price,
            close: price,
            ticks: 0,
        });
        slot.sup = slot.sup.max(price);
        slot.inf = slot.inf.min(price);
        slot.close = price;
        slot.ticks += 1;
    }

    let mut segments = Vec::with_capacity(segment_count);
    let mut last_close = None;
    for (k, slot) in slots.into_iter().enumerate() {
        let seg = match slot {
            Some(s) => s,
            None => {
                let close = last_close.ok_or(GridError::LeadingEmptySegment)?;
                SegmentStats {
                    index: k,
                    sup: close,
                    inf: close,
                    close,
                    ticks: 0,
                }
            }
        };
        last_close = Some(seg.close);
        segments.push(seg);
    }
    Ok(SegmentGrid {
        segments,
        width_ms: span as f64 / segment_count as f64,
    })
}

/// Increment bound of one transition: `max(M_prev, M_next) − min(m_prev, m_next)`.
pub fn pair_increment(prev: &SegmentStats, next: &SegmentStats) -> f64 {
    prev.sup.max(next.sup) - prev.inf.min(next.inf)
}

/// Transition term `min(|M_next − m_prev|, |M_prev − m_next|)`.
pub fn min_shift(prev: &SegmentStats, next: &SegmentStats) -> f64 {
    (next.sup - prev.inf).abs().min((prev.sup - next.inf).abs())
}

/// Direction of a transition under the midpoint convention: `+1` when the
/// midpoint moves down, `−1` when it moves up, `0` when it stays.
pub fn transition_sign(prev: &SegmentStats, next: &SegmentStats) -> f64 {
    let delta = prev.midpoint_sum() - next.midpoint_sum();
    if delta > 0.0 {
        1.0
    } else if delta < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn grid_variation(grid: &SegmentGrid) -> Result<f64, GridError> {
    grid.require_pairs()?;
    Ok(grid
        .segments
        .windows(2)
        .map(|w| w[0].oscillation() + w[1].oscillation() + min_shift(&w[0], &w[1]))
        .sum())
}

/// Estimated model parameters of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridParams {
    /// Pair count.
    pub n: usize,
    pub lambda: f64,
    pub rho_bar: f64,
    pub alpha1: f64,
    /// Average shift, always ≥ 0.
    pub alpha2: f64,
    /// Average shift with each transition signed by its midpoint direction.
    pub alpha2_signed: f64,
    /// Average oscillation `λρ̄`.
    pub omega: f64,
}

impl GridParams {
    /// `α₁ + α₂`.
    pub fn alpha(&self) -> f64 {
        self.alpha1 + self.alpha2
    }

    /// `α₁ + α₂` with the signed shift term.
    pub fn alpha_signed(&self) -> f64 {
        self.alpha1 + self.alpha2_signed
    }

    /// `2nλρ̄(1 + α₁ + α₂)`.
    pub fn reconstruction(&self) -> f64 {
        2.0 * self.n as f64 * self.lambda * self.rho_bar * (1.0 + self.alpha())
    }
}

pub fn estimate_params(grid: &SegmentGrid) -> Result<GridParams, GridError> {
    grid.require_pairs()?;
    let (lambda, rho) = grid.densities()?;
    let n = grid.pair_count();
    let nf = n as f64;
    let rho_bar = rho.iter().sum::<f64>() / rho.len() as f64;
    let scale = 2.0 * nf * lambda * rho_bar;

    let (mut shift, mut signed) = (0.0, 0.0);
    for w in grid.segments.windows(2) {
        let s = min_shift(&w[0], &w[1]);
        shift += s;
        signed += transition_sign(&w[0], &w[1]) * s;
    }

    Ok(GridParams {
        n,
        lambda,
        rho_bar,
        alpha1: (rho[0] - rho[n]) / (2.0 * nf * rho_bar),
        alpha2: shift / scale,
        alpha2_signed: signed / scale,
        omega: lambda * rho_bar,
    })
}

/// Adjacent density pairs failing `|ρ_k − ρ_{k−1}| < ε_ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    pub epsilon_rho: f64,
    pub violations: usize,
    pub fraction: f64,
}

pub fn check_density_condition(
    grid: &SegmentGrid,
    epsilon_rho: f64,
) -> Result<ConditionReport, GridError> {
    if !(epsilon_rho > 0.0 && epsilon_rho < 1.0) {
        return Err(GridError::EpsilonOutOfRange(epsilon_rho));
    }
    grid.require_pairs()?;
    let (_, rho) = grid.densities()?;
    let violations = rho
        .windows(2)
        .filter(|w| (w[1] - w[0]).abs() >= epsilon_rho)
        .count();
    Ok(ConditionReport {
        epsilon_rho,
        violations,
        fraction: violations as f64 / grid.pair_count() as f64,
    })
}
