//! Price paths as functions of bounded variation.
//!
//! The crate covers the whole chain from raw ticks to directional odds:
//!
//! * [`variation`]: total variation, Jordan decomposition and the identities
//!   `Σ⁺ − Σ⁻ = D`, `Σ⁺ + Σ⁻ = V`.
//! * [`grid`]: elementary segments, oscillations and the parameters
//!   `λ, ρ̄, α₁, α₂`.
//! * [`counting`]: exact and Gaussian distributions of the endpoint
//!   difference over `2n` oscillations, with a brute-force enumerator.
//! * [`shifted`]: the frame shift for `α ≠ 0`, `P(ζ ≤ 0)`, moments of `D`,
//!   rolling bands and a path simulator.
//! * [`heavy_tails`]: the fat-tailed distribution, its sampler and histograms.
//! * [`pipeline`]: CSV ingestion and the analysis report.

pub mod counting;
pub mod grid;
pub mod heavy_tails;
pub mod normal;
pub mod pipeline;
pub mod shifted;
pub mod variation;

use thiserror::Error;

pub use counting::{CountDistribution, CountingError};
pub use grid::{ConditionReport, GridError, GridParams, SegmentGrid, SegmentStats};
pub use heavy_tails::{HeavyTailError, HeavyTailSpec, Histogram, ZetaZero};
pub use normal::{normal_cdf, normal_pdf, normal_quantile};
pub use pipeline::{AlphaPolicy, AnalysisReport, InputError, OutputFormat, RunConfig};
pub use shifted::{BandPoint, FrameShift, ModelMoments, ShiftError};
pub use variation::{PriceSeries, VariationError, VariationSummary};

/// Any failure, tagged with the module it came from.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Variation(#[from] VariationError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    HeavyTail(#[from] HeavyTailError),
}

/// Whether a failure comes from bad input/usage or from the model itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed data, bad flags, out-of-range configuration.
    Input,
    /// The data is fine but the model does not apply (e.g. `|α| ≥ 1`).
    Domain,
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::Input(_) => "pipeline",
            Error::Variation(_) => "variation",
            Error::Grid(_) => "grid",
            Error::Counting(_) => "counting",
            Error::Shift(ShiftError::Grid(_)) => "grid",
            Error::Shift(_) => "shifted",
            Error::HeavyTail(_) => "heavy_tails",
        }
    }

    /// Stable machine-readable code, e.g. `grid.degenerate_grid`.
    pub fn code(&self) -> String {
        let name = match self {
            Error::Input(e) => match e {
                InputError::EmptyFile => "empty_file",
                InputError::BadHeader { .. } => "bad_header",
                InputError::MalformedRow { .. } => "malformed_row",
                InputError::NonMonotoneTimestamps { .. } => "non_monotone_timestamps",
                InputError::Io(_) => "io",
            },
            Error::Variation(e) => match e {
                VariationError::SeriesTooShort { .. } => "series_too_short",
                VariationError::LengthMismatch { .. } => "length_mismatch",
                VariationError::NonIncreasingTimestamp { .. } => "non_increasing_timestamp",
                VariationError::NonFinitePrice { .. } => "non_finite_price",
            },
            Error::Grid(e) | Error::Shift(ShiftError::Grid(e)) => grid_code(e),
            Error::Counting(e) => match e {
                CountingError::ZeroN => "zero_n",
                CountingError::TooLargeForEnumeration(_) => "too_large_for_enumeration",
            },
            Error::Shift(e) => match e {
                ShiftError::EmptyRange { .. } => "empty_range",
                ShiftError::OutOfRange { .. } => "out_of_range",
                ShiftError::AlphaOutOfUnitInterval(_) => "alpha_out_of_unit_interval",
                ShiftError::NonPositiveOmega(_) => "non_positive_omega",
                ShiftError::NonPositiveSigma(_) => "non_positive_sigma",
                ShiftError::ZeroN => "zero_n",
                ShiftError::WindowTooLarge { .. } => "window_too_large",
                ShiftError::InvalidBandWidth(_) => "invalid_band_width",
                ShiftError::Grid(_) => unreachable!("matched above"),
            },
            Error::HeavyTail(e) => match e {
                HeavyTailError::SingularSystem(_) => "singular_system",
                HeavyTailError::OutsideMonotoneDomain(_) => "outside_monotone_domain",
                HeavyTailError::InvalidZetaZero(_) => "invalid_zeta0",
                HeavyTailError::NonPositiveZeta(_) => "non_positive_zeta",
                HeavyTailError::NoSamples => "no_samples",
                HeavyTailError::NonPositiveBinWidth(_) => "non_positive_bin_width",
            },
        };
        format!("{}.{}", self.module(), name)
    }

    pub fn class(&self) -> ErrorClass {
        let domain = match self {
            Error::Input(_) | Error::Variation(_) | Error::Counting(_) => false,
            Error::Grid(e) | Error::Shift(ShiftError::Grid(e)) => {
                matches!(e, GridError::DegenerateGrid)
            }
            Error::Shift(e) => matches!(
                e,
                ShiftError::EmptyRange { .. }
                    | ShiftError::OutOfRange { .. }
                    | ShiftError::AlphaOutOfUnitInterval(_)
                    | ShiftError::NonPositiveOmega(_)
                    | ShiftError::NonPositiveSigma(_)
            ),
            Error::HeavyTail(e) => matches!(
                e,
                HeavyTailError::SingularSystem(_) | HeavyTailError::OutsideMonotoneDomain(_)
            ),
        };
        if domain {
            ErrorClass::Domain
        } else {
            ErrorClass::Input
        }
    }
}

fn grid_code(e: &GridError) -> &'static str {
    match e {
        GridError::SeriesTooShort { .. } => "series_too_short",
        GridError::NoTicksAtAll => "no_ticks_at_all",
        GridError::ZeroSegments => "zero_segments",
        GridError::LeadingEmptySegment => "leading_empty_segment",
        GridError::SingleSegment => "single_segment",
        GridError::DegenerateGrid => "degenerate_grid",
        GridError::EpsilonOutOfRange(_) => "epsilon_out_of_range",
    }
}
