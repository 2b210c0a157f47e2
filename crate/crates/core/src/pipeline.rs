//! Tick ingestion, run configuration and the end-to-end analysis report.

use std::io::Read;

use serde::Serialize;

use crate::grid::{self, ConditionReport};
use crate::shifted::{self, clamp_alpha, ModelMoments, ShiftError};
use crate::variation::{self, PriceSeries, VariationSummary};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest allowed gap between the two probability routes in a report.
pub const ROUTE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InputError {
    #[error("input holds no ticks")]
    EmptyFile,
    #[error("line {line}: expected header `timestamp,price`, found `{found}`")]
    BadHeader { line: u64, found: String },
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: timestamp {timestamp} is earlier than {previous}")]
    NonMonotoneTimestamps {
        line: u64,
        timestamp: i64,
        previous: i64,
    },
    #[error("cannot read input: {0}")]
    Io(String),
}

/// Reads `timestamp,price` CSV (epoch milliseconds, decimal price).
///
/// Repeated timestamps keep the last quoted price.
pub fn parse_ticks<R: Read>(input: R) -> Result<PriceSeries, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut timestamps: Vec<i64> = Vec::new();
    let mut prices: Vec<f64> = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut header_seen = false;

    loop {
        let more = reader.read_record(&mut record).map_err(csv_error)?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if !header_seen {
            header_seen = true;
            let fields: Vec<&str> = record.iter().collect();
            if fields != ["timestamp", "price"] {
                return Err(InputError::BadHeader {
                    line,
                    found: fields.join(","),
                }
                .into());
            }
            continue;
        }
        if record.len() != 2 {
            return Err(malformed(
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let timestamp: i64 = record[0]
            .parse()
            .map_err(|_| malformed(line, format!("bad timestamp `{}`", &record[0])))?;
        let price: f64 = record[1]
            .parse()
            .ok()
            .filter(|p: &f64| p.is_finite())
            .ok_or_else(|| malformed(line, format!("bad price `{}`", &record[1])))?;

        match timestamps.last() {
            Some(&previous) if timestamp < previous => {
                return Err(InputError::NonMonotoneTimestamps {
                    line,
                    timestamp,
                    previous,
                }
                .into());
            }
            Some(&previous) if timestamp == previous => {
                *prices.last_mut().expect("parallel vectors") = price;
            }
            _ => {
                timestamps.push(timestamp);
                prices.push(price);
            }
        }
    }

    if timestamps.is_empty() {
        return Err(InputError::EmptyFile.into());
    }
    Ok(PriceSeries::new(timestamps, prices)?)
}

fn malformed(line: u64, reason: String) -> Error {
    InputError::MalformedRow { line, reason }.into()
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(io) => InputError::Io(io.to_string()).into(),
        _ => malformed(line, e.to_string()),
    }
}

/// What to do with an estimated `α` outside `(−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaPolicy {
    Error,
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub segment_count: usize,
    pub epsilon_rho: f64,
    pub alpha_policy: AlphaPolicy,
    pub band_k: f64,
    pub band_window: usize,
    pub seed: u64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            segment_count: 64,
            epsilon_rho: 0.5,
            alpha_policy: AlphaPolicy::Error,
            band_k: 2.0,
            band_window: 16,
            seed: 0,
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.segment_count < 2 {
            return Err(grid::GridError::SingleSegment.into());
        }
        if !(self.epsilon_rho > 0.0 && self.epsilon_rho < 1.0) {
            return Err(grid::GridError::EpsilonOutOfRange(self.epsilon_rho).into());
        }
        if !(self.band_k >= 0.0 && self.band_k.is_finite()) {
            return Err(ShiftError::InvalidBandWidth(self.band_k).into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceInfo {
    pub file: Option<String>,
    pub ticks: usize,
    pub start_ms: i64,
    pub end_ms: i64,
    pub span_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationSection {
    #[serde(flatten)]
    pub summary: VariationSummary,
    pub hyperbola_product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSection {
    pub segments: usize,
    pub width_ms: f64,
    pub n: usize,
    pub lambda: f64,
    pub rho_bar: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha2_signed: f64,
    pub alpha: f64,
    pub alpha_signed: f64,
    pub omega: f64,
    pub grid_variation: f64,
    pub reconstruction: f64,
    /// `grid_variation − reconstruction`, which is `2(ω̄ − ω_0)`.
    pub reconstruction_residual: f64,
}

/// Directional probability for one choice of `α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilitySection {
    pub alpha_estimated: f64,
    pub alpha_used: f64,
    pub clamped: bool,
    pub p_leq_zero: f64,
    pub moments: ModelMoments,
    pub p_leq_zero_from_moments: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checks {
    pub jordan_residual: f64,
    pub jordan_identities_hold: bool,
    pub probability_route_gap: f64,
    pub probability_routes_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub source: SourceInfo,
    pub config: RunConfig,
    pub variation: VariationSection,
    pub grid: GridSection,
    pub condition: ConditionReport,
    /// `α = α₁ + α₂` with the unsigned shift term.
    pub unsigned: ProbabilitySection,
    /// `α = α₁ + α₂` with the midpoint-signed shift term.
    pub signed: ProbabilitySection,
    pub checks: Checks,
}

fn probability_section(
    alpha: f64,
    n: usize,
    omega: f64,
    policy: AlphaPolicy,
) -> Result<ProbabilitySection, Error> {
    let used = match policy {
        AlphaPolicy::Error => alpha,
        AlphaPolicy::Clamp => clamp_alpha(alpha),
    };
    let n = n as u32;
    let p = shifted::p_leq_zero(used, n)?;
    let m = shifted::moments(used, n, omega)?;
    Ok(ProbabilitySection {
        alpha_estimated: alpha,
        alpha_used: used,
        clamped: used != alpha,
        p_leq_zero: p,
        moments: m,
        p_leq_zero_from_moments: shifted::p_leq_zero_from_moments(m.mu, m.sigma)?,
    })
}

/// Variation identities, grid parameters, density condition and both
/// directional probabilities for one series.
pub fn analyze(
    series: &PriceSeries,
    config: &RunConfig,
    file: Option<&str>,
) -> Result<AnalysisReport, Error> {
    config.validate()?;
    let summary = variation::variation_summary(series)?;
    let g = grid::build_grid(series, config.segment_count)?;
    let params = grid::estimate_params(&g)?;
    let grid_v = grid::grid_variation(&g)?;
    let condition = grid::check_density_condition(&g, config.epsilon_rho)?;

    let unsigned =
        probability_section(params.alpha(), params.n, params.omega, config.alpha_policy)?;
    let signed = probability_section(
        params.alpha_signed(),
        params.n,
        params.omega,
        config.alpha_policy,
    )?;

    let gap = (unsigned.p_leq_zero - unsigned.p_leq_zero_from_moments)
        .abs()
        .max((signed.p_leq_zero - signed.p_leq_zero_from_moments).abs());
    let (start, end) = series.span().expect("validated series");

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        source: SourceInfo {
            file: file.map(str::to_owned),
            ticks: series.len(),
            start_ms: start,
            end_ms: end,
            span_ms: end - start,
        },
        config: *config,
        variation: VariationSection {
            summary,
            hyperbola_product: summary.hyperbola_product(),
        },
        grid: GridSection {
            segments: g.segments().len(),
            width_ms: g.width_ms(),
            n: params.n,
            lambda: params.lambda,
            rho_bar: params.rho_bar,
            alpha1: params.alpha1,
            alpha2: params.alpha2,
            alpha2_signed: params.alpha2_signed,
            alpha: params.alpha(),
            alpha_signed: params.alpha_signed(),
            omega: params.omega,
            grid_variation: grid_v,
            reconstruction: params.reconstruction(),
            reconstruction_residual: grid_v - params.reconstruction(),
        },
        condition,
        unsigned,
        signed,
        checks: Checks {
            jordan_residual: summary.identity_residual(),
            jordan_identities_hold: summary.identities_hold(),
            probability_route_gap: gap,
            probability_routes_agree: gap < ROUTE_TOLERANCE,
        },
    })
}
