use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tickvar_core::heavy_tails::{self, ZetaZero};
use tickvar_core::pipeline::{self, AlphaPolicy, OutputFormat, RunConfig};
use tickvar_core::shifted::{self, BandConfig};
use tickvar_core::{counting, Error, ErrorClass, PriceSeries};

mod render;

#[derive(Parser)]
#[command(
    name = "tickvar",
    version,
    about = "Bounded-variation price model toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Variation identities, grid parameters and directional odds for a tick file.
    Analyze {
        /// Tick CSV (`timestamp,price`), or `-` for stdin.
        file: String,
        #[arg(long, default_value_t = 64)]
        segments: usize,
        #[arg(long = "epsilon-rho", default_value_t = 0.5)]
        epsilon_rho: f64,
        /// Pull |α| ≥ 1 to ±(1 − 1e-9) instead of failing.
        #[arg(long)]
        clamp: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rolling forecast bands `close + μ ± kσ`.
    Bands {
        file: String,
        #[arg(long, default_value_t = 64)]
        segments: usize,
        /// Segments per rolling window.
        #[arg(long, default_value_t = 16)]
        window: usize,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        #[arg(long = "epsilon-rho", default_value_t = 0.5)]
        epsilon_rho: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact and Gaussian distribution of the difference z over 2n oscillations.
    Enumerate {
        #[arg(long)]
        n: u32,
        /// Cross-check every count by walking all 2^(2n) sequences (n ≤ 12).
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample endpoint differences D from the shifted walk.
    Simulate {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heavy-tailed samples binned against the normal law (CSV).
    Heavytails {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// A fixed value in [0, 1) or `uniform`.
        #[arg(long, default_value = "uniform", value_parser = parse_zeta0)]
        zeta0: ZetaZero,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bin width in ζ units.
        #[arg(long, default_value_t = 0.25)]
        bins: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_zeta0(s: &str) -> Result<ZetaZero, String> {
    if s.eq_ignore_ascii_case("uniform") {
        return Ok(ZetaZero::Uniform);
    }
    s.parse::<f64>()
        .map(ZetaZero::Fixed)
        .map_err(|_| format!("expected a number or `uniform`, got `{s}`"))
}

/// What a subcommand produced: text for the output sink and whether the run
/// counts as a model failure despite producing output.
struct Outcome {
    text: String,
    domain_failure: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            domain_failure: false,
        }
    }
}

enum Failure {
    Model(Error),
    Io(String),
    NonFinite,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Analyze { out, .. }
        | Command::Bands { out, .. }
        | Command::Enumerate { out, .. }
        | Command::Simulate { out, .. }
        | Command::Heavytails { out, .. } => out.clone(),
    };
    let result = run(cli.command).and_then(|outcome| {
        write_output(out.as_deref(), &outcome.text)?;
        Ok(outcome.domain_failure)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(failure) => report_failure(failure),
    }
}

fn write_output(path: Option<&std::path::Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn report_failure(failure: Failure) -> ExitCode {
    let (code, class, module, message) = match &failure {
        Failure::Model(e) => {
            let class = match e.class() {
                ErrorClass::Input => "input",
                ErrorClass::Domain => "domain",
            };
            (e.code(), class, e.module(), e.to_string())
        }
        Failure::Io(msg) => ("pipeline.io".to_string(), "input", "pipeline", msg.clone()),
        Failure::NonFinite => (
            "pipeline.non_finite_output".to_string(),
            "domain",
            "pipeline",
            "a reported value is not finite".to_string(),
        ),
    };
    let body =
        json!({ "error": { "code": code, "class": class, "module": module, "message": message } });
    eprintln!("{body}");
    ExitCode::from(if class == "domain" { 1 } else { 2 })
}

fn read_series(file: &str) -> Result<PriceSeries, Failure> {
    if file == "-" {
        return Ok(pipeline::parse_ticks(std::io::stdin().lock())?);
    }
    let handle = std::fs::File::open(file).map_err(|e| Failure::Io(format!("{file}: {e}")))?;
    Ok(pipeline::parse_ticks(std::io::BufReader::new(handle))?)
}

fn to_json(value: Value) -> Result<String, Failure> {
    if render::has_null(&value) {
        return Err(Failure::NonFinite);
    }
    let mut text = serde_json::to_string_pretty(&value).expect("in-memory JSON");
    text.push('\n');
    Ok(text)
}

fn run(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Analyze {
            file,
            segments,
            epsilon_rho,
            clamp,
            format,
            ..
        } => {
            let config = RunConfig {
                segment_count: segments,
                epsilon_rho,
                alpha_policy: if clamp {
                    AlphaPolicy::Clamp
                } else {
                    AlphaPolicy::Error
                },
                format: format.into(),
                ..RunConfig::default()
            };
            config.validate()?;
            let series = read_series(&file)?;
            let report = pipeline::analyze(&series, &config, Some(&file))?;
            let value = serde_json::to_value(&report).expect("report serializes");
            match format {
                Format::Json => to_json(value).map(Outcome::ok),
                Format::Csv => {
                    if render::has_null(&value) {
                        return Err(Failure::NonFinite);
                    }
                    Ok(Outcome::ok(render::flat_csv(&value)))
                }
            }
        }
        Command::Bands {
            file,
            segments,
            window,
            k,
            epsilon_rho,
            format,
            ..
        } => {
            let config = BandConfig {
                segment_count: segments,
                window_segments: window,
                k,
                epsilon_rho,
            };
            let series = read_series(&file)?;
            let windows = shifted::rolling_bands(&series, &config).map_err(Error::from)?;
            let domain_failure = windows.iter().all(|w| w.band.is_err());
            if let Some(Err(e)) = windows.first().filter(|_| domain_failure).map(|w| &w.band) {
                let e = Error::from(e.clone());
                eprintln!(
                    "{}",
                    json!({ "error": { "code": e.code(), "class": "domain", "module": e.module(), "message": format!("no window produced a band: {e}") } })
                );
            }
            let text = match format {
                Format::Json => to_json(render::bands_json(&file, &config, &windows))?,
                Format::Csv => render::bands_csv(&windows),
            };
            Ok(Outcome {
                text,
                domain_failure,
            })
        }
        Command::Enumerate { n, verify, .. } => {
            let dist = counting::distribution(n).map_err(Error::from)?;
            if verify {
                let walked = counting::enumerate_paths(n).map_err(Error::from)?;
                if walked.counts().ne(dist.counts()) {
                    let e = json!({ "error": { "code": "counting.oracle_mismatch", "class": "domain", "module": "counting", "message": "enumerated counts differ from binomial counts" } });
                    eprintln!("{e}");
                    return Ok(Outcome {
                        text: String::new(),
                        domain_failure: true,
                    });
                }
            }
            Ok(Outcome::ok(render::enumerate_csv(&dist)))
        }
        Command::Simulate {
            n,
            alpha,
            omega,
            samples,
            seed,
            format,
            ..
        } => {
            let sim = shifted::simulate_differences(n, alpha, omega, samples, seed)
                .map_err(Error::from)?;
            match format {
                Format::Json => to_json(render::simulation_json(&sim, seed)).map(Outcome::ok),
                Format::Csv => Ok(Outcome::ok(render::simulation_csv(&sim))),
            }
        }
        Command::Heavytails {
            samples,
            zeta0,
            seed,
            bins,
            ..
        } => {
            if samples == 0 {
                return Err(Error::from(heavy_tails::HeavyTailError::NoSamples).into());
            }
            if !(bins > 0.0 && bins.is_finite()) {
                return Err(
                    Error::from(heavy_tails::HeavyTailError::NonPositiveBinWidth(bins)).into(),
                );
            }
            let drawn = heavy_tails::sample_heavy(samples, zeta0, seed).map_err(Error::from)?;
            let hist = heavy_tails::build_histogram(&drawn.values, bins).map_err(Error::from)?;
            Ok(Outcome::ok(heavy_tails::histogram_csv(&hist)))
        }
    }
}
