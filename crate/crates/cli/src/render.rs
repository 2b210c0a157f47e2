//! Text renderings of subcommand results.

use std::fmt::Write;

use serde_json::{json, Map, Value};

use tickvar_core::counting::{gaussian_approx, CountDistribution};
use tickvar_core::pipeline::SCHEMA_VERSION;
use tickvar_core::shifted::{BandConfig, BandWindow, Simulation};
use tickvar_core::Error;

/// True if any value in the tree is `null`; serde_json writes NaN and ±inf
/// that way.
pub fn has_null(value: &Value) -> bool {
    match value {
        Value::Null => true,
        Value::Array(items) => items.iter().any(has_null),
        Value::Object(map) => map.values().any(has_null),
        _ => false,
    }
}

/// `key,value` rows with dotted keys, in document order.
pub fn flat_csv(value: &Value) -> String {
    let mut out = String::from("key,value\n");
    flatten_into(&mut out, "", value);
    out
}

fn flatten_into(out: &mut String, prefix: &str, value: &Value) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(out, &key, v);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(out, &format!("{prefix}.{i}"), v);
            }
        }
        Value::String(s) => {
            let _ = writeln!(out, "{prefix},{}", quote(s));
        }
        other => {
            let _ = writeln!(out, "{prefix},{other}");
        }
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn error_object(e: Error) -> Value {
    json!({ "code": e.code(), "message": e.to_string() })
}

pub fn bands_json(file: &str, config: &BandConfig, windows: &[BandWindow]) -> Value {
    let rows: Vec<Value> = windows
        .iter()
        .map(|w| {
            let mut row = Map::new();
            row.insert("end_segment".into(), json!(w.end_segment));
            row.insert("timestamp".into(), json!(w.timestamp));
            match &w.band {
                Ok(b) => row.insert(
                    "band".into(),
                    serde_json::to_value(b).expect("band serializes"),
                ),
                Err(e) => row.insert("error".into(), error_object(e.clone().into())),
            };
            Value::Object(row)
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "source": { "file": file },
        "config": {
            "segments": config.segment_count,
            "window": config.window_segments,
            "k": config.k,
            "epsilon_rho": config.epsilon_rho,
        },
        "windows": rows,
    })
}

pub fn bands_csv(windows: &[BandWindow]) -> String {
    let mut out = String::from(
        "end_segment,timestamp,center,lower,upper,alpha,mu,sigma,condition_fraction,error\n",
    );
    for w in windows {
        match &w.band {
            Ok(b) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},",
                    w.end_segment,
                    w.timestamp,
                    b.center,
                    b.lower,
                    b.upper,
                    b.alpha,
                    b.mu,
                    b.sigma,
                    b.condition_fraction
                );
            }
            Err(e) => {
                let code = Error::from(e.clone()).code();
                let _ = writeln!(out, "{},{},,,,,,,,{}", w.end_segment, w.timestamp, code);
            }
        }
    }
    out
}

/// Columns `z,exact_count,p,gaussian_approx`.
pub fn enumerate_csv(dist: &CountDistribution) -> String {
    let mut out = String::from("z,exact_count,p,gaussian_approx\n");
    for ((z, count), (_, p)) in dist.counts().zip(dist.probabilities()) {
        let _ = writeln!(out, "{z},{count},{p},{}", gaussian_approx(dist.n(), z));
    }
    out
}

fn mean_and_variance(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / count;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1.0);
    (mean, var)
}

pub fn simulation_json(sim: &Simulation, seed: u64) -> Value {
    let scaled = sim.samples.iter().map(|d| d / sim.omega);
    let (mean, variance) = if sim.samples.len() >= 2 {
        mean_and_variance(scaled)
    } else {
        (sim.samples.first().map_or(0.0, |d| d / sim.omega), 0.0)
    };
    let two_n = 2.0 * sim.n as f64;
    json!({
        "schema_version": SCHEMA_VERSION,
        "n": sim.n,
        "alpha": sim.alpha,
        "omega": sim.omega,
        "samples": sim.samples.len(),
        "seed": seed,
        "z0": sim.z0,
        "steps": sim.steps,
        "realized_alpha": sim.realized_alpha,
        "rounding_bias": sim.rounding_bias(),
        "mean_d_over_omega": mean,
        "variance_d_over_omega": variance,
        "target_mean_d_over_omega": -two_n * sim.alpha,
        "target_variance_d_over_omega": two_n * (1.0 - sim.alpha.abs()),
    })
}

/// Columns `index,d`.
pub fn simulation_csv(sim: &Simulation) -> String {
    let mut out = String::from("index,d\n");
    for (i, d) in sim.samples.iter().enumerate() {
        let _ = writeln!(out, "{i},{d}");
    }
    out
}
