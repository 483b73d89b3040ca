//! Flat `key=value` configuration files.
//!
//! One assignment per line, `#` starts a comment, keys use dots for sections
//! (`field.delta_t=0.05`). Every key has a default; unknown keys are rejected
//! with the list of accepted ones.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown key '{key}'; accepted keys: {accepted}")]
    UnknownKey { key: String, accepted: String },
    #[error("key '{key}' is set twice (lines {first} and {second})")]
    Duplicate { key: String, first: usize, second: usize },
    #[error("invalid value '{value}' for '{key}'; expected {expected}")]
    InvalidValue { key: String, value: String, expected: String },
}

pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    /// Accepted values or the value type.
    pub expected: &'static str,
    pub help: &'static str,
}

pub const KEYS: &[KeySpec] = &[
    KeySpec { key: "run.seed", default: "0", expected: "unsigned 64-bit integer", help: "master seed" },
    KeySpec { key: "run.replicas", default: "100", expected: "positive integer", help: "replica count" },
    KeySpec { key: "runtime.workers", default: "0", expected: "integer (0 = machine parallelism)", help: "worker threads" },
    KeySpec { key: "experiments", default: "", expected: "comma-separated experiment names", help: "experiments run by `analyze` without a test name" },
    KeySpec { key: "field.dimension", default: "1", expected: "1 or 2", help: "spatial dimension" },
    KeySpec { key: "field.cells", default: "256", expected: "integer ≥ 2", help: "cells per axis" },
    KeySpec { key: "field.extent", default: "1", expected: "positive real", help: "side length L" },
    KeySpec { key: "field.t_max", default: "8", expected: "nonnegative real", help: "depth t" },
    KeySpec { key: "field.delta_t", default: "0.5", expected: "positive real", help: "ladder step" },
    KeySpec { key: "field.backend", default: "circulant", expected: "circulant | cholesky | cone", help: "sampler backend" },
    KeySpec { key: "field.cone_bands_per_unit", default: "16", expected: "positive integer", help: "cone bands per unit of t" },
    KeySpec { key: "field.sup_mode", default: "bridge", expected: "bridge | boundary", help: "running supremum tracking" },
    KeySpec { key: "kernel.family", default: "auto", expected: "auto | triangle | spline", help: "seed kernel (auto: triangle in d=1, spline in d=2)" },
    KeySpec { key: "kernel.radius", default: "1", expected: "positive real", help: "support radius R" },
    KeySpec { key: "measure.kind", default: "derivative", expected: "subcritical | critical_standard | seneta_heyde | derivative | stopped_z | stopped_z_tilde | stable_subordinated | supercritical_renorm | gibbs", help: "measure to build" },
    KeySpec { key: "measure.gamma", default: "1", expected: "nonnegative real", help: "γ for chaos measures" },
    KeySpec { key: "measure.beta", default: "1", expected: "positive real", help: "stopping level β" },
    KeySpec { key: "measure.alpha", default: "0.5", expected: "real in (0, 1]", help: "stable index α" },
    KeySpec { key: "cascade.depth", default: "10", expected: "integer in 0..=24", help: "cascade depth n" },
    KeySpec { key: "cascade.intensity", default: "critical", expected: "critical | positive real", help: "cascade log-variance per level u" },
    KeySpec { key: "analysis.q", default: "0,0.25,0.5,1", expected: "comma-separated reals", help: "moment orders" },
    KeySpec { key: "analysis.s", default: "2", expected: "nonnegative real", help: "zoom depth s = ln(1/ε)" },
    KeySpec { key: "analysis.samples", default: "2000", expected: "positive integer", help: "samples per side" },
    KeySpec { key: "analysis.test", default: "ks", expected: "ks | ad", help: "two-sample test" },
    KeySpec { key: "analysis.form", default: "exact", expected: "exact | limit", help: "right-hand side of the zoom relation" },
    KeySpec { key: "analysis.star_kind", default: "derivative", expected: "derivative | chaos", help: "measure in the zoom relation" },
    KeySpec { key: "analysis.reruns", default: "200", expected: "positive integer", help: "null reruns" },
    KeySpec { key: "analysis.deltas", default: "0.1", expected: "comma-separated reals", help: "atom thresholds δ" },
    KeySpec { key: "analysis.resolutions", default: "4,8,16,32", expected: "comma-separated powers of two", help: "atom box resolutions" },
    KeySpec { key: "analysis.t_values", default: "4,8", expected: "comma-separated reals", help: "depths for scans" },
    KeySpec { key: "analysis.gammas", default: "1.2,1.3,1.38", expected: "comma-separated reals", help: "γ_n for calibration" },
    KeySpec { key: "analysis.min_ess", default: "100", expected: "positive real", help: "minimum effective sample size" },
    KeySpec { key: "analysis.spine_mode", default: "tilted", expected: "tilted | raw | unweighted", help: "spine weighting" },
    KeySpec { key: "analysis.bootstrap", default: "200", expected: "positive integer", help: "bootstrap resamples" },
    KeySpec { key: "analysis.sticks", default: "200", expected: "positive integer", help: "PD reference sticks" },
    KeySpec { key: "render.scale", default: "log10", expected: "log10 | linear", help: "color scale" },
    KeySpec { key: "render.colormap", default: "viridis", expected: "viridis | gray", help: "colormap" },
];

fn spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

fn accepted() -> String {
    KEYS.iter().map(|k| k.key).collect::<Vec<_>>().join(", ")
}

/// Effective configuration: defaults overlaid with file entries and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<&'static str, String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            values: KEYS.iter().map(|k| (k.key, k.default.to_string())).collect(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut seen: BTreeMap<&'static str, usize> = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            let s = spec(key).ok_or_else(|| ConfigError::UnknownKey {
                key: key.to_string(),
                accepted: accepted(),
            })?;
            if let Some(first) = seen.insert(s.key, line) {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    first,
                    second: line,
                });
            }
            cfg.values.insert(s.key, value.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        let s = spec(key).ok_or_else(|| ConfigError::UnknownKey {
            key: key.to_string(),
            accepted: accepted(),
        })?;
        self.values.insert(s.key, value.into());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("'{key}' is not a declared configuration key"))
    }

    fn invalid(&self, key: &str) -> ConfigError {
        ConfigError::InvalidValue {
            key: key.to_string(),
            value: self.raw(key).to_string(),
            expected: spec(key).map(|s| s.expected).unwrap_or("").to_string(),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.raw(key).parse().map_err(|_| self.invalid(key))
    }

    /// Value checked against a fixed list of choices.
    pub fn choice(&self, key: &str, choices: &[&str]) -> Result<String, ConfigError> {
        let v = self.raw(key);
        if choices.contains(&v) {
            Ok(v.to_string())
        } else {
            Err(self.invalid(key))
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| self.invalid(key)))
            .collect()
    }

    /// Canonical text of every key, sorted; reparses to the same configuration.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }

    /// Canonical text without keys that do not affect outputs.
    pub fn digest_text(&self) -> String {
        self.values
            .iter()
            .filter(|(k, _)| **k != "runtime.workers")
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &str)> {
        self.values.iter().map(|(k, v)| (*k, v.as_str()))
    }
}

/// Human-readable table of keys, defaults and accepted values.
pub fn describe_keys() -> String {
    KEYS.iter()
        .map(|k| format!("{:<28} default '{}' ({}): {}\n", k.key, k.default, k.expected, k.help))
        .collect()
}
