//! Batch front-end: run configured experiments, write their outputs with a
//! manifest of content hashes, render heatmaps, and replay manifests.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod render;

use config::Config;
use error::CliError;
use experiments::Output;
use manifest::{sha256_hex, ExperimentManifest, Invocation, OutputEntry, MANIFEST_FILE, TOOL_VERSION};
use render::{render_heatmap, RenderSpec};
use std::fs;
use std::path::{Path, PathBuf};

/// Effective configuration with the master seed resolved (`--seed` wins over `run.seed`).
pub fn resolve_config(text: Option<&str>, seed: Option<u64>) -> Result<(Config, u64), CliError> {
    let mut cfg = match text {
        Some(t) => Config::parse(t)?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.set("run.seed", s.to_string())?;
    }
    let master = cfg.get("run.seed")?;
    Ok((cfg, master))
}

fn write_output(out: &Path, o: &Output) -> Result<OutputEntry, CliError> {
    let path = out.join(&o.path);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(&path, &o.bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(OutputEntry {
        path: o.path.clone(),
        sha256: sha256_hex(&o.bytes),
    })
}

fn experiments_for(inv: &Invocation, cfg: &Config) -> Result<Vec<String>, CliError> {
    Ok(match inv.subcommand.as_str() {
        "sample" => vec!["sample".into()],
        "measure" => vec!["measure".into()],
        "analyze" => match &inv.argument {
            Some(name) => vec![name.clone()],
            None => cfg.list("experiments")?,
        },
        other => {
            return Err(CliError::Config(config::ConfigError::InvalidValue {
                key: "subcommand".into(),
                value: other.into(),
                expected: "sample | measure | analyze | render".into(),
            }))
        }
    })
}

fn render_outputs(inv: &Invocation, cfg: &Config) -> Result<(Vec<Output>, Option<String>), CliError> {
    let input = inv.argument.as_deref().unwrap_or_default();
    let bytes = fs::read(input).map_err(|e| CliError::io(input, e))?;
    let table = gmc_core::measures::read_measure_csv(bytes.as_slice())?;
    let spec = RenderSpec {
        colormap: cfg.choice("render.colormap", &["viridis", "gray"])?.parse()?,
        scale: cfg.choice("render.scale", &["log10", "linear"])?.parse()?,
    };
    let (ppm, report) = render_heatmap(&table, spec)?;
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    Ok((
        vec![
            Output {
                path: "render/heatmap.ppm".into(),
                bytes: ppm,
            },
            Output {
                path: "reports/render.json".into(),
                bytes: json,
            },
        ],
        Some(sha256_hex(&bytes)),
    ))
}

/// Run an invocation into `out` and write its manifest. On failure the manifest
/// is still written, marked incomplete, before the error is returned.
pub fn execute(inv: &Invocation, cfg: &Config, master: u64, out: &Path) -> Result<ExperimentManifest, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut manifest = ExperimentManifest {
        tool_version: TOOL_VERSION.into(),
        invocation: inv.clone(),
        master_seed: master,
        config_digest: sha256_hex(cfg.digest_text().as_bytes()),
        config: cfg.canonical(),
        replica_count: cfg.get("run.replicas")?,
        outputs: Vec::new(),
        complete: true,
        warnings: Vec::new(),
    };
    let mut failure = None;
    if inv.subcommand == "render" {
        match render_outputs(inv, cfg) {
            Ok((outputs, input_hash)) => {
                manifest.invocation.input_sha256 = input_hash;
                for o in &outputs {
                    manifest.outputs.push(write_output(out, o)?);
                }
            }
            Err(e) => failure = Some(e),
        }
    } else {
        for name in experiments_for(inv, cfg)? {
            match experiments::run_experiment(&name, cfg, master) {
                Ok(p) => {
                    for o in &p.outputs {
                        manifest.outputs.push(write_output(out, o)?);
                    }
                    manifest.warnings.extend(p.warnings.into_iter().map(|w| format!("{name}: {w}")));
                }
                Err(e) => {
                    manifest.warnings.push(format!("{name} failed: {e}"));
                    failure = Some(e);
                    break;
                }
            }
        }
    }
    manifest.complete = failure.is_none();
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()).map_err(|e| CliError::io(&path, e))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}

/// Rerun a manifest into `out` (default: `replay/` beside the manifest) and
/// compare every output hash.
pub fn replay(manifest_path: &Path, out: Option<PathBuf>) -> Result<ExperimentManifest, CliError> {
    let original = ExperimentManifest::load(manifest_path).map_err(|e| CliError::io(manifest_path, e))?;
    let cfg = Config::parse(&original.config)?;
    if sha256_hex(cfg.digest_text().as_bytes()) != original.config_digest {
        return Err(CliError::ReplayMismatch("stored configuration does not match its digest".into()));
    }
    let out = out.unwrap_or_else(|| manifest_path.parent().unwrap_or(Path::new(".")).join("replay"));
    let mut inv = original.invocation.clone();
    let expected_input = inv.input_sha256.take();
    let rerun = execute(&inv, &cfg, original.master_seed, &out)?;
    if rerun.invocation.input_sha256 != expected_input {
        return Err(CliError::ReplayMismatch("render input has changed".into()));
    }
    if rerun.outputs != original.outputs {
        let differing: Vec<String> = original
            .outputs
            .iter()
            .filter(|o| !rerun.outputs.contains(o))
            .map(|o| o.path.clone())
            .collect();
        return Err(CliError::ReplayMismatch(format!(
            "{} of {} outputs differ: {}",
            differing.len(),
            original.outputs.len(),
            differing.join(", ")
        )));
    }
    Ok(rerun)
}
