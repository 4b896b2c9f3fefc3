//! `info` subcommand: summarize an artifact from its JSON sidecar or
//! manifest without loading binary payloads.

use crate::error::CliError;
use serde_json::Value;
use std::path::Path;

/// Renders a human-readable summary of an artifact path (a `.json` sidecar,
/// a `manifest.json`, a `reports.jsonl`, or a `.bin` with a sidecar next to
/// it).
pub fn describe(path: &Path) -> Result<String, CliError> {
    let json_path = if path.extension().and_then(|e| e.to_str()) == Some("bin") {
        path.with_extension("json")
    } else {
        path.to_path_buf()
    };
    let text = std::fs::read_to_string(&json_path).map_err(|e| {
        CliError::Io(rtm2d_core::Error::Io {
            path: json_path.display().to_string(),
            source: e,
        })
    })?;

    if json_path.extension().and_then(|e| e.to_str()) == Some("jsonl") {
        let mut out = format!("identity reports: {}\n", json_path.display());
        for line in text.lines() {
            let v: Value = serde_json::from_str(line).map_err(|e| {
                CliError::Io(rtm2d_core::Error::Metadata {
                    path: json_path.display().to_string(),
                    source: e,
                })
            })?;
            out.push_str(&format!(
                "  {:<24} pass={:<5} residual={}\n",
                v["name"].as_str().unwrap_or("?"),
                v["pass"],
                v["residual"]
            ));
        }
        return Ok(out);
    }

    let v: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Io(rtm2d_core::Error::Metadata {
            path: json_path.display().to_string(),
            source: e,
        })
    })?;

    let mut out = String::new();
    match v.get("kind").and_then(|k| k.as_str()) {
        Some("scatter-dataset") => {
            out.push_str(&format!("scatter dataset: {}\n", json_path.display()));
            out.push_str(&format!(
                "  sources x receivers: {} x {}\n",
                v["sources"], v["receivers"]
            ));
            out.push_str(&format!("  polarizations: {}\n", v["polarizations"]));
            out.push_str(&format!(
                "  wave: k = {}, lambda = {}\n",
                v["wave"]["k"], v["wave"]["lambda"]
            ));
            out.push_str(&format!("  scene digest: {}\n", v["scene_digest"]));
            out.push_str(&format!("  noise: {}\n", v["noise"]));
            out.push_str(&format!("  data digest: {}\n", v["data_digest"]));
        }
        Some("image-grid") => {
            out.push_str(&format!("image grid: {}\n", json_path.display()));
            out.push_str(&format!(
                "  grid: {}x{} on [{}, {}] x [{}, {}]\n",
                v["grid"]["nx"],
                v["grid"]["ny"],
                v["grid"]["xmin"],
                v["grid"]["xmax"],
                v["grid"]["ymin"],
                v["grid"]["ymax"]
            ));
            out.push_str(&format!(
                "  wavenumbers: {}\n",
                v["provenance"]["wavenumbers"]
            ));
            out.push_str(&format!(
                "  kernel variant: {}\n",
                v["provenance"]["variant"]
            ));
            out.push_str(&format!("  data digest: {}\n", v["data_digest"]));
        }
        _ if v.get("config_digest").is_some() => {
            out.push_str(&format!("run manifest: {}\n", json_path.display()));
            out.push_str(&format!("  tool version: {}\n", v["tool_version"]));
            out.push_str(&format!("  config digest: {}\n", v["config_digest"]));
            out.push_str(&format!("  seed: {}\n", v["seed"]));
            out.push_str(&format!("  wavelengths: {}\n", v["wavelengths"]));
            if let Some(artifacts) = v["artifacts"].as_array() {
                out.push_str(&format!("  artifacts ({}):\n", artifacts.len()));
                for a in artifacts {
                    out.push_str(&format!(
                        "    {:<18} {}\n",
                        a["kind"].as_str().unwrap_or("?"),
                        a["path"].as_str().unwrap_or("?")
                    ));
                }
            }
        }
        _ => {
            return Err(CliError::Config(format!(
                "unrecognized artifact format: {}",
                json_path.display()
            )));
        }
    }
    Ok(out)
}
