//! Writing tables and the run manifest.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::Resolved;
use crate::experiments::Output;

/// Name of the manifest file written next to the tables.
pub const MANIFEST: &str = "manifest.json";

/// Build identifier: crate version plus the git revision when known.
pub fn build_id() -> String {
    format!(
        "droplet {}+{}",
        env!("CARGO_PKG_VERSION"),
        option_env!("DROPLET_GIT_REVISION").unwrap_or("unknown")
    )
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'static str,
    build: String,
    config: &'a Resolved,
    artifacts: Vec<String>,
    summary: &'a Value,
}

/// Writes each table as `<name>.csv` ending in a manifest reference, then the manifest.
pub fn write(dir: &Path, r: &Resolved, out: &Output) -> std::io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut artifacts = Vec::new();
    for t in &out.tables {
        let name = format!("{}.csv", t.name);
        fs::write(
            dir.join(&name),
            format!("{}# manifest: {MANIFEST}\n", t.csv),
        )?;
        artifacts.push(name);
    }
    let manifest = Manifest {
        experiment: r.experiment.name(),
        build: build_id(),
        config: r,
        artifacts: artifacts.clone(),
        summary: &out.summary,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    fs::write(dir.join(MANIFEST), text + "\n")?;
    artifacts.push(MANIFEST.to_string());
    Ok(artifacts)
}
