pub mod bp;
pub mod ed;
pub mod entropy;
pub mod express;
pub mod train;

use std::path::Path;

use globalgate::io::{write_json, Manifest};
use serde::Serialize;

use crate::config::SCHEMA;
use crate::error::Result;

/// Manifest whose `config` is a complete config file for this command, so
/// `--config manifest.json` reruns it.
pub fn manifest<S: Serialize>(
    command: &str,
    section: &str,
    resolved: &S,
    seed: u64,
    seeds: Vec<u64>,
) -> Result<Manifest<serde_json::Value>> {
    let mut config = serde_json::Map::new();
    config.insert("schema".into(), SCHEMA.into());
    config.insert("seed".into(), seed.into());
    config.insert(section.into(), serde_json::to_value(resolved).map_err(globalgate::Error::from)?);
    Ok(Manifest::new(command, serde_json::Value::Object(config), seeds))
}

pub fn write_manifest(dir: &Path, manifest: &Manifest<serde_json::Value>) -> Result<()> {
    write_json(&dir.join("manifest.json"), manifest)?;
    Ok(())
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
