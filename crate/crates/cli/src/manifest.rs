//! Run manifests: every report embeds the command, inputs and parameters
//! that produced it, so a report can be reproduced from its own header.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub tool_version: String,
    /// Wall-clock duration; the only field that varies between identical
    /// runs.
    pub duration_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ridge_requested: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ridge_used: Option<f64>,
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    start: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        ManifestBuilder {
            manifest: RunManifest {
                command: command.to_string(),
                inputs: BTreeMap::new(),
                parameters: BTreeMap::new(),
                outputs: BTreeMap::new(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                duration_seconds: 0.0,
                ridge_requested: None,
                ridge_used: None,
            },
            start: Instant::now(),
        }
    }

    pub fn input(mut self, key: &str, path: impl AsRef<std::path::Path>) -> Self {
        self.manifest
            .inputs
            .insert(key.to_string(), path.as_ref().display().to_string());
        self
    }

    pub fn parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.manifest
            .parameters
            .insert(key.to_string(), value.to_string());
        self
    }

    pub fn output(mut self, key: &str, path: impl AsRef<std::path::Path>) -> Self {
        self.manifest
            .outputs
            .insert(key.to_string(), path.as_ref().display().to_string());
        self
    }

    pub fn ridge(mut self, requested: f64, used: f64) -> Self {
        self.manifest.ridge_requested = Some(requested);
        self.manifest.ridge_used = Some(used);
        self
    }

    pub fn finish(mut self) -> RunManifest {
        self.manifest.duration_seconds = self.start.elapsed().as_secs_f64();
        self.manifest
    }
}
