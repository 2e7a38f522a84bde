//! The JSON report envelope shared by all commands: a stable schema with
//! the command name, echoed inputs, randomness/calibration provenance and
//! the command-specific results.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ReportEnvelope<T: Serialize> {
    pub schema_version: u32,
    pub command: String,
    pub inputs: serde_json::Value,
    pub provenance: serde_json::Value,
    pub results: T,
}

impl<T: Serialize> ReportEnvelope<T> {
    pub fn new(
        command: &str,
        inputs: serde_json::Value,
        provenance: serde_json::Value,
        results: T,
    ) -> Self {
        ReportEnvelope {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs,
            provenance,
            results,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
