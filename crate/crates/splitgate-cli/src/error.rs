//! Structured domain errors.
//!
//! Every failure past argument parsing is reported on standard error as a
//! single JSON object `{code, message, context}` and exits with code 1;
//! usage errors are left to clap and exit with code 2.

use serde_json::{json, Value};

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub context: Value,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
            context: json!({}),
        }
    }

    pub fn with_context(mut self, context: Value) -> Self {
        self.context = context;
        self
    }

    /// The stderr document.
    pub fn to_json(&self) -> Value {
        json!({
            "code": self.code,
            "message": self.message,
            "context": self.context,
        })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

fn chained(err: &dyn std::error::Error) -> String {
    let mut message = err.to_string();
    let mut source = err.source();
    while let Some(cause) = source {
        message.push_str(": ");
        message.push_str(&cause.to_string());
        source = cause.source();
    }
    message
}

impl From<splitgate_core::ingest::IngestError> for CliError {
    fn from(err: splitgate_core::ingest::IngestError) -> Self {
        CliError::new("ingest", chained(&err))
    }
}

impl From<splitgate_core::ingest::ManifestIoError> for CliError {
    fn from(err: splitgate_core::ingest::ManifestIoError) -> Self {
        CliError::new("manifest", chained(&err))
    }
}

impl From<splitgate_core::splitter::SplitError> for CliError {
    fn from(err: splitgate_core::splitter::SplitError) -> Self {
        CliError::new("split", err.to_string())
    }
}

impl From<splitgate_core::hashdup::HashError> for CliError {
    fn from(err: splitgate_core::hashdup::HashError) -> Self {
        CliError::new("hash", chained(&err))
    }
}

impl From<splitgate_core::metrics::MetricsError> for CliError {
    fn from(err: splitgate_core::metrics::MetricsError) -> Self {
        CliError::new("metrics", err.to_string())
    }
}

impl From<splitgate_core::metrics::PredictionError> for CliError {
    fn from(err: splitgate_core::metrics::PredictionError) -> Self {
        CliError::new("predictions", chained(&err))
    }
}

impl From<splitgate_core::leakstats::LeakError> for CliError {
    fn from(err: splitgate_core::leakstats::LeakError) -> Self {
        CliError::new("leakstats", err.to_string())
    }
}

impl From<splitgate_core::synthbench::SynthError> for CliError {
    fn from(err: splitgate_core::synthbench::SynthError) -> Self {
        CliError::new("synth", chained(&err))
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::new("io", err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::new("json", err.to_string())
    }
}
