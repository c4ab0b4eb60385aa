//! Machine-readable error reports.

use std::fmt;

use serde::Serialize;

/// Failure of a command; serialized as the JSON error report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliError {
    /// `config`, `io`, `panic`, or the error kind of the numerical core.
    pub kind: String,
    /// Offending configuration key, when one is to blame.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        Self {
            kind: "config".into(),
            key: (!key.is_empty()).then(|| key.to_string()),
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: "io".into(),
            key: None,
            message: message.into(),
        }
    }

    pub fn panic(message: impl Into<String>) -> Self {
        Self {
            kind: "panic".into(),
            key: None,
            message: message.into(),
        }
    }

    pub fn key(&self) -> Option<&str> {
        self.key.as_deref()
    }

    /// Exit status: 2 for unusable input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        if self.kind == "config" {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({ "error": self })).expect("errors serialize")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.key() {
            Some(k) => write!(f, "{} error at `{k}`: {}", self.kind, self.message),
            None => write!(f, "{} error: {}", self.kind, self.message),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qmctunnel::Error> for CliError {
    fn from(e: qmctunnel::Error) -> Self {
        Self {
            kind: e.kind().into(),
            key: None,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::io(e.to_string())
    }
}

/// Text of a caught panic payload.
pub fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "worker panicked".into())
}
