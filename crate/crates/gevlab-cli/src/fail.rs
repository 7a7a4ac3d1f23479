//! Process-level failure categories. Every non-usage failure exits with
//! a stable code and a one-line JSON object on stderr so wrapping
//! scripts can branch without parsing prose.

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum Failure {
    /// Bad or inconsistent configuration (including core validation).
    Config(String),
    /// The solution left f64 range mid-run; partial outputs were flushed.
    BlowUp(String),
    /// Filesystem trouble.
    Io(String),
    /// Every sweep row breached the resolution threshold.
    Unresolved(String),
}

impl Failure {
    pub fn category(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::BlowUp(_) => "blowup",
            Failure::Io(_) => "io",
            Failure::Unresolved(_) => "unresolved",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 3,
            Failure::BlowUp(_) => 4,
            Failure::Io(_) => 5,
            Failure::Unresolved(_) => 6,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::BlowUp(m) | Failure::Io(m) | Failure::Unresolved(m) => m,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Failure {
        Failure::Io(format!("{}: {err}", path.display()))
    }

    /// The machine-readable stderr line.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "category": self.category(),
            "message": self.message(),
        })
        .to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.category(), self.message())
    }
}
