//! Report envelope shared by every subcommand.
//!
//! Success reports carry the tool identity and version, the subcommand,
//! an echo of every effective input (including the resolved seed), and a
//! `result` object; failure reports replace `result` with a structured
//! `error`. The JSON layout is pinned by `schemas/report.schema.json` at
//! the repository root.

use serde::Serialize;
use serde_json::{Map, Value};

/// Tool name stamped into every report.
pub const TOOL: &str = "dpd";
/// Version stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A success report.
#[derive(Debug, Serialize)]
pub struct Report {
    /// Always `"dpd"`.
    pub tool: &'static str,
    /// The crate version that produced the report.
    pub version: &'static str,
    /// The subcommand that ran.
    pub command: String,
    /// Echo of every effective input, so the run can be reproduced from
    /// its own output.
    pub inputs: Map<String, Value>,
    /// The subcommand's payload.
    pub result: Value,
}

impl Report {
    /// Assemble a report from a payload.
    ///
    /// # Panics
    /// Panics if the payload fails to serialize (a bug, not a runtime
    /// condition).
    pub fn new(command: &str, inputs: Map<String, Value>, payload: impl Serialize) -> Report {
        Report {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            inputs,
            result: serde_json::to_value(payload).expect("payloads serialize"),
        }
    }

    /// Pretty-printed JSON plus a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// A failure report (exit code 1).
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    /// Always `"dpd"`.
    pub tool: &'static str,
    /// The crate version that produced the report.
    pub version: &'static str,
    /// The subcommand that failed.
    pub command: String,
    /// What went wrong.
    pub error: ErrorBody,
}

/// The structured error payload.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    /// Stable machine-readable kind.
    pub kind: String,
    /// Human-readable description.
    pub message: String,
}

impl ErrorReport {
    /// Wrap an error kind and message.
    pub fn new(command: &str, kind: &str, message: String) -> ErrorReport {
        ErrorReport {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            error: ErrorBody { kind: kind.to_string(), message },
        }
    }

    /// Pretty-printed JSON plus a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Stable kind string for a core error.
pub fn core_error_kind(error: &dpd_core::Error) -> &'static str {
    use dpd_core::Error;
    match error {
        Error::NonConvergent { .. } => "non_convergent",
        Error::Domain { .. } => "domain",
        Error::UnboundedBelow { .. } => "unbounded_below",
        Error::NotSymmetric { .. } => "not_symmetric",
        Error::NotPositiveDefinite { .. } => "not_positive_definite",
        Error::SingularMatrix { .. } => "singular_matrix",
        Error::SingularProjection => "singular_projection",
        Error::RankMismatch { .. } => "rank_mismatch",
        Error::DegenerateData { .. } => "degenerate_data",
        Error::ConstraintInfeasible { .. } => "constraint_infeasible",
        Error::McUnderResolved { .. } => "mc_under_resolved",
        Error::DegenerateVariance { .. } => "degenerate_variance",
    }
}

/// Build the `inputs` echo from key/value pairs.
pub fn inputs(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    let mut map = Map::new();
    for (k, v) in pairs {
        map.insert(k.to_string(), v);
    }
    map
}
