//! Helpers for driving the compiled `dpd` binary.

use std::process::Command;

/// Outcome of one binary invocation.
pub struct Run {
    /// Process exit code (panics if killed by a signal).
    pub status: i32,
    /// Captured stdout, UTF-8.
    pub stdout: String,
    /// Captured stderr, UTF-8.
    pub stderr: String,
}

/// Run `dpd` with the given arguments and extra environment variables.
pub fn dpd_env(args: &[&str], envs: &[(&str, &str)]) -> Run {
    let mut command = Command::new(env!("CARGO_BIN_EXE_dpd"));
    command.args(args);
    for (key, value) in envs {
        command.env(key, value);
    }
    let output = command.output().expect("spawn dpd");
    Run {
        status: output.status.code().expect("dpd exited normally"),
        stdout: String::from_utf8(output.stdout).expect("stdout is UTF-8"),
        stderr: String::from_utf8(output.stderr).expect("stderr is UTF-8"),
    }
}

/// Run `dpd` with the given arguments.
pub fn dpd(args: &[&str]) -> Run {
    dpd_env(args, &[])
}

/// Parse a stdout report as JSON.
pub fn report(run: &Run) -> serde_json::Value {
    serde_json::from_str(&run.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", run.stdout))
}

/// The non-comment lines of a CSV output.
#[allow(dead_code)] // not every integration target reads CSV
pub fn csv_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|line| !line.starts_with('#')).collect()
}
