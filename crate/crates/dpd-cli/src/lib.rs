//! Command-line front end for `dpd-core`.
//!
//! The binary (`dpd`) exposes estimation, two-sided and signed one-sided
//! DPD tests, power and sample-size analysis, β tuning, seeded Monte Carlo
//! experiments, and the built-in datasets. Every successful run prints a
//! self-contained report (JSON by default, CSV for curve/table outputs)
//! that echoes its inputs — including the resolved seed — so the run can
//! be reproduced from its own output.
//!
//! Exit codes: `0` success, `2` usage error (diagnostic on stderr, no
//! report), `1` numerical failure (structured JSON error report on
//! stdout).

#![deny(unsafe_code)]
#![warn(missing_docs)]

pub mod cli;
pub mod commands;
pub mod datasets;
pub mod report;
pub mod scenario;

pub use cli::run;
