//! Scenario runner for the perturbation-determinant toolkit: loads a
//! scenario, runs the verification suites and writes tables, a JSON
//! summary and plots.

// `!(x > y)` is used on purpose so NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emit;
pub mod error;
pub mod report;
pub mod scenario;
pub mod suites;

pub use emit::{emit, parse_formats, Format};
pub use error::{LabError, Result};
pub use report::{run_scenario, Report};
pub use scenario::{load_scenario, parse_scenario, PairSpec, Scenario, SuiteKind};
