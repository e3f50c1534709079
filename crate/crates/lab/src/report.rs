//! Running a scenario and the report it produces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ssf_core::genint::boundary_functions;
use ssf_core::linop::AccumulativePair;
use ssf_core::pertdet::{boundary_values, BoundaryData};

use crate::error::Result;
use crate::scenario::{Scenario, SuiteKind};
use crate::suites::{suite, Boundary, Context, ProfileSeries, SuiteResult, TruncationTrace};

/// Bumped whenever a field of [`Report`] changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTable {
    pub lambda: Vec<f64>,
    pub zeta: Vec<f64>,
    pub xi: Vec<f64>,
    pub err_zeta: Vec<f64>,
    pub err_xi: Vec<f64>,
}

impl BoundaryTable {
    fn from_data(data: &BoundaryData) -> Self {
        Self {
            lambda: data.grid().to_vec(),
            zeta: data.zeta().to_vec(),
            xi: data.xi().to_vec(),
            err_zeta: data.err_zeta().to_vec(),
            err_xi: data.err_xi().to_vec(),
        }
    }
}

/// Sampled data behind the plots. Profile and trace names carry the suite
/// that produced them as a `suite/` prefix.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub boundary: Option<BoundaryTable>,
    pub profiles: Vec<ProfileSeries>,
    pub truncations: Vec<TruncationTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
    pub series: Series,
    /// File names written next to the summary, filled by `emit`.
    #[serde(default)]
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn suite(&self, kind: SuiteKind) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.suite == kind)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn compute_boundary(scenario: &Scenario, pair: &AccumulativePair) -> std::result::Result<Boundary, String> {
    let grid = scenario.grid.build(pair).map_err(|e| e.to_string())?;
    let data = boundary_values(pair, &grid, &scenario.epsilon_schedule).map_err(|e| e.to_string())?;
    let (zeta, xi) = boundary_functions(&data).map_err(|e| e.to_string())?;
    Ok(Boundary { data, zeta, xi })
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "suite panicked".into())
}

struct Outcome {
    result: SuiteResult,
    profiles: Vec<ProfileSeries>,
    truncations: Vec<TruncationTrace>,
}

fn run_one(kind: SuiteKind, ctx: &Context, boundary_error: Option<&str>) -> Outcome {
    let empty = |result| Outcome { result, profiles: Vec::new(), truncations: Vec::new() };
    if let (true, Some(e)) = (kind.needs_boundary(), boundary_error) {
        return empty(SuiteResult::failed(kind, format!("{kind}: boundary data: {e}")));
    }
    match catch_unwind(AssertUnwindSafe(|| suite(kind).run(ctx))) {
        Ok(Ok(out)) => {
            let tag = |name: String| format!("{kind}/{name}");
            Outcome {
                result: SuiteResult::from_checks(kind, out.checks),
                profiles: out.profiles.into_iter().map(|p| ProfileSeries { name: tag(p.name), ..p }).collect(),
                truncations: out.truncations.into_iter().map(|t| TruncationTrace { name: tag(t.name), ..t }).collect(),
            }
        }
        Ok(Err(e)) => empty(SuiteResult::failed(kind, format!("{kind}: {e}"))),
        Err(p) => empty(SuiteResult::failed(kind, format!("{kind}: {}", panic_message(p)))),
    }
}

/// Runs the scenario's suites. Boundary data is computed once and the
/// boundary suite runs first; the others run in parallel on the current
/// rayon pool. Results keep the requested order.
pub fn run_scenario(scenario: &Scenario) -> Report {
    let pair = scenario.pair_matrix();
    let needs_boundary = scenario.suites.iter().any(|k| k.needs_boundary());
    let boundary = match (&pair, needs_boundary) {
        (Ok(p), true) => Some(compute_boundary(scenario, p)),
        (Err(e), true) => Some(Err(e.to_string())),
        _ => None,
    };
    let ctx = Context {
        scenario,
        pair: pair.as_ref().ok(),
        boundary: boundary.as_ref().and_then(|b| b.as_ref().ok()),
    };
    let boundary_error = boundary.as_ref().and_then(|b| b.as_ref().err()).map(String::as_str);

    let first = scenario.suites.iter().position(|k| *k == SuiteKind::Boundary);
    let head = first.map(|i| (i, run_one(SuiteKind::Boundary, &ctx, boundary_error)));
    let rest: Vec<(usize, Outcome)> = scenario
        .suites
        .par_iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != first)
        .map(|(i, &k)| (i, run_one(k, &ctx, boundary_error)))
        .collect();
    let mut outcomes: Vec<(usize, Outcome)> = head.into_iter().chain(rest).collect();
    outcomes.sort_by_key(|(i, _)| *i);

    let mut series = Series {
        boundary: ctx.boundary.map(|b| BoundaryTable::from_data(&b.data)),
        ..Series::default()
    };
    let mut suites = Vec::with_capacity(outcomes.len());
    for (_, o) in outcomes {
        series.profiles.extend(o.profiles);
        series.truncations.extend(o.truncations);
        suites.push(o.result);
    }
    Report {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.clone(),
        passed: !suites.is_empty() && suites.iter().all(|s| s.passed),
        suites,
        series,
        artifacts: Vec::new(),
    }
}
