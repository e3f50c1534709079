//! Scenario files: which pair to build, where to sample, and which suites
//! to run.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ssf_core::genint::AlphaRule;
use ssf_core::linop::{AccumulativePair, ComplexMatrix, HermitianMatrix, PsdMatrix};
use ssf_core::pertdet::{EpsilonSchedule, GridSpec};
use ssf_core::random::seeded_pair;
use ssf_core::rational::RationalFunction;

use crate::error::{LabError, Result};

/// Largest diagonal series that is also built as a matrix pair; longer
/// series only feed the divergence study.
pub const MAX_DIAGONAL_MATRIX: usize = 64;

/// Relative anti-Hermitian part tolerated in explicit matrices.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairSpec {
    RankOne {
        alpha: f64,
    },
    DiagonalSeries {
        #[serde(default)]
        rule: AlphaRule,
        n: usize,
    },
    Random {
        dim: usize,
        seed: u64,
    },
    /// Matrices as nested arrays of `[re, im]` entries.
    Explicit {
        h0: Vec<Vec<Complex64>>,
        v: Vec<Vec<Complex64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Boundary,
    RepUhp,
    RepLhp,
    Weakl1,
    Aintegral,
    Trace,
    Adjoint,
    Krein,
    Divergence,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 9] = [
        SuiteKind::Boundary,
        SuiteKind::RepUhp,
        SuiteKind::RepLhp,
        SuiteKind::Weakl1,
        SuiteKind::Aintegral,
        SuiteKind::Trace,
        SuiteKind::Adjoint,
        SuiteKind::Krein,
        SuiteKind::Divergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Boundary => "boundary",
            SuiteKind::RepUhp => "rep_uhp",
            SuiteKind::RepLhp => "rep_lhp",
            SuiteKind::Weakl1 => "weakl1",
            SuiteKind::Aintegral => "aintegral",
            SuiteKind::Trace => "trace",
            SuiteKind::Adjoint => "adjoint",
            SuiteKind::Krein => "krein",
            SuiteKind::Divergence => "divergence",
        }
    }

    /// Suites that work on the boundary data of the pair.
    pub fn needs_boundary(self) -> bool {
        !matches!(self, SuiteKind::Adjoint | SuiteKind::Krein | SuiteKind::Divergence)
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Validation(format!("unknown suite '{s}'")))
    }
}

/// Points where analytic continuations are compared, per half-plane.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestPoints {
    #[serde(default)]
    pub upper: Vec<Complex64>,
    #[serde(default)]
    pub lower: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub pair: PairSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub epsilon_schedule: EpsilonSchedule,
    /// Empty lists are replaced by rays at radii 1, 3 and 10.
    #[serde(default)]
    pub test_points: TestPoints,
    /// Empty means a default set scaled to the pair.
    #[serde(default)]
    pub rational_functions: Vec<RationalFunction>,
    /// Empty means every suite.
    #[serde(default)]
    pub suites: Vec<SuiteKind>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, pair: PairSpec) -> Self {
        Self {
            name: name.into(),
            pair,
            grid: GridSpec::default(),
            epsilon_schedule: EpsilonSchedule::default(),
            test_points: TestPoints::default(),
            rational_functions: Vec::new(),
            suites: Vec::new(),
        }
    }

    pub fn with_suites(mut self, suites: Vec<SuiteKind>) -> Self {
        self.suites = suites;
        self
    }

    /// Checks the invariants and fills every default that depends on the
    /// pair.
    pub fn validate(mut self) -> Result<Self> {
        if self.name.trim().is_empty() {
            return Err(LabError::Validation("scenario name is empty".into()));
        }
        if self.suites.is_empty() {
            self.suites = SuiteKind::ALL.to_vec();
        }
        let mut seen = self.suites.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.suites.len() {
            return Err(LabError::Validation("a suite is listed more than once".into()));
        }
        if let Some(w) = self.grid.half_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(LabError::Validation(format!("grid half-width must be positive, got {w}")));
            }
        }
        if self.grid.points < 2 {
            return Err(LabError::Validation("grid needs at least 2 points".into()));
        }
        match &self.pair {
            PairSpec::RankOne { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                return Err(LabError::Validation(format!("rank_one requires alpha > 0, got {alpha}")));
            }
            PairSpec::DiagonalSeries { rule, n } => {
                if *n == 0 {
                    return Err(LabError::Validation("diagonal_series needs n >= 1".into()));
                }
                rule.check_admissible().map_err(|e| LabError::Validation(format!("diagonal_series rule: {e}")))?;
                if let AlphaRule::Explicit { values } = rule {
                    if values.len() < *n {
                        return Err(LabError::Validation(format!("{} explicit couplings for n = {n}", values.len())));
                    }
                }
            }
            PairSpec::Random { dim, .. } if *dim == 0 => {
                return Err(LabError::Validation("random pairs need dim >= 1".into()));
            }
            _ => {}
        }
        let pair = match self.pair_matrix() {
            Ok(p) => Some(p),
            Err(e @ LabError::Validation(_)) => return Err(e),
            Err(_) if self.is_large_series() => None,
            Err(e) => return Err(e),
        };
        if let Some(pair) = &pair {
            if self.test_points.upper.is_empty() && self.test_points.lower.is_empty() {
                self.test_points = default_test_points(pair);
            }
            if self.rational_functions.is_empty() {
                self.rational_functions = default_rational_functions(pair);
            }
            self.check_points(pair)?;
        }
        Ok(self)
    }

    fn is_large_series(&self) -> bool {
        matches!(self.pair, PairSpec::DiagonalSeries { n, .. } if n > MAX_DIAGONAL_MATRIX)
    }

    fn check_points(&self, pair: &AccumulativePair) -> Result<()> {
        if let Some(z) = self.test_points.upper.iter().find(|z| !(z.im > 0.0)) {
            return Err(LabError::Validation(format!("upper test point {z} is not in the upper half-plane")));
        }
        if let Some(z) = self.test_points.lower.iter().find(|z| !(z.im < 0.0)) {
            return Err(LabError::Validation(format!("lower test point {z} is not in the lower half-plane")));
        }
        let sep = 1e-8 * pair.norm_scale().max(1.0);
        for z in &self.test_points.lower {
            if pair.spectrum().eigenvalues.iter().any(|mu| (z - mu).norm() < sep) {
                return Err(LabError::Validation(format!("lower test point {z} lies on spec(H)")));
            }
        }
        Ok(())
    }

    /// The matrix pair; long diagonal series have none.
    pub fn pair_matrix(&self) -> Result<AccumulativePair> {
        Ok(match &self.pair {
            PairSpec::RankOne { alpha } => AccumulativePair::rank_one(*alpha)?,
            PairSpec::Random { dim, seed } => seeded_pair(*dim, *seed)?,
            PairSpec::DiagonalSeries { rule, n } => {
                if *n > MAX_DIAGONAL_MATRIX {
                    return Err(LabError::Core(ssf_core::Error::InvalidInput(format!(
                        "diagonal series with n = {n} > {MAX_DIAGONAL_MATRIX} is not built as a matrix"
                    ))));
                }
                let alphas = (1..=*n).map(|k| rule.alpha(k)).collect::<ssf_core::Result<Vec<_>>>()?;
                AccumulativePair::new(HermitianMatrix::zeros(*n), PsdMatrix::new(HermitianMatrix::from_real_diagonal(&alphas))?)?
            }
            PairSpec::Explicit { h0, v } => {
                let square = |m: &Vec<Vec<Complex64>>, name: &str| -> Result<ComplexMatrix> {
                    if m.is_empty() || m.iter().any(|r| r.len() != m.len()) {
                        return Err(LabError::Validation(format!("{name} must be a non-empty square matrix")));
                    }
                    Ok(ComplexMatrix::from_rows(m)?)
                };
                let h0 = HermitianMatrix::try_new(square(h0, "h0")?, HERMITIAN_TOL)
                    .map_err(|e| LabError::Validation(format!("h0: {e}")))?;
                let v = HermitianMatrix::try_new(square(v, "v")?, HERMITIAN_TOL)
                    .map_err(|e| LabError::Validation(format!("v: {e}")))?;
                let v = PsdMatrix::new(v).map_err(|e| LabError::Validation(format!("v: {e}")))?;
                AccumulativePair::new(h0, v).map_err(|e| LabError::Validation(e.to_string()))?
            }
        })
    }
}

/// Four rays per half-plane at radii 1, 3 and 10, dropping points close to
/// `spec(H)`.
pub fn default_test_points(pair: &AccumulativePair) -> TestPoints {
    let clear = 0.05 * pair.spectral_scale();
    let eig = &pair.spectrum().eigenvalues;
    let mut points = TestPoints::default();
    for r in [1.0, 3.0, 10.0] {
        for angle in [PI / 6.0, PI / 3.0, 2.0 * PI / 3.0, 5.0 * PI / 6.0] {
            let z = Complex64::from_polar(r, angle);
            points.upper.push(z);
            let w = z.conj();
            if eig.iter().all(|mu| (w - mu).norm() > clear) {
                points.lower.push(w);
            }
        }
    }
    points
}

/// Poles in each half-plane, orders 1 to 3, kept clear of the strips
/// holding `spec(H)` and `spec(H*)`.
pub fn default_rational_functions(pair: &AccumulativePair) -> Vec<RationalFunction> {
    let depth = pair.v().norm() + 1.0;
    let c = Complex64::new;
    let term = |pole: Complex64, order: u32, coeff: Complex64| RationalFunction::term(pole, order, coeff).expect("pole off the axis");
    let mut mixed = term(c(0.4, 0.2 + depth), 1, c(1.0, 0.0));
    mixed.push(c(-0.5, -0.6 - depth), 2, c(0.3, -0.2)).expect("pole off the axis");
    let mut mixed3 = term(c(1.0, -1.0 - depth), 3, c(0.5, 0.5));
    mixed3.push(c(-1.0, -0.3 + depth), 1, c(-1.0, 0.2)).expect("pole off the axis");
    vec![
        term(c(0.0, depth), 1, c(1.0, 0.0)),
        term(c(0.5, 1.0 + depth), 2, c(1.0, 0.0)),
        term(c(0.0, -depth), 1, c(1.0, 0.0)),
        term(c(-1.0, -0.5 - depth), 2, c(0.0, 1.0)),
        mixed,
        mixed3,
    ]
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: Scenario = serde_json::from_str(text)?;
    raw.validate()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(format!("reading {}", path.display()), e))?;
    parse_scenario(&text)
}
