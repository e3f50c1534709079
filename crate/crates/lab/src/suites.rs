//! Verification suites. Each suite is a trait object in a fixed registry;
//! the runner looks suites up by kind and hands them a shared context.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use ssf_core::genint::{
    aleksandrov_reconstruct, divergence_study, growth_ratio, weak_l1_profile, AlphaRule, BoundaryPart, GridFunction,
    Side, TailModel, TruncationSchedule, Weight,
};
use ssf_core::linop::AccumulativePair;
use ssf_core::pertdet::{pert_det, zeta_norm, BoundaryData};
use ssf_core::rational::RationalFunction;
use ssf_core::repr::{cauchy_exp_rep, fit_lhp_representation, verify_inner_purity};
use ssf_core::traceform::{
    a_integral_routes, krein_baseline, trace_adjoint_formula, trace_lhs, trace_rhs_xi_with, trace_rhs_zeta,
    trace_schedule,
};

use crate::scenario::{PairSpec, Scenario, SuiteKind};

/// One numeric comparison. Passes iff `residual <= tolerance`; a NaN
/// residual fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, passed: residual <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: SuiteKind,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Set when the suite could not finish; its checks are then partial.
    pub error: Option<String>,
}

impl SuiteResult {
    pub fn from_checks(suite: SuiteKind, checks: Vec<Check>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self { suite, passed, checks, error: None }
    }

    pub fn failed(suite: SuiteKind, error: impl Into<String>) -> Self {
        Self { suite, passed: false, checks: Vec::new(), error: Some(error.into()) }
    }
}

/// `t m(t)` over a range of levels for one function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSeries {
    pub name: String,
    pub t: Vec<f64>,
    pub t_times_measure: Vec<f64>,
}

/// Partial integrals of one A-integral, one row per truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationTrace {
    pub name: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub checks: Vec<Check>,
    pub profiles: Vec<ProfileSeries>,
    pub truncations: Vec<TruncationTrace>,
}

/// Boundary data and the sampled `zeta` and `xi`, computed once per run.
pub struct Boundary {
    pub data: BoundaryData,
    pub zeta: GridFunction,
    pub xi: GridFunction,
}

pub struct Context<'a> {
    pub scenario: &'a Scenario,
    /// Missing for series too long to build as a matrix.
    pub pair: Option<&'a AccumulativePair>,
    pub boundary: Option<&'a Boundary>,
}

impl Context<'_> {
    fn pair(&self) -> Result<&AccumulativePair, String> {
        self.pair.ok_or_else(|| "this suite needs the matrix pair, which is not built for long diagonal series".into())
    }

    fn boundary(&self) -> Result<&Boundary, String> {
        self.boundary.ok_or_else(|| "boundary data is unavailable".into())
    }
}

pub trait Suite: Send + Sync {
    fn kind(&self) -> SuiteKind;
    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String>;
}

static REGISTRY: [&dyn Suite; 9] = [
    &BoundarySuite,
    &UpperRepSuite,
    &LowerRepSuite,
    &WeakL1Suite,
    &AIntegralSuite,
    &TraceSuite,
    &AdjointSuite,
    &KreinSuite,
    &DivergenceSuite,
];

pub fn suite(kind: SuiteKind) -> &'static dyn Suite {
    *REGISTRY.iter().find(|s| s.kind() == kind).expect("every kind is registered")
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn relative(a: Complex64, b: Complex64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}

fn output(checks: Vec<Check>) -> SuiteOutput {
    SuiteOutput { checks, ..SuiteOutput::default() }
}

fn label(i: usize) -> String {
    format!("f{i}")
}

struct BoundarySuite;

impl Suite for BoundarySuite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::Boundary
    }

    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let b = ctx.boundary()?;
        let pair = ctx.pair()?;
        let data = &b.data;
        let mut checks = Vec::new();
        if let PairSpec::RankOne { alpha } = ctx.scenario.pair {
            let mut worst = (0.0_f64, 0.0_f64);
            for ((&x, &z), &xi) in data.grid().iter().zip(data.zeta()).zip(data.xi()) {
                if x.abs() < 1e-2 {
                    continue;
                }
                worst.0 = worst.0.max((z - 0.5 * (alpha * alpha / (x * x)).ln_1p()).abs());
                worst.1 = worst.1.max((xi - (alpha / x).atan() / PI).abs());
            }
            checks.push(Check::new("zeta_closed_form", worst.0, 1e-6));
            checks.push(Check::new("xi_closed_form", worst.1, 1e-6));
        }
        let (norm, _) = zeta_norm(data).map_err(err)?;
        let target = PI * pair.trace_v();
        let residual = if target == 0.0 { norm.abs() } else { (norm - target).abs() / target };
        checks.push(Check::new("zeta_norm", residual, 1e-4));
        let negative = data.zeta().iter().fold(0.0_f64, |m, z| m.max(-z));
        checks.push(Check::new("zeta_nonnegative", negative, 1e-8));
        let half_rank = 0.5 * pair.v().rank() as f64;
        let excess = data.xi().iter().fold(0.0_f64, |m, x| m.max(x.abs() - half_rank));
        checks.push(Check::new("xi_rank_bound", excess, 1e-6));
        Ok(output(checks))
    }
}

struct UpperRepSuite;

impl Suite for UpperRepSuite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::RepUhp
    }

    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let b = ctx.boundary()?;
        let pair = ctx.pair()?;
        let mut worst = 0.0_f64;
        for &z in &ctx.scenario.test_points.upper {
            let rep = cauchy_exp_rep(&b.data, z).map_err(err)?.value;
            let direct = pert_det(pair, z).map_err(err)?.value;
            worst = worst.max((rep / direct - 1.0).norm());
        }
        Ok(output(vec![Check::new("cauchy_representation", worst, 1e-4)]))
    }
}

struct LowerRepSuite;

impl Suite for LowerRepSuite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::RepLhp
    }

    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let b = ctx.boundary()?;
        let pair = ctx.pair()?;
        let probes = &ctx.scenario.test_points.lower;
        if probes.is_empty() {
            return Err("no lower test points".into());
        }
        let fit = match fit_lhp_representation(pair, &b.data, probes) {
            Ok(rep) => rep.max_residual(),
            Err(ssf_core::Error::RepresentationMismatch { residual, .. }) => residual,
            Err(e) => return Err(err(e)),
        };
        // purity is checked on the boundary grid, away from real eigenvalues
        let clear = 1e-5 * pair.spectral_scale();
        let real: Vec<f64> = pair.spectrum().real().collect();
        let grid: Vec<f64> =
            b.data.grid().iter().copied().filter(|x| real.iter().all(|e| (x - e).abs() > clear)).collect();
        let purity = verify_inner_purity(pair, &grid).map_err(err)?;
        Ok(output(vec![Check::new("representation_fit", fit, 1e-3), Check::new("inner_purity", purity, 1e-8)]))
    }
}

struct WeakL1Suite;

/// Levels `10^-8 .. 10^4` at four per decade.
fn profile_levels() -> Vec<f64> {
    (-32..=16).map(|k| 10f64.powf(k as f64 / 4.0)).collect()
}

impl Suite for WeakL1Suite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::Weakl1
    }

    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let b = ctx.boundary()?;
        let pair = ctx.pair()?;
        let levels = profile_levels();
        let xi = weak_l1_profile(&b.xi, Weight::Lebesgue, &levels).map_err(err)?;
        let zeta = weak_l1_profile(&b.zeta, Weight::Lebesgue, &levels).map_err(err)?;
        let mut checks = Vec::new();

        // xi ~ tr V / (pi x) gives t m(t) -> 2 tr V / pi
        let limit = 2.0 * pair.trace_v() / PI;
        let small = weak_l1_profile(&b.xi, Weight::Lebesgue, &[1e-5]).map_err(err)?.t_times_measure[0];
        let residual = if limit == 0.0 { small } else { (small - limit).abs() / limit };
        checks.push(Check::new("xi_small_level_limit", residual, 0.02));
        let cap = 0.5 * pair.v().rank() as f64 + 0.01;
        let above = weak_l1_profile(&b.xi, Weight::Lebesgue, &[cap]).map_err(err)?.max_t_times_measure();
        checks.push(Check::new("xi_vanishes_above_rank_bound", above, 0.0));

        // zeta is weak-L1 zero: t m(t) fades at both ends of the level range
        let peak = zeta.max_t_times_measure();
        let ends = zeta.t_times_measure[0].max(zeta.t_times_measure[zeta.t_times_measure.len() - 1]);
        let share = if peak == 0.0 { 0.0 } else { ends / peak };
        checks.push(Check::new("zeta_weak_zero_share", share, 0.1));

        let profiles = vec![
            ProfileSeries { name: "xi".into(), t: xi.t, t_times_measure: xi.t_times_measure },
            ProfileSeries { name: "zeta".into(), t: zeta.t, t_times_measure: zeta.t_times_measure },
        ];
        Ok(SuiteOutput { checks, profiles, truncations: Vec::new() })
    }
}

struct AIntegralSuite;

fn scaled_tail(t: Option<&TailModel>, s: Complex64) -> Option<TailModel> {
    t.map(|t| TailModel { coeff: t.coeff * s, ..*t })
}

impl Suite for AIntegralSuite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::Aintegral
    }

    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let b = ctx.boundary()?;
        let mut out = SuiteOutput::default();
        let schedule = trace_schedule();
        for (i, f) in ctx.scenario.rational_functions.iter().enumerate() {
            let routes = a_integral_routes(&b.data, &b.xi, f, &schedule).map_err(err)?;
            let residual = relative(routes.direct.value, routes.conjugate, 1e-3);
            out.checks.push(Check::new(format!("{}_direct_vs_conjugate", label(i)), residual, 1e-3));
            let t = &routes.direct.truncations;
            out.truncations.push(TruncationTrace {
                name: label(i),
                lower: t.iter().map(|t| t.lower).collect(),
                upper: t.iter().map(|t| t.upper).collect(),
                re: t.iter().map(|t| t.partial.re).collect(),
                im: t.iter().map(|t| t.partial.im).collect(),
            });
        }

        // log det rebuilt from either boundary part
        let pi = Complex64::new(PI, 0.0);
        let pi_xi = b
            .xi
            .map(Arc::new(|_, v| v * PI), scaled_tail(b.xi.tail(Side::Left), pi), scaled_tail(b.xi.tail(Side::Right), pi))
            .map_err(err)?;
        let sampler = b.data.sampler();
        let anchor = sampler.log_det_upper(Complex64::i()).map_err(err)?;
        let default = TruncationSchedule::default();
        let mut worst = 0.0_f64;
        for &z in &ctx.scenario.test_points.upper {
            let direct = sampler.log_det_upper(z).map_err(err)?;
            for (part, u) in [(BoundaryPart::Real, &b.zeta), (BoundaryPart::Imag, &pi_xi)] {
                let v = aleksandrov_reconstruct(part, u, anchor, z, &default).map_err(err)?;
                worst = worst.max((v - direct).norm());
            }
        }
        out.checks.push(Check::new("reconstruction", worst, 1e-3));
        Ok(out)
    }
}

struct TraceSuite;

impl Suite for TraceSuite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::Trace
    }

    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let b = ctx.boundary()?;
        let pair = ctx.pair()?;
        let schedule = trace_schedule();
        let mut checks = Vec::new();
        for (i, f) in ctx.scenario.rational_functions.iter().enumerate() {
            let lhs = trace_lhs(pair, f).map_err(err)?;
            let zeta_form = trace_rhs_zeta(pair, &b.data, f).map_err(err)?;
            checks.push(Check::new(format!("{}_zeta_form", label(i)), relative(lhs, zeta_form, 1e-3), 1e-3));
            let xi_form = trace_rhs_xi_with(pair, &b.data, &b.xi, f, &schedule).map_err(err)?;
            checks.push(Check::new(format!("{}_xi_form", label(i)), relative(lhs, xi_form.rhs_terms.total(), 1e-3), 1e-3));
        }
        Ok(output(checks))
    }
}

struct AdjointSuite;

impl Suite for AdjointSuite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::Adjoint
    }

    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let pair = ctx.pair()?;
        let checks = ctx
            .scenario
            .rational_functions
            .iter()
            .enumerate()
            .map(|(i, f)| Ok(Check::new(label(i), trace_adjoint_formula(pair, f).map_err(err)?.residual, 1e-9)))
            .collect::<Result<Vec<_>, String>>()?;
        Ok(output(checks))
    }
}

struct KreinSuite;

impl Suite for KreinSuite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::Krein
    }

    /// Runs the self-adjoint formula with `V` and with `-V`.
    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let pair = ctx.pair()?;
        let v = pair.v().hermitian();
        let minus_v = ssf_core::linop::HermitianMatrix::new(v.matrix().scale(Complex64::new(-1.0, 0.0)));
        let mut checks = Vec::new();
        for (i, f) in ctx.scenario.rational_functions.iter().enumerate() {
            let f: &RationalFunction = f;
            checks.push(Check::new(format!("{}_plus_v", label(i)), krein_baseline(pair.h0(), v, f).map_err(err)?.residual, 1e-3));
            checks.push(Check::new(
                format!("{}_minus_v", label(i)),
                krein_baseline(pair.h0(), &minus_v, f).map_err(err)?.residual,
                1e-3,
            ));
        }
        Ok(output(checks))
    }
}

struct DivergenceSuite;

/// Coupling rule and series length: the scenario's own series, otherwise
/// the default rule up to 1000.
fn divergence_setup(scenario: &Scenario) -> (AlphaRule, usize) {
    match &scenario.pair {
        PairSpec::DiagonalSeries { rule, n } => (rule.clone(), *n),
        _ => (AlphaRule::default(), 1000),
    }
}

impl Suite for DivergenceSuite {
    fn kind(&self) -> SuiteKind {
        SuiteKind::Divergence
    }

    fn run(&self, ctx: &Context) -> Result<SuiteOutput, String> {
        let (rule, n) = divergence_setup(ctx.scenario);
        let mut n_values: Vec<usize> = [10, 100, 1000, 10_000, 100_000].into_iter().filter(|&m| m < n).collect();
        n_values.push(n);
        let rows = divergence_study(&rule, &n_values).map_err(err)?;
        let gap = rows.iter().fold(0.0_f64, |m, r| m.max((r.closed_form - r.quadrature).abs()));
        let mut checks = vec![Check::new("closed_form_vs_quadrature", gap, 1e-6)];
        // growth is only claimed for the divergent rules
        if matches!(rule, AlphaRule::LogPower { .. }) && rows.len() >= 2 {
            let drops = rows.windows(2).filter(|w| w[1].closed_form <= w[0].closed_form).count();
            checks.push(Check::new("monotone_growth", drops as f64, 0.0));
            let ratios = growth_ratio(&rows);
            let smallest = ratios.iter().fold(f64::INFINITY, |m, r| m.min(r.1));
            checks.push(Check::new("growth_ratio_shortfall", (0.5 - smallest).max(0.0), 0.0));
        }
        let profiles = vec![ProfileSeries {
            name: "xi_integral".into(),
            t: rows.iter().map(|r| r.n as f64).collect(),
            t_times_measure: rows.iter().map(|r| r.closed_form).collect(),
        }];
        Ok(SuiteOutput { checks, profiles, truncations: Vec::new() })
    }
}
