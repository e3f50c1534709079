use proptest::prelude::*;
use std::fs;

use ssf_core::genint::AlphaRule;
use ssf_lab::emit::{emit, Format, BOUNDARY_HEADER, SUMMARY_FILE};
use ssf_lab::{parse_scenario, run_scenario, LabError, PairSpec, Report, Scenario, SuiteKind};

fn rank_one(suites: Vec<SuiteKind>) -> Scenario {
    Scenario::new("r1", PairSpec::RankOne { alpha: 1.0 }).with_suites(suites).validate().unwrap()
}

#[test]
fn rank_one_csv_and_json_give_three_files() {
    let report = run_scenario(&rank_one(Vec::new()));
    assert!(report.passed, "{:#?}", report.suites);
    let dir = tempfile::tempdir().unwrap();
    let paths = emit(&report, &[Format::Csv, Format::Json], dir.path()).unwrap();
    assert_eq!(paths.len(), 3);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 3);
    let csv = fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(BOUNDARY_HEADER));
    assert_eq!(csv.lines().count(), 1 + report.series.boundary.as_ref().unwrap().lambda.len());
    assert!(paths.iter().all(|p| p.extension().unwrap() != "svg"));
}

#[test]
fn svg_only_when_requested() {
    let report = run_scenario(&rank_one(vec![SuiteKind::Boundary, SuiteKind::Weakl1]));
    let dir = tempfile::tempdir().unwrap();
    let paths = emit(&report, &[Format::Svg], dir.path()).unwrap();
    let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["zeta.svg", "xi.svg", "weakl1.svg"]);
    for p in &paths {
        let text = fs::read_to_string(p).unwrap();
        assert!(text.starts_with("<svg") && text.contains("<polyline"));
    }
}

#[test]
fn summary_round_trips_residuals_bit_exact() {
    let report = run_scenario(&rank_one(vec![SuiteKind::Boundary, SuiteKind::Trace, SuiteKind::Aintegral]));
    let dir = tempfile::tempdir().unwrap();
    emit(&report, &[Format::Json], dir.path()).unwrap();
    let back = Report::from_json(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(back.artifacts, [SUMMARY_FILE]);
    assert_eq!(back.suites.len(), report.suites.len());
    for (a, b) in report.suites.iter().zip(&back.suites) {
        for (x, y) in a.checks.iter().zip(&b.checks) {
            assert_eq!(x.residual.to_bits(), y.residual.to_bits(), "{}", x.name);
        }
    }
    assert_eq!(Report { artifacts: Vec::new(), ..back }, report);
}

#[test]
fn identical_scenarios_give_identical_summaries() {
    let s = Scenario::new("det", PairSpec::Random { dim: 4, seed: 11 })
        .with_suites(vec![SuiteKind::Boundary, SuiteKind::Trace, SuiteKind::Krein])
        .validate()
        .unwrap();
    assert_eq!(run_scenario(&s).to_json().unwrap(), run_scenario(&s).to_json().unwrap());
}

#[test]
fn dropping_a_suite_leaves_the_others_unchanged() {
    let pair = PairSpec::Random { dim: 3, seed: 5 };
    let all = run_scenario(&Scenario::new("a", pair.clone()).validate().unwrap());
    let some = run_scenario(
        &Scenario::new("b", pair).with_suites(vec![SuiteKind::Trace, SuiteKind::Adjoint]).validate().unwrap(),
    );
    for kind in [SuiteKind::Trace, SuiteKind::Adjoint] {
        assert_eq!(all.suite(kind), some.suite(kind));
    }
}

#[test]
fn zero_perturbation_has_vanishing_residuals() {
    let s = parse_scenario(
        r#"{"name": "zero", "pair": {"kind": "explicit",
            "h0": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
            "v": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]}}"#,
    )
    .unwrap();
    let report = run_scenario(&s);
    assert!(report.passed, "{:#?}", report.suites);
    for suite in report.suites.iter().filter(|s| s.suite != SuiteKind::Divergence) {
        for c in &suite.checks {
            assert!(c.residual <= 1e-12, "{} {} {}", suite.suite, c.name, c.residual);
        }
    }
}

#[test]
fn seeded_random_pair_passes_core_suites() {
    let s = Scenario::new("r", PairSpec::Random { dim: 6, seed: 42 })
        .with_suites(vec![SuiteKind::Boundary, SuiteKind::RepUhp, SuiteKind::Trace])
        .validate()
        .unwrap();
    let report = run_scenario(&s);
    assert!(report.passed, "{:#?}", report.suites);
    assert!(report.suites.iter().flat_map(|s| &s.checks).all(|c| c.residual < 1e-3));
}

#[test]
fn emitting_into_a_file_is_an_io_error() {
    let report = run_scenario(&rank_one(vec![SuiteKind::Adjoint]));
    let file = tempfile::NamedTempFile::new().unwrap();
    let e = emit(&report, &[Format::Json], file.path()).unwrap_err();
    assert!(matches!(e, LabError::Io { .. }));
}

fn cheap_suites() -> impl Strategy<Value = Vec<SuiteKind>> {
    Just(vec![SuiteKind::Adjoint, SuiteKind::Krein, SuiteKind::Divergence]).prop_shuffle().prop_flat_map(|v| {
        let n = v.len();
        (Just(v), 1..=n).prop_map(|(v, k)| v[..k].to_vec())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn report_lists_each_requested_suite_once_in_order(dim in 1usize..5, seed in 0u64..1000, suites in cheap_suites()) {
        let s = Scenario::new("p", PairSpec::Random { dim, seed }).with_suites(suites.clone()).validate().unwrap();
        let report = run_scenario(&s);
        let got: Vec<SuiteKind> = report.suites.iter().map(|s| s.suite).collect();
        prop_assert_eq!(got, suites);
        prop_assert_eq!(report.passed, report.suites.iter().all(|s| s.passed));
        for suite in &report.suites {
            for c in &suite.checks {
                prop_assert_eq!(c.passed, c.residual <= c.tolerance);
            }
        }
    }

    #[test]
    fn scenarios_survive_a_json_round_trip(q in 1.01f64..2.0, n in 1usize..2000) {
        let s = Scenario::new("s", PairSpec::DiagonalSeries { rule: AlphaRule::LogPower { q }, n })
            .with_suites(vec![SuiteKind::Divergence])
            .validate()
            .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(parse_scenario(&text).unwrap(), s);
    }
}
