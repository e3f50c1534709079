use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

use ssf_core::genint::{
    a_integral, aleksandrov_reconstruct, truncated_integrals, boundary_functions, fft_hilbert, hilbert_pv, hilbert_transform,
    weak_l1_profile, BoundaryPart, GridFunction, Normalization, Side, TailModel, TruncationSchedule, Weight,
};
use ssf_core::pertdet::{boundary_values, EpsilonSchedule, GridSpec};
use ssf_core::random::seeded_pair;

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn gaussian_mix(terms: Vec<(f64, f64, f64)>, half_width: f64, n: usize) -> GridFunction {
    GridFunction::from_fn(
        uniform(-half_width, half_width, n),
        move |x| Ok(re(terms.iter().map(|&(a, c, w)| a * (-((x - c) / w).powi(2)).exp()).sum())),
        &[],
    )
    .unwrap()
}

/// `(1 - x^2)^2 amplitude` on `[c - w, c + w]`.
fn bump(x: f64, c: f64, w: f64) -> f64 {
    let u = (x - c) / w;
    if u.abs() < 1.0 {
        (1.0 - u * u).powi(2)
    } else {
        0.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn a_integral_agrees_with_lebesgue(
        terms in prop::collection::vec((-2.0f64..2.0, -4.0f64..4.0, 0.3f64..2.0), 1..4),
    ) {
        let f = gaussian_mix(terms, 20.0, 1601);
        let lebesgue = f.integral(Weight::Lebesgue).unwrap();
        let r = truncated_integrals(&f, Weight::Lebesgue, &TruncationSchedule::default()).unwrap();
        let scale: f64 = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!((r.value - lebesgue).norm() <= r.estimate + 1e-12 * scale, "{} vs {}", r.value, lebesgue);
        if r.converged {
            prop_assert_eq!(a_integral(&f, Weight::Lebesgue, &TruncationSchedule::default()).unwrap().value, r.value);
        }
    }

    #[test]
    fn nonnegative_bump_transform_is_not_weak_zero(
        centers in prop::collection::vec((-3.0f64..3.0, 0.3f64..1.5, 0.1f64..2.0), 1..3),
    ) {
        let grid = uniform(-6.0, 6.0, 1200);
        let cs = centers.clone();
        let f = GridFunction::from_fn(grid, move |x| Ok(re(cs.iter().map(|&(c, w, a)| a * bump(x, c, w)).sum())), &[])
            .unwrap()
            .with_tails(Some(TailModel::real(0.0, -2.0).unwrap()), Some(TailModel::real(0.0, -2.0).unwrap()))
            .unwrap();
        let s = f.integral(Weight::Lebesgue).unwrap().re;
        let g = hilbert_transform(&f, Normalization::Raw).unwrap();
        let t: Vec<f64> = (4..10).map(|k| 10f64.powi(-k)).collect();
        let p = weak_l1_profile(&g, Weight::Lebesgue, &t).unwrap();
        prop_assert!(p.max_t_times_measure() >= 2.0 * s * 0.95, "{} vs {}", p.max_t_times_measure(), 2.0 * s);
    }
}

#[test]
fn hilbert_twice_is_minus_identity() {
    let f = GridFunction::from_fn(uniform(-12.0, 12.0, 2401), |x| Ok(re((-x * x).exp() * (1.0 + 0.3 * x))), &[]).unwrap();
    let tf = hilbert_transform(&f, Normalization::Classical).unwrap();
    for x in [-1.3, -0.4, 0.0, 0.25, 1.1, 2.0] {
        let ttf = hilbert_pv(&tf, x, Normalization::Classical).unwrap();
        let fx = f.eval(x).unwrap();
        assert!((ttf + fx).norm() < 1e-3, "x = {x}: {ttf} vs {fx}");
    }
}

#[test]
fn classical_pairs() {
    // 1/(1 + x^2) -> x/(1 + x^2)
    let lt = TailModel::real(1.0, -2.0).unwrap();
    let f = GridFunction::from_fn(uniform(-400.0, 400.0, 8000), |x| Ok(re(1.0 / (1.0 + x * x))), &[])
        .unwrap()
        .with_tails(Some(lt), Some(lt))
        .unwrap();
    for x in [-2.0, -0.5, 0.3, 1.0, 5.0] {
        let v = hilbert_pv(&f, x, Normalization::Classical).unwrap();
        assert!((v - re(x / (1.0 + x * x))).norm() < 1e-6, "x = {x}: {v}");
    }
}

#[test]
fn fft_agrees_with_direct_in_the_middle() {
    let grid = uniform(-10.0, 10.0, 1001);
    let values: Vec<f64> = grid.iter().map(|x| (-(x - 0.5) * (x - 0.5)).exp() - 0.5 * (-(x + 2.0).powi(2) * 2.0).exp()).collect();
    let f = GridFunction::from_real(grid, &values).unwrap();
    let fast = fft_hilbert(&f).unwrap();
    let direct = hilbert_transform(&f, Normalization::Classical).unwrap();
    let n = fast.len();
    for k in n / 10..n - n / 10 {
        assert!((fast.values()[k] - direct.values()[k]).norm() < 1e-10);
    }
}

#[test]
fn reconstruction_for_random_pairs() {
    let s = TruncationSchedule::default();
    for seed in 0..2 {
        let pair = seeded_pair(4, 100 + seed).unwrap();
        let grid = GridSpec::default().build(&pair).unwrap();
        let data = boundary_values(&pair, &grid, &EpsilonSchedule::default()).unwrap();
        let sampler = data.sampler_arc();
        let (zeta, xi) = boundary_functions(&data).unwrap();
        let scaled = |t: Option<&TailModel>| t.map(|t| TailModel { coeff: t.coeff * PI, ..*t });
        let pi_xi = xi.map(Arc::new(|_, v| v * PI), scaled(xi.tail(Side::Left)), scaled(xi.tail(Side::Right))).unwrap();
        let anchor = sampler.log_det_upper(Complex64::i()).unwrap();
        for z in [Complex64::new(0.3, 1.5), Complex64::new(-1.0, 0.8), Complex64::new(2.0, 3.0)] {
            let direct = sampler.log_det_upper(z).unwrap();
            let from_real = aleksandrov_reconstruct(BoundaryPart::Real, &zeta, anchor, z, &s).unwrap();
            let from_imag = aleksandrov_reconstruct(BoundaryPart::Imag, &pi_xi, anchor, z, &s).unwrap();
            assert!((from_real - direct).norm() < 1e-3, "{z}: {from_real} vs {direct}");
            assert!((from_imag - direct).norm() < 1e-3, "{z}: {from_imag} vs {direct}");
        }
    }
}
