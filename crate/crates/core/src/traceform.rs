//! Trace formulas for rational functions vanishing at infinity, with the
//! operator side and the spectral-shift side computed independently.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::genint::{self, boundary_functions, AIntegralResult, GridFunction, Side, TailModel, TruncationSchedule, Weight};
use crate::linop::{self, AccumulativePair, ComplexMatrix, HermitianMatrix};
use crate::pertdet::{continue_log, principal, BoundaryData, LuEvaluator, DetEvaluator};
use crate::quad::{self, QuadConfig};
use crate::rational::RationalFunction;
use crate::repr;

/// Agreement required between the two routes to the A-integral term.
pub const DUALITY_TOLERANCE: f64 = 1e-2;

/// Terms with poles in the lower half-plane; their boundary functions are
/// of upper Hardy class.
pub fn project_plus(f: &RationalFunction) -> RationalFunction {
    f.filter(|t| t.pole.im < 0.0)
}

/// Terms with poles in the upper half-plane.
pub fn project_minus(f: &RationalFunction) -> RationalFunction {
    f.filter(|t| t.pole.im > 0.0)
}

/// Classical transform on rational functions: each term gains the factor
/// `i sign(Im pole)`.
pub fn hilbert_on_rational(f: &RationalFunction) -> RationalFunction {
    f.map_coeffs(|t| t.coeff * Complex64::new(0.0, t.pole.im.signum()))
}

/// `Res_{w = infinity} f = -c_1` where `f ~ c_1 / w`.
pub fn residue_at_infinity(f: &RationalFunction) -> Complex64 {
    -f.terms().iter().filter(|t| t.order == 1).map(|t| t.coeff).sum::<Complex64>()
}

/// `f ~ C x^-q` as `|x| -> infinity`: the first non-vanishing coefficient of
/// the expansion of the terms in powers of `1/x`.
fn leading_asymptotic(f: &RationalFunction) -> Option<(Complex64, u32)> {
    let min = f.min_order()?;
    let max = f.max_order()?;
    let scale = f.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    for q in min..=max + 4 {
        // (x - w)^-p = sum_j C(p + j - 1, j) w^j x^-(p + j)
        let c: Complex64 = f
            .terms()
            .iter()
            .filter(|t| t.order <= q)
            .map(|t| {
                let j = q - t.order;
                t.coeff * binomial(t.order + j - 1, j) * t.pole.powu(j)
            })
            .sum();
        if c.norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Some((c, q));
        }
    }
    None
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tail models of a rational function on both sides.
fn rational_tails(f: &RationalFunction) -> Result<(Option<TailModel>, Option<TailModel>)> {
    match leading_asymptotic(f) {
        None => Ok((Some(TailModel::real(0.0, -2.0)?), Some(TailModel::real(0.0, -2.0)?))),
        Some((c, q)) => {
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            Ok((Some(TailModel::new(c * sign, -(q as f64))?), Some(TailModel::new(c, -(q as f64))?)))
        }
    }
}

/// `tr(f(H) - f(H0))` from matrix functions.
pub fn trace_lhs(pair: &AccumulativePair, f: &RationalFunction) -> Result<Complex64> {
    let fh = linop::apply_rational(&pair.h(), f)?;
    let fh0 = linop::apply_rational(pair.h0().matrix(), f)?;
    Ok((&fh - &fh0).trace())
}

/// `sum f(spec H) - sum f(spec H0)`.
pub fn eigenvalue_trace(pair: &AccumulativePair, f: &RationalFunction) -> Complex64 {
    let h: Complex64 = pair.spectrum().eigenvalues.iter().map(|&z| f.eval(z)).sum();
    let h0: Complex64 = pair.h0_eigenvalues().iter().map(|&x| f.eval_real(x)).sum();
    h - h0
}

/// `sum_k f(z_k) - f(conj z_k)` over the eigenvalues of `H`.
fn mirror_sum(pair: &AccumulativePair, f: &RationalFunction) -> Complex64 {
    pair.spectrum().eigenvalues.iter().map(|&z| f.eval(z) - f.eval(z.conj())).sum()
}

/// `int g zeta` over the line by adaptive quadrature of the sampled `zeta`;
/// beyond the quadrature reach the tails contribute below the tolerance.
fn integrate_against_zeta(data: &BoundaryData, g: &RationalFunction) -> Result<Complex64> {
    if g.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = data.sampler();
    if s.trace_v() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let reach = data.extent().max(1e5 * s.norm_scale());
    let mut breaks = s.breakpoints(reach);
    breaks.extend(g.poles().map(|w| w.re).filter(|x| x.abs() < reach));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let cfg = QuadConfig::with_tol(1e-11 * s.trace_v(), 1e-9);
    let q = quad::try_integrate_pieces(|x| Ok(g.eval_real(x) * s.zeta(x)?), &quad::pieces_between(&breaks), cfg)?;
    Ok(q.value)
}

/// Trace formula in terms of `zeta`: a pole in the upper half-plane
/// contributes `(1/(pi i)) int f' zeta`, a pole in the lower half-plane
/// contributes `-(1/(pi i)) int f' zeta + sum_k f(z_k) - f(conj z_k)`.
pub fn trace_rhs_zeta(pair: &AccumulativePair, data: &BoundaryData, f: &RationalFunction) -> Result<Complex64> {
    let pi_i = Complex64::new(0.0, PI);
    let upper = project_minus(f);
    let lower = project_plus(f);
    let up = integrate_against_zeta(data, &upper.derivative())? / pi_i;
    let down = -integrate_against_zeta(data, &lower.derivative())? / pi_i;
    Ok(up + down + mirror_sum(pair, &lower))
}

/// Named right-hand-side terms of the `xi` trace formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhsTerms {
    /// `sum_k (P+ f)(z_k) - (P+ f)(conj z_k)`.
    pub eigenvalue_sum: Complex64,
    /// `(A) int f' xi`, computed directly.
    pub a_integral_xi: Complex64,
    /// `-(1/pi) int (T f') zeta`, the conjugate route to the same term.
    pub zeta_integral: Complex64,
    /// Singular-measure term; the measure vanishes for matrices.
    pub mu_term: Complex64,
    /// `-i a Res_{w = infinity} (P+ f)(w)`; `a` vanishes for matrices.
    pub a_term: Complex64,
}

impl RhsTerms {
    /// Sum with the direct A-integral.
    pub fn total(&self) -> Complex64 {
        self.eigenvalue_sum + self.a_integral_xi + self.mu_term + self.a_term
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub f: RationalFunction,
    pub lhs: Complex64,
    pub rhs_terms: RhsTerms,
    pub residual: f64,
}

/// `(1/(pi i)) sum_j (P+ f')(x_j) (1 + x_j^2) m_j` for a discrete measure
/// `{(x_j, m_j)}`. Finite matrices carry no singular part, so callers pass
/// an empty measure.
pub fn mu_term(f: &RationalFunction, measure: &[(f64, f64)]) -> Complex64 {
    let g = project_plus(f).derivative();
    measure.iter().map(|&(x, m)| g.eval_real(x) * (1.0 + x * x) * m).sum::<Complex64>() / Complex64::new(0.0, PI)
}

/// Probes in the lower half-plane clear of `spec(H)` for the guard fit.
fn guard_probes(pair: &AccumulativePair) -> Vec<Complex64> {
    let s = pair.norm_scale().max(1e-3);
    let depth = -(2.0 * s + 1.0);
    vec![Complex64::new(0.0, depth), Complex64::new(0.5 * s, 0.75 * depth), Complex64::new(-0.5 * s, 1.5 * depth)]
}

/// `f' xi` as a grid function on the boundary grid with power-law tails.
fn derivative_times_xi(xi: &GridFunction, f: &RationalFunction) -> Result<GridFunction> {
    let df = f.derivative();
    let (l, r) = rational_tails(&df)?;
    let left = xi.tail(Side::Left).zip(l).map(|(a, b)| a.product(&b));
    let right = xi.tail(Side::Right).zip(r).map(|(a, b)| a.product(&b));
    let g = df.clone();
    xi.map(Arc::new(move |x, v| g.eval_real(x) * v), left, right)
}

/// The A-integral of `f' xi` computed two ways: directly by truncation and
/// through the harmonic conjugate `-(1/pi) int (T f') zeta`.
#[derive(Debug, Clone)]
pub struct AIntegralRoutes {
    pub direct: AIntegralResult,
    pub conjugate: Complex64,
}

pub fn a_integral_routes(
    data: &BoundaryData,
    xi: &GridFunction,
    f: &RationalFunction,
    schedule: &TruncationSchedule,
) -> Result<AIntegralRoutes> {
    let g = derivative_times_xi(xi, f)?;
    let direct = genint::a_integral(&g, Weight::Lebesgue, schedule)?;
    let conjugate = -integrate_against_zeta(data, &hilbert_on_rational(&f.derivative()))? / PI;
    Ok(AIntegralRoutes { direct, conjugate })
}

/// Full `xi` trace formula for `f`, with the A-integral term computed
/// directly and through harmonic conjugation.
///
/// The lower half-plane representation is fitted first; its linear term
/// and singular measure are zero, which is what licenses dropping the
/// corresponding terms.
pub fn trace_rhs_xi(pair: &AccumulativePair, data: &BoundaryData, f: &RationalFunction) -> Result<TraceReport> {
    let (_, xi) = boundary_functions(data)?;
    trace_rhs_xi_with(pair, data, &xi, f, &trace_schedule())
}

/// Truncation levels `10^-k .. 10^k`, `k <= 12`: `f' xi` decays like
/// `|x|^-(p + 2)` for order-`p` poles, and the truncated integrals then
/// settle only by `10^-(1 - 1/(p + 2))` per decade.
pub fn trace_schedule() -> TruncationSchedule {
    TruncationSchedule::decades(12).expect("valid schedule")
}

/// [`trace_rhs_xi`] reusing a prepared `xi` grid function.
pub fn trace_rhs_xi_with(
    pair: &AccumulativePair,
    data: &BoundaryData,
    xi: &GridFunction,
    f: &RationalFunction,
    schedule: &TruncationSchedule,
) -> Result<TraceReport> {
    let lhs = trace_lhs(pair, f)?;
    let plus = project_plus(f);
    let eigenvalue_sum = mirror_sum(pair, &plus);
    let (a_integral_xi, zeta_integral) = if f.is_zero() || pair.trace_v() == 0.0 {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        let routes = a_integral_routes(data, xi, f, schedule)?;
        let (direct, conjugate) = (routes.direct.value, routes.conjugate);
        if (direct - conjugate).norm() > DUALITY_TOLERANCE {
            return Err(Error::InconsistentDuality { direct, conjugate });
        }
        (direct, conjugate)
    };
    let rep = repr::fit_lhp_representation(pair, data, &guard_probes(pair))?;
    let a_term = Complex64::new(0.0, -rep.a) * residue_at_infinity(&plus);
    let rhs_terms = RhsTerms { eigenvalue_sum, a_integral_xi, zeta_integral, mu_term: mu_term(f, &[]), a_term };
    let residual = (lhs - rhs_terms.total()).norm();
    Ok(TraceReport { f: f.clone(), lhs, rhs_terms, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

impl IdentityCheck {
    fn new(lhs: Complex64, rhs: Complex64) -> Self {
        Self { lhs, rhs, residual: (lhs - rhs).norm() }
    }
}

/// `tr(f(H) - f(H*)) = sum_k f(z_k) - f(conj z_k)`.
pub fn trace_adjoint_formula(pair: &AccumulativePair, f: &RationalFunction) -> Result<IdentityCheck> {
    let h = pair.h();
    let fh = linop::apply_rational(&h, f)?;
    let fh_star = linop::apply_rational(&pair.h_adjoint(), f)?;
    Ok(IdentityCheck::new((&fh - &fh_star).trace(), mirror_sum(pair, f)))
}

/// Self-adjoint baseline `tr(f(H0 + V) - f(H0)) = int f' xi` with `V`
/// Hermitian of any sign and `xi` the branch-tracked argument of
/// `det(H - z) / det(H0 - z)` just above the axis.
///
/// `xi` is constant between consecutive eigenvalues; it is sampled at the
/// middle of each gap and `f'` is integrated by quadrature over the gap.
pub fn krein_baseline(h0: &HermitianMatrix, v: &HermitianMatrix, f: &RationalFunction) -> Result<IdentityCheck> {
    if h0.dim() != v.dim() {
        return Err(Error::DimensionMismatch(format!("H0 is {}x{}, V is {}x{}", h0.dim(), h0.dim(), v.dim(), v.dim())));
    }
    let h: ComplexMatrix = h0.matrix() + v.matrix();
    let lhs = (&linop::apply_rational(&h, f)? - &linop::apply_rational(h0.matrix(), f)?).trace();
    let lu = LuEvaluator::from_matrices(h0.matrix().clone(), h.clone())?;
    let mut points: Vec<f64> = lu.singularities().iter().map(|s| s.re).collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let scale = (h0.op_norm() + v.op_norm()).max(1e-3);
    let gap = points.windows(2).map(|w| w[1] - w[0]).fold(scale, f64::min);
    // travel at half the smallest gap, then drop to the axis at each midpoint
    let height = 0.5 * gap;
    let eps = 1e-12 * scale;
    let anchor = Complex64::new(0.0, 10.0 * scale + 1.0);
    let start = principal(lu.log_det(anchor)?);
    let mids: Vec<f64> = points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut path = vec![anchor];
    path.extend(mids.iter().map(|&m| Complex64::new(m, height)));
    let high = continue_log(|z| lu.log_det(z), &path, start, lu.singularities())?;
    let logs = mids
        .iter()
        .zip(&high[1..])
        .map(|(&m, &log)| {
            let drop = [Complex64::new(m, height), Complex64::new(m, eps)];
            Ok(continue_log(|z| lu.log_det(z), &drop, log, lu.singularities())?[1])
        })
        .collect::<Result<Vec<_>>>()?;
    let df = f.derivative();
    let cfg = QuadConfig::with_tol(1e-14, 1e-12);
    let mut rhs = Complex64::new(0.0, 0.0);
    for (w, log) in points.windows(2).zip(&logs) {
        let xi = log.im / PI;
        if xi != 0.0 {
            rhs += quad::integrate(|x| df.eval_real(x), w[0], w[1], cfg)?.value * xi;
        }
    }
    Ok(IdentityCheck::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::PsdMatrix;
    use crate::pertdet::{boundary_values, EpsilonSchedule, GridSpec};
    use crate::random::seeded_pair;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pole(w: Complex64) -> RationalFunction {
        RationalFunction::simple_pole(w).unwrap()
    }

    fn rank_one_data() -> (AccumulativePair, BoundaryData) {
        let pair = AccumulativePair::rank_one(1.0).unwrap();
        let grid = GridSpec::default().build(&pair).unwrap();
        let data = boundary_values(&pair, &grid, &EpsilonSchedule::default()).unwrap();
        (pair, data)
    }

    #[test]
    fn projections_split_by_half_plane() {
        let mut f = pole(c(0.0, 1.0));
        f.push(c(1.0, -2.0), 2, c(0.5, 0.0)).unwrap();
        assert!(project_plus(&pole(c(0.0, 1.0))).is_zero());
        assert_eq!(project_plus(&pole(c(0.0, -2.0))), pole(c(0.0, -2.0)));
        assert_eq!(project_plus(&f).terms().len(), 1);
        assert_eq!(project_plus(&f).add(&project_minus(&f)).terms().len(), 2);
    }

    #[test]
    fn rational_transform_signs() {
        let up = hilbert_on_rational(&pole(c(0.0, 1.0)));
        assert_eq!(up.terms()[0].coeff, c(0.0, 1.0));
        let down = hilbert_on_rational(&pole(c(0.0, -1.0)));
        assert_eq!(down.terms()[0].coeff, c(0.0, -1.0));
        let twice = hilbert_on_rational(&hilbert_on_rational(&pole(c(0.3, 0.7))));
        assert_eq!(twice.terms()[0].coeff, c(-1.0, 0.0));
    }

    #[test]
    fn residue_at_infinity_uses_simple_terms() {
        let mut f = RationalFunction::term(c(0.0, 1.0), 1, c(2.0, 1.0)).unwrap();
        assert_eq!(residue_at_infinity(&f), c(-2.0, -1.0));
        f.push(c(1.0, -1.0), 2, c(5.0, 0.0)).unwrap();
        f.push(c(1.0, -1.0), 1, c(0.5, 0.0)).unwrap();
        assert_eq!(residue_at_infinity(&f), c(-2.5, -1.0));
    }

    #[test]
    fn leading_asymptotics_handle_cancellation() {
        // 1/(x - i) - 1/(x + i) = 2i / (x^2 + 1)
        let mut f = pole(c(0.0, 1.0));
        f.push(c(0.0, -1.0), 1, c(-1.0, 0.0)).unwrap();
        let (coeff, q) = leading_asymptotic(&f).unwrap();
        assert_eq!(q, 2);
        assert!((coeff - c(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn scalar_traces() {
        let pair = AccumulativePair::rank_one(1.0).unwrap();
        for w in [c(0.0, 1.0), c(0.0, -2.0)] {
            let v = trace_lhs(&pair, &pole(w)).unwrap();
            assert!((v - c(0.0, -0.5)).norm() < 1e-14, "{w}: {v}");
            assert!((eigenvalue_trace(&pair, &pole(w)) - v).norm() < 1e-14);
        }
        let zero = pair.with_v(PsdMatrix::zeros(1)).unwrap();
        assert_eq!(trace_lhs(&zero, &pole(c(0.0, 1.0))).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn zeta_formula_for_scalar_pair() {
        let (pair, data) = rank_one_data();
        for w in [c(0.0, 1.0), c(0.0, -2.0)] {
            let v = trace_rhs_zeta(&pair, &data, &pole(w)).unwrap();
            assert!((v - c(0.0, -0.5)).norm() < 1e-6, "{w}: {v}");
        }
        // continuation integral alone for the lower pole
        let lower = pole(c(0.0, -2.0));
        let integral = -integrate_against_zeta(&data, &lower.derivative()).unwrap() / c(0.0, PI);
        assert!((integral - c(0.0, 1.0 / 6.0)).norm() < 1e-6);
        assert!((mirror_sum(&pair, &lower) - c(0.0, -2.0 / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn xi_formula_for_scalar_pair() {
        let (pair, data) = rank_one_data();
        for w in [c(0.0, 1.0), c(0.0, -2.0)] {
            let r = trace_rhs_xi(&pair, &data, &pole(w)).unwrap();
            assert!(r.residual < 1e-4, "{w}: {:?}", r);
            assert!((r.rhs_terms.a_integral_xi - r.rhs_terms.zeta_integral).norm() < 1e-4, "{:?}", r.rhs_terms);
            assert_eq!(r.rhs_terms.mu_term, c(0.0, 0.0));
        }
        let r = trace_rhs_xi(&pair, &data, &pole(c(0.0, 1.0))).unwrap();
        assert_eq!(r.rhs_terms.eigenvalue_sum, c(0.0, 0.0));
    }

    #[test]
    fn adjoint_formula_is_exact() {
        let pair = AccumulativePair::rank_one(1.0).unwrap();
        let r = trace_adjoint_formula(&pair, &pole(c(0.0, -2.0))).unwrap();
        assert!((r.lhs - c(0.0, -2.0 / 3.0)).norm() < 1e-14 && r.residual < 1e-14);
        let pair = seeded_pair(5, 3).unwrap();
        let mut f = pole(c(0.4, 1.3));
        f.push(c(-0.2, -2.5), 2, c(1.0, -0.5)).unwrap();
        assert!(trace_adjoint_formula(&pair, &f).unwrap().residual < 1e-9);
    }

    #[test]
    fn krein_scalar_shift_is_indicator() {
        let alpha = 0.8;
        let h0 = HermitianMatrix::zeros(1);
        let v = HermitianMatrix::from_real_diagonal(&[alpha]);
        let f = pole(c(0.3, 1.1));
        let r = krein_baseline(&h0, &v, &f).unwrap();
        let expected = f.eval_real(alpha) - f.eval_real(0.0);
        assert!((r.lhs - expected).norm() < 1e-13);
        assert!(r.residual < 1e-10, "{:?}", r);
    }

    #[test]
    fn krein_with_indefinite_perturbation() {
        let h0 = HermitianMatrix::from_real_diagonal(&[-1.0, 0.5, 2.0]);
        let v = HermitianMatrix::new(
            ComplexMatrix::from_real_rows(&[vec![0.3, -0.4, 0.0], vec![-0.4, -0.8, 0.2], vec![0.0, 0.2, 0.1]]).unwrap(),
        );
        let mut f = pole(c(0.0, 0.7));
        f.push(c(1.0, -0.4), 2, c(0.2, 0.3)).unwrap();
        let r = krein_baseline(&h0, &v, &f).unwrap();
        assert!(r.residual < 1e-8, "{:?}", r);
    }
}
