//! Exponential, outer and Blaschke representations of the perturbation
//! determinant in both half-planes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linop::AccumulativePair;
use crate::pertdet::{self, BoundaryData};
use crate::quad::{self, QuadConfig, Quadrature};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Finite Blaschke product over zeros in the lower half-plane,
/// normalized at `-i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    phases: Vec<Complex64>,
}

impl BlaschkeProduct {
    pub fn empty() -> Self {
        Self { zeros: Vec::new(), phases: Vec::new() }
    }

    /// Zeros with `Im >= -tol` contribute the constant 1 and are dropped;
    /// zeros above the axis are rejected.
    pub fn new(zeros: impl IntoIterator<Item = Complex64>, tol: f64) -> Result<Self> {
        let mut kept = Vec::new();
        for z in zeros {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::InvalidInput("non-finite Blaschke zero".into()));
            }
            if z.im > tol {
                return Err(Error::InvalidInput(format!("Blaschke zero {z} lies in the upper half-plane")));
            }
            if z.im < -tol {
                kept.push(z);
            }
        }
        let phases = kept.iter().map(|&z| normalizing_phase(z)).collect();
        Ok(Self { zeros: kept, phases })
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    /// `sum |Im z_k| / (1 + |z_k|^2)`.
    pub fn condition_sum(&self) -> f64 {
        self.zeros.iter().map(|z| z.im.abs() / (1.0 + z.norm_sqr())).sum()
    }

    /// Product of the phases.
    pub fn phase_product(&self) -> Complex64 {
        self.phases.iter().product()
    }
}

/// Unimodular `c` with `c (-i - z) / (-i - conj z) >= 0`.
fn normalizing_phase(z: Complex64) -> Complex64 {
    let w = (-I - z) / (-I - z.conj());
    if w.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        w.conj() / w.norm()
    }
}

/// `prod phase_k (z - z_k) / (z - conj z_k)`.
pub fn blaschke_eval(b: &BlaschkeProduct, z: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (zk, ph) in b.zeros.iter().zip(&b.phases) {
        let den = z - zk.conj();
        if den.norm() <= 1e-14 * (1.0 + zk.norm()) {
            return Err(Error::PoleHit { z });
        }
        acc *= ph * (z - zk) / den;
    }
    Ok(acc)
}

/// A log-modulus on the real line that quadrature can sample anywhere.
pub trait BoundaryLog: Sync {
    fn value(&self, x: f64) -> Result<f64>;

    /// Breakpoints of the quadrature on `[-reach, reach]`.
    fn breakpoints(&self, reach: f64) -> Vec<f64>;

    /// Half-width beyond which the tail model `c / x^2` is used.
    fn reach(&self) -> f64;

    /// `c` in the tail model.
    fn tail_coefficient(&self) -> f64;

    /// Natural length scale for tolerances and ladders.
    fn scale(&self) -> f64;
}

impl BoundaryLog for BoundaryData {
    fn value(&self, x: f64) -> Result<f64> {
        self.sampler().zeta(x)
    }

    fn breakpoints(&self, reach: f64) -> Vec<f64> {
        self.sampler().breakpoints(reach)
    }

    fn reach(&self) -> f64 {
        self.extent().max(1e5 * self.sampler().norm_scale())
    }

    fn tail_coefficient(&self) -> f64 {
        self.tail_coeffs().0
    }

    fn scale(&self) -> f64 {
        self.sampler().spectral_scale()
    }
}

/// A closure-backed log-modulus with declared features and tail.
pub struct FnBoundaryLog<F> {
    pub f: F,
    pub features: Vec<f64>,
    pub reach: f64,
    pub tail: f64,
    pub scale: f64,
}

impl<F: Fn(f64) -> Result<f64> + Sync> BoundaryLog for FnBoundaryLog<F> {
    fn value(&self, x: f64) -> Result<f64> {
        (self.f)(x)
    }

    fn breakpoints(&self, reach: f64) -> Vec<f64> {
        let mut b = quad::ladder_breaks(&self.features, 0.25 * self.scale, reach);
        b.retain(|x| x.abs() <= reach);
        b
    }

    fn reach(&self) -> f64 {
        self.reach
    }

    fn tail_coefficient(&self) -> f64 {
        self.tail
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

fn kernel_breaks(log: &dyn BoundaryLog, z: Complex64, reach: f64) -> Vec<f64> {
    let mut b = log.breakpoints(reach);
    let h = z.im.abs();
    if z.re.abs() < reach {
        b.push(z.re);
        let mut r = h;
        while r < 4.0 * log.scale() {
            for x in [z.re - r, z.re + r] {
                if x.abs() < reach {
                    b.push(x);
                }
            }
            r *= 4.0;
        }
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
    b
}

/// `int u(lambda) / (lambda - z) d lambda` over the line.
fn cauchy_integral(log: &dyn BoundaryLog, z: Complex64) -> Result<Quadrature> {
    let reach = log.reach().max(100.0 * z.norm());
    let breaks = kernel_breaks(log, z, reach);
    let cfg = QuadConfig::with_tol(1e-12 * log.scale().max(1e-300), 1e-10);
    let mut q = quad::try_integrate_pieces(
        |x| Ok(log.value(x)? / (Complex64::new(x, 0.0) - z)),
        &quad::pieces_between(&breaks),
        cfg,
    )?;
    // c / x^2 against 1/(x - z) beyond +-reach; the odd leading part cancels
    q.value += 2.0 * log.tail_coefficient() * z / (3.0 * reach.powi(3));
    Ok(q)
}

/// Value with a relative error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepValue {
    pub z: Complex64,
    pub value: Complex64,
    pub rel_err: f64,
}

fn check_height(data: &BoundaryData, z: Complex64, upper: bool) -> Result<()> {
    let min = 0.05 * data.sampler().spectral_scale();
    let ok = if upper { z.im > min } else { -z.im > min };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{z} is within {min:e} of the real axis or in the wrong half-plane")))
    }
}

/// `exp((1/(pi i)) int zeta(lambda) / (lambda - z) d lambda)` for `z` in the
/// upper half-plane.
pub fn cauchy_exp_rep(data: &BoundaryData, z: Complex64) -> Result<RepValue> {
    check_height(data, z, true)?;
    let q = cauchy_integral(data, z)?;
    Ok(RepValue { z, value: (q.value / (PI * I)).exp(), rel_err: q.error / PI })
}

/// `exp(-(1/(pi i)) int zeta(lambda) / (lambda - z) d lambda)` for `z` in the
/// lower half-plane; equals `conj det_{H/H0}(conj z)`.
pub fn cauchy_exp_rep_lower(data: &BoundaryData, z: Complex64) -> Result<RepValue> {
    check_height(data, z, false)?;
    let q = cauchy_integral(data, z)?;
    Ok(RepValue { z, value: (-q.value / (PI * I)).exp(), rel_err: q.error / PI })
}

/// `exp((1/(pi i)) int (1/(lambda - z) - lambda/(1 + lambda^2)) log|F| d lambda)`.
pub fn outer_factor(log_modulus: &dyn BoundaryLog, z: Complex64) -> Result<RepValue> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidInput(format!("outer factor needs Im z > 0, got {z}")));
    }
    check_weighted_l1(log_modulus)?;
    let q = cauchy_integral(log_modulus, z)?;
    let c = poisson_shift(log_modulus)?;
    Ok(RepValue { z, value: ((q.value - c.value) / (PI * I)).exp(), rel_err: (q.error + c.error) / PI })
}

/// The outer factor divided by its unimodular value at `i infinity`, so
/// that it tends to 1 there.
pub fn normalized_outer_factor(log_modulus: &dyn BoundaryLog, z: Complex64) -> Result<RepValue> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidInput(format!("outer factor needs Im z > 0, got {z}")));
    }
    check_weighted_l1(log_modulus)?;
    let q = cauchy_integral(log_modulus, z)?;
    Ok(RepValue { z, value: (q.value / (PI * I)).exp(), rel_err: q.error / PI })
}

/// `int lambda / (1 + lambda^2) log|F| d lambda`; the tail model is odd
/// against this kernel and contributes nothing.
fn poisson_shift(log: &dyn BoundaryLog) -> Result<Quadrature> {
    let reach = log.reach();
    let breaks = kernel_breaks(log, I, reach);
    let cfg = QuadConfig::with_tol(1e-12 * log.scale().max(1e-300), 1e-10);
    quad::try_integrate_pieces(
        |x| Ok(Complex64::new(log.value(x)? * x / (1.0 + x * x), 0.0)),
        &quad::pieces_between(&breaks),
        cfg,
    )
}

/// Numerical check that `log|F| / (1 + lambda^2)` is integrable: the mass
/// of the outer half of the represented range must be a small fraction of
/// the whole.
fn check_weighted_l1(log: &dyn BoundaryLog) -> Result<()> {
    let reach = log.reach();
    let breaks = log.breakpoints(reach);
    let cfg = QuadConfig::with_tol(1e-10, 1e-6);
    let abs = |x: f64| Ok(Complex64::new(log.value(x)?.abs() / (1.0 + x * x), 0.0));
    let total = quad::try_integrate_pieces(abs, &quad::pieces_between(&breaks), cfg)?.value.re;
    let half = 0.5 * reach;
    let outer = quad::try_integrate_pieces(
        abs,
        &[quad::Piece::Plain(-reach, -half), quad::Piece::Plain(half, reach)],
        cfg,
    )?
    .value
    .re;
    if !total.is_finite() || outer > 1e-3 * total.max(1e-300) + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "log-modulus does not look integrable against 1/(1+x^2): outer mass {outer:e} of {total:e}"
        )));
    }
    Ok(())
}

/// Lower half-plane representation
/// `det_{H/H0}(z) = e^{i gamma} B(z) exp(-(1/(pi i)) int zeta/(lambda - z))`
/// with the linear term and the singular measure both zero.
#[derive(Debug, Clone)]
pub struct LhpRepresentation {
    pub gamma: f64,
    pub a: f64,
    pub blaschke: BlaschkeProduct,
    pub mu_mass: f64,
    pub zeta_ref: BoundaryData,
    /// `(probe, relative residual)` for every fitted probe.
    pub residuals: Vec<(Complex64, f64)>,
}

impl LhpRepresentation {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let b = blaschke_eval(&self.blaschke, z)?;
        let e = cauchy_exp_rep_lower(&self.zeta_ref, z)?.value;
        Ok(Complex64::from_polar(1.0, self.gamma) * b * e)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.1))
    }
}

/// Relative residual above which a lower half-plane fit is rejected.
pub const LHP_TOLERANCE: f64 = 1e-3;

/// Builds the Blaschke product from the eigenvalues of `H` in the lower
/// half-plane, fixes `gamma` at the probe farthest from the axis, and
/// checks the representation at every probe.
pub fn fit_lhp_representation(
    pair: &AccumulativePair,
    data: &BoundaryData,
    probes: &[Complex64],
) -> Result<LhpRepresentation> {
    if probes.is_empty() {
        return Err(Error::InvalidInput("at least one probe is required".into()));
    }
    let spectrum = pair.spectrum();
    let blaschke = BlaschkeProduct::new(spectrum.lower(), 0.0)?;
    let sep = 1e-8 * pair.norm_scale().max(1.0);
    for &z in probes {
        if spectrum.eigenvalues.iter().any(|&mu| (z - mu).norm() < sep || (z - mu.conj()).norm() < sep) {
            return Err(Error::InvalidInput(format!("probe {z} is on spec(H) or its mirror")));
        }
    }
    let mut rows = Vec::with_capacity(probes.len());
    for &z in probes {
        let direct = pertdet::pert_det(pair, z)?.value;
        let b = blaschke_eval(&blaschke, z)?;
        let e = cauchy_exp_rep_lower(data, z)?.value;
        rows.push((z, direct, b * e));
    }
    let anchor = rows
        .iter()
        .max_by(|a, b| a.0.im.abs().total_cmp(&b.0.im.abs()))
        .expect("non-empty probes");
    let gamma = (anchor.1 / anchor.2).arg();
    let rot = Complex64::from_polar(1.0, gamma);
    let residuals: Vec<(Complex64, f64)> =
        rows.iter().map(|(z, d, r)| (*z, (d - rot * r).norm() / d.norm().max(f64::MIN_POSITIVE))).collect();
    if let Some(&(z, residual)) = residuals.iter().find(|r| !(r.1 <= LHP_TOLERANCE)) {
        return Err(Error::RepresentationMismatch { z, residual });
    }
    Ok(LhpRepresentation { gamma, a: 0.0, blaschke, mu_mass: 0.0, zeta_ref: data.clone(), residuals })
}

/// `sup |log |det_{H/H*}(lambda)||` over the grid.
pub fn verify_inner_purity(pair: &AccumulativePair, grid: &[f64]) -> Result<f64> {
    let tol = 1e-6 * pair.spectral_scale();
    let real: Vec<f64> = pair.spectrum().real().collect();
    let mut worst = 0.0_f64;
    for &x in grid {
        if let Some(e) = real.iter().find(|e| (x - **e).abs() <= tol) {
            return Err(Error::GridTooClose { lambda: x, eigenvalue: *e, gap: tol });
        }
        let d = pertdet::pert_det_adjoint(pair, Complex64::new(x, 0.0))?;
        worst = worst.max(d.log_value.re.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pertdet::{boundary_values, EpsilonSchedule, GridSpec};
    use crate::random::seeded_pair;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rank_one_data(alpha: f64) -> (AccumulativePair, BoundaryData) {
        let pair = AccumulativePair::rank_one(alpha).unwrap();
        let grid = GridSpec { points: 400, ..GridSpec::default() }.build(&pair).unwrap();
        let data = boundary_values(&pair, &grid, &EpsilonSchedule::default()).unwrap();
        (pair, data)
    }

    #[test]
    fn single_zero_at_minus_i() {
        let b = BlaschkeProduct::new([c(0.0, -1.0)], 0.0).unwrap();
        assert_eq!(b.phases()[0], c(1.0, 0.0));
        let v = blaschke_eval(&b, c(0.0, -2.0)).unwrap();
        assert!((v - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(blaschke_eval(&b, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn empty_and_real_zeros_give_one() {
        let b = BlaschkeProduct::new([c(2.0, 0.0)], 1e-12).unwrap();
        assert!(b.zeros().is_empty());
        assert_eq!(blaschke_eval(&b, c(0.3, -0.2)).unwrap(), c(1.0, 0.0));
        assert_eq!(b.condition_sum(), 0.0);
    }

    #[test]
    fn normalization_is_nonnegative_at_minus_i() {
        let b = BlaschkeProduct::new([c(0.5, -0.3), c(-2.0, -4.0)], 0.0).unwrap();
        for (z, ph) in b.zeros().iter().zip(b.phases()) {
            let w = ph * (-I - z) / (-I - z.conj());
            assert!(w.im.abs() < 1e-15 && w.re >= 0.0);
            assert!((ph.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_one_upper_representation_at_i() {
        let (_, data) = rank_one_data(1.0);
        let v = cauchy_exp_rep(&data, c(0.0, 1.0)).unwrap();
        assert!((v.value - c(2.0, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn rank_one_outer_factor_ratio_is_one() {
        let (_, data) = rank_one_data(1.0);
        for z in [c(0.5, 1.0), c(-2.0, 0.3)] {
            let o = outer_factor(&data, z).unwrap().value;
            let e = cauchy_exp_rep(&data, z).unwrap().value;
            assert!((o / e - 1.0).norm() < 1e-4);
        }
    }

    #[test]
    fn zero_log_modulus_gives_one() {
        let f = FnBoundaryLog { f: |_| Ok(0.0), features: vec![0.0], reach: 1e4, tail: 0.0, scale: 1.0 };
        assert_eq!(outer_factor(&f, c(0.2, 0.7)).unwrap().value, c(1.0, 0.0));
    }

    #[test]
    fn herglotz_outer_function_is_reconstructed() {
        // 1 - i M(z), M(z) = sum w_j / (l_j - z): on the axis |1 - iM| = sqrt(1 + M^2)
        let l = [-1.0, 0.4, 2.0];
        let w = [0.3, 0.5, 0.2];
        let m = move |z: Complex64| -> Complex64 { l.iter().zip(&w).map(|(a, b)| *b / (Complex64::new(*a, 0.0) - z)).sum() };
        let log_mod = move |x: f64| -> Result<f64> {
            let mx: f64 = l.iter().zip(&w).map(|(a, b)| b / (a - x)).sum();
            Ok(0.5 * (1.0 + mx * mx).ln())
        };
        // 1 - iM(z) = 1 + i/z + O(z^-2), so log|F| ~ (sum w)^2 / (2 x^2)
        let f = FnBoundaryLog { f: log_mod, features: l.to_vec(), reach: 1e5, tail: 0.5, scale: 3.0 };
        for z in [c(0.0, 1.0), c(1.3, 0.5), c(-2.0, 2.0)] {
            let got = normalized_outer_factor(&f, z).unwrap().value;
            let want = 1.0 - I * m(z);
            assert!((got - want).norm() < 1e-4 * want.norm(), "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn rank_one_lower_representation() {
        let (pair, data) = rank_one_data(1.0);
        let rep = fit_lhp_representation(&pair, &data, &[c(0.0, -2.0), c(0.7, -0.5)]).unwrap();
        assert!(rep.max_residual() < 1e-6);
        assert!((rep.eval(c(0.0, -2.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-6);
        assert_eq!(rep.a, 0.0);
        assert_eq!(rep.mu_mass, 0.0);
    }

    #[test]
    fn random_lower_representation_and_purity() {
        let pair = seeded_pair(4, 17).unwrap();
        let grid = GridSpec { points: 800, ..GridSpec::default() }.build(&pair).unwrap();
        let data = boundary_values(&pair, &grid, &EpsilonSchedule::default()).unwrap();
        let probes: Vec<Complex64> = (0..10).map(|k| Complex64::from_polar(1.0 + k as f64 * 0.5, -0.3 - 0.25 * k as f64)).collect();
        let rep = fit_lhp_representation(&pair, &data, &probes).unwrap();
        assert!(rep.max_residual() < 1e-3);
        // gamma undoes the phase normalization
        let expected = Complex64::from_polar(1.0, rep.gamma) * rep.blaschke.phase_product();
        assert!((expected - 1.0).norm() < 1e-6);
        assert!(verify_inner_purity(&pair, &grid).unwrap() < 1e-8);
    }

    #[test]
    fn unperturbed_representation_is_trivial() {
        let pair = seeded_pair(3, 2).unwrap().with_v(crate::linop::PsdMatrix::zeros(3)).unwrap();
        let grid = GridSpec { points: 300, ..GridSpec::default() }.build(&pair).unwrap();
        let data = boundary_values(&pair, &grid, &EpsilonSchedule::default()).unwrap();
        let rep = fit_lhp_representation(&pair, &data, &[c(0.1, -1.0)]).unwrap();
        assert!(rep.gamma.abs() < 1e-12);
        assert!(rep.blaschke.zeros().is_empty());
        assert!(verify_inner_purity(&pair, &grid).unwrap() < 1e-12);
    }
}
