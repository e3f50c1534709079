//! Boundary values `zeta + i pi xi = log det_{H/H0}(lambda + i0)` on the real
//! axis, by Richardson extrapolation in `epsilon` of branch-continuous
//! logarithms at `lambda + i epsilon`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::evaluator::{evaluator, DetEvaluator, DEFAULT_EVALUATOR};
use super::path::{continue_log, principal};
use crate::error::{Error, Result};
use crate::linop::AccumulativePair;
use crate::quad::{self, QuadConfig};

/// Decreasing geometric sequence of offsets `epsilon_1 > ... > epsilon_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct EpsilonSchedule {
    values: Vec<f64>,
    order: usize,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    values: Vec<f64>,
    extrapolation_order: usize,
}

impl TryFrom<ScheduleRepr> for EpsilonSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        Self::new(r.values, r.extrapolation_order)
    }
}

impl From<EpsilonSchedule> for ScheduleRepr {
    fn from(s: EpsilonSchedule) -> Self {
        Self { values: s.values, extrapolation_order: s.order }
    }
}

impl EpsilonSchedule {
    pub fn new(values: Vec<f64>, order: usize) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidInput("epsilon schedule needs at least 3 values".into()));
        }
        if order == 0 || order + 1 > values.len() {
            return Err(Error::InvalidInput(format!(
                "extrapolation order {order} needs between 1 and {} for {} values",
                values.len() - 1,
                values.len()
            )));
        }
        if values.iter().any(|e| !(e.is_finite() && *e > 0.0)) || values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("epsilon values must be positive and strictly decreasing".into()));
        }
        let ratio = values[1] / values[0];
        if values.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidInput("epsilon values must be geometric".into()));
        }
        Ok(Self { values, order })
    }

    /// `first, first r, first r^2, ...` down to `last`.
    pub fn geometric(first: f64, last: f64, ratio: f64, order: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0 && first > last && last > 0.0) {
            return Err(Error::InvalidInput("geometric schedule needs first > last > 0 and 0 < ratio < 1".into()));
        }
        let steps = ((last / first).ln() / ratio.ln()).round() as i32;
        Self::new((0..=steps).map(|k| first * ratio.powi(k)).collect(), order)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().expect("non-empty schedule")
    }

    /// Tail of the schedule actually evaluated: `order + 3` values when
    /// available, enough for three successive extrapolants.
    pub fn window(&self) -> &[f64] {
        let n = self.values.len();
        &self.values[n.saturating_sub(self.order + 3)..]
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self::geometric(1e-2, 1e-5, 10f64.powf(-0.5), 2).expect("valid default schedule")
    }
}

/// Polynomial interpolation of `(x_i, y_i)` evaluated at `x = 0`.
fn neville_at_zero(x: &[f64], y: &[Complex64]) -> Complex64 {
    let mut p = y.to_vec();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

/// Limit of `g(eps)` as `eps -> 0` with a componentwise error estimate.
/// `noise` is the expected absolute rounding error of each `g` value.
///
/// Extrapolants of the given order are formed on every window of
/// consecutive offsets; the last one is returned, its distance to the
/// previous one is the estimate, and growth of that distance along the
/// windows means the offsets are not yet in the asymptotic regime.
pub fn richardson(eps: &[f64], g: &[Complex64], order: usize, noise: f64, lambda: f64) -> Result<(Complex64, [f64; 2])> {
    let n = eps.len();
    let m = (order + 1).min(n);
    let estimates: Vec<Complex64> = (0..=n - m).map(|s| neville_at_zero(&eps[s..s + m], &g[s..s + m])).collect();
    let k = estimates.len();
    let best = estimates[k - 1];
    if k == 1 {
        let alt = if m > 1 { neville_at_zero(&eps[n - m + 1..], &g[n - m + 1..]) } else { best };
        let diff = best - alt;
        return Ok((best, [diff.re.abs(), diff.im.abs()]));
    }
    let floor = 1e-9 * (1.0 + best.norm()) + 10.0 * noise;
    if k >= 3 {
        let d1 = (estimates[k - 1] - estimates[k - 2]).norm();
        let d0 = (estimates[k - 2] - estimates[k - 3]).norm();
        if d1 > 4.0 * d0 + floor {
            return Err(Error::ExtrapolationDiverged { lambda });
        }
    }
    let diff = best - estimates[k - 2];
    Ok((best, [diff.re.abs(), diff.im.abs()]))
}

/// Evaluates boundary values at arbitrary real points.
///
/// Holds the branch anchor `iY` and everything needed to reproduce the
/// grid computation off the grid.
pub struct BoundarySampler {
    evaluator: Arc<dyn DetEvaluator>,
    schedule: EpsilonSchedule,
    singular: Vec<Complex64>,
    h_eigenvalues: Vec<Complex64>,
    h0_eigenvalues: Vec<f64>,
    anchor: Complex64,
    anchor_log: Complex64,
    norm_scale: f64,
    spectral_scale: f64,
    trace_v: f64,
    trace_v2: f64,
}

impl fmt::Debug for BoundarySampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundarySampler")
            .field("evaluator", &self.evaluator.name())
            .field("anchor", &self.anchor)
            .field("schedule", &self.schedule)
            .finish()
    }
}

/// Log-determinant boundary value with per-component error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub lambda: f64,
    pub log: Complex64,
    pub err_zeta: f64,
    pub err_xi: f64,
}

impl BoundaryPoint {
    pub fn zeta(&self) -> f64 {
        self.log.re
    }

    pub fn xi(&self) -> f64 {
        self.log.im / PI
    }
}

impl BoundarySampler {
    pub fn new(pair: &AccumulativePair, schedule: EpsilonSchedule, evaluator: Arc<dyn DetEvaluator>) -> Result<Self> {
        let h_eigenvalues = pair.spectrum().eigenvalues.clone();
        let h0_eigenvalues = pair.h0_eigenvalues().to_vec();
        let mut singular: Vec<Complex64> = h0_eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        singular.extend(h_eigenvalues.iter().copied());
        let norm_scale = pair.norm_scale();
        let anchor = Complex64::new(0.0, 10.0 * norm_scale.max(1e-3));
        let raw = evaluator.log_det(anchor)?;
        // inside the far field the evaluator already returns the branch vanishing at infinity
        let anchor_log = if anchor.norm() >= evaluator.far_radius() { raw } else { principal(raw) };
        let v = pair.v().eigenvalues();
        Ok(Self {
            evaluator,
            schedule,
            singular,
            h_eigenvalues,
            h0_eigenvalues,
            anchor,
            anchor_log,
            norm_scale,
            spectral_scale: pair.spectral_scale(),
            trace_v: pair.trace_v(),
            trace_v2: v.iter().map(|a| a * a).sum(),
        })
    }

    pub fn evaluator(&self) -> &dyn DetEvaluator {
        self.evaluator.as_ref()
    }

    pub fn schedule(&self) -> &EpsilonSchedule {
        &self.schedule
    }

    pub fn anchor(&self) -> (Complex64, Complex64) {
        (self.anchor, self.anchor_log)
    }

    pub fn norm_scale(&self) -> f64 {
        self.norm_scale
    }

    pub fn spectral_scale(&self) -> f64 {
        self.spectral_scale
    }

    pub fn trace_v(&self) -> f64 {
        self.trace_v
    }

    /// `tr V^2`, twice the leading coefficient of the `zeta` tail.
    pub fn trace_v2(&self) -> f64 {
        self.trace_v2
    }

    pub fn h_eigenvalues(&self) -> &[Complex64] {
        &self.h_eigenvalues
    }

    pub fn h0_eigenvalues(&self) -> &[f64] {
        &self.h0_eigenvalues
    }

    pub fn far_radius(&self) -> f64 {
        self.evaluator.far_radius()
    }

    fn distance_to_spectra(&self, lambda: f64) -> f64 {
        self.singular.iter().map(|s| (s - lambda).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Rounding error of one factorized log-determinant near `lambda`; it
    /// grows like the inverse distance to the spectra.
    fn rounding_noise(&self, lambda: f64) -> f64 {
        let n = self.h0_eigenvalues.len() as f64;
        64.0 * n * f64::EPSILON * (self.norm_scale + lambda.abs()) / self.distance_to_spectra(lambda).max(f64::MIN_POSITIVE)
    }

    /// Evaluated offsets at `lambda`, contracted near the spectra so the
    /// largest stays a tenth of the distance.
    pub fn local_epsilons(&self, lambda: f64) -> Vec<f64> {
        let d = self.distance_to_spectra(lambda);
        let w = self.schedule.window();
        let f = (d / (10.0 * self.schedule.values[0])).min(1.0);
        w.iter().map(|e| e * f).collect()
    }

    /// Real points where boundary functions have log singularities or
    /// sharp features, with the feature width (0 for singularities).
    pub fn features(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.h0_eigenvalues.iter().map(|&x| (x, 0.0)).collect();
        for mu in &self.h_eigenvalues {
            if mu.im.abs() < self.spectral_scale {
                out.push((mu.re, mu.im.abs()));
            }
        }
        out
    }

    /// Quadrature breakpoints on `[-reach, reach]`: features, ladders
    /// resolving narrow features, and a global geometric ladder.
    pub fn breakpoints(&self, reach: f64) -> Vec<f64> {
        let s = self.spectral_scale;
        let mut pts = Vec::new();
        for (x, w) in self.features() {
            pts.push(x);
            let mut r = w.max(1e-6 * s);
            while r < s {
                pts.push(x - r);
                pts.push(x + r);
                r *= 4.0;
            }
        }
        let mut all = quad::ladder_breaks(&pts, 0.25 * s, reach);
        all.retain(|x| x.abs() <= reach);
        all
    }

    fn log_at(&self, z: Complex64) -> Result<Complex64> {
        self.evaluator.log_det(z)
    }

    /// Moves `lambda` out to distance `1e-10` times the spectral scale from
    /// any eigenvalue closer than that. Quadrature nodes crowd endpoints
    /// that sit on the spectrum; their weights make the shift negligible.
    fn clear_of_spectra(&self, lambda: f64) -> f64 {
        let delta = 1e-10 * self.spectral_scale;
        match self.singular.iter().find(|s| (**s - lambda).norm() < delta) {
            Some(s) if lambda >= s.re => s.re + delta,
            Some(s) => s.re - delta,
            None => lambda,
        }
    }

    /// Boundary value at one real point, branch continued from the anchor
    /// along a straight path and then down the vertical line.
    pub fn point(&self, lambda: f64) -> Result<BoundaryPoint> {
        let lambda = self.clear_of_spectra(lambda);
        if lambda.abs() >= self.far_radius() {
            let log = self.log_at(Complex64::new(lambda, 0.0))?;
            return Ok(BoundaryPoint { lambda, log, err_zeta: 0.0, err_xi: 0.0 });
        }
        let eps = self.local_epsilons(lambda);
        let mut path = Vec::with_capacity(eps.len() + 1);
        path.push(self.anchor);
        path.extend(eps.iter().map(|&e| Complex64::new(lambda, e)));
        let logs = continue_log(|z| self.log_at(z), &path, self.anchor_log, &self.singular)?;
        let (log, err) = richardson(&eps, &logs[1..], self.schedule.order, self.rounding_noise(lambda), lambda)?;
        Ok(BoundaryPoint { lambda, log, err_zeta: err[0], err_xi: err[1] })
    }

    /// `zeta(lambda)` alone; needs no branch tracking.
    pub fn zeta(&self, lambda: f64) -> Result<f64> {
        let lambda = self.clear_of_spectra(lambda);
        if lambda.abs() >= self.far_radius() {
            return Ok(self.log_at(Complex64::new(lambda, 0.0))?.re);
        }
        let eps = self.local_epsilons(lambda);
        let g = eps
            .iter()
            .map(|&e| self.log_at(Complex64::new(lambda, e)).map(|l| Complex64::new(l.re, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(richardson(&eps, &g, self.schedule.order, self.rounding_noise(lambda), lambda)?.0.re)
    }

    pub fn xi(&self, lambda: f64) -> Result<f64> {
        Ok(self.point(lambda)?.xi())
    }

    /// `log det(z)` for `Im z > 0` on the branch the boundary values use.
    pub fn log_det_upper(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 {
            return Err(Error::InvalidInput(format!("{z} is not in the upper half-plane")));
        }
        if z.norm() >= self.far_radius() {
            return self.log_at(z);
        }
        let logs = continue_log(|w| self.log_at(w), &[self.anchor, z], self.anchor_log, &self.singular)?;
        Ok(logs[1])
    }

    /// Boundary values at increasing points: one branch-continuous sweep
    /// per offset in the schedule window, run in parallel, then
    /// extrapolation at every point. No exclusion zone is enforced.
    pub fn sample_sorted(&self, points: &[f64]) -> Result<Vec<BoundaryPoint>> {
        if points.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidInput("sample points must be sorted".into()));
        }
        let pts: Vec<f64> = points.iter().map(|&x| self.clear_of_spectra(x)).collect();
        let eps: Vec<Vec<f64>> = pts.iter().map(|&x| self.local_epsilons(x)).collect();
        let window = self.schedule.window().len();
        let sweeps = (0..window).into_par_iter().map(|k| self.sweep(&pts, &eps, k)).collect::<Result<Vec<_>>>()?;
        let far = self.far_radius();
        (0..pts.len())
            .into_par_iter()
            .map(|i| {
                let lambda = pts[i];
                if lambda.abs() >= far {
                    return Ok(BoundaryPoint { lambda, log: sweeps[0][i], err_zeta: 0.0, err_xi: 0.0 });
                }
                let g: Vec<Complex64> = sweeps.iter().map(|s| s[i]).collect();
                let (log, err) = richardson(&eps[i], &g, self.schedule.order, self.rounding_noise(lambda), lambda)?;
                Ok(BoundaryPoint { lambda, log, err_zeta: err[0], err_xi: err[1] })
            })
            .collect()
    }

    /// Horizontal sweep at the `k`-th offset of every grid point.
    fn sweep(&self, grid: &[f64], eps: &[Vec<f64>], k: usize) -> Result<Vec<Complex64>> {
        let far = self.far_radius();
        let near: Vec<usize> = (0..grid.len()).filter(|&i| grid[i].abs() < far).collect();
        let mut path = Vec::with_capacity(near.len() + 1);
        let mut slots = Vec::with_capacity(near.len());
        path.push(self.anchor);
        for &i in &near {
            let z = Complex64::new(grid[i], eps[i][k]);
            let prev = path[path.len() - 1];
            // hop over singularities that sit below a low horizontal step
            let len = (z - prev).norm();
            let (lo, hi) = if prev.re <= z.re { (prev.re, z.re) } else { (z.re, prev.re) };
            if self.singular.iter().any(|s| s.re > lo && s.re < hi && s.im.abs() < len) {
                path.push(Complex64::new(0.5 * (lo + hi), prev.im.max(z.im) + len));
            }
            slots.push(path.len());
            path.push(z);
        }
        let logs = continue_log(|z| self.log_at(z), &path, self.anchor_log, &self.singular)?;
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (&slot, &i) in slots.iter().zip(&near) {
            out[i] = logs[slot];
        }
        for (i, x) in grid.iter().enumerate() {
            if x.abs() >= far {
                out[i] = self.log_at(Complex64::new(*x, 0.0))?;
            }
        }
        Ok(out)
    }
}

/// Grid samples of `zeta` and `xi` together with the sampler that produced them.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    grid: Vec<f64>,
    zeta: Vec<f64>,
    xi: Vec<f64>,
    err_zeta: Vec<f64>,
    err_xi: Vec<f64>,
    spec_h0: Vec<f64>,
    tail_coeffs: (f64, f64),
    sampler: Arc<BoundarySampler>,
}

impl BoundaryData {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn err_zeta(&self) -> &[f64] {
        &self.err_zeta
    }

    pub fn err_xi(&self) -> &[f64] {
        &self.err_xi
    }

    pub fn spec_h0(&self) -> &[f64] {
        &self.spec_h0
    }

    /// `(c_zeta, c_xi)` in `zeta ~ c_zeta / lambda^2`, `xi ~ c_xi / lambda`.
    pub fn tail_coeffs(&self) -> (f64, f64) {
        self.tail_coeffs
    }

    pub fn schedule(&self) -> &EpsilonSchedule {
        &self.sampler.schedule
    }

    pub fn sampler(&self) -> &BoundarySampler {
        &self.sampler
    }

    pub fn sampler_arc(&self) -> Arc<BoundarySampler> {
        self.sampler.clone()
    }

    /// `max |lambda|` over the grid.
    pub fn extent(&self) -> f64 {
        self.grid.first().map_or(0.0, |a| a.abs()).max(self.grid.last().map_or(0.0, |b| b.abs()))
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `1e-3` times the spectral scale of the pair.
pub fn gap_tol(pair: &AccumulativePair) -> f64 {
    1e-3 * pair.spectral_scale()
}

fn validate_grid(pair: &AccumulativePair, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be finite and strictly increasing".into()));
    }
    let gap = gap_tol(pair);
    for &lambda in grid {
        for &e in pair.h0_eigenvalues() {
            if (lambda - e).abs() <= gap {
                return Err(Error::GridTooClose { lambda, eigenvalue: e, gap });
            }
        }
    }
    Ok(())
}

/// Least-squares fit of `zeta = c / lambda^2 + d / lambda^4` over the two
/// outermost octaves of the grid; returns `c`.
fn fit_zeta_tail(grid: &[f64], zeta: &[f64], fallback: f64) -> f64 {
    let extent = grid.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut count = 0;
    for (x, z) in grid.iter().zip(zeta) {
        if x.abs() >= 0.25 * extent {
            let u = 1.0 / (x * x);
            let (p, q) = (u, u * u);
            s11 += p * p;
            s12 += p * q;
            s22 += q * q;
            b1 += p * z;
            b2 += q * z;
            count += 1;
        }
    }
    let det = s11 * s22 - s12 * s12;
    if count < 3 || !(det.abs() > 1e-300) {
        return fallback;
    }
    (b1 * s22 - b2 * s12) / det
}

/// Boundary values with the default evaluator.
pub fn boundary_values(pair: &AccumulativePair, grid: &[f64], schedule: &EpsilonSchedule) -> Result<BoundaryData> {
    boundary_values_with(pair, grid, schedule, evaluator(DEFAULT_EVALUATOR, pair)?)
}

/// Boundary values on `grid`.
///
/// For each offset in the schedule window, one branch-continuous sweep
/// runs from the anchor along the grid; the sweeps are independent and run
/// in parallel, then every grid point is extrapolated to `epsilon = 0`.
pub fn boundary_values_with(
    pair: &AccumulativePair,
    grid: &[f64],
    schedule: &EpsilonSchedule,
    evaluator: Arc<dyn DetEvaluator>,
) -> Result<BoundaryData> {
    validate_grid(pair, grid)?;
    let sampler = BoundarySampler::new(pair, schedule.clone(), evaluator)?;
    let points = sampler.sample_sorted(grid)?;
    let zeta: Vec<f64> = points.iter().map(BoundaryPoint::zeta).collect();
    let xi: Vec<f64> = points.iter().map(BoundaryPoint::xi).collect();
    let err_zeta: Vec<f64> = points.iter().map(|p| p.err_zeta).collect();
    let err_xi: Vec<f64> = points.iter().map(|p| p.err_xi / PI).collect();
    let c_zeta = fit_zeta_tail(grid, &zeta, 0.5 * sampler.trace_v2);
    let c_xi = sampler.trace_v / PI;
    Ok(BoundaryData {
        grid: grid.to_vec(),
        zeta,
        xi,
        err_zeta,
        err_xi,
        spec_h0: pair.h0_eigenvalues().to_vec(),
        tail_coeffs: (c_zeta, c_xi),
        sampler: Arc::new(sampler),
    })
}

/// `int zeta` over the line with its error estimate.
///
/// Quadrature covers `[-L, L]`, `L = max(grid extent, 1e5 (||H0|| + ||V||))`,
/// split at the spectra; the rest is the tail model `2 c_zeta / L`.
pub fn zeta_norm(data: &BoundaryData) -> Result<(f64, f64)> {
    let s = data.sampler();
    if s.trace_v == 0.0 {
        return Ok((0.0, 0.0));
    }
    let reach = data.extent().max(1e5 * s.norm_scale);
    let breaks = s.breakpoints(reach);
    let cfg = QuadConfig::with_tol(1e-11 * s.trace_v.max(1e-300), 1e-10);
    let q = quad::try_integrate_pieces(|x| s.zeta(x).map(|v| Complex64::new(v, 0.0)), &quad::pieces_between(&breaks), cfg)?;
    let (c_zeta, _) = data.tail_coeffs();
    Ok((q.value.re + 2.0 * c_zeta / reach, q.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_matches_design() {
        let s = EpsilonSchedule::default();
        assert_eq!(s.values().len(), 7);
        assert!((s.values()[0] - 1e-2).abs() < 1e-18);
        assert!((s.smallest() - 1e-5).abs() < 1e-17);
        assert_eq!(s.order(), 2);
        assert_eq!(s.window().len(), 5);
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsilonSchedule::new(vec![1e-2, 1e-3], 1).is_err());
        assert!(EpsilonSchedule::new(vec![1e-2, 1e-3, 2e-4], 1).is_err());
        assert!(EpsilonSchedule::new(vec![1e-2, 1e-3, 1e-4], 3).is_err());
        assert!(EpsilonSchedule::new(vec![1e-2, 1e-3, 1e-4], 2).is_ok());
    }

    #[test]
    fn richardson_removes_polynomial_terms() {
        let eps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let g: Vec<Complex64> = eps.iter().map(|e| Complex64::new(1.0 + 3.0 * e - 7.0 * e * e, -2.0 * e)).collect();
        let (v, err) = richardson(&eps, &g, 2, 0.0, 0.0).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!(err[0] < 1e-12 && err[1] < 1e-12);
    }

    #[test]
    fn richardson_flags_growth() {
        let eps = [1e-2, 1e-3, 1e-4, 1e-5];
        let g: Vec<Complex64> = [0.0, 1e-6, 1e-3, 1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        assert!(matches!(richardson(&eps, &g, 1, 0.0, 0.5), Err(Error::ExtrapolationDiverged { .. })));
    }

    #[test]
    fn tail_fit_recovers_leading_coefficient() {
        let grid: Vec<f64> = (0..200).map(|k| 10.0 + k as f64 * 0.2).collect();
        let zeta: Vec<f64> = grid.iter().map(|x| 0.5 * (1.0 + 1.0 / (x * x)).ln()).collect();
        assert!((fit_zeta_tail(&grid, &zeta, 0.0) - 0.5).abs() < 1e-4);
    }

    fn spectral_oracle(pair: &AccumulativePair, lambda: f64) -> Complex64 {
        // principal logs of the factors are continuous in the upper half-plane
        let z = Complex64::new(lambda, 1e-200);
        let mut acc = Complex64::new(0.0, 0.0);
        for (mu, l) in pair.spectrum().eigenvalues.iter().zip(pair.h0_eigenvalues()) {
            acc += (mu - z).ln() - (Complex64::new(*l, 0.0) - z).ln();
        }
        acc
    }

    #[test]
    fn rank_one_closed_forms_at_one() {
        let pair = AccumulativePair::rank_one(1.0).unwrap();
        let data = boundary_values(&pair, &[-2.0, 1.0, 3.0], &EpsilonSchedule::default()).unwrap();
        assert!((data.zeta()[1] - 0.5 * 2f64.ln()).abs() < 1e-10);
        assert!((data.xi()[1] - 0.25).abs() < 1e-10);
        assert!((data.xi()[0] - (-0.5f64).atan() / PI).abs() < 1e-10);
        assert!((data.tail_coeffs().1 - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn unperturbed_boundary_vanishes() {
        let pair = crate::random::seeded_pair(3, 5).unwrap().with_v(crate::linop::PsdMatrix::zeros(3)).unwrap();
        let grid: Vec<f64> = (0..50).map(|k| -3.05 + 0.123 * k as f64).collect();
        let data = boundary_values(&pair, &grid, &EpsilonSchedule::default()).unwrap();
        assert!(data.zeta().iter().chain(data.xi()).all(|v| v.abs() < 1e-12));
        assert_eq!(zeta_norm(&data).unwrap().0, 0.0);
    }

    #[test]
    fn random_pair_matches_spectral_oracle() {
        let pair = crate::random::seeded_pair(5, 21).unwrap();
        let grid = super::super::GridSpec { half_width: Some(8.0), points: 400, refinement_levels: 4 }.build(&pair).unwrap();
        for name in ["lu", "spectral"] {
            let data = boundary_values_with(&pair, &grid, &EpsilonSchedule::default(), evaluator(name, &pair).unwrap()).unwrap();
            for (i, &x) in data.grid().iter().enumerate() {
                let o = spectral_oracle(&pair, x);
                assert!((data.zeta()[i] - o.re).abs() < 1e-8, "{name} zeta at {x}");
                assert!((data.xi()[i] - o.im / PI).abs() < 1e-8, "{name} xi at {x}: {} vs {}", data.xi()[i], o.im / PI);
                assert!(data.zeta()[i] > -1e-8);
            }
            let p = data.sampler().point(0.123).unwrap();
            assert!((p.log - spectral_oracle(&pair, 0.123)).norm() < 1e-8);
        }
    }

    #[test]
    fn rank_one_norm_is_pi_alpha() {
        for alpha in [0.5, 1.0, 2.0] {
            let pair = AccumulativePair::rank_one(alpha).unwrap();
            let grid: Vec<f64> = (0..400).map(|k| -50.0 + 100.0 * (k as f64 + 0.5) / 400.0).collect();
            let data = boundary_values(&pair, &grid, &EpsilonSchedule::default()).unwrap();
            let (v, _) = zeta_norm(&data).unwrap();
            assert!((v - PI * alpha).abs() < 1e-6, "alpha {alpha}: {v}");
        }
    }

    #[test]
    fn grid_inside_exclusion_zone_is_rejected() {
        let pair = AccumulativePair::rank_one(1.0).unwrap();
        let r = boundary_values(&pair, &[-1.0, 1e-5, 1.0], &EpsilonSchedule::default());
        assert!(matches!(r, Err(Error::GridTooClose { .. })));
    }
}
