//! Level-set profiles, truncated (A-)integrals and reconstruction from one
//! boundary part.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use super::hilbert::{hilbert_transform, Normalization};
use super::{GridFunction, PointMap, Side, TailModel, Weight};
use crate::error::{Error, Result};
use crate::quad;

/// Relative agreement of the last three truncated integrals that counts as
/// convergence.
pub const A_INTEGRAL_RTOL: f64 = 1e-5;

/// Share of the largest `t m(t)` allowed at the ends of the truncation
/// range for the `o(1/t)` test.
const WEAK_ZERO_SHARE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakL1Profile {
    pub t: Vec<f64>,
    pub measure: Vec<f64>,
    pub t_times_measure: Vec<f64>,
}

impl WeakL1Profile {
    pub fn max_t_times_measure(&self) -> f64 {
        self.t_times_measure.iter().copied().fold(0.0, f64::max)
    }
}

/// Tail radius interval `[r1, r2]` beyond `edge` on which the tail lies
/// in `[lo, hi]` in modulus.
fn tail_band(tail: &TailModel, edge: f64, lo: f64, hi: f64) -> (f64, f64) {
    if tail.coeff.norm() == 0.0 {
        return (edge, edge);
    }
    let r2 = if lo > 0.0 { tail.level_radius(lo) } else { f64::INFINITY };
    let r1 = if hi.is_finite() { tail.level_radius(hi).max(edge) } else { edge };
    (r1, r2.max(r1))
}

fn edge_radius(f: &GridFunction, side: Side) -> f64 {
    match side {
        Side::Left => -f.lo(),
        Side::Right => f.hi(),
    }
}

/// Weighted measure of `{x : |f(x)| > t}` for each `t`.
///
/// On the grid `|f|` is interpolated linearly between samples; beyond it
/// the tail models decide, and a side without one must stay below `t` at
/// its grid end.
pub fn weak_l1_profile(f: &GridFunction, weight: Weight, t_values: &[f64]) -> Result<WeakL1Profile> {
    let grid = f.grid();
    let modulus: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let mut measure = Vec::with_capacity(t_values.len());
    for &t in t_values {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("level t = {t} must be positive")));
        }
        let mut m = 0.0;
        for i in 0..grid.len() - 1 {
            let (a, b, fa, fb) = (grid[i], grid[i + 1], modulus[i], modulus[i + 1]);
            m += match (fa > t, fb > t) {
                (true, true) => weight.measure(a, b),
                (false, false) => 0.0,
                (true, false) => weight.measure(a, a + (fa - t) / (fa - fb) * (b - a)),
                (false, true) => weight.measure(b - (fb - t) / (fb - fa) * (b - a), b),
            };
        }
        for side in [Side::Left, Side::Right] {
            let edge = edge_radius(f, side);
            match f.tail(side) {
                Some(tail) => {
                    let r = if tail.coeff.norm() > 0.0 { tail.level_radius(t) } else { 0.0 };
                    if r > edge {
                        m += weight.measure(edge, r);
                    }
                }
                None if f.edge_modulus(side) > t => return Err(Error::TailModelRequired { t }),
                None => {}
            }
        }
        measure.push(m);
    }
    let t_times_measure = t_values.iter().zip(&measure).map(|(t, m)| t * m).collect();
    Ok(WeakL1Profile { t: t_values.to_vec(), measure, t_times_measure })
}

/// Nested truncation levels `(lower, upper)`, lower decreasing and upper
/// increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct TruncationSchedule {
    levels: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for TruncationSchedule {
    type Error = Error;

    fn try_from(levels: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(levels)
    }
}

impl From<TruncationSchedule> for Vec<(f64, f64)> {
    fn from(s: TruncationSchedule) -> Self {
        s.levels
    }
}

impl TruncationSchedule {
    pub fn new(levels: Vec<(f64, f64)>) -> Result<Self> {
        if levels.len() < 3 {
            return Err(Error::InvalidInput("truncation schedule needs at least 3 levels".into()));
        }
        let ok = levels.iter().all(|&(b, bb)| b > 0.0 && bb.is_finite() && b < bb)
            && levels.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 > w[0].1);
        if !ok {
            return Err(Error::InvalidInput("truncation levels must be nested: 0 < lower < upper, widening".into()));
        }
        Ok(Self { levels })
    }

    /// `(10^-k, 10^k)` for `k = 1..=k_max`.
    pub fn decades(k_max: i32) -> Result<Self> {
        Self::new((1..=k_max).map(|k| (10f64.powi(-k), 10f64.powi(k))).collect())
    }

    pub fn levels(&self) -> &[(f64, f64)] {
        &self.levels
    }

    fn last(&self) -> (f64, f64) {
        self.levels[self.levels.len() - 1]
    }
}

impl Default for TruncationSchedule {
    fn default() -> Self {
        Self::decades(8).expect("valid default truncation schedule")
    }
}

/// Levels `t` spread two per decade over `[lo, hi]`.
fn level_grid(lo: f64, hi: f64) -> Vec<f64> {
    let decades = (hi / lo).log10().ceil().max(1.0) as usize;
    let n = 2 * decades;
    (0..=n).map(|k| lo * (hi / lo).powf(k as f64 / n as f64)).collect()
}

/// Checks `t m(t) -> 0` at both ends of the schedule's range: `t m(t)` at
/// the extreme levels must be at most a tenth of its largest value in
/// between.
pub fn check_weak_l1_zero(f: &GridFunction, weight: Weight, schedule: &TruncationSchedule) -> Result<WeakL1Profile> {
    let (lo, hi) = schedule.last();
    let profile = weak_l1_profile(f, weight, &level_grid(lo, hi))?;
    let peak = profile.max_t_times_measure();
    let n = profile.t.len();
    for (end, value) in [("small-t", profile.t_times_measure[0]), ("large-t", profile.t_times_measure[n - 1])] {
        if value > WEAK_ZERO_SHARE * peak && value > 0.0 {
            return Err(Error::NotWeakL1Zero { end, value });
        }
    }
    Ok(profile)
}

/// One truncated integral over `{lower <= |g| <= upper}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub lower: f64,
    pub upper: f64,
    pub partial: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AIntegralResult {
    pub value: Complex64,
    pub truncations: Vec<Truncation>,
    pub converged: bool,
    /// Largest change over the last two truncation steps.
    pub estimate: f64,
}

impl AIntegralResult {
    pub fn partials(&self) -> Vec<Complex64> {
        self.truncations.iter().map(|t| t.partial).collect()
    }
}

/// `int g w` over `{lo <= |g| <= hi}` and `int |g| w` over the same set.
fn truncated(g: &GridFunction, weight: Weight, lo: f64, hi: f64) -> Result<(Complex64, f64)> {
    let cells = &g.cells;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    let within = |m: f64| m >= lo && m <= hi;
    for (c, &(a, b)) in cells.bounds.iter().enumerate() {
        let (nodes, values) = (&cells.nodes[c], &cells.values[c]);
        let inside = values.iter().filter(|v| within(v.norm())).count();
        if inside == 10 {
            for k in 0..10 {
                let w = nodes[k].1 * weight.density(nodes[k].0);
                acc += values[k] * w;
                abs += values[k].norm() * w;
            }
            continue;
        }
        if inside == 0 && (values.iter().all(|v| v.norm() < lo) || values.iter().all(|v| v.norm() > hi)) {
            continue;
        }
        for (s, e) in band_intervals(a, b, nodes, values, lo, hi) {
            for (y, w) in quad::gauss_legendre_nodes(s, e) {
                let v = g.eval(y)?;
                let w = w * weight.density(y);
                acc += v * w;
                abs += v.norm() * w;
            }
        }
    }
    for side in [Side::Left, Side::Right] {
        let edge = edge_radius(g, side);
        match g.tail(side) {
            Some(tail) => {
                let (r1, r2) = tail_band(tail, edge, lo, hi);
                acc += tail.integral(r1, r2, weight)?;
                abs += TailModel { coeff: Complex64::new(tail.coeff.norm(), 0.0), ..*tail }.integral(r1, r2, weight)?.re;
            }
            None if g.edge_modulus(side) >= lo => return Err(Error::TailModelRequired { t: lo }),
            None => {}
        }
    }
    Ok((acc, abs))
}

/// Sub-intervals of `[a, b]` where the piecewise-linear model of `|g|`
/// through the cell's nodes lies in `[lo, hi]`.
fn band_intervals(a: f64, b: f64, nodes: &[(f64, f64); 10], values: &[Complex64; 10], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut xs = vec![a];
    let mut ms = vec![values[0].norm()];
    for k in 0..10 {
        xs.push(nodes[k].0);
        ms.push(values[k].norm());
    }
    xs.push(b);
    ms.push(values[9].norm());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..xs.len() - 1 {
        let (x0, x1, m0, m1) = (xs[i], xs[i + 1], ms[i], ms[i + 1]);
        // parameter range where m0 + (m1 - m0) s lies in [lo, hi]
        let (mut s0, mut s1) = (0.0_f64, 1.0_f64);
        let dm = m1 - m0;
        if dm.abs() < 1e-300 {
            if m0 < lo || m0 > hi {
                continue;
            }
        } else {
            let (ta, tb) = ((lo - m0) / dm, (hi - m0) / dm);
            s0 = s0.max(ta.min(tb));
            s1 = s1.min(ta.max(tb));
            if s0 >= s1 {
                continue;
            }
        }
        let (p, q) = (x0 + s0 * (x1 - x0), x0 + s1 * (x1 - x0));
        match out.last_mut() {
            Some(last) if (last.1 - p).abs() <= 1e-15 * (1.0 + p.abs()) => last.1 = q,
            _ => out.push((p, q)),
        }
    }
    out
}

/// Truncated integrals over the whole schedule with the convergence
/// verdict, without the level-set precondition.
pub fn truncated_integrals(g: &GridFunction, weight: Weight, schedule: &TruncationSchedule) -> Result<AIntegralResult> {
    let mut partials = Vec::with_capacity(schedule.levels.len());
    let mut abs_last = 0.0;
    for &(lo, hi) in &schedule.levels {
        let (p, a) = truncated(g, weight, lo, hi)?;
        partials.push(p);
        abs_last = a;
    }
    let k = partials.len();
    let value = partials[k - 1];
    let d1 = (partials[k - 1] - partials[k - 2]).norm();
    let d0 = (partials[k - 2] - partials[k - 3]).norm();
    // relative to the integral of |g|, so cancelling integrands are judged
    // against their own size
    let scale = abs_last;
    let estimate = d1.max(d0);
    let converged = estimate <= A_INTEGRAL_RTOL * scale || estimate == 0.0;
    let truncations = schedule
        .levels
        .iter()
        .zip(&partials)
        .map(|(&(lower, upper), &partial)| Truncation { lower, upper, partial })
        .collect();
    Ok(AIntegralResult { value, truncations, converged, estimate })
}

/// `(A) int g w`: the limit of `int g w` over `{lo <= |g| <= hi}` as the
/// levels widen. Requires the `o(1/t)` level-set behaviour and agreement of
/// the last three truncations to [`A_INTEGRAL_RTOL`], relative to the
/// truncated integral of `|g|`.
pub fn a_integral(g: &GridFunction, weight: Weight, schedule: &TruncationSchedule) -> Result<AIntegralResult> {
    check_weak_l1_zero(g, weight, schedule)?;
    let r = truncated_integrals(g, weight, schedule)?;
    if !r.converged {
        return Err(Error::NoConvergence { change: r.estimate });
    }
    Ok(r)
}

/// Which boundary part a reconstruction starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPart {
    Real,
    Imag,
}

/// Rebuilds an analytic function on the upper half-plane at `z` from one
/// part of its boundary values `u` and its value `anchor` at `i`:
///
/// `f(z) = i Im f(i) + (1/(pi i)) (A) int K(z, x) u(x) dx / (1 + x^2)` for the
/// real part, `f(z) = Re f(i) + (1/pi) (A) int K(z, x) u(x) dx / (1 + x^2)`
/// for the imaginary part, with `K(z, x) = (1 + x z) / (x - z)`.
pub fn aleksandrov_reconstruct(
    part: BoundaryPart,
    u: &GridFunction,
    anchor: Complex64,
    z: Complex64,
    schedule: &TruncationSchedule,
) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidInput(format!("reconstruction point {z} is not in the upper half-plane")));
    }
    check_weak_l1_zero(u, Weight::Cauchy, schedule)?;
    let kernel: PointMap = Arc::new(move |x: f64, v: Complex64| (1.0 + z * x) / (x - z) * v);
    // K(z, x) -> z as |x| grows
    let scaled = |t: Option<&TailModel>| t.map(|t| TailModel { coeff: t.coeff * z, ..*t });
    let g = u.map(kernel, scaled(u.tail(Side::Left)), scaled(u.tail(Side::Right)))?;
    let integral = truncated_integrals(&g, Weight::Cauchy, schedule)?;
    if !integral.converged {
        return Err(Error::NoConvergence { change: integral.estimate });
    }
    Ok(match part {
        BoundaryPart::Real => Complex64::new(0.0, anchor.im) + integral.value / Complex64::new(0.0, PI),
        BoundaryPart::Imag => Complex64::new(anchor.re, 0.0) + integral.value / PI,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// `int h T phi`.
    pub lhs: Complex64,
    /// `-(A) int (T h) phi`.
    pub rhs: Complex64,
    pub residual: f64,
}

/// Compares `int h (T phi)` with `-(A) int (T h) phi` for the classical
/// transform `T`, both transforms computed on the shared grid.
pub fn duality_check(h: &GridFunction, phi: &GridFunction, schedule: &TruncationSchedule) -> Result<DualityReport> {
    if h.grid() != phi.grid() {
        return Err(Error::DimensionMismatch("duality check needs a shared grid".into()));
    }
    let t_phi = hilbert_transform(phi, Normalization::Classical)?;
    let t_h = hilbert_transform(h, Normalization::Classical)?;
    let inner = |f: &GridFunction| -> Result<GridFunction> {
        let n = f.len();
        let g = GridFunction::new(f.grid()[1..n - 1].to_vec(), f.values()[1..n - 1].to_vec())?;
        g.with_tails(f.tail(Side::Left).copied(), f.tail(Side::Right).copied())
    };
    let lhs = inner(h)?.product(&t_phi)?.integral(Weight::Lebesgue)?;
    let rhs = -truncated_integrals(&t_h.product(&inner(phi)?)?, Weight::Lebesgue, schedule)?.value;
    Ok(DualityReport { lhs, rhs, residual: (lhs - rhs).norm() })
}
