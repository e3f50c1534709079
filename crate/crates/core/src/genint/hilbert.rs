//! Principal-value Hilbert transforms of grid functions.
//!
//! The direct and Toeplitz routes both transform the same object (the
//! samples' interpolant plus the tail models), so they agree to rounding on
//! uniform grids.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{interpolate, GridFunction, Side, TailModel, Weight};
use crate::error::{Error, Result};
use crate::quad::{self, Piece, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `p.v. int f(y) / (y - x) dy`.
    Raw,
    /// `(1/pi) p.v. int f(y) / (x - y) dy`, which sends `cos` to `sin`.
    Classical,
}

impl Normalization {
    fn from_raw(self, raw: Complex64) -> Complex64 {
        match self {
            Normalization::Raw => raw,
            Normalization::Classical => -raw / PI,
        }
    }
}

/// `int f(y) / (y - x) dy` over the tail beyond `side`.
fn tail_pv(tail: &TailModel, side: Side, edge: f64, x: f64) -> Result<Complex64> {
    let p = tail.exponent;
    if p >= 0.0 {
        return Err(Error::InvalidInput("principal value needs a decaying tail".into()));
    }
    let cfg = QuadConfig::with_tol(1e-15, 1e-12);
    let q = match side {
        Side::Right => quad::integrate_pieces(|r| Complex64::new(r.powf(p) / (r - x), 0.0), &[Piece::Upper(edge)], cfg)?,
        Side::Left => quad::integrate_pieces(|r| Complex64::new(r.powf(p) / (-r - x), 0.0), &[Piece::Upper(edge)], cfg)?,
    };
    Ok(tail.coeff * q.value)
}

fn tails_raw(f: &GridFunction, x: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for side in [Side::Left, Side::Right] {
        f.require_tail_or_decay(side)?;
        if let Some(t) = f.tail(side) {
            let edge = match side {
                Side::Left => -f.lo(),
                Side::Right => f.hi(),
            };
            acc += tail_pv(t, side, edge, x)?;
        }
    }
    Ok(acc)
}

/// Exact principal value of the piecewise-linear interpolant over the grid
/// range, after subtracting its value at `x`.
fn raw_interpolant(grid: &[f64], values: &[Complex64], x: f64) -> Complex64 {
    let n = grid.len();
    let lx = interpolate(grid, values, x);
    let mut acc = lx * ((grid[n - 1] - x) / (x - grid[0])).ln() + (values[n - 1] - values[0]);
    for i in 0..n - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        if x >= a && x <= b {
            continue;
        }
        let s = (values[i + 1] - values[i]) / (b - a);
        let extended = values[i] + s * (x - a);
        acc += (extended - lx) * ((b - x) / (a - x)).abs().ln();
    }
    acc
}

/// Principal value with the exact evaluator: `(f(y) - f(x)) / (y - x)` on
/// the cached cells plus the log term of the subtracted constant.
fn raw_cells(f: &GridFunction, x: f64) -> Result<Complex64> {
    let fx = f.eval(x)?;
    let mut acc = fx * ((f.hi() - x) / (x - f.lo())).ln();
    let cells = &f.cells;
    for (c, &(a, b)) in cells.bounds.iter().enumerate() {
        if x > a && x < b {
            for (lo, hi) in [(a, x), (x, b)] {
                for (y, w) in quad::gauss_legendre_nodes(lo, hi) {
                    acc += (f.eval(y)? - fx) / (y - x) * w;
                }
            }
            continue;
        }
        let (nodes, values) = (&cells.nodes[c], &cells.values[c]);
        for k in 0..10 {
            acc += (values[k] - fx) / (nodes[k].0 - x) * nodes[k].1;
        }
    }
    Ok(acc)
}

/// Principal-value Hilbert transform at an interior point `x`.
///
/// Functions without an evaluator are transformed exactly as linear
/// interpolants; otherwise the evaluator is integrated with singularity
/// subtraction. Beyond the grid the tail models are used, and a missing
/// tail requires the samples to vanish at that end.
pub fn hilbert_pv(f: &GridFunction, x: f64, norm: Normalization) -> Result<Complex64> {
    if !(x > f.lo() && x < f.hi()) {
        return Err(Error::EdgeTooClose { x });
    }
    let core = if f.has_evaluator() { raw_cells(f, x)? } else { raw_interpolant(f.grid(), f.values(), x) };
    Ok(norm.from_raw(core + tails_raw(f, x)?))
}

/// Tails of the transform from `int f`: `T f ~ (int f) / (pi x)`.
fn transform_tails(f: &GridFunction, norm: Normalization) -> (Option<TailModel>, Option<TailModel>) {
    let Ok(s) = f.integral(Weight::Lebesgue) else {
        return (None, None);
    };
    if !(f.lo() < 0.0 && f.hi() > 0.0) {
        return (None, None);
    }
    let right = norm.from_raw(-s);
    let model = |c: Complex64| TailModel::new(c, -1.0).ok();
    (model(-right), model(right))
}

fn interior(f: &GridFunction) -> Result<Vec<f64>> {
    let g = f.grid();
    if g.len() < 3 {
        return Err(Error::InvalidInput("transform needs at least 3 grid points".into()));
    }
    Ok(g[1..g.len() - 1].to_vec())
}

/// Transform at every interior grid node.
pub fn hilbert_transform(f: &GridFunction, norm: Normalization) -> Result<GridFunction> {
    let xs = interior(f)?;
    let values = xs.par_iter().map(|&x| hilbert_pv(f, x, norm)).collect::<Result<Vec<_>>>()?;
    let (left, right) = transform_tails(f, norm);
    GridFunction::new(xs, values)?.with_tails(left, right)
}

/// `int hat(u) / (m - u) du` over the unit hat centred at 0; odd in `m`.
fn hat_weight(m: i64) -> f64 {
    let q = m.unsigned_abs() as f64;
    let w = match m.unsigned_abs() {
        0 => 0.0,
        1 => 2.0 * 2f64.ln(),
        _ => -(1.0 - q) * (-1.0 / q).ln_1p() + (1.0 + q) * (1.0 / q).ln_1p(),
    };
    if m < 0 {
        -w
    } else {
        w
    }
}

/// Contribution of the missing left half of the hat at offset `m >= 1`.
fn half_hat_weight(m: f64) -> f64 {
    -1.0 + (1.0 + m) * (1.0 / m).ln_1p()
}

/// Classical transform at the interior nodes of a uniform grid, with the
/// interpolant's Toeplitz weights applied by zero-padded FFT convolution.
pub fn fft_hilbert(f: &GridFunction) -> Result<GridFunction> {
    f.uniform_step()?;
    let xs = interior(f)?;
    let n = f.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    a[..n].copy_from_slice(f.values());
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    for m in -(n as i64 - 1)..=(n as i64 - 1) {
        b[m.rem_euclid(size as i64) as usize] = Complex64::new(hat_weight(m), 0.0);
    }
    forward.process(&mut a);
    forward.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inverse.process(&mut a);
    let scale = 1.0 / size as f64;
    let (first, last) = (f.values()[0], f.values()[n - 1]);
    let values = (1..n - 1)
        .into_par_iter()
        .map(|j| {
            let conv = a[j] * scale - first * half_hat_weight(j as f64) + last * half_hat_weight((n - 1 - j) as f64);
            Ok(conv / PI + Normalization::Classical.from_raw(tails_raw(f, f.grid()[j])?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (left, right) = transform_tails(f, Normalization::Classical);
    GridFunction::new(xs, values)?.with_tails(left, right)
}

/// Classical transform of one period sampled on a uniform grid, by the
/// Fourier multiplier `-i sign(k)`.
pub fn periodic_hilbert(f: &GridFunction) -> Result<GridFunction> {
    f.uniform_step()?;
    let n = f.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut a = f.values().to_vec();
    planner.plan_fft_forward(n).process(&mut a);
    for (k, v) in a.iter_mut().enumerate() {
        let signed = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
        *v = if signed == 0 || (n.is_multiple_of(2) && k == n / 2) {
            Complex64::new(0.0, 0.0)
        } else {
            *v * Complex64::new(0.0, -(signed.signum() as f64))
        };
    }
    planner.plan_fft_inverse(n).process(&mut a);
    let scale = 1.0 / n as f64;
    GridFunction::new(f.grid().to_vec(), a.into_iter().map(|v| v * scale).collect())
}

/// A way of computing the classical transform of a whole grid function.
pub trait HilbertMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn transform(&self, f: &GridFunction) -> Result<GridFunction>;
}

struct Direct;
struct Toeplitz;
struct Periodic;

impl HilbertMethod for Direct {
    fn name(&self) -> &'static str {
        "pv"
    }

    fn transform(&self, f: &GridFunction) -> Result<GridFunction> {
        hilbert_transform(f, Normalization::Classical)
    }
}

impl HilbertMethod for Toeplitz {
    fn name(&self) -> &'static str {
        "fft"
    }

    fn transform(&self, f: &GridFunction) -> Result<GridFunction> {
        fft_hilbert(f)
    }
}

impl HilbertMethod for Periodic {
    fn name(&self) -> &'static str {
        "periodic"
    }

    fn transform(&self, f: &GridFunction) -> Result<GridFunction> {
        periodic_hilbert(f)
    }
}

const METHODS: &[(&str, fn() -> Box<dyn HilbertMethod>)] =
    &[("pv", || Box::new(Direct)), ("fft", || Box::new(Toeplitz)), ("periodic", || Box::new(Periodic))];

pub fn hilbert_method(name: &str) -> Result<Box<dyn HilbertMethod>> {
    METHODS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, make)| make())
        .ok_or_else(|| Error::InvalidInput(format!("unknown Hilbert method '{name}'")))
}

pub fn hilbert_method_names() -> Vec<&'static str> {
    METHODS.iter().map(|(n, _)| *n).collect()
}
