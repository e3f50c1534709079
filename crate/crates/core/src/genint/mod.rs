//! Generalized integrals on the real line: sampled functions with tail
//! models, principal-value Hilbert transforms, weak-L1 level-set profiles,
//! A-integrals and boundary reconstruction.

mod divergence;
mod hilbert;
mod level;

pub use divergence::{divergence_study, growth_ratio, AlphaRule, DivergenceRow};
pub use hilbert::{
    fft_hilbert, hilbert_method, hilbert_method_names, hilbert_pv, hilbert_transform, periodic_hilbert, HilbertMethod,
    Normalization,
};
pub use level::{
    a_integral, aleksandrov_reconstruct, check_weak_l1_zero, duality_check, truncated_integrals, weak_l1_profile,
    AIntegralResult, BoundaryPart, DualityReport, Truncation, TruncationSchedule, WeakL1Profile, A_INTEGRAL_RTOL,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pertdet::BoundaryData;
use crate::quad::{self, Piece, QuadConfig};

/// Pointwise evaluator attached to a grid function.
pub type Evaluator = Arc<dyn Fn(f64) -> Result<Complex64> + Send + Sync>;

/// Pointwise map `(x, f(x)) -> g(x)`.
pub type PointMap = Arc<dyn Fn(f64, Complex64) -> Complex64 + Send + Sync>;

/// Depth of the geometric grading toward each break, in powers of 4.
const GRADING_LEVELS: i32 = 12;

/// Power-law model `coeff * |x|^exponent` beyond one end of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub coeff: Complex64,
    pub exponent: f64,
}

impl TailModel {
    /// `exponent <= 0`; non-negative powers other than constants never
    /// describe a tail worth integrating.
    pub fn new(coeff: Complex64, exponent: f64) -> Result<Self> {
        if !(exponent <= 0.0 && exponent.is_finite() && coeff.re.is_finite() && coeff.im.is_finite()) {
            return Err(Error::InvalidInput(format!("tail model needs a finite exponent <= 0, got {exponent}")));
        }
        Ok(Self { coeff, exponent })
    }

    pub fn real(coeff: f64, exponent: f64) -> Result<Self> {
        Self::new(Complex64::new(coeff, 0.0), exponent)
    }

    /// Value at distance `r` from the origin.
    pub fn at(&self, r: f64) -> Complex64 {
        self.coeff * r.powf(self.exponent)
    }

    /// Radius beyond which `|f| <= t`.
    pub fn level_radius(&self, t: f64) -> f64 {
        let c = self.coeff.norm();
        if self.exponent == 0.0 {
            return if c > t { f64::INFINITY } else { 0.0 };
        }
        (c / t).powf(-1.0 / self.exponent)
    }

    /// Product of two tails on the same side.
    pub fn product(&self, other: &TailModel) -> TailModel {
        TailModel { coeff: self.coeff * other.coeff, exponent: self.exponent + other.exponent }
    }

    /// `int_{r1}^{r2} coeff r^p w(r) dr`, `r2` possibly infinite.
    pub fn integral(&self, r1: f64, r2: f64, weight: Weight) -> Result<Complex64> {
        if !(r2 > r1) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let p = self.exponent;
        match weight {
            Weight::Lebesgue => {
                if r2.is_infinite() && p >= -1.0 {
                    return Err(Error::InvalidInput(format!("tail |x|^{p} is not integrable")));
                }
                if (p + 1.0).abs() < 1e-12 {
                    Ok(self.coeff * (r2 / r1).ln())
                } else {
                    let hi = if r2.is_infinite() { 0.0 } else { r2.powf(p + 1.0) };
                    Ok(self.coeff * ((hi - r1.powf(p + 1.0)) / (p + 1.0)))
                }
            }
            Weight::Cauchy => {
                let piece = if r2.is_infinite() { Piece::Upper(r1) } else { Piece::Plain(r1, r2) };
                let f = |r: f64| Complex64::new(r.powf(p) / (1.0 + r * r), 0.0);
                let q = quad::integrate_pieces(f, &[piece], QuadConfig::with_tol(1e-15, 1e-12))?;
                Ok(self.coeff * q.value)
            }
        }
    }
}

/// Measure on the line against which level sets and integrals are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `dx`.
    Lebesgue,
    /// `dx / (1 + x^2)`.
    Cauchy,
}

impl Weight {
    pub fn density(&self, x: f64) -> f64 {
        match self {
            Weight::Lebesgue => 1.0,
            Weight::Cauchy => 1.0 / (1.0 + x * x),
        }
    }

    /// Measure of `[a, b]`, `a <= b`, either end possibly infinite.
    pub fn measure(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self {
            Weight::Lebesgue => b - a,
            Weight::Cauchy => {
                let d = if a.is_finite() && b.is_finite() && 1.0 + a * b > 0.0 {
                    ((b - a) / (1.0 + a * b)).atan()
                } else {
                    b.atan() - a.atan()
                };
                d.max(0.0).min(PI)
            }
        }
    }
}

/// Left or right end of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Integration cells covering the grid range, with 10-point Gauss-Legendre
/// nodes and the function values there.
#[derive(Debug)]
struct Cells {
    bounds: Vec<(f64, f64)>,
    nodes: Vec<[(f64, f64); 10]>,
    values: Vec<[Complex64; 10]>,
}

impl Cells {
    /// Grid cells split at `breaks` and graded geometrically toward them.
    fn bounds(grid: &[f64], breaks: &[f64]) -> Vec<(f64, f64)> {
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let inside: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
        let mut pts = grid.to_vec();
        pts.extend(&inside);
        sort_dedup(&mut pts);
        let mut extra = Vec::new();
        for &b in &inside {
            let i = pts.partition_point(|x| *x < b);
            let left = if i > 0 { b - pts[i - 1] } else { 0.0 };
            let right = if i + 1 < pts.len() { pts[i + 1] - b } else { 0.0 };
            for k in 1..=GRADING_LEVELS {
                let s = 4f64.powi(-k);
                if left > 0.0 {
                    extra.push(b - left * s);
                }
                if right > 0.0 {
                    extra.push(b + right * s);
                }
            }
        }
        pts.extend(extra);
        sort_dedup(&mut pts);
        pts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn nodes(bounds: &[(f64, f64)]) -> Vec<[(f64, f64); 10]> {
        bounds.iter().map(|&(a, b)| quad::gauss_legendre_nodes(a, b)).collect()
    }

    fn flat_nodes(nodes: &[[(f64, f64); 10]]) -> Vec<f64> {
        nodes.iter().flat_map(|c| c.iter().map(|n| n.0)).collect()
    }

    fn assemble(bounds: Vec<(f64, f64)>, nodes: Vec<[(f64, f64); 10]>, flat: &[Complex64]) -> Self {
        let values = flat
            .chunks_exact(10)
            .map(|c| {
                let mut v = [Complex64::new(0.0, 0.0); 10];
                v.copy_from_slice(c);
                v
            })
            .collect();
        Self { bounds, nodes, values }
    }
}

fn sort_dedup(pts: &mut Vec<f64>) {
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
}

/// A complex function known on an increasing real grid, optionally with an
/// exact pointwise evaluator on the grid range and power-law tails beyond
/// it. Without an evaluator the function is the linear interpolant of the
/// samples.
#[derive(Clone)]
pub struct GridFunction {
    grid: Vec<f64>,
    values: Vec<Complex64>,
    left: Option<TailModel>,
    right: Option<TailModel>,
    exact: Option<Evaluator>,
    breaks: Vec<f64>,
    cells: Arc<Cells>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("points", &self.grid.len())
            .field("range", &(self.grid[0], self.grid[self.grid.len() - 1]))
            .field("left", &self.left)
            .field("right", &self.right)
            .field("exact", &self.exact.is_some())
            .field("breaks", &self.breaks)
            .finish()
    }
}

fn validate_grid(grid: &[f64], len: usize) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidInput("a grid function needs at least 2 points".into()));
    }
    if grid.len() != len {
        return Err(Error::DimensionMismatch(format!("{} grid points, {len} values", grid.len())));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn interpolate(grid: &[f64], values: &[Complex64], x: f64) -> Complex64 {
    let n = grid.len();
    let i = grid.partition_point(|g| *g <= x).clamp(1, n - 1);
    let (a, b) = (grid[i - 1], grid[i]);
    let t = (x - a) / (b - a);
    values[i - 1] * (1.0 - t) + values[i] * t
}

impl GridFunction {
    /// Linear interpolant of `values` on `grid`.
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        validate_grid(&grid, values.len())?;
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("grid function values must be finite".into()));
        }
        let bounds = Cells::bounds(&grid, &[]);
        let nodes = Cells::nodes(&bounds);
        let flat: Vec<Complex64> = Cells::flat_nodes(&nodes).iter().map(|&x| interpolate(&grid, &values, x)).collect();
        let cells = Arc::new(Cells::assemble(bounds, nodes, &flat));
        Ok(Self { grid, values, left: None, right: None, exact: None, breaks: Vec::new(), cells })
    }

    pub fn from_real(grid: Vec<f64>, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples `f` on `grid` and keeps it as the exact evaluator. `breaks`
    /// are points where `f` may be singular; cells are split and graded
    /// there and `f` is never evaluated exactly on them.
    pub fn from_fn<F>(grid: Vec<f64>, f: F, breaks: &[f64]) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64> + Send + Sync + 'static,
    {
        let f: Evaluator = Arc::new(f);
        let g = f.clone();
        Self::with_evaluator(grid, f, breaks, move |xs: &[f64]| xs.par_iter().map(|&x| g(x)).collect())
    }

    /// Like [`GridFunction::from_fn`], with a bulk evaluator for the grid
    /// and quadrature nodes (called with sorted points).
    pub fn with_evaluator<B>(grid: Vec<f64>, exact: Evaluator, breaks: &[f64], bulk: B) -> Result<Self>
    where
        B: Fn(&[f64]) -> Result<Vec<Complex64>>,
    {
        validate_grid(&grid, grid.len())?;
        let mut breaks: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
        sort_dedup(&mut breaks);
        let bounds = Cells::bounds(&grid, &breaks);
        let nodes = Cells::nodes(&bounds);
        let flat = Cells::flat_nodes(&nodes);
        let mut all = grid.clone();
        all.extend(&flat);
        let mut order: Vec<usize> = (0..all.len()).collect();
        order.sort_by(|&i, &j| all[i].total_cmp(&all[j]));
        let sorted: Vec<f64> = order.iter().map(|&i| all[i]).collect();
        let vals = bulk(&sorted)?;
        if vals.len() != sorted.len() {
            return Err(Error::DimensionMismatch("bulk evaluator returned the wrong number of values".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); all.len()];
        for (k, &i) in order.iter().enumerate() {
            out[i] = vals[k];
        }
        if out.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("evaluator returned non-finite values".into()));
        }
        let n = grid.len();
        let cells = Arc::new(Cells::assemble(bounds, nodes, &out[n..]));
        out.truncate(n);
        Ok(Self { grid, values: out, left: None, right: None, exact: Some(exact), breaks, cells })
    }

    /// Attaches tail models; a left tail needs the grid to start below 0
    /// and a right tail needs it to end above 0.
    pub fn with_tails(mut self, left: Option<TailModel>, right: Option<TailModel>) -> Result<Self> {
        if left.is_some() && self.lo() >= 0.0 || right.is_some() && self.hi() <= 0.0 {
            return Err(Error::InvalidInput("tail models need the grid to straddle the origin".into()));
        }
        self.left = left;
        self.right = right;
        Ok(self)
    }

    /// `x -> map(x, f(x))` with new tails; the evaluator and cached node
    /// values are mapped too.
    pub fn map(&self, map: PointMap, left: Option<TailModel>, right: Option<TailModel>) -> Result<Self> {
        let values = self.grid.iter().zip(&self.values).map(|(&x, &v)| map(x, v)).collect();
        let cells = Cells {
            bounds: self.cells.bounds.clone(),
            nodes: self.cells.nodes.clone(),
            values: self
                .cells
                .nodes
                .iter()
                .zip(&self.cells.values)
                .map(|(n, v)| std::array::from_fn(|k| map(n[k].0, v[k])))
                .collect(),
        };
        let exact = self.exact.clone().map(|e| {
            let m = map.clone();
            Arc::new(move |x: f64| e(x).map(|v| m(x, v))) as Evaluator
        });
        let out = Self {
            grid: self.grid.clone(),
            values,
            left: None,
            right: None,
            exact,
            breaks: self.breaks.clone(),
            cells: Arc::new(cells),
        };
        out.with_tails(left, right)
    }

    /// Pointwise product; both factors must share the grid.
    pub fn product(&self, other: &GridFunction) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch("product of functions on different grids".into()));
        }
        let tail = |a: Option<TailModel>, b: Option<TailModel>| a.zip(b).map(|(a, b)| a.product(&b));
        let (left, right) = (tail(self.left, other.left), tail(self.right, other.right));
        let grid = self.grid.clone();
        let values: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        match (&self.exact, &other.exact) {
            (None, None) => GridFunction::new(grid, values)?.with_tails(left, right),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                let f: Evaluator = Arc::new(move |x| Ok(a.eval(x)? * b.eval(x)?));
                let mut breaks = self.breaks.clone();
                breaks.extend(&other.breaks);
                let g = f.clone();
                GridFunction::with_evaluator(grid, f, &breaks, move |xs: &[f64]| xs.par_iter().map(|&x| g(x)).collect())?
                    .with_tails(left, right)
            }
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn tail(&self, side: Side) -> Option<&TailModel> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => self.right.as_ref(),
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn has_evaluator(&self) -> bool {
        self.exact.is_some()
    }

    pub fn lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn hi(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Grid spacing when uniform to `1e-9` relative deviation.
    pub fn uniform_step(&self) -> Result<f64> {
        let n = self.grid.len();
        let h = (self.hi() - self.lo()) / (n - 1) as f64;
        let deviation = self.grid.windows(2).map(|w| ((w[1] - w[0]) / h - 1.0).abs()).fold(0.0, f64::max);
        if deviation > 1e-9 {
            return Err(Error::NonUniformGrid { deviation });
        }
        Ok(h)
    }

    /// Value at `x`: the evaluator or interpolant on the grid range, the
    /// tail models beyond it.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if x < self.lo() {
            return match self.left {
                Some(t) => Ok(t.at(-x)),
                None => Err(Error::TailModelRequired { t: x }),
            };
        }
        if x > self.hi() {
            return match self.right {
                Some(t) => Ok(t.at(x)),
                None => Err(Error::TailModelRequired { t: x }),
            };
        }
        match &self.exact {
            Some(e) => e(x),
            None => Ok(interpolate(&self.grid, &self.values, x)),
        }
    }

    /// `|f|` at the grid end on `side`.
    fn edge_modulus(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.values[0].norm(),
            Side::Right => self.values[self.values.len() - 1].norm(),
        }
    }

    fn max_modulus(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Errors when `side` has no tail model yet the samples do not vanish
    /// there to `1e-10` of their maximum.
    fn require_tail_or_decay(&self, side: Side) -> Result<()> {
        if self.tail(side).is_none() && self.edge_modulus(side) > 1e-10 * self.max_modulus() {
            let t = self.edge_modulus(side);
            return Err(Error::TailModelRequired { t });
        }
        Ok(())
    }

    /// `int f w` over the line.
    pub fn integral(&self, weight: Weight) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, v) in self.cells.nodes.iter().zip(&self.cells.values) {
            for k in 0..10 {
                acc += v[k] * (n[k].1 * weight.density(n[k].0));
            }
        }
        for side in [Side::Left, Side::Right] {
            self.require_tail_or_decay(side)?;
            if let Some(t) = self.tail(side) {
                let edge = match side {
                    Side::Left => -self.lo(),
                    Side::Right => self.hi(),
                };
                acc += t.integral(edge, f64::INFINITY, weight)?;
            }
        }
        Ok(acc)
    }
}

/// `zeta` and `xi` as grid functions on the boundary grid, backed by the
/// boundary sampler, with their power-law tails attached.
pub fn boundary_functions(data: &BoundaryData) -> Result<(GridFunction, GridFunction)> {
    let sampler = data.sampler_arc();
    let breaks: Vec<f64> = sampler.features().iter().map(|f| f.0).collect();
    let (c_zeta, c_xi) = data.tail_coeffs();
    let s1 = sampler.clone();
    let s2 = sampler.clone();
    let zeta_exact: Evaluator = Arc::new(move |x| Ok(Complex64::new(s1.zeta(x)?, 0.0)));
    let xi_exact: Evaluator = Arc::new(move |x| Ok(Complex64::new(s2.xi(x)?, 0.0)));
    let grid = data.grid().to_vec();
    let cache = std::sync::Mutex::new(None::<Vec<Complex64>>);
    let zeta = GridFunction::with_evaluator(grid.clone(), zeta_exact, &breaks, |xs: &[f64]| {
        let pts = sampler.sample_sorted(xs)?;
        *cache.lock().expect("cache lock") = Some(pts.iter().map(|p| Complex64::new(p.xi(), 0.0)).collect());
        Ok(pts.iter().map(|p| Complex64::new(p.zeta(), 0.0)).collect())
    })?;
    let xi_nodes = cache.into_inner().expect("cache lock").expect("bulk evaluator ran");
    let xi = GridFunction::with_evaluator(grid, xi_exact, &breaks, move |_: &[f64]| Ok(xi_nodes.clone()))?;
    let (lo, hi) = (data.grid()[0], data.grid()[data.len() - 1]);
    let straddles = lo < 0.0 && hi > 0.0;
    let zeta = if straddles {
        zeta.with_tails(Some(TailModel::real(c_zeta, -2.0)?), Some(TailModel::real(c_zeta, -2.0)?))?
    } else {
        zeta
    };
    let xi = if straddles {
        xi.with_tails(Some(TailModel::real(-c_xi, -1.0)?), Some(TailModel::real(c_xi, -1.0)?))?
    } else {
        xi
    };
    Ok((zeta, xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::AccumulativePair;
    use crate::pertdet::{boundary_values, EpsilonSchedule, GridSpec};

    fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn tail_integrals_match_closed_forms() {
        let t = TailModel::real(2.0, -2.0).unwrap();
        assert!((t.integral(4.0, f64::INFINITY, Weight::Lebesgue).unwrap().re - 0.5).abs() < 1e-15);
        let t = TailModel::real(1.0, -1.0).unwrap();
        assert!((t.integral(1.0, std::f64::consts::E, Weight::Lebesgue).unwrap().re - 1.0).abs() < 1e-14);
        // int_1^inf dr / (r (1 + r^2)) = ln 2 / 2
        let v = t.integral(1.0, f64::INFINITY, Weight::Cauchy).unwrap().re;
        assert!((v - 0.5 * 2f64.ln()).abs() < 1e-12);
        assert!(t.integral(1.0, f64::INFINITY, Weight::Lebesgue).is_err());
    }

    #[test]
    fn cauchy_measure_is_stable_far_out() {
        let w = Weight::Cauchy;
        assert!((w.measure(f64::NEG_INFINITY, f64::INFINITY) - PI).abs() < 1e-15);
        let (a, b) = (1e8, 2e8);
        assert!((w.measure(a, b) - (1.0 / a - 1.0 / b)).abs() < 1e-20);
        assert!((w.measure(-1.0, 1.0) - 0.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn interpolant_integral_is_trapezoid() {
        let g = uniform(-1.0, 1.0, 5);
        let f = GridFunction::from_real(g.clone(), &[0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        assert!((f.integral(Weight::Lebesgue).unwrap().re - 2.0).abs() < 1e-14);
        assert!((f.eval(0.25).unwrap().re - 1.5).abs() < 1e-15);
        assert!(f.eval(2.0).is_err());
    }

    #[test]
    fn lorentzian_with_tails_integrates_to_pi() {
        let f = GridFunction::from_fn(uniform(-20.0, 20.0, 401), |x| Ok(Complex64::new(1.0 / (1.0 + x * x), 0.0)), &[])
            .unwrap()
            .with_tails(Some(TailModel::real(1.0, -2.0).unwrap()), Some(TailModel::real(1.0, -2.0).unwrap()))
            .unwrap();
        // tail model 1/x^2 differs from 1/(1+x^2) by O(x^-4)
        assert!((f.integral(Weight::Lebesgue).unwrap().re - PI).abs() < 1e-4);
    }

    #[test]
    fn missing_tail_is_reported() {
        let f = GridFunction::from_real(uniform(-1.0, 1.0, 3), &[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(f.integral(Weight::Lebesgue), Err(Error::TailModelRequired { .. })));
    }

    #[test]
    fn log_singularity_at_break_is_resolved() {
        // int_{-1}^{1} ln|x| dx = -2
        let f = GridFunction::from_fn(uniform(-1.0, 1.0, 10), |x| Ok(Complex64::new(x.abs().ln(), 0.0)), &[0.0]).unwrap();
        let cells = &f.cells;
        let mut acc = 0.0;
        for (n, v) in cells.nodes.iter().zip(&cells.values) {
            for k in 0..10 {
                acc += v[k].re * n[k].1;
            }
        }
        assert!((acc + 2.0).abs() < 1e-6, "{acc}");
    }

    #[test]
    fn uniform_step_detection() {
        let f = GridFunction::from_real(uniform(0.0, 1.0, 11), &[0.0; 11]).unwrap();
        assert!((f.uniform_step().unwrap() - 0.1).abs() < 1e-15);
        let g = GridFunction::from_real(vec![0.0, 0.1, 0.3], &[0.0; 3]).unwrap();
        assert!(matches!(g.uniform_step(), Err(Error::NonUniformGrid { .. })));
    }

    #[test]
    fn boundary_functions_agree_with_grid_data() {
        let pair = AccumulativePair::rank_one(1.0).unwrap();
        let grid = GridSpec { points: 400, ..GridSpec::default() }.build(&pair).unwrap();
        let data = boundary_values(&pair, &grid, &EpsilonSchedule::default()).unwrap();
        let (zeta, xi) = boundary_functions(&data).unwrap();
        for (i, &x) in grid.iter().enumerate().step_by(37) {
            assert!((zeta.values()[i].re - data.zeta()[i]).abs() < 1e-9);
            assert!((xi.values()[i].re - data.xi()[i]).abs() < 1e-9);
            let exact = (1.0 / x).atan() / PI;
            assert!((xi.eval(x).unwrap().re - exact).abs() < 1e-8);
        }
        // int zeta = pi alpha
        assert!((zeta.integral(Weight::Lebesgue).unwrap().re - PI).abs() < 1e-5);
    }
}
