//! Perturbation determinants `det_{H/H0}` and `det_{H/H*}`, their
//! branch-continuous logarithms and boundary values on the real axis.

mod boundary;
mod evaluator;
mod grid;
mod path;

pub use boundary::{
    boundary_values, boundary_values_with, gap_tol, richardson, zeta_norm, BoundaryData, BoundaryPoint,
    BoundarySampler, EpsilonSchedule,
};
pub use evaluator::{
    evaluator, evaluator_names, DetEvaluator, FarField, LuEvaluator, SpectralEvaluator, DEFAULT_EVALUATOR,
};
pub use grid::GridSpec;
pub use path::{continue_log, principal, wrap_angle, MAX_REFINEMENT_DEPTH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{self, AccumulativePair, ComplexMatrix};

/// A determinant value with a tracked logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetValue {
    pub z: Complex64,
    pub value: Complex64,
    pub log_value: Complex64,
}

impl DetValue {
    pub fn from_log(z: Complex64, log_value: Complex64) -> Self {
        Self { z, value: log_value.exp(), log_value }
    }
}

fn singular_to_shift(z: Complex64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::SingularMatrix { pivot } => Error::SingularShift { z, pivot },
        other => other,
    }
}

/// `det(I - iV (H0 - z)^{-1})`, principal logarithm.
pub fn pert_det(pair: &AccumulativePair, z: Complex64) -> Result<DetValue> {
    let r = linop::resolvent(pair.h0().matrix(), z)?;
    let iv = pair.v().matrix().scale(Complex64::new(0.0, 1.0));
    let m = &ComplexMatrix::identity(pair.dim()) - &(&iv * &r);
    let (modulus, arg) = linop::log_det(&m).map_err(singular_to_shift(z))?;
    Ok(DetValue::from_log(z, principal(Complex64::new(modulus, arg))))
}

/// `det(A - z) / det(B - z)`, principal logarithm.
pub fn relative_det(a: &ComplexMatrix, b: &ComplexMatrix, z: Complex64) -> Result<DetValue> {
    let (ma, aa) = linop::log_det_shifted(a, z)?;
    let (mb, ab) = linop::log_det_shifted(b, z)?;
    Ok(DetValue::from_log(z, principal(Complex64::new(ma - mb, aa - ab))))
}

/// `det_{H/H*}(z) = det(H - z) / det(H* - z)`.
pub fn pert_det_adjoint(pair: &AccumulativePair, z: Complex64) -> Result<DetValue> {
    relative_det(&pair.h(), &pair.h_adjoint(), z)
}

/// Branch-continuous `log det_{H/H0}` along `path`, principal at `path[0]`.
///
/// Starting at `iY` with `Y >= 10 (||H0|| + ||V||)` makes that choice the
/// branch vanishing at infinity.
pub fn log_det_path(pair: &AccumulativePair, path: &[Complex64]) -> Result<Vec<DetValue>> {
    let Some(&first) = path.first() else {
        return Ok(Vec::new());
    };
    let lu = LuEvaluator::from_matrices(pair.h0().matrix().clone(), pair.h())?;
    let start = principal(lu.log_det(first)?);
    let logs = continue_log(|z| lu.log_det(z), path, start, lu.singularities())?;
    Ok(path.iter().zip(logs).map(|(&z, l)| DetValue::from_log(z, l)).collect())
}

/// `(y, Re det(iy) - 1, tr V / y)` for each `y`.
pub fn asymptotic_check(pair: &AccumulativePair, y_values: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let floor = 2.0 * pair.norm_scale();
    if y_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("y values must be increasing".into()));
    }
    y_values
        .iter()
        .map(|&y| {
            if !(y >= floor && y > 0.0) {
                return Err(Error::InvalidInput(format!("y = {y} is below 2 (||H0|| + ||V||) = {floor}")));
            }
            let d = pert_det(pair, Complex64::new(0.0, y))?;
            Ok((y, d.value.re - 1.0, pair.trace_v() / y))
        })
        .collect()
}

/// One link `H_k = H0 - i sum_{j<=k} alpha_j P_j` of a finite-rank chain.
#[derive(Debug, Clone)]
pub struct SweepStep {
    pub rank: usize,
    pub pair: AccumulativePair,
    pub data: BoundaryData,
}

/// Truncations of `V` to its `k` largest spectral pieces, `k = 1..=n`,
/// with their boundary data on `grid`.
pub fn finite_rank_sweep(
    pair: &AccumulativePair,
    n: usize,
    grid: &[f64],
    schedule: &EpsilonSchedule,
) -> Result<Vec<SweepStep>> {
    let rank = pair.v().rank();
    if n > rank.max(1) {
        return Err(Error::InvalidInput(format!("sweep length {n} exceeds rank(V) = {rank}")));
    }
    (1..=n)
        .map(|k| {
            let pk = pair.with_v(pair.v().truncated(k))?;
            let data = boundary_values(&pk, grid, schedule)?;
            Ok(SweepStep { rank: k, pair: pk, data })
        })
        .collect()
}

/// `prod_k det_{H_k/H_{k-1}}(z)` along a chain starting at `H0`.
pub fn stepwise_product(h0: &ComplexMatrix, chain: &[ComplexMatrix], z: Complex64) -> Result<Complex64> {
    let mut prev = h0;
    let mut acc = Complex64::new(1.0, 0.0);
    for h in chain {
        acc *= relative_det(h, prev, z)?.value;
        prev = h;
    }
    Ok(acc)
}
