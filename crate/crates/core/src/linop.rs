//! Dense complex linear algebra for the finite-dimensional lab.
//!
//! Factorizations are delegated to `nalgebra`; this module owns the pivot
//! thresholds, the sign/argument bookkeeping of log-determinants and the
//! matrix types that carry the Hermitian / positive-semidefinite invariants.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, LU};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::rational::RationalFunction;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

const EIG_MAX_ITER: usize = 10_000;
const PIVOT_EPS: f64 = 64.0 * f64::EPSILON;

pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("{}x{} is not a non-empty square matrix", m.nrows(), m.ncols())));
        }
        if m.nrows() > MAX_DIM {
            return Err(Error::InvalidInput(format!("dimension {} exceeds the cap of {MAX_DIM}", m.nrows())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("rows must all have length equal to the row count".into()));
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|&x| c64(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[Complex64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    /// `M - z I`.
    pub fn shift(&self, z: Complex64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= z;
        }
        Self(m)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        let sv = self.0.clone().svd(false, false).singular_values;
        sv.iter().cloned().fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect()).collect()
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Hermitian matrix; the stored entries satisfy `a[i][j] == conj(a[j][i])` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Symmetrizes `(M + M^*) / 2`.
    pub fn new(m: ComplexMatrix) -> Self {
        let n = m.dim();
        let mut h = m.0;
        for i in 0..n {
            h[(i, i)] = c64(h[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
                h[(i, j)] = avg;
                h[(j, i)] = avg.conj();
            }
        }
        Self(ComplexMatrix(h))
    }

    /// Rejects inputs whose anti-Hermitian part exceeds `rel_tol * ||M||_F`.
    pub fn try_new(m: ComplexMatrix, rel_tol: f64) -> Result<Self> {
        let skew = (&m - &m.adjoint()).frobenius_norm() * 0.5;
        if skew > rel_tol * m.frobenius_norm().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidInput(format!("matrix is not Hermitian (skew part {skew:e})")));
        }
        Ok(Self::new(m))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let d: Vec<Complex64> = d.iter().map(|&x| c64(x, 0.0)).collect();
        Self(ComplexMatrix::from_diagonal(&d))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn op_norm(&self) -> f64 {
        eig_hermitian(self).map(|(ev, _)| ev.iter().fold(0.0_f64, |m, x| m.max(x.abs()))).unwrap_or_else(|_| self.0.op_norm())
    }
}

/// Positive semidefinite matrix together with its spectral decomposition
/// `V = sum_k alpha_k v_k v_k^*`, eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix {
    matrix: HermitianMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl PsdMatrix {
    /// Eigenvalues within `1e-12 ||V||` below zero are clamped to zero; anything
    /// more negative is rejected.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let (vals, vecs) = eig_hermitian(&h)?;
        let norm = vals.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let tol = 1e-12 * norm;
        if let Some(&bad) = vals.iter().find(|&&a| a < -tol) {
            return Err(Error::InvalidInput(format!("matrix is not positive semidefinite (eigenvalue {bad:e})")));
        }
        let n = h.dim();
        // descending order
        let order: Vec<usize> = (0..n).rev().collect();
        let eigenvalues: Vec<f64> = order.iter().map(|&k| if vals[k] < tol { 0.0 } else { vals[k] }).collect();
        let basis = DMatrix::from_fn(n, n, |i, j| vecs.0[(i, order[j])]);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(n, eigenvalues.iter().map(|&a| c64(a, 0.0))));
        let rebuilt = &basis * d * basis.adjoint();
        Ok(Self {
            matrix: HermitianMatrix::new(ComplexMatrix(rebuilt)),
            eigenvalues,
            eigenvectors: ComplexMatrix(basis),
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            matrix: HermitianMatrix::zeros(n),
            eigenvalues: vec![0.0; n],
            eigenvectors: ComplexMatrix::identity(n),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&a| a > 0.0).count()
    }

    /// `sum_{j < k} alpha_j P_j`, the partial spectral sum.
    pub fn truncated(&self, k: usize) -> PsdMatrix {
        let n = self.dim();
        let k = k.min(n);
        let mut eigenvalues = self.eigenvalues.clone();
        for a in eigenvalues.iter_mut().skip(k) {
            *a = 0.0;
        }
        let basis = &self.eigenvectors.0;
        let d = DMatrix::from_diagonal(&DVector::from_iterator(n, eigenvalues.iter().map(|&a| c64(a, 0.0))));
        PsdMatrix {
            matrix: HermitianMatrix::new(ComplexMatrix(basis * d * basis.adjoint())),
            eigenvalues,
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    /// Rank-one piece `alpha_k P_k`.
    pub fn spectral_piece(&self, k: usize) -> PsdMatrix {
        let n = self.dim();
        let mut eigenvalues = vec![0.0; n];
        eigenvalues[k] = self.eigenvalues[k];
        let v = self.eigenvectors.0.column(k);
        let m = v * v.adjoint() * c64(self.eigenvalues[k], 0.0);
        PsdMatrix {
            matrix: HermitianMatrix::new(ComplexMatrix(m)),
            eigenvalues,
            eigenvectors: self.eigenvectors.clone(),
        }
    }
}

/// Eigenvalues of `H = H0 - iV`, each tagged real or lower-half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub is_real: Vec<bool>,
    pub tol_imag: f64,
}

impl Spectrum {
    /// Eigenvalues strictly in the open lower half-plane.
    pub fn lower(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.eigenvalues.iter().zip(&self.is_real).filter(|(_, &r)| !r).map(|(z, _)| *z)
    }

    pub fn real(&self) -> impl Iterator<Item = f64> + '_ {
        self.eigenvalues.iter().zip(&self.is_real).filter(|(_, &r)| r).map(|(z, _)| z.re)
    }
}

/// The pair `(H0, V)` with `H0` Hermitian and `V >= 0`, defining `H = H0 - iV`.
#[derive(Debug, Clone)]
pub struct AccumulativePair {
    h0: HermitianMatrix,
    v: PsdMatrix,
    h0_eigenvalues: Vec<f64>,
    spectrum: Spectrum,
}

impl AccumulativePair {
    pub fn new(h0: HermitianMatrix, v: PsdMatrix) -> Result<Self> {
        if h0.dim() != v.dim() {
            return Err(Error::DimensionMismatch(format!("H0 is {0}x{0} but V is {1}x{1}", h0.dim(), v.dim())));
        }
        let (h0_eigenvalues, _) = eig_hermitian(&h0)?;
        let h = h0.matrix() - &v.matrix().scale(c64(0.0, 1.0));
        let spectrum = spectrum_of(&h)?;
        let pair = Self { h0, v, h0_eigenvalues, spectrum };
        pair.spot_check_accumulative()?;
        Ok(pair)
    }

    /// Scalar pair `H0 = 0`, `V = alpha` (1x1).
    pub fn rank_one(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidInput(format!("alpha must be nonnegative, got {alpha}")));
        }
        Self::new(HermitianMatrix::zeros(1), PsdMatrix::new(HermitianMatrix::from_real_diagonal(&[alpha]))?)
    }

    pub fn h0(&self) -> &HermitianMatrix {
        &self.h0
    }

    pub fn v(&self) -> &PsdMatrix {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// `H = H0 - iV`.
    pub fn h(&self) -> ComplexMatrix {
        self.h0.matrix() - &self.v.matrix().scale(c64(0.0, 1.0))
    }

    /// `H^* = H0 + iV`.
    pub fn h_adjoint(&self) -> ComplexMatrix {
        self.h0.matrix() + &self.v.matrix().scale(c64(0.0, 1.0))
    }

    pub fn h0_eigenvalues(&self) -> &[f64] {
        &self.h0_eigenvalues
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn trace_v(&self) -> f64 {
        self.v.trace()
    }

    /// `||H0|| + ||V||`.
    pub fn norm_scale(&self) -> f64 {
        let h0 = self.h0_eigenvalues.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        h0 + self.v.norm()
    }

    /// Characteristic length of the problem: the spread of `spec(H0)`, or
    /// `||H0|| + ||V||` when that spread vanishes, never below `1e-3`.
    pub fn spectral_scale(&self) -> f64 {
        let lo = self.h0_eigenvalues.first().copied().unwrap_or(0.0);
        let hi = self.h0_eigenvalues.last().copied().unwrap_or(0.0);
        let spread = hi - lo;
        if spread > 1e-12 * self.norm_scale().max(1e-300) && spread > 0.0 {
            spread
        } else {
            self.norm_scale().max(1e-3)
        }
    }

    /// Same `H0`, perturbation replaced by `v`.
    pub fn with_v(&self, v: PsdMatrix) -> Result<Self> {
        Self::new(self.h0.clone(), v)
    }

    fn spot_check_accumulative(&self) -> Result<()> {
        let n = self.dim();
        let h = self.h();
        let tol = 1e-12 * self.norm_scale().max(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..16 {
            let x = DVector::from_fn(n, |_, _| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let x = &x / c64(x.norm().max(f64::MIN_POSITIVE), 0.0);
            let q = (x.adjoint() * h.as_dmatrix() * &x)[(0, 0)];
            if q.im > tol {
                return Err(Error::InvalidInput(format!("H is not accumulative: Im<Hx,x> = {:e}", q.im)));
            }
        }
        Ok(())
    }
}

fn pivot_threshold(m: &ComplexMatrix) -> f64 {
    PIVOT_EPS * m.frobenius_norm().max(f64::MIN_POSITIVE)
}

fn min_pivot(lu: &LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    (0..u.nrows()).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min)
}

/// `(M - zI)^{-1}`.
pub fn resolvent(m: &ComplexMatrix, z: Complex64) -> Result<ComplexMatrix> {
    let shifted = m.shift(z);
    let thr = PIVOT_EPS * (m.frobenius_norm() + z.norm()).max(f64::MIN_POSITIVE);
    let lu = shifted.0.lu();
    let pivot = min_pivot(&lu);
    if !(pivot > thr) {
        return Err(Error::SingularShift { z, pivot });
    }
    lu.try_inverse().map(ComplexMatrix).ok_or(Error::SingularShift { z, pivot })
}

/// `(log|det M|, sum of pivot arguments)`; the argument is not reduced modulo `2 pi`.
pub fn log_det(m: &ComplexMatrix) -> Result<(f64, f64)> {
    let thr = pivot_threshold(m);
    let lu = m.0.clone().lu();
    let u = lu.u();
    let mut log_modulus = 0.0;
    let mut argument = 0.0;
    for i in 0..u.nrows() {
        let p = u[(i, i)];
        if !(p.norm() > thr) {
            return Err(Error::SingularMatrix { pivot: p.norm() });
        }
        log_modulus += p.norm().ln();
        argument += p.arg();
    }
    if lu.p().determinant::<f64>() < 0.0 {
        argument += PI;
    }
    Ok((log_modulus, argument))
}

/// `log det(M - zI)` reporting `SingularShift` instead of `SingularMatrix`.
pub fn log_det_shifted(m: &ComplexMatrix, z: Complex64) -> Result<(f64, f64)> {
    log_det(&m.shift(z)).map_err(|e| match e {
        Error::SingularMatrix { pivot } => Error::SingularShift { z, pivot },
        other => other,
    })
}

/// Ascending eigenvalues and a unitary eigenbasis (columns).
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.dim();
    let eig = SymmetricEigen::try_new(h.matrix().0.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::ConvergenceFailure { routine: "hermitian eigensolver", iterations: EIG_MAX_ITER })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let basis = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((vals, ComplexMatrix(basis)))
}

fn eigenvalues_general(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(m.0.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::ConvergenceFailure { routine: "Schur decomposition", iterations: EIG_MAX_ITER })?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

fn spectrum_of(h: &ComplexMatrix) -> Result<Spectrum> {
    let mut eigenvalues = eigenvalues_general(h)?;
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let tol_imag = 1e-10 * h.op_norm();
    let is_real = eigenvalues.iter().map(|z| z.im.abs() <= tol_imag).collect();
    Ok(Spectrum { eigenvalues, is_real, tol_imag })
}

/// Spectrum of `H = H0 - iV`.
pub fn eig_general(pair: &AccumulativePair) -> Result<Spectrum> {
    spectrum_of(&pair.h())
}

/// Eigenvalues of an arbitrary square matrix.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    eigenvalues_general(m)
}

/// `f(M) = sum_j c_j (M - w_j)^{-p_j}`, refusing poles within `1e-8 ||M||` of the spectrum.
pub fn apply_rational(m: &ComplexMatrix, f: &RationalFunction) -> Result<ComplexMatrix> {
    apply_rational_with_tol(m, f, 1e-8 * m.op_norm())
}

pub fn apply_rational_with_tol(m: &ComplexMatrix, f: &RationalFunction, tol_res: f64) -> Result<ComplexMatrix> {
    let n = m.dim();
    let spec = eigenvalues_general(m)?;
    let mut out = ComplexMatrix::zeros(n);
    for term in f.terms() {
        let distance = spec.iter().map(|mu| (mu - term.pole).norm()).fold(f64::INFINITY, f64::min);
        if distance <= tol_res {
            return Err(Error::PoleNearSpectrum { pole: term.pole, distance });
        }
        let r = resolvent(m, term.pole).map_err(|_| Error::PoleNearSpectrum { pole: term.pole, distance })?;
        let mut power = r.clone();
        for _ in 1..term.order {
            power = &power * &r;
        }
        out = &out + &power.scale(term.coeff);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        c64(re, im)
    }

    fn swap() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn resolvent_scalar_and_identity() {
        let r = resolvent(&ComplexMatrix::zeros(1), c(0.0, -1.0)).unwrap();
        assert!((r.get(0, 0) - c(0.0, -1.0)).norm() < 1e-15);
        let r = resolvent(&ComplexMatrix::identity(2), c(0.0, 0.0)).unwrap();
        assert!((&r - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn resolvent_matches_adjugate() {
        // (M - z)^{-1} for M = [[0,1],[1,0]]: adj / det with det = z^2 - 1
        let z = c(0.0, 2.0);
        let r = resolvent(&swap(), z).unwrap();
        let det = z * z - c(1.0, 0.0);
        let expected = [[-z / det, -c(1.0, 0.0) / det], [-c(1.0, 0.0) / det, -z / det]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.get(i, j) - expected[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn resolvent_at_eigenvalue_is_singular() {
        let err = resolvent(&swap(), c(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::SingularShift { .. }));
    }

    #[test]
    fn log_det_examples() {
        let (lm, arg) = log_det(&ComplexMatrix::from_diagonal(&[c(2.0, 0.0)])).unwrap();
        assert_relative_eq!(lm, 2f64.ln(), epsilon = 1e-15);
        assert_eq!(arg, 0.0);
        let (lm, arg) = log_det(&ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, 1.0)])).unwrap();
        assert!(lm.abs() < 1e-15);
        assert_relative_eq!(arg, PI, epsilon = 1e-15);
        assert!(matches!(log_det(&ComplexMatrix::zeros(2)), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn log_det_tracks_permutation_sign() {
        let (lm, arg) = log_det(&swap()).unwrap();
        let det = Complex64::from_polar(lm.exp(), arg);
        assert!((det - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eig_hermitian_examples() {
        let (vals, basis) = eig_hermitian(&HermitianMatrix::from_real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        assert!((basis.get(1, 0).norm() - 1.0).abs() < 1e-15);
        let (vals, basis) = eig_hermitian(&HermitianMatrix::new(swap())).unwrap();
        assert_relative_eq!(vals[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(vals[1], 1.0, epsilon = 1e-14);
        for k in 0..2 {
            assert_relative_eq!(basis.get(0, k).norm(), 0.5f64.sqrt(), epsilon = 1e-14);
        }
        let (vals, basis) = eig_hermitian(&HermitianMatrix::from_real_diagonal(&[4.5])).unwrap();
        assert_eq!(vals, vec![4.5]);
        assert!((basis.get(0, 0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_symmetrizes_exactly() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.3), c(2.0, 1.0)], vec![c(2.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let h = HermitianMatrix::new(m.clone());
        assert_eq!(h.matrix().get(0, 1), h.matrix().get(1, 0).conj());
        assert_eq!(h.matrix().get(0, 0).im, 0.0);
        assert!(HermitianMatrix::try_new(m, 1e-12).is_err());
    }

    #[test]
    fn psd_clamps_roundoff_and_rejects_negative() {
        let v = PsdMatrix::new(HermitianMatrix::from_real_diagonal(&[1.0, -1e-14, 0.5])).unwrap();
        assert_eq!(v.eigenvalues(), &[1.0, 0.5, 0.0]);
        assert!(PsdMatrix::new(HermitianMatrix::from_real_diagonal(&[1.0, -0.1])).is_err());
    }

    #[test]
    fn eig_general_examples() {
        let s = eig_general(&AccumulativePair::rank_one(0.7).unwrap()).unwrap();
        assert!((s.eigenvalues[0] - c(0.0, -0.7)).norm() < 1e-15);
        assert!(!s.is_real[0]);

        let h0 = HermitianMatrix::from_real_diagonal(&[-1.0, 2.0]);
        let s = eig_general(&AccumulativePair::new(h0, PsdMatrix::zeros(2)).unwrap()).unwrap();
        assert!(s.is_real.iter().all(|&r| r));

        // det(H - z) = z^2 + i z - 1
        let pair = AccumulativePair::new(
            HermitianMatrix::new(swap()),
            PsdMatrix::new(HermitianMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap(),
        )
        .unwrap();
        let s = eig_general(&pair).unwrap();
        let disc = (c(-1.0, 0.0) + c(4.0, 0.0)).sqrt();
        let roots = [(c(0.0, -1.0) - disc) * 0.5, (c(0.0, -1.0) + disc) * 0.5];
        for r in roots {
            assert!(s.eigenvalues.iter().any(|e| (e - r).norm() < 1e-12));
        }
    }

    #[test]
    fn apply_rational_examples() {
        let f = RationalFunction::simple_pole(c(0.0, 2.0)).unwrap();
        let m = apply_rational(&ComplexMatrix::zeros(1), &f).unwrap();
        assert!((m.get(0, 0) - c(0.0, 0.5)).norm() < 1e-15);

        let z = c(0.5, 1.0);
        let f = RationalFunction::term(z, 2, c(1.0, 0.0)).unwrap();
        let d = [c(1.0, 0.0), c(-2.0, 0.0), c(0.25, 0.0)];
        let m = apply_rational(&ComplexMatrix::from_diagonal(&d), &f).unwrap();
        for (k, dk) in d.iter().enumerate() {
            assert!((m.get(k, k) - (dk - z).powi(-2)).norm() < 1e-14);
        }

        let err = apply_rational(&ComplexMatrix::from_diagonal(&[c(0.0, 1.0)]), &RationalFunction::simple_pole(c(0.0, 1.0)).unwrap());
        assert!(matches!(err, Err(Error::PoleNearSpectrum { .. })));
    }
}
