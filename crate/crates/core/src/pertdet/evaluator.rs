//! Interchangeable evaluators of `log det_{H/H0}(z)`.
//!
//! Every evaluator returns *a* logarithm; only the imaginary part modulo
//! `2 pi` is guaranteed. Branch continuity is imposed by the path
//! continuation in [`super::path`].

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linop::{self, AccumulativePair, ComplexMatrix};

pub trait DetEvaluator: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Some logarithm of `det(H - z) / det(H0 - z)`.
    fn log_det(&self, z: Complex64) -> Result<Complex64>;

    /// Radius beyond which the far-field expansion is used.
    fn far_radius(&self) -> f64;

    /// Zeros and poles: the eigenvalues of both matrices.
    fn singularities(&self) -> &[Complex64];
}

/// `log det_{H/H0}(z) = -sum_m (tr H^m - tr H0^m) / (m z^m)`, truncated.
///
/// The series is the branch that vanishes at infinity, so wherever it is
/// used it already carries the continuous argument.
#[derive(Debug, Clone)]
pub struct FarField {
    coeffs: Vec<Complex64>,
    radius: f64,
}

impl FarField {
    const TERMS: usize = 24;

    pub fn new(h_eigs: &[Complex64], h0_eigs: &[Complex64], spectral_radius: f64) -> Self {
        let coeffs = (1..=Self::TERMS)
            .map(|m| {
                let ph: Complex64 = h_eigs.iter().map(|z| z.powi(m as i32)).sum();
                let p0: Complex64 = h0_eigs.iter().map(|z| z.powi(m as i32)).sum();
                -(ph - p0) / m as f64
            })
            .collect();
        Self { coeffs, radius: 6.0 * spectral_radius.max(1e-12) }
    }

    pub fn for_pair(pair: &AccumulativePair) -> Self {
        let h: Vec<Complex64> = pair.spectrum().eigenvalues.clone();
        let h0: Vec<Complex64> = pair.h0_eigenvalues().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let rho = h.iter().chain(&h0).map(|z| z.norm()).fold(0.0, f64::max);
        Self::new(&h, &h0, rho)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn covers(&self, z: Complex64) -> bool {
        z.norm() >= self.radius
    }

    pub fn log_det(&self, z: Complex64) -> Complex64 {
        let w = 1.0 / z;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = (acc + c) * w;
        }
        acc
    }
}

/// Two pivoted LU factorizations: `log det(H - z) - log det(H0 - z)`.
#[derive(Debug, Clone)]
pub struct LuEvaluator {
    h0: ComplexMatrix,
    h: ComplexMatrix,
    far: Option<FarField>,
    singular: Vec<Complex64>,
}

impl LuEvaluator {
    pub fn new(pair: &AccumulativePair) -> Self {
        Self {
            h0: pair.h0().matrix().clone(),
            h: pair.h(),
            far: Some(FarField::for_pair(pair)),
            singular: pair_singularities(pair),
        }
    }

    /// Generic pair of square matrices, no far-field shortcut.
    pub fn from_matrices(h0: ComplexMatrix, h: ComplexMatrix) -> Result<Self> {
        if h0.dim() != h.dim() {
            return Err(Error::DimensionMismatch("evaluator matrices differ in size".into()));
        }
        let mut singular = linop::eigenvalues(&h0)?;
        singular.extend(linop::eigenvalues(&h)?);
        Ok(Self { h0, h, far: None, singular })
    }
}

impl DetEvaluator for LuEvaluator {
    fn name(&self) -> &'static str {
        "lu"
    }

    fn log_det(&self, z: Complex64) -> Result<Complex64> {
        if let Some(far) = self.far.as_ref().filter(|f| f.covers(z)) {
            return Ok(far.log_det(z));
        }
        let (mh, ah) = linop::log_det_shifted(&self.h, z)?;
        let (m0, a0) = linop::log_det_shifted(&self.h0, z)?;
        Ok(Complex64::new(mh - m0, ah - a0))
    }

    fn far_radius(&self) -> f64 {
        self.far.as_ref().map_or(f64::INFINITY, |f| f.radius())
    }

    fn singularities(&self) -> &[Complex64] {
        &self.singular
    }
}

fn pair_singularities(pair: &AccumulativePair) -> Vec<Complex64> {
    let mut s: Vec<Complex64> = pair.h0_eigenvalues().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    s.extend(pair.spectrum().eigenvalues.iter().copied());
    s
}

/// Products over precomputed eigenvalues:
/// `sum_k Log(mu_k - z) - sum_j Log(lambda_j - z)`.
///
/// With every `mu_k` and `lambda_j` in the closed lower half-plane each
/// principal logarithm is continuous on the upper half-plane, so this
/// evaluator returns the continuous branch there directly.
#[derive(Debug, Clone)]
pub struct SpectralEvaluator {
    h_eigs: Vec<Complex64>,
    h0_eigs: Vec<f64>,
    far: FarField,
    singular: Vec<Complex64>,
}

impl SpectralEvaluator {
    pub fn new(pair: &AccumulativePair) -> Self {
        Self {
            h_eigs: pair.spectrum().eigenvalues.clone(),
            h0_eigs: pair.h0_eigenvalues().to_vec(),
            far: FarField::for_pair(pair),
            singular: pair_singularities(pair),
        }
    }
}

impl DetEvaluator for SpectralEvaluator {
    fn name(&self) -> &'static str {
        "spectral"
    }

    fn log_det(&self, z: Complex64) -> Result<Complex64> {
        if self.far.covers(z) {
            return Ok(self.far.log_det(z));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (mu, lam) in self.h_eigs.iter().zip(&self.h0_eigs) {
            let a = mu - z;
            let b = Complex64::new(*lam, 0.0) - z;
            if a.norm() == 0.0 || b.norm() == 0.0 {
                return Err(Error::SingularShift { z, pivot: 0.0 });
            }
            acc += a.ln() - b.ln();
        }
        Ok(acc)
    }

    fn far_radius(&self) -> f64 {
        self.far.radius()
    }

    fn singularities(&self) -> &[Complex64] {
        &self.singular
    }
}

type EvaluatorCtor = fn(&AccumulativePair) -> Arc<dyn DetEvaluator>;

const REGISTRY: &[(&str, EvaluatorCtor)] = &[
    ("lu", |p| Arc::new(LuEvaluator::new(p))),
    ("spectral", |p| Arc::new(SpectralEvaluator::new(p))),
];

/// Names accepted by [`evaluator`].
pub fn evaluator_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _)| *n)
}

/// Looks up an evaluator by name.
pub fn evaluator(name: &str, pair: &AccumulativePair) -> Result<Arc<dyn DetEvaluator>> {
    REGISTRY
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ctor)| ctor(pair))
        .ok_or_else(|| Error::InvalidInput(format!("unknown determinant evaluator '{name}'")))
}

pub const DEFAULT_EVALUATOR: &str = "lu";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded_pair;
    use std::f64::consts::PI;

    fn wrap(x: f64) -> f64 {
        let y = (x + PI).rem_euclid(2.0 * PI) - PI;
        if y == -PI { PI } else { y }
    }

    #[test]
    fn evaluators_agree_modulo_two_pi() {
        let pair = seeded_pair(5, 11).unwrap();
        let lu = evaluator("lu", &pair).unwrap();
        let sp = evaluator("spectral", &pair).unwrap();
        for z in [Complex64::new(0.3, 0.2), Complex64::new(-1.5, 0.01), Complex64::new(0.1, -0.4), Complex64::new(2.0, 3.0)] {
            let a = lu.log_det(z).unwrap();
            let b = sp.log_det(z).unwrap();
            assert!((a.re - b.re).abs() < 1e-10, "{z}: {a} vs {b}");
            assert!(wrap(a.im - b.im).abs() < 1e-10, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn far_field_matches_direct_evaluation() {
        let pair = seeded_pair(4, 3).unwrap();
        let far = FarField::for_pair(&pair);
        let lu = LuEvaluator::from_matrices(pair.h0().matrix().clone(), pair.h()).unwrap();
        for z in [Complex64::new(far.radius(), 0.0), Complex64::new(-far.radius() * 1.5, 0.3), Complex64::new(0.0, far.radius())] {
            let a = far.log_det(z);
            let b = lu.log_det(z).unwrap();
            assert!((a.re - b.re).abs() < 1e-13 && wrap(a.im - b.im).abs() < 1e-13, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn unknown_name_is_rejected() {
        let pair = AccumulativePair::rank_one(1.0).unwrap();
        assert!(evaluator("qr", &pair).is_err());
        assert_eq!(evaluator_names().collect::<Vec<_>>(), vec!["lu", "spectral"]);
    }
}
