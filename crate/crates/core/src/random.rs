//! Seeded random test pairs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linop::{AccumulativePair, ComplexMatrix, HermitianMatrix, PsdMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Gaussian Hermitian matrix scaled to unit spectral norm.
pub fn hermitian_unit(rng: &mut impl Rng, dim: usize) -> Result<HermitianMatrix> {
    let g = gaussian(rng, dim, dim);
    let h = HermitianMatrix::new(ComplexMatrix::from_dmatrix(&g + g.adjoint())?);
    let norm = h.op_norm().max(f64::MIN_POSITIVE);
    Ok(HermitianMatrix::new(h.matrix().scale(Complex64::new(1.0 / norm, 0.0))))
}

/// `W W^*` with `W` Gaussian of `rank` columns, scaled to `tr V = trace`.
pub fn psd_with_rank(rng: &mut impl Rng, dim: usize, rank: usize, trace: f64) -> Result<PsdMatrix> {
    let w = gaussian(rng, dim, rank.max(1));
    let v = &w * w.adjoint();
    let tr = v.trace().re.max(f64::MIN_POSITIVE);
    let v = ComplexMatrix::from_dmatrix(v * Complex64::new(trace / tr, 0.0))?;
    PsdMatrix::new(HermitianMatrix::new(v))
}

/// `||H0|| = 1`, `tr V = 1`, `rank V` uniform in `1..=dim`.
pub fn random_pair(rng: &mut impl Rng, dim: usize) -> Result<AccumulativePair> {
    let h0 = hermitian_unit(rng, dim)?;
    let rank = rng.random_range(1..=dim);
    let v = psd_with_rank(rng, dim, rank, 1.0)?;
    AccumulativePair::new(h0, v)
}

/// Random pair of the given dimension from a fixed seed.
pub fn seeded_pair(dim: usize, seed: u64) -> Result<AccumulativePair> {
    random_pair(&mut rng(seed), dim)
}
