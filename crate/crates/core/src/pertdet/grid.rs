//! Default real grids: uniform base points refined geometrically toward
//! each eigenvalue of `H0`, keeping clear of the exclusion zones.

use serde::{Deserialize, Serialize};

use super::boundary::gap_tol;
use crate::error::{Error, Result};
use crate::linop::AccumulativePair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// Half-width of the symmetric range; derived from the pair when absent.
    pub half_width: Option<f64>,
    pub points: usize,
    pub refinement_levels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_width: None, points: 4000, refinement_levels: 8 }
    }
}

impl GridSpec {
    /// `10 max(5, ||H0|| + ||V||)`.
    pub fn default_half_width(pair: &AccumulativePair) -> f64 {
        10.0 * pair.norm_scale().max(5.0)
    }

    pub fn build(&self, pair: &AccumulativePair) -> Result<Vec<f64>> {
        let w = self.half_width.unwrap_or_else(|| Self::default_half_width(pair));
        if !(w.is_finite() && w > 0.0) || self.points < 2 {
            return Err(Error::InvalidInput("grid needs a positive half-width and at least 2 points".into()));
        }
        let spec = pair.h0_eigenvalues();
        if spec.iter().any(|e| e.abs() >= w) {
            return Err(Error::InvalidInput(format!("grid half-width {w} does not cover spec(H0)")));
        }
        let h = 2.0 * w / (self.points - 1) as f64;
        let gap = gap_tol(pair);
        let inner = 2.0 * gap;
        let mut pts: Vec<f64> = (0..self.points).map(|k| -w + k as f64 * h).collect();
        if self.refinement_levels > 0 && h > inner {
            let levels = self.refinement_levels as f64;
            for &e in spec {
                for k in 0..=self.refinement_levels {
                    let d = inner * (h / inner).powf(k as f64 / levels);
                    pts.push(e - d);
                    pts.push(e + d);
                }
            }
        }
        pts.retain(|x| x.abs() <= w && spec.iter().all(|e| (x - e).abs() >= 0.999 * inner));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * h);
        Ok(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_default_is_fifty_wide() {
        let pair = AccumulativePair::rank_one(1.0).unwrap();
        let g = GridSpec::default().build(&pair).unwrap();
        assert!((g[0] + 50.0).abs() < 1e-12 && (g[g.len() - 1] - 50.0).abs() < 1e-12);
        assert!(g.len() >= 4000);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let gap = gap_tol(&pair);
        assert!(g.iter().all(|x| x.abs() > gap));
        // refined down toward the excluded zone
        let closest = g.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        assert!(closest < 3.0 * gap);
    }
}
