//! Growth of `int_0^1 xi_N` for diagonal pairs `H0 = 0`, `V = diag(alpha_n)`,
//! where `xi_N = (1/pi) sum_n arctan(alpha_n / lambda)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};

/// Coupling sequence `alpha_n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaRule {
    /// `1 / (n ln^q (n + 1))`: summable for `q > 1`, with
    /// `sum alpha ln alpha` divergent for `q <= 2`.
    LogPower { q: f64 },
    /// `n^-p`: never both summable and of divergent entropy.
    Power { p: f64 },
    /// A finite list of couplings.
    Explicit { values: Vec<f64> },
    /// All couplings vanish.
    Zero,
}

impl Default for AlphaRule {
    fn default() -> Self {
        AlphaRule::LogPower { q: 2.0 }
    }
}

impl AlphaRule {
    /// Summable with `sum alpha_n ln alpha_n` divergent; finite lists only
    /// need non-negative entries and the zero rule is always accepted.
    pub fn check_admissible(&self) -> Result<()> {
        let reject = |reason: String| Err(Error::RuleNotAdmissible { reason });
        match self {
            AlphaRule::LogPower { q } if !(*q > 1.0) => reject(format!("q = {q} <= 1 makes the sum diverge")),
            AlphaRule::LogPower { q } if *q > 2.0 => reject(format!("q = {q} > 2 makes sum alpha ln alpha converge")),
            AlphaRule::LogPower { .. } => Ok(()),
            AlphaRule::Power { p } if *p <= 1.0 => reject(format!("p = {p} <= 1 makes the sum diverge")),
            AlphaRule::Power { p } => reject(format!("p = {p} > 1 makes sum alpha ln alpha converge")),
            AlphaRule::Explicit { values } if values.iter().any(|a| !(a.is_finite() && *a >= 0.0)) => {
                reject("couplings must be finite and non-negative".into())
            }
            AlphaRule::Explicit { .. } | AlphaRule::Zero => Ok(()),
        }
    }

    pub fn alpha(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidInput("couplings are indexed from 1".into()));
        }
        let x = n as f64;
        match self {
            AlphaRule::LogPower { q } => Ok(1.0 / (x * (x + 1.0).ln().powf(*q))),
            AlphaRule::Power { p } => Ok(x.powf(-p)),
            AlphaRule::Explicit { values } => values
                .get(n - 1)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("only {} explicit couplings", values.len()))),
            AlphaRule::Zero => Ok(0.0),
        }
    }
}

/// `int_0^1 arctan(alpha / lambda) d lambda / pi` in closed form.
fn closed_form_term(alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    (0.5 * alpha * alpha.mul_add(alpha, 1.0).ln() + alpha.atan() - alpha * alpha.ln()) / PI
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub n: usize,
    pub closed_form: f64,
    pub quadrature: f64,
}

/// `int_0^1 xi_N` for each `N` in increasing `n_values`, by the per-term
/// closed form and by direct quadrature of the summed `xi_N`.
pub fn divergence_study(rule: &AlphaRule, n_values: &[usize]) -> Result<Vec<DivergenceRow>> {
    rule.check_admissible()?;
    if n_values.is_empty() || n_values[0] == 0 || n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("N values must be positive and increasing".into()));
    }
    let n_max = n_values[n_values.len() - 1];
    let alphas = (1..=n_max).map(|n| rule.alpha(n)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(n_values.len());
    let mut closed = 0.0;
    let mut done = 0;
    for &n in n_values {
        closed += alphas[done..n].iter().map(|&a| closed_form_term(a)).sum::<f64>();
        done = n;
        rows.push(DivergenceRow { n, closed_form: closed, quadrature: quadrature_xi(&alphas[..n])? });
    }
    Ok(rows)
}

fn quadrature_xi(alphas: &[f64]) -> Result<f64> {
    let positive: Vec<f64> = alphas.iter().copied().filter(|a| *a > 0.0).collect();
    if positive.is_empty() {
        return Ok(0.0);
    }
    let smallest = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let mut breaks = vec![0.0];
    let mut r = (0.1 * smallest).min(0.5);
    while r < 1.0 {
        breaks.push(r);
        r *= 2.0;
    }
    breaks.push(1.0);
    let xi = |lambda: f64| Complex64::new(positive.iter().map(|a| (a / lambda).atan()).sum::<f64>() / PI, 0.0);
    let q = quad::integrate_between(xi, &breaks, QuadConfig::with_tol(1e-14, 1e-12))?;
    Ok(q.value.re)
}

/// `(S_N - S_N0) / (L_N - L_N0)` for rows after the first, with
/// `L_N = ln ln (N + 1) / pi` the growth of the default rule.
pub fn growth_ratio(rows: &[DivergenceRow]) -> Vec<(usize, f64)> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let level = |n: usize| ((n as f64 + 1.0).ln()).ln() / PI;
    rows[1..]
        .iter()
        .map(|r| (r.n, (r.closed_form - first.closed_form) / (level(r.n) - level(first.n))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_matches_arctan_integral() {
        let a = 1.0 / 2f64.ln().powi(2);
        let expected = (0.5 * a * (1.0 + a * a).ln() + a.atan() - a * a.ln()) / PI;
        let rows = divergence_study(&AlphaRule::default(), &[1]).unwrap();
        assert!((rows[0].closed_form - expected).abs() < 1e-15);
        assert!((rows[0].quadrature - expected).abs() < 1e-10);
        // alpha = 1 gives (ln 2 / 2 + pi / 4) / pi
        let rows = divergence_study(&AlphaRule::Explicit { values: vec![1.0] }, &[1]).unwrap();
        assert!((rows[0].closed_form - (0.5 * 2f64.ln() + PI / 4.0) / PI).abs() < 1e-15);
    }

    #[test]
    fn default_rule_grows_without_bound() {
        let rows = divergence_study(&AlphaRule::default(), &[10, 100, 1000]).unwrap();
        for r in &rows {
            assert!((r.closed_form - r.quadrature).abs() < 1e-6, "{:?}", r);
        }
        assert!(rows.windows(2).all(|w| w[1].closed_form > w[0].closed_form));
        for (_, ratio) in growth_ratio(&rows) {
            assert!(ratio > 0.5, "{ratio}");
        }
    }

    #[test]
    fn zero_rule_gives_zero() {
        let rows = divergence_study(&AlphaRule::Zero, &[1, 5]).unwrap();
        assert!(rows.iter().all(|r| r.closed_form == 0.0 && r.quadrature == 0.0));
    }

    #[test]
    fn inadmissible_rules_are_rejected() {
        for rule in [AlphaRule::Power { p: 2.0 }, AlphaRule::Power { p: 0.5 }, AlphaRule::LogPower { q: 3.0 }, AlphaRule::LogPower { q: 1.0 }] {
            assert!(matches!(divergence_study(&rule, &[3]), Err(Error::RuleNotAdmissible { .. })));
        }
    }
}
