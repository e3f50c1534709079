//! Rational functions vanishing at infinity, stored as partial fractions
//! `sum_j c_j (x - w_j)^(-p_j)` with every pole off the real axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum distance of a pole from the real axis.
pub const MIN_POLE_IMAG: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub order: u32,
    pub coeff: Complex64,
}

impl PoleTerm {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeff * (x - self.pole).powi(-(self.order as i32))
    }

    pub fn in_upper(&self) -> bool {
        self.pole.im > 0.0
    }
}

/// Element of span{x -> (x - w)^-k : k >= 1, w off the real line}.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PoleTerm>", into = "Vec<PoleTerm>")]
pub struct RationalFunction {
    terms: Vec<PoleTerm>,
}

impl TryFrom<Vec<PoleTerm>> for RationalFunction {
    type Error = Error;

    fn try_from(terms: Vec<PoleTerm>) -> Result<Self> {
        let mut f = RationalFunction::zero();
        for t in terms {
            f.push(t.pole, t.order, t.coeff)?;
        }
        Ok(f)
    }
}

impl From<RationalFunction> for Vec<PoleTerm> {
    fn from(f: RationalFunction) -> Self {
        f.terms
    }
}

impl RationalFunction {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// `coeff * (x - pole)^(-order)`.
    pub fn term(pole: Complex64, order: u32, coeff: Complex64) -> Result<Self> {
        let mut f = Self::zero();
        f.push(pole, order, coeff)?;
        Ok(f)
    }

    /// `(x - pole)^(-1)`.
    pub fn simple_pole(pole: Complex64) -> Result<Self> {
        Self::term(pole, 1, Complex64::new(1.0, 0.0))
    }

    pub fn push(&mut self, pole: Complex64, order: u32, coeff: Complex64) -> Result<()> {
        if order == 0 {
            return Err(Error::InvalidInput("pole order must be at least 1".into()));
        }
        if !(pole.re.is_finite() && pole.im.is_finite() && coeff.re.is_finite() && coeff.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite pole or coefficient".into()));
        }
        if pole.im.abs() <= MIN_POLE_IMAG {
            return Err(Error::InvalidInput(format!("pole {pole} lies on the real axis")));
        }
        match self.terms.iter_mut().find(|t| t.pole == pole && t.order == order) {
            Some(t) => t.coeff += coeff,
            None => self.terms.push(PoleTerm { pole, order, coeff }),
        }
        Ok(())
    }

    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    /// Symbolic derivative: `c (x-w)^-p` becomes `-p c (x-w)^-(p+1)`.
    pub fn derivative(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PoleTerm {
                pole: t.pole,
                order: t.order + 1,
                coeff: -(t.order as f64) * t.coeff,
            })
            .collect();
        Self { terms }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|t| PoleTerm { coeff: t.coeff * s, ..*t }).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            // both operands already satisfy the term invariants
            out.push(t.pole, t.order, t.coeff).expect("validated term");
        }
        out
    }

    /// Keeps the terms accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&PoleTerm) -> bool) -> Self {
        Self { terms: self.terms.iter().filter(|t| keep(t)).copied().collect() }
    }

    pub fn map_coeffs(&self, g: impl Fn(&PoleTerm) -> Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|t| PoleTerm { coeff: g(t), ..*t }).collect(),
        }
    }

    pub fn poles(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.terms.iter().map(|t| t.pole)
    }

    /// Smallest pole order, which fixes the decay rate `|x|^-order` at infinity.
    pub fn min_order(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.order).min()
    }

    /// Largest pole order.
    pub fn max_order(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.order).max()
    }
}
