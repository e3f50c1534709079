//! Branch-continuous logarithms along polygonal paths.
//!
//! Continuation is sequential by nature: each accepted point fixes the
//! branch for the next one.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Bisection depth cap per path segment.
pub const MAX_REFINEMENT_DEPTH: usize = 60;

/// Largest accepted segment length relative to its distance from the
/// singular set. Bounds the angle each singular factor subtends.
const STEP_TO_DISTANCE: f64 = 0.2;

/// Folds an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Principal logarithm: imaginary part folded into `(-pi, pi]`.
pub fn principal(log: Complex64) -> Complex64 {
    Complex64::new(log.re, wrap_angle(log.im))
}

/// Continues `log f` along `path`, starting from the given value at
/// `path[0]`. `eval` may return any branch at each point; `singular` lists
/// the zeros and poles of `f`.
///
/// A segment is accepted when it is short against its distance from
/// `singular`, the argument moves by less than `pi/2` over each half, and
/// the halves agree with the whole; otherwise it is bisected.
pub fn continue_log<F>(eval: F, path: &[Complex64], start: Complex64, singular: &[Complex64]) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut out = Vec::with_capacity(path.len());
    if path.is_empty() {
        return Ok(out);
    }
    out.push(start);
    for w in path.windows(2) {
        let prev = *out.last().expect("non-empty");
        out.push(refine(&eval, singular, w[0], prev, w[1], 0)?);
    }
    Ok(out)
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let ab = b - a;
    let t = ((p - a) * ab.conj()).re / ab.norm_sqr();
    (a + ab * t.clamp(0.0, 1.0) - p).norm()
}

fn refine<F>(eval: &F, singular: &[Complex64], a: Complex64, log_a: Complex64, b: Complex64, depth: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if a == b {
        return Ok(log_a);
    }
    let m = 0.5 * (a + b);
    let len = (b - a).norm();
    let short = singular.iter().all(|&s| len <= STEP_TO_DISTANCE * segment_distance(a, b, s));
    if short {
        let raw_b = eval(b)?;
        let d = wrap_angle(raw_b.im - log_a.im);
        if d.abs() < FRAC_PI_2 {
            let raw_m = eval(m)?;
            let d1 = wrap_angle(raw_m.im - log_a.im);
            let d2 = wrap_angle(raw_b.im - raw_m.im);
            if d1.abs() < FRAC_PI_2 && d2.abs() < FRAC_PI_2 && (d1 + d2 - d).abs() < 1.0 {
                return Ok(Complex64::new(raw_b.re, log_a.im + d));
            }
        }
    }
    if depth >= MAX_REFINEMENT_DEPTH || m == a || m == b {
        return Err(Error::BranchStepTooLarge { z: b });
    }
    let log_m = refine(eval, singular, a, log_a, m, depth + 1)?;
    refine(eval, singular, m, log_m, b, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wrap_stays_in_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert!((wrap_angle(-0.3) + 0.3).abs() < 1e-15);
    }

    #[test]
    fn winds_around_a_zero() {
        // log z around the unit circle gains 2 pi
        let path: Vec<Complex64> = (0..=8).map(|k| Complex64::from_polar(1.0, k as f64 * PI / 4.0)).collect();
        let logs = continue_log(|z| Ok(z.ln()), &path, c(0.0, 0.0), &[c(0.0, 0.0)]).unwrap();
        assert!((logs.last().unwrap().im - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn coarse_steps_are_refined() {
        // a single step across three quarters of a turn
        let path = [c(1.0, 0.0), c(-1.0, 1e-3), c(0.0, -1.0)];
        let logs = continue_log(|z| Ok(z.ln()), &path, c(0.0, 0.0), &[c(0.0, 0.0)]).unwrap();
        assert!((logs[2].im - 1.5 * PI).abs() < 1e-9, "{:?}", logs);
    }
}
