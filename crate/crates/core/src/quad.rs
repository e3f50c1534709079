//! Globally adaptive Gauss-Kronrod (10/21) quadrature for complex-valued
//! integrands on unions of finite pieces and half-lines.
//!
//! Finite pieces are integrated through the cubic map
//! `x = a + (b - a) t^2 (3 - 2t)`, whose Jacobian vanishes at both ends, so
//! integrable logarithmic and inverse-square-root endpoint singularities do
//! not stall the bisection. Half-lines use `x = a + t / (1 - t)`.

#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_subdivisions: 40_000 }
    }
}

impl QuadConfig {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// A piece of the integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// `[a, b]` through the endpoint-flattening cubic map.
    Finite(f64, f64),
    /// `[a, b]` with no substitution.
    Plain(f64, f64),
    /// `[a, +inf)`.
    Upper(f64),
    /// `(-inf, b]`.
    Lower(f64),
}

impl Piece {
    /// Maps `t in [0, 1]` to `(x, dx/dt)`.
    fn map(&self, t: f64) -> (f64, f64) {
        match *self {
            Piece::Finite(a, b) => {
                let h = b - a;
                (a + h * t * t * (3.0 - 2.0 * t), h * 6.0 * t * (1.0 - t))
            }
            Piece::Plain(a, b) => (a + (b - a) * t, b - a),
            Piece::Upper(a) => {
                let s = 1.0 - t;
                (a + t / s, 1.0 / (s * s))
            }
            Piece::Lower(b) => {
                let s = 1.0 - t;
                (b - t / s, 1.0 / (s * s))
            }
        }
    }
}

struct Segment {
    piece: usize,
    t0: f64,
    t1: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> Complex64>(f: &F, piece: &Piece, t0: f64, t1: f64) -> (Complex64, f64) {
    let center = 0.5 * (t0 + t1);
    let half = 0.5 * (t1 - t0);
    let eval = |t: f64| {
        let (x, jac) = piece.map(t);
        if jac == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            f(x) * jac
        }
    };
    let fc = eval(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_k = fc.norm() * WGK[10];
    let mut vals = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for (j, &x) in XGK[..10].iter().enumerate() {
        let f1 = eval(center - half * x);
        let f2 = eval(center + half * x);
        vals[j] = (f1, f2);
        kronrod += (f1 + f2) * WGK[j];
        abs_k += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = (fc - mean).norm() * WGK[10];
    for (j, (f1, f2)) in vals.iter().enumerate() {
        asc += ((f1 - mean).norm() + (f2 - mean).norm()) * WGK[j];
    }
    let value = kronrod * half;
    let resasc = asc * half.abs();
    let resabs = abs_k * half.abs();
    let mut err = ((kronrod - gauss) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Integrates `f` over the union of `pieces`.
pub fn integrate_pieces<F: Fn(f64) -> Complex64>(f: F, pieces: &[Piece], cfg: QuadConfig) -> Result<Quadrature> {
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for (k, p) in pieces.iter().enumerate() {
        if let Piece::Finite(a, b) | Piece::Plain(a, b) = p {
            if a == b {
                continue;
            }
        }
        let (v, e) = gk21(&f, p, 0.0, 1.0);
        evaluations += 21;
        total += v;
        total_err += e;
        heap.push(Segment { piece: k, t0: 0.0, t1: 1.0, value: v, error: e });
    }
    let mut subdivisions = heap.len();
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.norm());
        if total_err <= tol || heap.is_empty() {
            break;
        }
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::QuadratureBudgetExceeded { estimate: f64::INFINITY, evaluations });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::QuadratureBudgetExceeded { estimate: total_err, evaluations });
        }
        let seg = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (seg.t0 + seg.t1);
        if mid <= seg.t0 || mid >= seg.t1 {
            // interval collapsed to machine resolution; accept its contribution as is
            heap.push(Segment { error: 0.0, ..seg });
            total_err = heap.iter().map(|s| s.error).sum();
            continue;
        }
        let piece = &pieces[seg.piece];
        let (v1, e1) = gk21(&f, piece, seg.t0, mid);
        let (v2, e2) = gk21(&f, piece, mid, seg.t1);
        evaluations += 42;
        subdivisions += 1;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { piece: seg.piece, t0: seg.t0, t1: mid, value: v1, error: e1 });
        heap.push(Segment { piece: seg.piece, t0: mid, t1: seg.t1, value: v2, error: e2 });
        if subdivisions % 256 == 0 {
            // refresh the running sums against drift
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: Complex64 = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Quadrature { value, error, evaluations })
}

/// [`integrate_pieces`] for fallible integrands; the first error aborts the result.
pub fn try_integrate_pieces<F: Fn(f64) -> Result<Complex64>>(f: F, pieces: &[Piece], cfg: QuadConfig) -> Result<Quadrature> {
    let failure = RefCell::new(None);
    let q = integrate_pieces(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        pieces,
        cfg,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => q,
    }
}

/// Finite pieces between consecutive points.
pub fn pieces_between(points: &[f64]) -> Vec<Piece> {
    points.windows(2).map(|w| Piece::Finite(w[0], w[1])).collect()
}

/// Two half-lines plus the finite pieces between sorted `breaks`.
pub fn pieces_line(breaks: &[f64]) -> Vec<Piece> {
    let mut pieces = Vec::with_capacity(breaks.len() + 1);
    if breaks.is_empty() {
        pieces.push(Piece::Lower(0.0));
        pieces.push(Piece::Upper(0.0));
    } else {
        pieces.push(Piece::Lower(breaks[0]));
        pieces.extend(pieces_between(breaks));
        pieces.push(Piece::Upper(breaks[breaks.len() - 1]));
    }
    pieces
}

/// `int_a^b f`, with endpoint singularities allowed.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<Quadrature> {
    integrate_pieces(f, &[Piece::Finite(a, b)], cfg)
}

/// `int f` over `[points[0], points[last]]`, split at every interior point.
pub fn integrate_between<F: Fn(f64) -> Complex64>(f: F, points: &[f64], cfg: QuadConfig) -> Result<Quadrature> {
    integrate_pieces(f, &pieces_between(points), cfg)
}

/// `int_R f`, split at `breaks` (sorted), with both half-lines mapped to finite intervals.
pub fn integrate_line<F: Fn(f64) -> Complex64>(f: F, breaks: &[f64], cfg: QuadConfig) -> Result<Quadrature> {
    integrate_pieces(f, &pieces_line(breaks), cfg)
}

/// Sorted, deduplicated breakpoints: the given singular points plus a
/// geometric ladder `+-scale * 4^k` out to `+-reach`.
pub fn ladder_breaks(singular: &[f64], scale: f64, reach: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = singular.iter().copied().filter(|x| x.is_finite()).collect();
    let mut r = scale.max(1e-6);
    while r < reach {
        pts.push(r);
        pts.push(-r);
        r *= 4.0;
    }
    pts.push(reach);
    pts.push(-reach);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    pts
}

/// Nodes and weights of the 10-point Gauss-Legendre rule on `[a, b]`,
/// in increasing node order.
pub fn gauss_legendre_nodes(a: f64, b: f64) -> [(f64, f64); 10] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 10];
    for j in 0..5 {
        let x = XGK[2 * j + 1];
        out[j] = (c - h * x, h * WG[j]);
        out[9 - j] = (c + h * x, h * WG[j]);
    }
    out
}

/// 10-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..5 {
        let x = XGK[2 * j + 1];
        acc += (f(c - h * x) + f(c + h * x)) * WG[j];
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| re(x * x * x - 2.0 * x), -1.0, 2.0, QuadConfig::default()).unwrap();
        assert!((q.value.re - 0.75).abs() < 1e-13);
    }

    #[test]
    fn log_endpoint_singularity() {
        let q = integrate(|x| re(x.ln()), 0.0, 1.0, QuadConfig::default()).unwrap();
        assert!((q.value.re + 1.0).abs() < 1e-11, "{:?}", q);
        let q = integrate(|x| re(1.0 / x.sqrt()), 0.0, 1.0, QuadConfig::default()).unwrap();
        assert!((q.value.re - 2.0).abs() < 1e-10, "{:?}", q);
    }

    #[test]
    fn whole_line_lorentzian() {
        let q = integrate_line(|x| re(1.0 / (1.0 + x * x)), &[-1.0, 1.0], QuadConfig::default()).unwrap();
        assert!((q.value.re - PI).abs() < 1e-11);
    }

    #[test]
    fn complex_cauchy_kernel() {
        // int 1/((x - i)(x + 2i)) dx over R = 2 pi i Res_{x=i} = 2 pi i / (3i)
        let f = |x: f64| 1.0 / ((re(x) - Complex64::i()) * (re(x) + 2.0 * Complex64::i()));
        let q = integrate_line(f, &ladder_breaks(&[], 1.0, 100.0), QuadConfig::default()).unwrap();
        assert!((q.value - re(2.0 * PI / 3.0)).norm() < 1e-10, "{:?}", q.value);
    }

    #[test]
    fn gauss_legendre_degree_19() {
        let v = gauss_legendre(|x| re(x.powi(19) + x.powi(18)), -1.0, 1.0);
        assert!((v.re - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = QuadConfig { max_subdivisions: 3, ..QuadConfig::default() };
        let err = integrate(|x| re((50.0 * x).sin() / (x + 1e-3)), 0.0, 1.0, cfg).unwrap_err();
        assert!(matches!(err, Error::QuadratureBudgetExceeded { .. }));
    }
}
