//! Adaptive Gauss–Kronrod quadrature and half-line integration.
//!
//! Finite intervals are handled by a globally adaptive 21-point Kronrod rule
//! (10-point Gauss embedded). Half-line integrals `∫_a^∞ f` use one of two
//! tail strategies:
//!
//! * [`Tail::Algebraic`]: the map `s = a σ^{-k}` sends `[a, ∞)` onto `(0, 1]`.
//!   When `f(s) ~ s^{-(1 + 1/k)}` the transformed integrand tends to a constant
//!   at `σ = 0`, so no truncation is needed.
//! * [`Tail::Doubling`]: integrate over `[a, 2a], [2a, 4a], …` until the last
//!   piece is negligible relative to the running total.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_632_860,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Rounding level of `error`.
    floor: f64,
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for (j, &wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += wg * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Segment { a, b, value, error, floor }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol·|I|)`,
/// or within twice its rounding level, or once `max_segments` segments have
/// been created; `converged` is false only in the last case.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, converged: true };
    }
    let mut segments = vec![kronrod21(&mut f, a, b)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let floor: f64 = segments.iter().map(|s| s.floor).sum();
        let target = abs_tol.max(rel_tol * value.abs()).max(2.0 * floor);
        if !value.is_finite() {
            return QuadResult { value, error, converged: false };
        }
        if error <= target {
            return QuadResult { value, error, converged: true };
        }
        if segments.len() >= max_segments {
            return QuadResult { value, error, converged: false };
        }
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // Interval exhausted at machine precision.
            segments.push(seg);
            let value: f64 = segments.iter().map(|s| s.value).sum();
            let error: f64 = segments.iter().map(|s| s.error).sum();
            return QuadResult { value, error, converged: false };
        }
        segments.push(kronrod21(&mut f, seg.a, mid));
        segments.push(kronrod21(&mut f, mid, seg.b));
    }
}

/// How the unbounded part of a half-line integral is treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Exact compactification `s = a σ^{-k}`.
    Algebraic { k: f64 },
    /// Geometric truncation `[a 2^j, a 2^{j+1}]` until the increment is negligible.
    Doubling { max_doublings: usize },
}

const MAX_SEGMENTS: usize = 400;

/// One 21-point Kronrod panel over `[a, b]`: `(value, error estimate)`.
pub(crate) fn panel(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let s = kronrod21(&mut f, a, b);
    (s.value, s.error)
}

/// `∫_a^b f` with a hard failure when the error target is missed by a wide margin.
pub(crate) fn finite(f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let r = integrate(f, a, b, 1e-300, rel_tol, MAX_SEGMENTS);
    if !r.value.is_finite() {
        return Err(Error::QuadratureFailure(format!("non-finite integral over [{a}, {b}]")));
    }
    if !r.converged && r.error > 1e4 * rel_tol * r.value.abs().max(1e-300) {
        return Err(Error::QuadratureFailure(format!(
            "no convergence over [{a}, {b}]: estimate {} ± {}",
            r.value, r.error
        )));
    }
    Ok(r.value)
}

/// `∫_a^∞ f` for `a > 0` and a nonnegative integrand.
pub(crate) fn half_line(mut f: impl FnMut(f64) -> f64, a: f64, tail: Tail, rel_tol: f64) -> Result<f64> {
    debug_assert!(a > 0.0);
    match tail {
        Tail::Algebraic { k } => {
            let g = |sigma: f64| {
                if sigma <= 0.0 {
                    return 0.0;
                }
                let s = a * sigma.powf(-k);
                if !s.is_finite() {
                    return 0.0;
                }
                let fs = f(s);
                if fs == 0.0 {
                    0.0
                } else {
                    fs * (k * s / sigma)
                }
            };
            finite(g, 0.0, 1.0, rel_tol)
        }
        Tail::Doubling { max_doublings } => {
            let mut total = 0.0;
            let mut lo = a;
            for j in 0..max_doublings {
                let hi = 2.0 * lo;
                let piece = finite(&mut f, lo, hi, rel_tol)?;
                total += piece;
                if j >= 1 && piece.abs() <= 0.1 * rel_tol * total.abs() {
                    return Ok(total);
                }
                lo = hi;
            }
            Err(Error::QuadratureFailure(format!(
                "tail did not stabilize after {max_doublings} doublings from {a} (partial sum {total})"
            )))
        }
    }
}
