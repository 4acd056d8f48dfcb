//! Safeguarded scalar root finding for monotone functions.

use crate::error::{Error, Result};

/// Solve `g(x) = 0` on a bracket `[lo, hi]` with `g(lo) ≤ 0 ≤ g(hi)`.
///
/// `g` returns the value and the derivative. Newton steps are taken when they
/// stay strictly inside the bracket and shrink it fast enough; otherwise the
/// bracket is bisected, geometrically when it spans several decades of
/// positive numbers.
pub(crate) fn newton_bracketed<G>(mut g: G, mut lo: f64, mut hi: f64, start: Option<f64>, xtol: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<(f64, f64)>,
{
    debug_assert!(lo <= hi);
    let mut x = match start {
        Some(s) if s > lo && s < hi => s,
        _ => bisection_point(lo, hi),
    };
    let mut last_width = f64::INFINITY;
    for _ in 0..400 {
        let (gx, dg) = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= xtol * x.abs().max(1e-300) || width <= f64::MIN_POSITIVE {
            return Ok(x);
        }
        let newton = if dg.is_finite() && dg > 0.0 { x - gx / dg } else { f64::NAN };
        let contracted = width < 0.5 * last_width;
        last_width = width;
        let step_ok = newton > lo && newton < hi;
        if step_ok && (contracted || (newton - x).abs() < 0.25 * width) {
            if (newton - x).abs() <= 0.25 * xtol * x.abs() {
                return Ok(newton);
            }
            x = newton;
        } else {
            x = bisection_point(lo, hi);
        }
    }
    Err(Error::BudgetExceeded(format!("root finding did not converge on [{lo}, {hi}]")))
}

fn bisection_point(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 && hi / lo > 4.0 && hi.is_finite() {
        (lo * hi).sqrt()
    } else {
        0.5 * (lo + hi)
    }
}

/// Expand `hi` geometrically from `start` until `g(hi) ≥ 0` for increasing `g`.
pub(crate) fn expand_upper<G>(mut g: G, start: f64, limit: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut hi = start;
    while hi <= limit {
        if g(hi)? >= 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::BudgetExceeded(format!("bracket expansion passed {limit}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let x = newton_bracketed(|x| Ok((x * x * x - 10.0, 3.0 * x * x)), 0.0, 10.0, None, 1e-15).unwrap();
        assert!((x - 10f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn handles_wide_positive_brackets() {
        let x = newton_bracketed(|x: f64| Ok((x.ln() - 30.0, 1.0 / x)), 1e-3, 1e30, None, 1e-14).unwrap();
        assert!((x.ln() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn bracket_expansion() {
        let hi = expand_upper(|x| Ok(x - 1000.0), 1.0, 1e10).unwrap();
        assert!((1000.0..2000.0).contains(&hi));
        assert!(expand_upper(|_| Ok(-1.0), 1.0, 1e3).is_err());
    }
}
