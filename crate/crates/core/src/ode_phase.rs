//! One-dimensional orbits of `u'' = W'(u)` and their blow-up length maps.
//!
//! Every orbit is evaluated by inverting its time map
//! `x = ∫ du / √(2(W(u) + H))` with a safeguarded Newton iteration, where `H`
//! is the conserved Hamiltonian `½u'² − W(u)`. Negative branches are obtained
//! from the reflected potential `W(-·)`.
//!
//! Canonical translations: α-orbits are even about 0, β-orbits pass through
//! the origin, γ-orbits blow up at `x = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potential::{tail_for, Potential};
use crate::quadrature::{self, Tail};
use crate::roots::{expand_upper, newton_bracketed};

/// A sign `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Sign of a nonzero real.
    pub fn of(x: f64) -> Result<Self> {
        if x > 0.0 {
            Ok(Sign::Plus)
        } else if x < 0.0 {
            Ok(Sign::Minus)
        } else {
            Err(invalid("sign of zero is undefined"))
        }
    }

    pub fn from_i32(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(invalid(format!("sign must be +1 or -1, got {s}"))),
        }
    }
}

/// Selector for an orbit family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum OrbitSpec {
    /// `u(0) = λ`, `u'(0) = 0`, blow-up at `±l(λ)`.
    Alpha { lambda: f64 },
    /// `u(0) = 0`, `u'(0) = √(2h)`, defined on `(-l⁻(h), l⁺(h))`.
    Beta { h: f64 },
    /// Zero-energy orbit on `(0, ∞)` blowing up at 0 with the given sign.
    Gamma { sign: Sign },
    /// `u ≡ 0`.
    Zero,
}

impl OrbitSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            OrbitSpec::Alpha { lambda } if !(lambda.is_finite() && lambda != 0.0) => {
                Err(invalid(format!("alpha orbit needs a finite nonzero lambda, got {lambda}")))
            }
            OrbitSpec::Beta { h } if !(h.is_finite() && h > 0.0) => {
                Err(invalid(format!("beta orbit needs h > 0, got {h}")))
            }
            _ => Ok(()),
        }
    }
}

/// Relative tolerance handed to the quadrature for a requested result tolerance.
pub(crate) fn quad_tol(tol: f64) -> f64 {
    (tol * 1e-2).clamp(1e-14, 1e-6)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("tol must be positive, got {tol}")))
    }
}

#[derive(Debug, Clone, Copy)]
enum Energy {
    /// Integrand `1/√(2(W(base + σ) − W(base)))`, singular at `σ = 0`.
    Above { base: f64 },
    /// Integrand `1/√(2(W(σ) + h))`.
    Shifted { h: f64 },
}

/// Monotone time map `T(s) = ∫_0^s f(σ) dσ` on `[0, ∞)` with finite total length.
#[derive(Debug, Clone)]
struct TimeMap {
    p: Potential,
    energy: Energy,
    split: f64,
    tail: Tail,
    qtol: f64,
    total: f64,
}

impl TimeMap {
    fn new(p: Potential, energy: Energy, qtol: f64) -> Result<Self> {
        let split = match energy {
            Energy::Above { base } => base.abs(),
            Energy::Shifted { .. } => 1.0,
        };
        let tail = tail_for(&p)?;
        let mut map = Self { p, energy, split, tail, qtol, total: f64::NAN };
        let total = map.head(split)? + map.tail_from(split)?;
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::QuadratureFailure(format!("orbit length evaluated to {total}")));
        }
        map.total = total;
        Ok(map)
    }

    /// `2(W(u) + H)` expressed through the offset `σ`; this is `u'²`.
    fn speed_sq(&self, sigma: f64) -> f64 {
        match self.energy {
            Energy::Above { base } => 2.0 * self.p.increment(base, sigma),
            Energy::Shifted { h } => 2.0 * (self.p.w(sigma) + h),
        }
    }

    fn integrand(&self, sigma: f64) -> f64 {
        let q = self.speed_sq(sigma);
        if q.is_infinite() {
            0.0
        } else {
            1.0 / q.sqrt()
        }
    }

    /// `∫_0^s f` for `0 ≤ s ≤ split`; the singular case uses `σ = t²`.
    fn head(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        match self.energy {
            Energy::Above { base } => {
                let slope0 = self.p.dw(base);
                let g = |t: f64| {
                    let sigma = t * t;
                    let q = 2.0 * self.p.increment(base, sigma);
                    if t == 0.0 || q <= 0.0 {
                        // Limit of 2t/√(2 W'(base) t²).
                        2.0 / (2.0 * self.p.dw(base + 0.5 * sigma).max(slope0)).sqrt()
                    } else {
                        2.0 * t / q.sqrt()
                    }
                };
                quadrature::finite(g, 0.0, s.sqrt(), self.qtol)
            }
            Energy::Shifted { .. } => quadrature::finite(|x| self.integrand(x), 0.0, s, self.qtol),
        }
    }

    fn tail_from(&self, a: f64) -> Result<f64> {
        quadrature::half_line(|x| self.integrand(x), a, self.tail, self.qtol)
    }

    /// `∫_s^∞ f`.
    fn remainder(&self, s: f64) -> Result<f64> {
        if s >= self.split {
            self.tail_from(s)
        } else {
            Ok(self.total - self.head(s)?)
        }
    }

    fn forward(&self, s: f64) -> Result<f64> {
        if s <= self.split {
            self.head(s)
        } else if s <= 4.0 * self.split {
            Ok(self.head(self.split)? + quadrature::finite(|x| self.integrand(x), self.split, s, self.qtol)?)
        } else {
            Ok(self.total - self.remainder(s)?)
        }
    }

    /// Offset `s` with `T(s) = x` for `0 ≤ x < total`.
    fn invert(&self, x: f64, xtol: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let complement = x > 0.5 * self.total;
        let gap = self.total - x;
        let g = |s: f64| -> Result<f64> {
            if complement {
                Ok(gap - self.remainder(s)?)
            } else {
                Ok(self.forward(s)? - x)
            }
        };
        let hi = expand_upper(&g, self.split.max(1e-300), 1e300)?;
        newton_bracketed(|s| Ok((g(s)?, self.integrand(s))), 0.0, hi, None, xtol)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Alpha { map: TimeMap, base: f64 },
    Beta { plus: TimeMap, minus: TimeMap },
    Gamma { p: Potential, tail: Tail, qtol: f64 },
    Zero,
}

/// An evaluable orbit of `u'' = W'(u)` together with its domain.
#[derive(Debug, Clone)]
pub struct OrbitSolution {
    spec: OrbitSpec,
    kind: Kind,
    /// Reflect values: the orbit was built on `W(-·)`.
    reflect: bool,
    domain: (f64, f64),
    energy: f64,
    xtol: f64,
}

impl OrbitSolution {
    pub fn spec(&self) -> OrbitSpec {
        self.spec
    }

    /// Open interval of definition `(lo, hi)`.
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Conserved value of `½u'² − W(u)`.
    pub fn hamiltonian(&self) -> f64 {
        self.energy
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        if x.is_nan() || x <= lo || x >= hi {
            Err(Error::DomainError { x, lo, hi })
        } else {
            Ok(())
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_with_deriv(x)?.0)
    }

    pub fn eval_deriv(&self, x: f64) -> Result<f64> {
        Ok(self.eval_with_deriv(x)?.1)
    }

    /// `(u(x), u'(x))`.
    pub fn eval_with_deriv(&self, x: f64) -> Result<(f64, f64)> {
        self.check_domain(x)?;
        let (u, du) = match &self.kind {
            Kind::Zero => (0.0, 0.0),
            Kind::Alpha { map, base } => {
                let s = map.invert(x.abs(), self.xtol)?;
                let speed = map.speed_sq(s).sqrt();
                (base + s, if x < 0.0 { -speed } else { speed })
            }
            Kind::Beta { plus, minus } => {
                if x >= 0.0 {
                    let s = plus.invert(x, self.xtol)?;
                    (s, plus.speed_sq(s).sqrt())
                } else {
                    let s = minus.invert(-x, self.xtol)?;
                    (-s, minus.speed_sq(s).sqrt())
                }
            }
            Kind::Gamma { p, tail, qtol } => {
                let u = gamma_invert(p, *tail, *qtol, x, self.xtol)?;
                (u, -(2.0 * p.w(u)).sqrt())
            }
        };
        Ok(if self.reflect { (-u, -du) } else { (u, du) })
    }

    /// `½u'(x)² − W(u(x))` recomputed from an evaluation.
    pub fn hamiltonian_at(&self, p: &Potential, x: f64) -> Result<f64> {
        let (u, du) = self.eval_with_deriv(x)?;
        Ok(0.5 * du * du - p.w(u))
    }
}

/// `G(u) = ∫_u^∞ ds/√(2W(s))` for `u > 0`.
fn gamma_time(p: &Potential, tail: Tail, qtol: f64, u: f64) -> Result<f64> {
    quadrature::half_line(
        |s| {
            let q = 2.0 * p.w(s);
            if q.is_infinite() {
                0.0
            } else {
                1.0 / q.sqrt()
            }
        },
        u,
        tail,
        qtol,
    )
}

fn gamma_invert(p: &Potential, tail: Tail, qtol: f64, x: f64, xtol: f64) -> Result<f64> {
    let g = |u: f64| -> Result<f64> { Ok(x - gamma_time(p, tail, qtol, u)?) };
    let mut lo = 1.0;
    while g(lo)? > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::BudgetExceeded(format!("gamma orbit bracket failed at x = {x}")));
        }
    }
    let mut hi = lo;
    while g(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::BudgetExceeded(format!("gamma orbit bracket failed at x = {x}")));
        }
    }
    newton_bracketed(
        |u| {
            let gv = g(u)?;
            Ok((gv, 1.0 / (2.0 * p.w(u)).sqrt()))
        },
        lo,
        hi,
        None,
        xtol,
    )
}

fn oriented(p: &Potential, negative: bool) -> Potential {
    if negative {
        p.mirrored()
    } else {
        p.clone()
    }
}

/// Blow-up half-length `l(λ)` of the α-orbit with `u(0) = λ`.
///
/// ```
/// use blowup_core::{blowup_halflength, Potential};
/// let p = Potential::power(4.0).unwrap();
/// let l1 = blowup_halflength(&p, 1.0, 1e-10).unwrap();
/// let l2 = blowup_halflength(&p, 2.0, 1e-10).unwrap();
/// assert!((l2 - l1 / 2.0).abs() < 1e-9);
/// ```
pub fn blowup_halflength(p: &Potential, lambda: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    OrbitSpec::Alpha { lambda }.validate()?;
    let q = oriented(p, lambda < 0.0);
    let map = TimeMap::new(q, Energy::Above { base: lambda.abs() }, quad_tol(tol))?;
    Ok(map.total)
}

/// `(l⁻(h), l⁺(h))` for the β-orbit with Hamiltonian `h > 0`.
pub fn beta_halflengths(p: &Potential, h: f64, tol: f64) -> Result<(f64, f64)> {
    check_tol(tol)?;
    OrbitSpec::Beta { h }.validate()?;
    let plus = TimeMap::new(p.clone(), Energy::Shifted { h }, quad_tol(tol))?;
    let minus = TimeMap::new(p.mirrored(), Energy::Shifted { h }, quad_tol(tol))?;
    Ok((minus.total, plus.total))
}

/// `λ` with `sgn λ = sign` and `l(λ) = l_target`.
///
/// The root is found in `ln λ` by the Illinois variant of regula falsi, which
/// is exact in one step for pure power potentials.
pub fn invert_halflength(p: &Potential, l_target: f64, sign: Sign, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if !(l_target > 0.0 && l_target.is_finite()) {
        return Err(invalid(format!("target length must be positive, got {l_target}")));
    }
    let q = oriented(p, sign == Sign::Minus);
    let qtol = quad_tol(tol);
    let target = l_target.ln();
    // f(y) = ln l(e^y) − ln l_target is decreasing in y.
    let f = |y: f64| -> Result<f64> {
        let map = TimeMap::new(q.clone(), Energy::Above { base: y.exp() }, qtol)?;
        Ok(map.total.ln() - target)
    };
    const Y_LIMIT: f64 = 690.0;
    let (mut a, mut fa) = (0.0, f(0.0)?);
    let mut step = 1.0;
    let (mut b, mut fb): (f64, f64);
    loop {
        b = if fa > 0.0 { a + step } else { a - step };
        if b.abs() > Y_LIMIT {
            return Err(Error::BudgetExceeded(format!("no bracket for target length {l_target}")));
        }
        fb = f(b)?;
        if fa.signum() != fb.signum() || fb == 0.0 {
            break;
        }
        a = b;
        fa = fb;
        step *= 2.0;
    }
    let stop = 0.25 * tol;
    let mut side = 0i8;
    for _ in 0..200 {
        if fb.abs() <= stop {
            return Ok(sign.value() * b.exp());
        }
        if fa.abs() <= stop {
            return Ok(sign.value() * a.exp());
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 1;
        }
        if (a - b).abs() <= 1e-15 * a.abs().max(b.abs()).max(1.0) {
            return Ok(sign.value() * b.exp());
        }
    }
    Err(Error::BudgetExceeded(format!("length inversion did not converge for target {l_target}")))
}

/// Build an evaluable orbit. `tol` is the relative accuracy of evaluated values.
pub fn make_orbit(p: &Potential, spec: OrbitSpec, tol: f64) -> Result<OrbitSolution> {
    check_tol(tol)?;
    spec.validate()?;
    let qtol = quad_tol(tol);
    let xtol = (0.1 * tol).max(1e-15);
    let (kind, reflect, domain, energy) = match spec {
        OrbitSpec::Zero => (Kind::Zero, false, (f64::NEG_INFINITY, f64::INFINITY), 0.0),
        OrbitSpec::Alpha { lambda } => {
            let q = oriented(p, lambda < 0.0);
            let base = lambda.abs();
            let energy = -q.w(base);
            let map = TimeMap::new(q, Energy::Above { base }, qtol)?;
            let l = map.total;
            (Kind::Alpha { map, base }, lambda < 0.0, (-l, l), energy)
        }
        OrbitSpec::Beta { h } => {
            let plus = TimeMap::new(p.clone(), Energy::Shifted { h }, qtol)?;
            let minus = TimeMap::new(p.mirrored(), Energy::Shifted { h }, qtol)?;
            let domain = (-minus.total, plus.total);
            (Kind::Beta { plus, minus }, false, domain, h)
        }
        OrbitSpec::Gamma { sign } => {
            let q = oriented(p, sign == Sign::Minus);
            let tail = tail_for(&q)?;
            (Kind::Gamma { p: q, tail, qtol }, sign == Sign::Minus, (0.0, f64::INFINITY), 0.0)
        }
    };
    Ok(OrbitSolution { spec, kind, reflect, domain, energy, xtol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic() -> Potential {
        Potential::power(4.0).unwrap()
    }

    #[test]
    fn alpha_initial_conditions_and_evenness() {
        let p = quartic();
        let o = make_orbit(&p, OrbitSpec::Alpha { lambda: 1.5 }, 1e-10).unwrap();
        assert_eq!(o.eval(0.0).unwrap(), 1.5);
        assert_eq!(o.eval_deriv(0.0).unwrap(), 0.0);
        let (l, r) = (o.eval(-0.3).unwrap(), o.eval(0.3).unwrap());
        assert_eq!(l, r);
        assert!(o.eval_deriv(0.3).unwrap() > 0.0);
        let (_, hi) = o.domain();
        assert!(matches!(o.eval(hi), Err(Error::DomainError { .. })));
    }

    #[test]
    fn negative_lambda_reflects() {
        let p = Potential::cosh();
        let a = make_orbit(&p, OrbitSpec::Alpha { lambda: 0.7 }, 1e-10).unwrap();
        let b = make_orbit(&p, OrbitSpec::Alpha { lambda: -0.7 }, 1e-10).unwrap();
        for x in [0.1, 0.5, 1.0] {
            assert_eq!(a.eval(x).unwrap(), -b.eval(x).unwrap());
        }
    }

    #[test]
    fn gamma_quartic_closed_form() {
        let o = make_orbit(&quartic(), OrbitSpec::Gamma { sign: Sign::Plus }, 1e-11).unwrap();
        for x in [0.25, 1.0, 4.0] {
            let exact = 1.0 / (2f64.sqrt() * x);
            assert!((o.eval(x).unwrap() / exact - 1.0).abs() < 1e-10);
        }
        assert!(o.eval(0.0).is_err());
    }

    #[test]
    fn beta_passes_origin_and_is_increasing() {
        let o = make_orbit(&Potential::cosh(), OrbitSpec::Beta { h: 0.5 }, 1e-10).unwrap();
        assert_eq!(o.eval(0.0).unwrap(), 0.0);
        assert!((o.eval_deriv(0.0).unwrap() - 1.0).abs() < 1e-15);
        let (lo, hi) = o.domain();
        let xs: Vec<f64> = (1..40).map(|k| lo + (hi - lo) * k as f64 / 40.0).collect();
        let us: Vec<f64> = xs.iter().map(|&x| o.eval(x).unwrap()).collect();
        assert!(us.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn inversion_round_trip() {
        let p = quartic();
        for lam in [0.5, 1.0, 3.0] {
            let l = blowup_halflength(&p, lam, 1e-12).unwrap();
            let back = invert_halflength(&p, l, Sign::Plus, 1e-12).unwrap();
            assert!((back / lam - 1.0).abs() < 1e-10);
        }
        let l = blowup_halflength(&Potential::cosh(), -2.0, 1e-12).unwrap();
        let back = invert_halflength(&Potential::cosh(), l, Sign::Minus, 1e-12).unwrap();
        assert!((back + 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_specs() {
        let p = quartic();
        assert!(make_orbit(&p, OrbitSpec::Alpha { lambda: 0.0 }, 1e-8).is_err());
        assert!(make_orbit(&p, OrbitSpec::Beta { h: -1.0 }, 1e-8).is_err());
        assert!(blowup_halflength(&p, 1.0, 0.0).is_err());
        assert!(invert_halflength(&p, -1.0, Sign::Plus, 1e-8).is_err());
    }

    #[test]
    fn quadratic_growth_has_no_finite_length() {
        let p = Potential::power(2.0).unwrap();
        assert!(matches!(blowup_halflength(&p, 1.0, 1e-8), Err(Error::QuadratureFailure(_))));
        let p = Potential::custom("u2", |u| u * u, |u| 2.0 * u, |_| 2.0, true, None);
        assert!(matches!(blowup_halflength(&p, 1.0, 1e-8), Err(Error::QuadratureFailure(_))));
    }
}
