//! Bounded coordinate for blow-up solves.
//!
//! `v = T(u) = ∫_0^u ds / √(2(W(s) + h₀))` maps `ℝ` onto the bounded interval
//! `(-l⁻(h₀), l⁺(h₀))`; its inverse `u = Ψ(v)` is the β-orbit with energy `h₀`.
//! In this variable `Δu = W'(u)` becomes
//!
//! ```text
//! Δv = K(u) (1 − |∇v|²),   K(u) = W'(u) / √(2(W(u) + h₀)),
//! ```
//!
//! and large boundary values `u = ±B` become data `T(±B)` that converge as
//! `B → ∞`, so boundary-level continuation stabilizes in `v`.
//!
//! `T` is tabulated once per potential on a mesh whose step follows the
//! logarithmic derivative of the integrand, and evaluated between mesh
//! points by cubic Hermite interpolation with exact end slopes.

use crate::error::{invalid, Error, Result};
use crate::potential::{tail_for, Potential};
use crate::quadrature::{self, Tail};

const BASE_STEP: f64 = 0.005;
const MAX_NODES: usize = 2_000_000;
const W_CEILING: f64 = 1e250;

fn level_cap(p: &Potential, start: f64) -> f64 {
    let ok = |u: f64| {
        let w = p.w(u);
        w.is_finite() && w <= W_CEILING && p.dw(u).is_finite()
    };
    let mut lo = start;
    let mut hi = 2.0 * start;
    while ok(hi) && hi < f64::MAX / 4.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone)]
struct Side {
    u: Vec<f64>,
    v: Vec<f64>,
    /// dv/du at the nodes.
    dv: Vec<f64>,
    /// `∫_{u_max}^∞ dv`, so `v_max + rest` is the total length.
    rest: f64,
    tail: Tail,
    /// Largest `u` with `W(u) ≤ W_CEILING`.
    cap: f64,
}

impl Side {
    fn build(p: &Potential, h0: f64) -> Result<Self> {
        let inv_speed = |u: f64| 1.0 / (2.0 * (p.w(u) + h0)).sqrt();
        let mut u = vec![0.0];
        let mut v = vec![0.0];
        let mut dv = vec![inv_speed(0.0)];
        loop {
            let a = *u.last().unwrap();
            let va = *v.last().unwrap();
            let rate = p.dw(a).abs() / (2.0 * (p.w(a) + h0));
            let reach = if rate > 0.0 { a.max(1.0).min(1.0 / rate) } else { a.max(1.0) };
            let step = BASE_STEP * reach;
            let b = a + step;
            let wb = p.w(b);
            if !(wb.is_finite() && wb < W_CEILING) {
                break;
            }
            let (piece, _) = quadrature::panel(inv_speed, a, b);
            let vb = va + piece;
            // Stop once consecutive nodes are no longer resolved in v.
            if piece <= 64.0 * f64::EPSILON * vb {
                break;
            }
            u.push(b);
            v.push(vb);
            dv.push(inv_speed(b));
            if u.len() > MAX_NODES {
                return Err(Error::BudgetExceeded("chart table too large".into()));
            }
        }
        if u.len() < 3 {
            return Err(invalid("chart table degenerate"));
        }
        let tail = tail_for(p)?;
        let u_max = *u.last().unwrap();
        let rest = quadrature::half_line(inv_speed, u_max, tail, 1e-13)?;
        Ok(Self { cap: level_cap(p, u_max), u, v, dv, rest, tail })
    }

    fn length(&self) -> f64 {
        self.v_max() + self.rest
    }

    fn u_max(&self) -> f64 {
        *self.u.last().unwrap()
    }

    fn v_max(&self) -> f64 {
        *self.v.last().unwrap()
    }

    fn hermite(&self, j: f64, i: usize) -> (f64, f64) {
        // Value and τ-derivative of the cubic on [u_i, u_{i+1}] at τ = j.
        let d = self.u[i + 1] - self.u[i];
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let (m0, m1) = (d * self.dv[i], d * self.dv[i + 1]);
        let t = j;
        let t2 = t * t;
        let t3 = t2 * t;
        let val =
            (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * m1;
        let der = (6.0 * t2 - 6.0 * t) * v0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * v1
            + (3.0 * t2 - 2.0 * t) * m1;
        (val, der)
    }

    /// `T(u)` for `0 ≤ u ≤ u_max`.
    fn forward_table(&self, u: f64) -> f64 {
        let i = self.u.partition_point(|&x| x <= u).clamp(1, self.u.len() - 1) - 1;
        let t = ((u - self.u[i]) / (self.u[i + 1] - self.u[i])).clamp(0.0, 1.0);
        self.hermite(t, i).0
    }

    /// `T(u)` for `u ≥ 0`, past the table by the remaining tail integral.
    fn forward(&self, p: &Potential, h0: f64, u: f64) -> f64 {
        if u <= self.u_max() {
            return self.forward_table(u);
        }
        let inv_speed = |s: f64| 1.0 / (2.0 * (p.w(s) + h0)).sqrt();
        match quadrature::half_line(inv_speed, u, self.tail, 1e-13) {
            Ok(r) => self.length() - r,
            Err(_) => self.length(),
        }
    }

    /// `Ψ(v)` for `0 ≤ v ≤ v_max`.
    fn inverse(&self, v: f64) -> f64 {
        let i = self.v.partition_point(|&x| x <= v).clamp(1, self.v.len() - 1) - 1;
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let mut t = ((v - v0) / (v1 - v0)).clamp(0.0, 1.0);
        for _ in 0..8 {
            let (val, der) = self.hermite(t, i);
            if der <= 0.0 {
                break;
            }
            let next = (t - (val - v) / der).clamp(0.0, 1.0);
            let done = (next - t).abs() < 1e-15;
            t = next;
            if done {
                break;
            }
        }
        self.u[i] + t * (self.u[i + 1] - self.u[i])
    }
}

/// Tabulated coordinate change `v = T(u)` and its inverse for one potential.
#[derive(Debug, Clone)]
pub struct BlowupChart {
    p: Potential,
    mirror: Potential,
    h0: f64,
    plus: Side,
    minus: Side,
}

impl BlowupChart {
    pub fn new(p: &Potential, h0: f64) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return Err(invalid(format!("chart energy must be positive, got {h0}")));
        }
        let plus = Side::build(p, h0)?;
        let mirror = p.mirrored();
        let minus = Side::build(&mirror, h0)?;
        Ok(Self { p: p.clone(), mirror, h0, plus, minus })
    }

    pub fn potential(&self) -> &Potential {
        &self.p
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    /// Range `[u_min, u_max]` on which [`Self::value`] is tabulated.
    pub fn u_range(&self) -> (f64, f64) {
        (-self.minus.u_max(), self.plus.u_max())
    }

    /// Image of [`Self::u_range`] in the chart coordinate.
    pub fn v_range(&self) -> (f64, f64) {
        (-self.minus.v_max(), self.plus.v_max())
    }

    /// Total lengths `(l⁻(h₀), l⁺(h₀))`: `T` maps `ℝ` onto `(-l⁻, l⁺)`.
    pub fn lengths(&self) -> (f64, f64) {
        (self.minus.length(), self.plus.length())
    }

    /// Largest boundary levels `(B⁻, B⁺)` for which `W(∓B⁻)`, `W(B⁺)` stay in
    /// floating-point range.
    pub fn level_caps(&self) -> (f64, f64) {
        (self.minus.cap, self.plus.cap)
    }

    /// `T(u)`, accurate beyond [`Self::u_range`] through the tail integral.
    pub fn coordinate(&self, u: f64) -> f64 {
        if u >= 0.0 {
            self.plus.forward(&self.p, self.h0, u)
        } else {
            -self.minus.forward(&self.mirror, self.h0, -u)
        }
    }

    /// `Ψ(v)`; values outside [`Self::v_range`] are clamped.
    pub fn value(&self, v: f64) -> f64 {
        if v >= 0.0 {
            self.plus.inverse(v.min(self.plus.v_max()))
        } else {
            -self.minus.inverse((-v).min(self.minus.v_max()))
        }
    }

    /// `du/dv = √(2(W(u) + h₀))`.
    pub fn slope(&self, u: f64) -> f64 {
        (2.0 * (self.p.w(u) + self.h0)).sqrt()
    }

    /// `K(u) = W'(u) / √(2(W(u) + h₀))`.
    pub fn reaction(&self, u: f64) -> f64 {
        self.p.dw(u) / self.slope(u)
    }

    /// `dK/dv = W''(u) − K(u)²`.
    pub fn reaction_deriv(&self, u: f64) -> f64 {
        let k = self.reaction(u);
        self.p.ddw(u) - k * k
    }
}
