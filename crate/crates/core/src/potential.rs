//! Convex potentials `W` with `W(0) = 0` and their hypothesis checks.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{self, Tail};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Asymptotic growth class of `W`, used to pick an exact tail treatment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrowthHint {
    /// `W(u) ~ c|u|^alpha` as `|u| → ∞`.
    Power { alpha: f64 },
    /// `W` grows at least exponentially.
    Exponential,
}

#[derive(Clone)]
enum Base {
    Power { alpha: f64 },
    Cosh,
    Custom { name: String, w: ScalarFn, dw: ScalarFn, ddw: ScalarFn },
}

/// A potential `W` together with `W'`, `W''` and classification flags.
///
/// The value is immutable; [`Potential::scaled`] and [`Potential::mirrored`]
/// return new potentials `c·W` and `W(-·)` sharing the same base functions.
#[derive(Clone)]
pub struct Potential {
    base: Base,
    scale: f64,
    mirrored: bool,
    halfline_flag: bool,
    growth_hint: Option<GrowthHint>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("id", &self.id())
            .field("scale", &self.scale)
            .field("mirrored", &self.mirrored)
            .field("halfline_flag", &self.halfline_flag)
            .field("growth_hint", &self.growth_hint)
            .finish()
    }
}

impl Potential {
    /// `W(u) = |u|^alpha`. Requires `alpha ≥ 2` so that `W` is C² and convex.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 2.0) {
            return Err(invalid(format!("power potential needs alpha >= 2, got {alpha}")));
        }
        Ok(Self {
            base: Base::Power { alpha },
            scale: 1.0,
            mirrored: false,
            halfline_flag: true,
            growth_hint: Some(GrowthHint::Power { alpha }),
        })
    }

    /// `W(u) = cosh u − 1`.
    pub fn cosh() -> Self {
        Self {
            base: Base::Cosh,
            scale: 1.0,
            mirrored: false,
            halfline_flag: true,
            growth_hint: Some(GrowthHint::Exponential),
        }
    }

    /// A user potential given by `W`, `W'`, `W''`.
    ///
    /// `halfline_flag` asserts that `W'` is convex on `(0, ∞)` and concave on
    /// `(-∞, 0)`; it is trusted, not verified.
    pub fn custom<W, DW, DDW>(
        name: impl Into<String>,
        w: W,
        dw: DW,
        ddw: DDW,
        halfline_flag: bool,
        growth_hint: Option<GrowthHint>,
    ) -> Self
    where
        W: Fn(f64) -> f64 + Send + Sync + 'static,
        DW: Fn(f64) -> f64 + Send + Sync + 'static,
        DDW: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            base: Base::Custom { name: name.into(), w: Arc::new(w), dw: Arc::new(dw), ddw: Arc::new(ddw) },
            scale: 1.0,
            mirrored: false,
            halfline_flag,
            growth_hint,
        }
    }

    /// Parse a built-in id: `power:<alpha>` or `cosh`.
    pub fn from_id(id: &str) -> Result<Self> {
        let id = id.trim();
        if id == "cosh" {
            return Ok(Self::cosh());
        }
        if let Some(alpha) = id.strip_prefix("power:") {
            let alpha: f64 =
                alpha.trim().parse().map_err(|_| invalid(format!("bad exponent in potential id `{id}`")))?;
            return Self::power(alpha);
        }
        Err(invalid(format!("unknown potential id `{id}` (expected `power:<alpha>` or `cosh`)")))
    }

    /// Identifier of the base potential, decorated with any scaling or mirroring.
    pub fn id(&self) -> String {
        let mut s = match &self.base {
            Base::Power { alpha } => format!("power:{alpha}"),
            Base::Cosh => "cosh".to_string(),
            Base::Custom { name, .. } => format!("custom:{name}"),
        };
        if self.scale != 1.0 {
            s = format!("{}*{s}", self.scale);
        }
        if self.mirrored {
            s = format!("mirror({s})");
        }
        s
    }

    pub fn halfline_flag(&self) -> bool {
        self.halfline_flag
    }

    pub fn growth_hint(&self) -> Option<GrowthHint> {
        self.growth_hint
    }

    /// Whether `W(-u) = W(u)` is known structurally.
    pub fn is_even(&self) -> bool {
        matches!(self.base, Base::Power { .. } | Base::Cosh)
    }

    /// `c·W` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("scale factor must be positive, got {c}")));
        }
        let mut p = self.clone();
        p.scale *= c;
        Ok(p)
    }

    /// `u ↦ W(-u)`. Even potentials are returned unchanged.
    pub fn mirrored(&self) -> Self {
        let mut p = self.clone();
        if !self.is_even() {
            p.mirrored = !p.mirrored;
        }
        p
    }

    fn orient(&self, t: f64) -> f64 {
        if self.mirrored {
            -t
        } else {
            t
        }
    }

    pub fn w(&self, t: f64) -> f64 {
        let t = self.orient(t);
        self.scale
            * match &self.base {
                Base::Power { alpha } => t.abs().powf(*alpha),
                Base::Cosh => cosh_m1(t),
                Base::Custom { w, .. } => w(t),
            }
    }

    pub fn dw(&self, t: f64) -> f64 {
        let sign = if self.mirrored { -1.0 } else { 1.0 };
        let t = self.orient(t);
        sign * self.scale
            * match &self.base {
                Base::Power { alpha } => alpha * t.abs().powf(alpha - 1.0) * t.signum() * (t != 0.0) as u8 as f64,
                Base::Cosh => t.sinh(),
                Base::Custom { dw, .. } => dw(t),
            }
    }

    pub fn ddw(&self, t: f64) -> f64 {
        let t = self.orient(t);
        self.scale
            * match &self.base {
                Base::Power { alpha } => {
                    if *alpha == 2.0 {
                        2.0
                    } else {
                        alpha * (alpha - 1.0) * t.abs().powf(alpha - 2.0)
                    }
                }
                Base::Cosh => t.cosh(),
                Base::Custom { ddw, .. } => ddw(t),
            }
    }

    /// `W(x + s) − W(x)` without catastrophic cancellation for small `s`.
    pub fn increment(&self, x: f64, s: f64) -> f64 {
        let (x, s) = if self.mirrored { (-x, -s) } else { (x, s) };
        self.scale
            * match &self.base {
                Base::Power { alpha } => {
                    let y = x + s;
                    if x != 0.0 && y.signum() == x.signum() && y != 0.0 {
                        x.abs().powf(*alpha) * (alpha * (s / x).ln_1p()).exp_m1()
                    } else {
                        y.abs().powf(*alpha) - x.abs().powf(*alpha)
                    }
                }
                Base::Cosh => 2.0 * (x + 0.5 * s).sinh() * (0.5 * s).sinh(),
                Base::Custom { w, dw, .. } => {
                    if s.abs() < 1e-4 * (1.0 + x.abs()) {
                        s * dw(x + 0.5 * s)
                    } else {
                        w(x + s) - w(x)
                    }
                }
            }
    }
}

fn cosh_m1(t: f64) -> f64 {
    // cosh t − 1 = 2 sinh²(t/2), exact near 0.
    let s = (0.5 * t).sinh();
    2.0 * s * s
}

/// Tail strategy for `∫^∞ f` when `f` decays like `W^{-1/2}`.
pub(crate) fn tail_for(p: &Potential) -> Result<Tail> {
    match p.growth_hint {
        Some(GrowthHint::Power { alpha }) => {
            if alpha <= 2.0 {
                return Err(Error::QuadratureFailure(format!(
                    "∫ du/√W diverges for power growth alpha = {alpha} <= 2"
                )));
            }
            Ok(Tail::Algebraic { k: 2.0 / (alpha - 2.0) })
        }
        Some(GrowthHint::Exponential) | None => Ok(Tail::Doubling { max_doublings: 96 }),
    }
}

/// Closed interval of sample points for hypothesis checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRange {
    pub lo: f64,
    pub hi: f64,
}

impl SampleRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

/// Outcome of the growth-integral test on one side of the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSide {
    pub converged: bool,
    /// `∫_1^∞ du/√W(±u)` when it converged, else the last partial integral.
    pub integral: Option<f64>,
    /// Largest cutoff `U` reached (doubling method only).
    pub cutoff: Option<f64>,
    pub method: String,
    /// True when convergence was inferred from stalled partial sums rather than proved.
    pub heuristic: bool,
}

/// Per-hypothesis pass/fail summary of [`validate_hypotheses`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub potential: String,
    pub samples: usize,
    pub vanishes_at_zero: bool,
    pub positive_away_from_zero: bool,
    pub convex: bool,
    pub derivative_monotone: bool,
    pub sign_convexity_zero_set: bool,
    pub growth_plus: GrowthSide,
    pub growth_minus: GrowthSide,
    pub growth_integral: bool,
    pub halfline_flag: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.sign_convexity_zero_set && self.growth_integral
    }
}

const VALIDATION_SAMPLES: usize = 2001;
const MAX_GROWTH_DOUBLINGS: usize = 96;

/// Check nonnegativity, convexity and the zero set of `W` on a sample grid and
/// test convergence of `∫_{|u|>1} du/√W(u)`.
///
/// The growth test is exact for potentials with a power growth hint and a
/// heuristic (partial integrals at cutoffs `U`, `2U`, … until the increment is
/// below `tol`) otherwise; the report records which one ran.
pub fn validate_hypotheses(p: &Potential, range: SampleRange, tol: f64) -> Result<ValidationReport> {
    if !(range.lo <= 0.0 && range.hi >= 0.0 && range.lo < range.hi) {
        return Err(invalid("sample range must contain 0"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    let n = VALIDATION_SAMPLES;
    let mut ts: Vec<f64> = (0..n).map(|i| range.lo + (range.hi - range.lo) * i as f64 / (n - 1) as f64).collect();
    ts.push(0.0);
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let mut positive = true;
    let mut convex = true;
    let mut monotone = true;
    let mut prev_dw = f64::NEG_INFINITY;
    for &t in &ts {
        let (w, dw, ddw) = (p.w(t), p.dw(t), p.ddw(t));
        for (what, v) in [("W", w), ("W'", dw), ("W''", ddw)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { what, at: t });
            }
        }
        if t != 0.0 && !(w > 0.0) {
            positive = false;
        }
        if ddw < -tol {
            convex = false;
        }
        if dw < prev_dw - tol * (1.0 + prev_dw.abs()) {
            monotone = false;
        }
        prev_dw = dw;
    }
    let vanishes = p.w(0.0) == 0.0;

    let growth_plus = growth_side(p, tol)?;
    let growth_minus = growth_side(&p.mirrored(), tol)?;
    let growth = growth_plus.converged && growth_minus.converged;

    Ok(ValidationReport {
        potential: p.id(),
        samples: ts.len(),
        vanishes_at_zero: vanishes,
        positive_away_from_zero: positive,
        convex,
        derivative_monotone: monotone,
        sign_convexity_zero_set: vanishes && positive && convex && monotone,
        growth_plus,
        growth_minus,
        growth_integral: growth,
        halfline_flag: p.halfline_flag,
    })
}

fn growth_side(p: &Potential, tol: f64) -> Result<GrowthSide> {
    let f = |u: f64| {
        let w = p.w(u);
        if w.is_infinite() {
            0.0
        } else {
            1.0 / w.sqrt()
        }
    };
    if let Some(GrowthHint::Power { alpha }) = p.growth_hint {
        if alpha <= 2.0 {
            return Ok(GrowthSide {
                converged: false,
                integral: None,
                cutoff: None,
                method: "analytic-power-tail".into(),
                heuristic: false,
            });
        }
        let v = quadrature::half_line(f, 1.0, Tail::Algebraic { k: 2.0 / (alpha - 2.0) }, 1e-12)?;
        return Ok(GrowthSide {
            converged: true,
            integral: Some(v),
            cutoff: None,
            method: "analytic-power-tail".into(),
            heuristic: false,
        });
    }
    let mut partial = 0.0;
    let mut cutoff = 1.0;
    for _ in 0..MAX_GROWTH_DOUBLINGS {
        let next = 2.0 * cutoff;
        let inc = quadrature::finite(f, cutoff, next, 1e-12)?;
        partial += inc;
        cutoff = next;
        if inc < tol {
            return Ok(GrowthSide {
                converged: true,
                integral: Some(partial),
                cutoff: Some(cutoff),
                method: "cutoff-doubling".into(),
                heuristic: true,
            });
        }
    }
    Ok(GrowthSide {
        converged: false,
        integral: Some(partial),
        cutoff: Some(cutoff),
        method: "cutoff-doubling".into(),
        heuristic: true,
    })
}

/// Check `W'(t + η) ≥ ½ W'(t)` at `samples` points spanning `[-2η, 0]`.
///
/// The inequality relies on concavity of `W'` on `(-∞, 0)`, so potentials
/// without `halfline_flag` are rejected.
pub fn halving_inequality_check(p: &Potential, eta: f64, samples: usize) -> Result<bool> {
    if !p.halfline_flag {
        return Err(Error::HypothesisViolation(format!(
            "{}: W' is not declared convex on (0,∞) and concave on (-∞,0)",
            p.id()
        )));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid(format!("eta must be positive, got {eta}")));
    }
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let ok = (0..samples).all(|k| {
        let t = if samples == 1 { -2.0 * eta } else { -2.0 * eta + 2.0 * eta * k as f64 / (samples - 1) as f64 };
        let lhs = p.dw(t + eta);
        let rhs = 0.5 * p.dw(t);
        lhs >= rhs - 1e-14 * rhs.abs()
    });
    Ok(ok)
}
