use serde::{Deserialize, Serialize};

use super::dirichlet::Staircase;
use super::field::Field;
use crate::error::{invalid, Error, Result};
use crate::geometry::{distance_field, GridDomain, NodeClass, Target};
use crate::ode_phase::blowup_halflength;
use crate::potential::Potential;

const LENGTH_TOL: f64 = 1e-10;

/// Outcome of one bound `u ≤ λ` (or `u ≥ λ`) on the nodes it applies to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lambda: f64,
    /// Blow-up half-length `l(λ)`.
    pub length: f64,
    pub applicable_nodes: usize,
    /// Largest `|u|` (decay), `u` (`λ > 0`) or smallest `u` (`λ < 0`) over those nodes.
    pub extreme: Option<f64>,
    /// Distance of `extreme` from the violated side of `λ ± slack`; nonnegative when passed.
    pub margin: Option<f64>,
    pub passed: bool,
    pub note: Option<String>,
}

/// Results of [`decay_check`] or [`signed_bounds_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub slack: f64,
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Whether at least one check had nodes to test.
    pub fn applicable(&self) -> bool {
        self.checks.iter().any(|c| c.applicable_nodes > 0)
    }
}

/// Default grid slack `4h²`.
pub fn default_slack(dom: &GridDomain) -> f64 {
    4.0 * dom.spacing().powi(2)
}

fn bound_check(field: &Field, lambda: f64, length: f64, dist: &[f64], slack: f64, abs: bool) -> BoundCheck {
    let h = field.domain().spacing();
    // Boundary nodes sit up to h outside the domain.
    let nodes: Vec<usize> = field.certified_interior().into_iter().filter(|&k| dist[k] - h > length).collect();
    let values = nodes.iter().map(|&k| field.values()[k]);
    let (extreme, margin) = if nodes.is_empty() {
        (None, None)
    } else if abs {
        let m = values.fold(0.0f64, |m, u| m.max(u.abs()));
        (Some(m), Some(lambda + slack - m))
    } else if lambda > 0.0 {
        let m = values.fold(f64::NEG_INFINITY, f64::max);
        (Some(m), Some(lambda + slack - m))
    } else {
        let m = values.fold(f64::INFINITY, f64::min);
        (Some(m), Some(m - (lambda - slack)))
    };
    BoundCheck {
        lambda,
        length,
        applicable_nodes: nodes.len(),
        extreme,
        margin,
        passed: margin.is_none_or(|m| m >= 0.0),
        note: nodes.is_empty().then(|| "no applicable nodes".to_string()),
    }
}

/// Check `|u(x)| ≤ λ + slack` at certified nodes with `d(x, ∂Ω) > l(λ)`.
///
/// `slack` defaults to [`default_slack`].
pub fn decay_check(field: &Field, p: &Potential, lambdas: &[f64], slack: Option<f64>) -> Result<BoundReport> {
    let slack = slack.unwrap_or_else(|| default_slack(field.domain()));
    let mut checks = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("decay levels must be positive, got {lambda}")));
        }
        let length = blowup_halflength(p, lambda, LENGTH_TOL)?;
        checks.push(bound_check(field, lambda, length, field.domain().dist_boundary(), slack, true));
    }
    Ok(BoundReport { slack, checks })
}

/// Check the a-priori bounds of signed blow-up solutions: `u ≤ λ` where
/// `d(x, A⁺ ∪ truncation) > l(λ)` for `λ > 0`, and `u ≥ λ` where
/// `d(x, A⁻ ∪ truncation) > l(λ)` for `λ < 0`.
pub fn signed_bounds_check(field: &Field, p: &Potential, lambdas: &[f64], slack: Option<f64>) -> Result<BoundReport> {
    let dom = field.domain();
    let slack = slack.unwrap_or_else(|| default_slack(dom));
    let to_trunc = match dom.truncation_radius() {
        Some(_) => distance_field(dom, Target::Truncation)?,
        None => vec![f64::INFINITY; dom.len()],
    };
    let toward = |d: &[f64]| -> Vec<f64> { d.iter().zip(&to_trunc).map(|(a, b)| a.min(*b)).collect() };
    let (plus, minus) = (toward(dom.dist_plus()), toward(dom.dist_minus()));
    let mut checks = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda != 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("bound levels must be nonzero, got {lambda}")));
        }
        let length = blowup_halflength(p, lambda, LENGTH_TOL)?;
        let dist = if lambda > 0.0 { &plus } else { &minus };
        checks.push(bound_check(field, lambda, length, dist, slack, false));
    }
    Ok(BoundReport { slack, checks })
}

/// Tolerances of [`comparison_check_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonTolerances {
    /// Allowed wrong-sign residual, relative to the stencil magnitude.
    pub residual: f64,
    /// Allowed `u₁ − u₂`, relative to `1 + |u₂|`.
    pub order: f64,
}

impl Default for ComparisonTolerances {
    fn default() -> Self {
        Self { residual: 1e-9, order: 1e-10 }
    }
}

/// Result of [`comparison_check_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `u₁ ≤ u₂` at every interior node.
    pub ordered: bool,
    pub violations: usize,
    /// `max (u₁ − u₂)` over interior nodes.
    pub worst_gap: f64,
    /// `min (Δ_h u₁ − W'(u₁))` over interior nodes.
    pub sub_residual: f64,
    /// `max (Δ_h u₂ − W'(u₂))` over interior nodes.
    pub super_residual: f64,
}

/// Whether a discrete subsolution `u1` stays below a discrete supersolution
/// `u2` with `u1 ≤ u2` on the boundary nodes.
pub fn comparison_check(p: &Potential, dom: &GridDomain, u1: &Field, u2: &Field) -> Result<bool> {
    Ok(comparison_check_with(p, dom, u1, u2, ComparisonTolerances::default())?.ordered)
}

pub fn comparison_check_with(
    p: &Potential,
    dom: &GridDomain,
    u1: &Field,
    u2: &Field,
    tol: ComparisonTolerances,
) -> Result<ComparisonReport> {
    for (name, f) in [("u1", u1), ("u2", u2)] {
        let fd = f.domain();
        if fd.len() != dom.len() || fd.spacing() != dom.spacing() || fd.origin() != dom.origin() {
            return Err(invalid(format!("{name} lives on a different grid")));
        }
        for k in 0..dom.len() {
            if dom.class(k) != NodeClass::Exterior && !f.values()[k].is_finite() {
                return Err(Error::NonFiniteData(format!("{name} is {} at node {k}", f.values()[k])));
            }
        }
    }
    let (a, b) = (u1.values(), u2.values());
    let gap_ok = |x: f64, y: f64| x - y <= tol.order * (1.0 + y.abs());
    for k in dom.boundary_nodes() {
        if !gap_ok(a[k], b[k]) {
            return Err(Error::PreconditionViolation(format!(
                "boundary data not ordered at node {k}: {} > {}",
                a[k], b[k]
            )));
        }
    }
    let st = Staircase::new(dom)?;
    let mut sub_residual = f64::INFINITY;
    let mut super_residual = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    for (i, &k) in dom.interior().iter().enumerate() {
        let r1 = st.laplacian(a, i) - p.dw(a[k]);
        let r2 = st.laplacian(b, i) - p.dw(b[k]);
        let scale = |u: &[f64]| st.rounding(p, u, i) / (64.0 * f64::EPSILON);
        if r1 < -tol.residual * (1.0 + scale(a)) {
            return Err(Error::PreconditionViolation(format!("u1 is not a subsolution at node {k} (residual {r1:e})")));
        }
        if r2 > tol.residual * (1.0 + scale(b)) {
            return Err(Error::PreconditionViolation(format!(
                "u2 is not a supersolution at node {k} (residual {r2:e})"
            )));
        }
        sub_residual = sub_residual.min(r1);
        super_residual = super_residual.max(r2);
        worst_gap = worst_gap.max(a[k] - b[k]);
        if !gap_ok(a[k], b[k]) {
            violations += 1;
        }
    }
    Ok(ComparisonReport { ordered: violations == 0, violations, worst_gap, sub_residual, super_residual })
}
