//! Radial solutions of `ψ'' + (n−1)/r ψ' = ε² W'(ψ)` in any dimension `n`.
//!
//! Whole-space barriers are α-orbits of `W/n`. Annulus barriers and ball
//! blow-up profiles are two-point boundary value problems solved on a graded
//! grid in the bounded coordinate of [`BlowupChart`] for the potential `ε²W`,
//! with boundary-level continuation `B → ∞`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart::BlowupChart;
use crate::continuation::{ContinuationConfig, ContinuationReport, LevelRecord, StopReason};
use crate::error::{invalid, Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::ode_phase::{make_orbit, OrbitSolution, OrbitSpec};
use crate::potential::Potential;

/// Grid and continuation settings for radial boundary value problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialConfig {
    /// Number of grid cells.
    pub cells: usize,
    /// Exponential grading strength toward the blow-up boundary; 0 gives a uniform grid.
    pub grading: f64,
    pub continuation: ContinuationConfig,
}

impl Default for RadialConfig {
    fn default() -> Self {
        Self { cells: 400, grading: 4.0, continuation: ContinuationConfig::default() }
    }
}

impl RadialConfig {
    fn validate(&self) -> Result<()> {
        if self.cells < 8 {
            return Err(invalid(format!("need at least 8 cells, got {}", self.cells)));
        }
        if !(self.grading >= 0.0 && self.grading.is_finite()) {
            return Err(invalid(format!("grading must be nonnegative, got {}", self.grading)));
        }
        self.continuation.validate()
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Orbit(Box<OrbitSolution>),
    Grid { r: Vec<f64>, v: Vec<f64>, chart: Arc<BlowupChart> },
}

/// A radial profile `r ↦ ψ(r)` with its domain of definition.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    dim: usize,
    r_domain: (f64, f64),
    eps: f64,
    potential: Potential,
    band_offset: f64,
    repr: Repr,
    report: Option<ContinuationReport>,
}

impl RadialProfile {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Domain `(r_inner, r_outer)`. Grid profiles include the outer endpoint.
    pub fn r_domain(&self) -> (f64, f64) {
        self.r_domain
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Distance from the blow-up boundary beyond which values are certified.
    pub fn band_offset(&self) -> f64 {
        self.band_offset
    }

    pub fn report(&self) -> Option<&ContinuationReport> {
        self.report.as_ref()
    }

    /// Grid nodes and values, if the profile was computed on a grid.
    pub fn nodes(&self) -> Option<Vec<(f64, f64)>> {
        match &self.repr {
            Repr::Grid { r, v, chart } => Some(r.iter().zip(v).map(|(&r, &v)| (r, chart.value(v))).collect()),
            Repr::Orbit(_) => None,
        }
    }

    fn check(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.r_domain;
        let inside = match self.repr {
            Repr::Orbit(_) => r >= lo && r < hi,
            Repr::Grid { .. } => r >= lo && r <= hi && r.is_finite(),
        };
        if inside {
            Ok(())
        } else {
            Err(Error::DomainError { x: r, lo, hi })
        }
    }

    fn locate(r_nodes: &[f64], r: f64) -> (usize, f64) {
        let i = r_nodes.partition_point(|&x| x <= r).clamp(1, r_nodes.len() - 1) - 1;
        let t = (r - r_nodes[i]) / (r_nodes[i + 1] - r_nodes[i]);
        (i, t.clamp(0.0, 1.0))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        match &self.repr {
            Repr::Orbit(o) => o.eval(r),
            Repr::Grid { r: rs, v, chart } => {
                let (i, t) = Self::locate(rs, r);
                Ok(chart.value(v[i] + t * (v[i + 1] - v[i])))
            }
        }
    }

    pub fn eval_deriv(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        match &self.repr {
            Repr::Orbit(o) => o.eval_deriv(r),
            Repr::Grid { r: rs, v, chart } => {
                let (i, t) = Self::locate(rs, r);
                let u = chart.value(v[i] + t * (v[i + 1] - v[i]));
                Ok(chart.slope(u) * (v[i + 1] - v[i]) / (rs[i + 1] - rs[i]))
            }
        }
    }

    /// `Δψ − ε²W'(ψ)` at radius `r`: exact for orbit profiles, from the grid
    /// stencil at the nearest interior node otherwise.
    pub fn equation_residual(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        let q = self.potential.scaled(self.eps * self.eps)?;
        let n = self.dim as f64;
        match &self.repr {
            Repr::Orbit(o) => {
                // The orbit solves ψ'' = W'(ψ)/n.
                let (u, du) = o.eval_with_deriv(r)?;
                let dd = q.dw(u) / n;
                let lap = if r == 0.0 { n * dd } else { dd + (n - 1.0) / r * du };
                Ok(lap - q.dw(u))
            }
            Repr::Grid { r: rs, v, chart } => {
                let (i, t) = Self::locate(rs, r);
                let i = (if t > 0.5 { i + 1 } else { i }).clamp(1, rs.len() - 2);
                let u: Vec<f64> = (i - 1..=i + 1).map(|k| chart.value(v[k])).collect();
                let (a, b) = (rs[i] - rs[i - 1], rs[i + 1] - rs[i]);
                let d2 = 2.0 * ((u[2] - u[1]) / b - (u[1] - u[0]) / a) / (a + b);
                let d1 = (a * a * (u[2] - u[1]) + b * b * (u[1] - u[0])) / (a * b * (a + b));
                Ok(d2 + (n - 1.0) / rs[i] * d1 - q.dw(u[1]))
            }
        }
    }
}

/// `ζ(r) = α̃_λ(r)` where `α̃` is the α-orbit of `W/n`, on `[0, l̃(λ))`.
///
/// A supersolution of `Δu = W'(u)` in `ℝⁿ` for `λ > 0` and a subsolution for
/// `λ < 0` on the ball `|x| < l̃(λ)`.
pub fn whole_space_barrier(p: &Potential, dim: usize, lambda: f64) -> Result<RadialProfile> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let q = p.scaled(1.0 / dim as f64)?;
    let orbit = make_orbit(&q, OrbitSpec::Alpha { lambda }, 1e-11)?;
    let l = orbit.domain().1;
    Ok(RadialProfile {
        dim,
        r_domain: (0.0, l),
        eps: 1.0,
        potential: p.clone(),
        band_offset: 0.0,
        repr: Repr::Orbit(Box::new(orbit)),
        report: None,
    })
}

#[derive(Debug, Clone, Copy)]
enum Inner {
    /// Regular center `r = 0` with `ψ'(0) = 0`.
    Center,
    /// Blow-up boundary with Dirichlet data.
    Dirichlet,
}

/// Radial two-point problem on fixed nodes in the bounded coordinate.
struct RadialBvp<'a> {
    chart: &'a BlowupChart,
    dim: usize,
    r: Vec<f64>,
    inner: Inner,
    /// Index of the blow-up node (0 for annuli, last for balls).
    blowup: usize,
}

struct Solved {
    v: Vec<f64>,
    iters: usize,
}

impl RadialBvp<'_> {
    fn free(&self) -> std::ops::Range<usize> {
        let n = self.r.len();
        match self.inner {
            Inner::Center => 0..n - 1,
            Inner::Dirichlet => 1..n - 1,
        }
    }

    /// Residual and tridiagonal Jacobian over the free nodes.
    fn assemble(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let nd = self.dim as f64;
        let range = self.free();
        let m = range.len();
        let (mut f, mut sub, mut diag, mut sup) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for (row, i) in range.clone().enumerate() {
            let u = self.chart.value(v[i]);
            let k = self.chart.reaction(u);
            let dk = self.chart.reaction_deriv(u);
            if i == 0 {
                // Symmetric center: Δv ≈ 2n(v₁ − v₀)/r₁².
                let c = 2.0 * nd / (self.r[1] * self.r[1]);
                f[row] = c * (v[1] - v[0]) - k;
                diag[row] = -c - dk;
                sup[row] = c;
                continue;
            }
            let a = self.r[i] - self.r[i - 1];
            let b = self.r[i + 1] - self.r[i];
            let (dr, dl) = (v[i + 1] - v[i], v[i] - v[i - 1]);
            let d2 = 2.0 * (dr / b - dl / a) / (a + b);
            let g = (a * a * dr + b * b * dl) / (a * b * (a + b));
            let c = (nd - 1.0) / self.r[i];
            f[row] = d2 + c * g - k * (1.0 - g * g);
            let (gr, gl, gc) = (a / (b * (a + b)), -b / (a * (a + b)), (b - a) / (a * b));
            let w = c + 2.0 * k * g;
            sup[row] = 2.0 / (b * (a + b)) + w * gr;
            sub[row] = 2.0 / (a * (a + b)) + w * gl;
            diag[row] = -2.0 / (a * b) + w * gc - dk * (1.0 - g * g);
        }
        (f, sub, diag, sup)
    }

    fn solve(&self, mut v: Vec<f64>, cfg: &ContinuationConfig) -> Result<Solved> {
        let (vmin, vmax) = self.chart.v_range();
        let range = self.free();
        let norm = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (mut f, mut sub, mut diag, mut sup) = self.assemble(&v);
        let mut fnorm = norm(&f);
        for iter in 1..=cfg.max_newton {
            let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
            let mut lower = sub.clone();
            lower[0] = 0.0;
            let mut upper = sup.clone();
            *upper.last_mut().unwrap() = 0.0;
            let step = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
            let step_max = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = v
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| if range.contains(&i) { x + t * step[i - range.start] } else { x })
                    .collect();
                let inside = range.clone().all(|i| trial[i] > vmin && trial[i] < vmax);
                if inside {
                    let (tf, tsub, tdiag, tsup) = self.assemble(&trial);
                    let tn = norm(&tf);
                    if tn.is_finite() && (tn <= (1.0 - 1e-4 * t) * fnorm || t * step_max <= cfg.newton_tol) {
                        v = trial;
                        f = tf;
                        sub = tsub;
                        diag = tdiag;
                        sup = tsup;
                        fnorm = tn;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    return Err(Error::NewtonDivergence(format!(
                        "radial line search stalled at residual {fnorm:e} after {iter} iterations"
                    )));
                }
            }
            if t * step_max <= cfg.newton_tol || fnorm == 0.0 {
                return Ok(Solved { v, iters: iter });
            }
        }
        Err(Error::NewtonDivergence(format!("radial Newton budget exhausted at residual {fnorm:e}")))
    }

    fn band(&self, offset: f64) -> Vec<usize> {
        let rb = self.r[self.blowup];
        self.free().filter(|&i| (self.r[i] - rb).abs() >= offset * (1.0 - 1e-12)).collect()
    }

    fn energy(&self, v: &[f64], band: &[usize]) -> f64 {
        let q = self.chart.potential();
        let nd = self.dim as i32;
        let mut e = 0.0;
        for w in band.windows(2) {
            let (i, j) = (w[0], w[1]);
            let (ui, uj) = (self.chart.value(v[i]), self.chart.value(v[j]));
            let dr = self.r[j] - self.r[i];
            let du = (uj - ui) / dr;
            let rm = 0.5 * (self.r[i] + self.r[j]);
            e += (0.5 * du * du + 0.5 * (q.w(ui) + q.w(uj))) * rm.powi(nd - 1) * dr;
        }
        e
    }

    /// Continuation in the boundary level at the blow-up node.
    fn continuation(
        &self,
        cfg: &ContinuationConfig,
        outer_value: f64,
        offset: f64,
    ) -> Result<(Vec<f64>, ContinuationReport)> {
        let cap = self.chart.level_caps().1;
        let band = self.band(offset);
        if band.is_empty() {
            return Err(Error::NoStabilization(format!("band offset {offset} leaves no grid nodes")));
        }
        let n = self.r.len();
        let mut v = vec![0.0; n];
        let fixed = match self.inner {
            Inner::Center => n - 1,
            Inner::Dirichlet => n - 1 - self.blowup,
        };
        v[fixed] = self.chart.coordinate(outer_value);
        let mut levels = Vec::new();
        let mut prev_u: Option<Vec<f64>> = None;
        let schedule = cfg.levels(cap);
        for (k, &b) in schedule.iter().enumerate() {
            v[self.blowup] = self.chart.coordinate(b);
            let solved = self.solve(v, cfg)?;
            v = solved.v;
            let u: Vec<f64> = band.iter().map(|&i| self.chart.value(v[i])).collect();
            let delta = prev_u.as_ref().map(|p| p.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
            levels.push(LevelRecord {
                boundary_level: b,
                interior_max_delta: delta,
                newton_iters: solved.iters,
                energy: self.energy(&v, &band),
                truncation_radius: None,
            });
            prev_u = Some(u);
            let stabilized = delta.is_some_and(|d| d <= cfg.tol);
            let last = k + 1 == schedule.len();
            if stabilized || (last && b >= cap) {
                let report = ContinuationReport {
                    levels,
                    stop_reason: if stabilized { StopReason::Stabilized } else { StopReason::Cap },
                    tol: cfg.tol,
                    band_offset: offset,
                    level_cap: cap,
                    chart_energy: self.chart.h0(),
                    truncations: Vec::new(),
                };
                return Ok((v, report));
            }
        }
        Err(Error::NoStabilization(format!(
            "band change {:e} still above tol {:e} after {} levels",
            levels.last().and_then(|l| l.interior_max_delta).unwrap_or(f64::NAN),
            cfg.tol,
            levels.len()
        )))
    }
}

/// `r_i` on `[lo, hi]`, clustered toward `lo` (`toward_lo`) or `hi`.
fn graded_nodes(lo: f64, hi: f64, cells: usize, grading: f64, toward_lo: bool) -> Vec<f64> {
    (0..=cells)
        .map(|i| {
            let xi = i as f64 / cells as f64;
            let s = |x: f64| if grading == 0.0 { x } else { (grading * x).exp_m1() / grading.exp_m1() };
            if i == cells {
                hi
            } else if toward_lo {
                lo + (hi - lo) * s(xi)
            } else {
                hi - (hi - lo) * s(1.0 - xi)
            }
        })
        .collect()
}

fn default_offset(r: &[f64], blowup: usize, cells: usize) -> f64 {
    let k = 5.min(cells / 2);
    if blowup == 0 {
        r[k] - r[0]
    } else {
        r[blowup] - r[blowup - k]
    }
}

fn annulus_problem(
    p: &Potential,
    dim: usize,
    l: f64,
    eps: f64,
    cfg: &RadialConfig,
) -> Result<(Arc<BlowupChart>, Vec<f64>)> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(l > 1.0 && l.is_finite()) {
        return Err(invalid(format!("outer radius L must exceed 1, got {l}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    cfg.validate()?;
    let q = p.scaled(eps * eps)?;
    let chart = Arc::new(BlowupChart::new(&q, cfg.continuation.chart_energy)?);
    Ok((chart, graded_nodes(1.0, l, cfg.cells, cfg.grading, true)))
}

/// The annulus barrier `ψ_ε` on `(1, L]`: `ψ(L) = 0`, `ψ(r) → ∞` as `r → 1⁺`.
pub fn annulus_barrier(p: &Potential, dim: usize, l: f64, eps: f64, tol: f64) -> Result<RadialProfile> {
    let mut cfg = RadialConfig::default();
    cfg.continuation.tol = tol;
    annulus_barrier_with(p, dim, l, eps, &cfg)
}

/// [`annulus_barrier`] with explicit grid and continuation settings.
pub fn annulus_barrier_with(p: &Potential, dim: usize, l: f64, eps: f64, cfg: &RadialConfig) -> Result<RadialProfile> {
    let (chart, r) = annulus_problem(p, dim, l, eps, cfg)?;
    let bvp = RadialBvp { chart: &chart, dim, r, inner: Inner::Dirichlet, blowup: 0 };
    let offset = cfg.continuation.band_offset.unwrap_or_else(|| default_offset(&bvp.r, 0, cfg.cells));
    let (v, report) = bvp.continuation(&cfg.continuation, 0.0, offset)?;
    let r = bvp.r;
    Ok(RadialProfile {
        dim,
        r_domain: (1.0, l),
        eps,
        potential: p.clone(),
        band_offset: offset,
        repr: Repr::Grid { r, v, chart },
        report: Some(report),
    })
}

/// Annulus solution with finite inner data `ψ(1) = b` and `ψ(L) = 0`.
pub fn annulus_dirichlet(
    p: &Potential,
    dim: usize,
    l: f64,
    eps: f64,
    b: f64,
    cfg: &RadialConfig,
) -> Result<RadialProfile> {
    let (chart, r) = annulus_problem(p, dim, l, eps, cfg)?;
    let (_, cap) = chart.level_caps();
    if !(b >= 0.0 && b <= cap) {
        return Err(invalid(format!("inner value must lie in [0, {cap}], got {b}")));
    }
    let bvp = RadialBvp { chart: &chart, dim, r, inner: Inner::Dirichlet, blowup: 0 };
    let mut v = vec![0.0; bvp.r.len()];
    v[0] = chart.coordinate(b);
    let v = bvp.solve(v, &cfg.continuation)?.v;
    let r = bvp.r;
    Ok(RadialProfile {
        dim,
        r_domain: (1.0, l),
        eps,
        potential: p.clone(),
        band_offset: 0.0,
        repr: Repr::Grid { r, v, chart },
        report: None,
    })
}

/// Radial blow-up solution in the ball `|x| < radius`: regular at the
/// center, `+∞` on the sphere.
pub fn ball_blowup(p: &Potential, dim: usize, radius: f64, cfg: &RadialConfig) -> Result<RadialProfile> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    cfg.validate()?;
    let chart = Arc::new(BlowupChart::new(p, cfg.continuation.chart_energy)?);
    let r = graded_nodes(0.0, radius, cfg.cells, cfg.grading, false);
    let blowup = r.len() - 1;
    let bvp = RadialBvp { chart: &chart, dim, r, inner: Inner::Center, blowup };
    let offset = cfg.continuation.band_offset.unwrap_or_else(|| default_offset(&bvp.r, blowup, cfg.cells));
    let (v, report) = bvp.continuation(&cfg.continuation, 0.0, offset)?;
    let r = bvp.r;
    Ok(RadialProfile {
        dim,
        r_domain: (0.0, radius),
        eps: 1.0,
        potential: p.clone(),
        band_offset: offset,
        repr: Repr::Grid { r, v, chart },
        report: Some(report),
    })
}

/// `ψ_ε(r_fixed)` for each `ε` of a strictly decreasing sequence.
pub fn barrier_divergence_check(
    p: &Potential,
    dim: usize,
    l: f64,
    r_fixed: f64,
    eps_sequence: &[f64],
    cfg: &RadialConfig,
) -> Result<Vec<f64>> {
    if !(r_fixed > 1.0 && r_fixed <= l) {
        return Err(invalid(format!("r_fixed must lie in (1, L], got {r_fixed}")));
    }
    if eps_sequence.is_empty() || eps_sequence.iter().any(|&e| !(e > 0.0)) {
        return Err(invalid("eps sequence must be nonempty and positive"));
    }
    if eps_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("eps sequence must be strictly decreasing"));
    }
    eps_sequence.iter().map(|&eps| annulus_barrier_with(p, dim, l, eps, cfg)?.eval(r_fixed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_is_monotone_and_hits_endpoints() {
        for toward_lo in [true, false] {
            let r = graded_nodes(1.0, 8.0, 50, 4.0, toward_lo);
            assert_eq!(r[0], 1.0);
            assert_eq!(r[50], 8.0);
            assert!(r.windows(2).all(|w| w[1] > w[0]));
            let (first, last) = (r[1] - r[0], r[50] - r[49]);
            assert_eq!(first < last, toward_lo);
        }
    }

    #[test]
    fn barrier_has_zero_outer_value_and_decreases() {
        let p = Potential::power(4.0).unwrap();
        let psi = annulus_barrier(&p, 2, 4.0, 1.0, 1e-9).unwrap();
        assert_eq!(psi.eval(4.0).unwrap(), 0.0);
        let nodes = psi.nodes().unwrap();
        assert!(nodes.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(psi.eval(1.0 + 0.5 * psi.band_offset()).is_ok());
        assert!(psi.eval(0.99).is_err());
        assert_eq!(psi.report().unwrap().stop_reason, StopReason::Stabilized);
    }

    #[test]
    fn input_validation() {
        let p = Potential::cosh();
        assert!(annulus_barrier(&p, 2, 1.0, 1.0, 1e-8).is_err());
        assert!(annulus_barrier(&p, 2, 3.0, 0.0, 1e-8).is_err());
        let cfg = RadialConfig::default();
        assert!(barrier_divergence_check(&p, 2, 8.0, 2.0, &[0.1, 0.5], &cfg).is_err());
        assert!(barrier_divergence_check(&p, 2, 8.0, 9.0, &[0.5], &cfg).is_err());
    }
}
