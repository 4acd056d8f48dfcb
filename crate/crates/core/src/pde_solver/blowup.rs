use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::chart::BlowupChart;
use crate::continuation::{ContinuationConfig, ContinuationReport, LevelRecord, StopReason, TruncationRecord};
use crate::error::{Error, Result};
use crate::geometry::{distance_field, GridDomain, NodeClass, Point, Target};
use crate::linalg::SparseSystem;
use crate::ode_phase::{beta_halflengths, Sign};
use crate::potential::Potential;

/// Where boundary data is imposed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// At the boundary crossing of each grid link (non-uniform stencils).
    #[default]
    CutCell,
    /// At the boundary nodes themselves.
    Staircase,
}

/// Settings for [`solve_blowup`] and [`solve_signed_blowup`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupConfig {
    pub continuation: ContinuationConfig,
    pub boundary: BoundaryMode,
}

/// Blow-up solution with the same sign on the whole boundary.
///
/// Continuation in the boundary level `B`: each level solves the Dirichlet
/// problem with data `sign·B` (also on the truncation boundary of exterior
/// domains), written in the bounded coordinate of [`BlowupChart`].
pub fn solve_blowup(
    p: &Potential,
    dom: &GridDomain,
    sign: Sign,
    cfg: &BlowupConfig,
) -> Result<(Field, ContinuationReport)> {
    let labels = real_labels(dom);
    if labels.contains(&Sign::Plus) && labels.contains(&Sign::Minus) {
        return Err(Error::LabelError("solve_blowup needs a single boundary label; use solve_signed_blowup".into()));
    }
    run(p, dom, cfg, &|d: &GridDomain| {
        Ok((0..d.len()).map(|k| if d.class(k).is_boundary() { sign.value() } else { 0.0 }).collect())
    })
}

/// Blow-up solution tending to `+∞` on `A⁺` and `−∞` on `A⁻`.
///
/// Boundary data `φ_B = B (d(x, A⁻) − d(x, A⁺)) / (d(x, A⁺) + d(x, A⁻))`, which is
/// `±B` on `A±` and interpolates on truncation boundaries.
pub fn solve_signed_blowup(p: &Potential, dom: &GridDomain, cfg: &BlowupConfig) -> Result<(Field, ContinuationReport)> {
    let labels = real_labels(dom);
    for s in [Sign::Plus, Sign::Minus] {
        if !labels.contains(&s) {
            return Err(Error::LabelError(format!("no boundary node carries the {s:?} label")));
        }
    }
    run(p, dom, cfg, &signed_weights)
}

/// Labels of boundary nodes off the truncation boundary.
fn real_labels(dom: &GridDomain) -> Vec<Sign> {
    let mut out = Vec::new();
    for k in 0..dom.len() {
        if let Some(s) = dom.class(k).label() {
            if !dom.is_truncation(k) && !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

fn signed_weights(dom: &GridDomain) -> Result<Vec<f64>> {
    let parts: Vec<Vec<Point>> = [NodeClass::BoundaryPlus, NodeClass::BoundaryMinus]
        .iter()
        .map(|&c| {
            (0..dom.len()).filter(|&k| dom.class(k) == c && !dom.is_truncation(k)).map(|k| dom.point(k)).collect()
        })
        .collect();
    let nearest =
        |x: Point, set: &[Point]| set.iter().map(|y| (x[0] - y[0]).hypot(x[1] - y[1])).fold(f64::INFINITY, f64::min);
    Ok((0..dom.len())
        .map(|k| {
            if !dom.class(k).is_boundary() {
                return 0.0;
            }
            if !dom.is_truncation(k) {
                return dom.class(k).label().map_or(0.0, Sign::value);
            }
            let x = dom.point(k);
            let (dp, dm) = (nearest(x, &parts[0]), nearest(x, &parts[1]));
            (dm - dp) / (dp + dm)
        })
        .collect())
}

/// Chart energy for mixed-sign data: the smallest `h₀·4^k` whose chart span
/// `l⁺(h₀) + l⁻(h₀)` is at most `SPAN_RATIO` times the distance between the two
/// labeled parts. Wider spans fold the discrete problem between the parts.
fn signed_chart_energy(p: &Potential, dom: &GridDomain, base: f64) -> Result<f64> {
    let separation = (0..dom.len())
        .filter(|&k| dom.class(k) == NodeClass::BoundaryPlus && !dom.is_truncation(k))
        .map(|k| dom.dist_minus()[k])
        .fold(f64::INFINITY, f64::min);
    if !separation.is_finite() {
        return Ok(base);
    }
    let mut h0 = base;
    for _ in 0..40 {
        let (lm, lp) = beta_halflengths(p, h0, 1e-8)?;
        if lm + lp <= SPAN_RATIO * separation {
            break;
        }
        h0 *= 4.0;
    }
    Ok(h0)
}

const SPAN_RATIO: f64 = 1.5;

const SHORT_ARM: f64 = 0.05;

/// Artificial diffusion factor `σ(P) ≥ max(1, |P|)` for the cell Péclet
/// number `P`, with its derivative: exactly 1 for `|P| ≤ ½`, `|P|` beyond `3/2`,
/// and a quadratic blend in between.
fn fitting(p: f64) -> (f64, f64) {
    let a = p.abs();
    if a <= 0.5 {
        (1.0, 0.0)
    } else if a < 1.5 {
        (1.0 + 0.5 * (a - 0.5).powi(2), (a - 0.5) * p.signum())
    } else {
        (a, p.signum())
    }
}

/// Nesting depth of level subdivision after a failed Newton solve.
const MAX_SUBSTEPS: usize = 12;

#[derive(Clone, Copy)]
enum Arm {
    Free(usize),
    Fixed(usize),
}

/// `Δv = K(u)(1 − |∇v|²)` on the interior nodes, `u = Ψ(v)`.
struct Transformed<'a> {
    chart: &'a BlowupChart,
    dom: &'a GridDomain,
    /// Per unknown and axis: (left arm, spacing), (right arm, spacing).
    arms: Vec<[[(Arm, f64); 2]; 2]>,
    axes: usize,
    /// Axis of a cut arm shorter than `SHORT_ARM·h`; such nodes interpolate
    /// linearly along it instead of carrying the equation.
    short: Vec<Option<usize>>,
}

impl<'a> Transformed<'a> {
    fn new(chart: &'a BlowupChart, dom: &'a GridDomain, mode: BoundaryMode) -> Result<Self> {
        let h = dom.spacing();
        let cut: HashMap<(usize, usize), f64> =
            dom.links().iter().map(|l| ((l.interior, l.boundary), l.fraction)).collect();
        let axes = dom.dim();
        let mut arms = Vec::with_capacity(dom.interior().len());
        let mut short = Vec::with_capacity(dom.interior().len());
        for &k in dom.interior() {
            let mut row = [[(Arm::Fixed(0), h); 2]; 2];
            for (a, (lo, hi)) in dom.axis_neighbors(k).into_iter().take(axes).enumerate() {
                for (side, nb) in [lo, hi].into_iter().enumerate() {
                    let Some(j) = nb else {
                        return Err(Error::DegenerateDomain(format!("interior node {k} lies on the grid edge")));
                    };
                    row[a][side] = match dom.unknown_index(j) {
                        Some(jj) => (Arm::Free(jj), h),
                        None => {
                            let theta = match mode {
                                BoundaryMode::CutCell => cut.get(&(k, j)).copied().unwrap_or(1.0),
                                BoundaryMode::Staircase => 1.0,
                            };
                            (Arm::Fixed(j), theta * h)
                        }
                    };
                }
            }
            let shortest = (0..axes)
                .flat_map(|a| [(a, row[a][0].1), (a, row[a][1].1)])
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .filter(|&(_, len)| len < SHORT_ARM * h)
                .map(|(a, _)| a);
            short.push(shortest);
            arms.push(row);
        }
        Ok(Self { chart, dom, arms, axes, short })
    }

    fn assemble(&self, v: &[f64], fixed: &[f64], jac: bool) -> (Vec<f64>, Option<SparseSystem>) {
        let n = v.len();
        let mut f = vec![0.0; n];
        let mut sys = jac.then(|| SparseSystem::new(n));
        let val = |arm: Arm| match arm {
            Arm::Free(j) => v[j],
            Arm::Fixed(k) => fixed[k],
        };
        for i in 0..n {
            if let Some(a) = self.short[i] {
                // Second difference along the short arm's axis vanishes.
                let [(l, da), (r, db)] = self.arms[i][a];
                let s = da + db;
                f[i] = 2.0 * ((val(r) - v[i]) / db - (v[i] - val(l)) / da) / s;
                if let Some(sys) = sys.as_mut() {
                    sys.add(i, i, -2.0 / (da * db));
                    if let Arm::Free(j) = l {
                        sys.add(i, j, 2.0 / (da * s));
                    }
                    if let Arm::Free(j) = r {
                        sys.add(i, j, 2.0 / (db * s));
                    }
                }
                continue;
            }
            let u = self.chart.value(v[i]);
            let kr = self.chart.reaction(u);
            let dk = self.chart.reaction_deriv(u);
            // Per axis: g, D2, σ, σ', arm lengths.
            let mut parts = [(0.0, 0.0, 1.0, 0.0, 1.0, 1.0); 2];
            let mut grad2 = 0.0;
            let mut lap = 0.0;
            for (a, part) in parts.iter_mut().enumerate().take(self.axes) {
                let [(l, da), (r, db)] = self.arms[i][a];
                let (dr, dl) = (val(r) - v[i], v[i] - val(l));
                let d2 = 2.0 * (dr / db - dl / da) / (da + db);
                let g = (da * da * dr + db * db * dl) / (da * db * (da + db));
                let (sig, dsig) = fitting(kr * g * (da + db) / 4.0);
                lap += sig * d2;
                grad2 += g * g;
                *part = (g, d2, sig, dsig, da, db);
            }
            f[i] = lap - kr * (1.0 - grad2);
            if let Some(sys) = sys.as_mut() {
                let mut diag = -dk * (1.0 - grad2);
                for (a, &(g, d2, sig, dsig, da, db)) in parts.iter().enumerate().take(self.axes) {
                    let s = da + db;
                    // ∂F/∂v_j = σ ∂D2 + D2 σ' (s/4)(K ∂g + g K' δ_ij) + 2K g ∂g.
                    let c = d2 * dsig * s / 4.0;
                    let w = c * kr + 2.0 * kr * g;
                    diag += sig * (-2.0 / (da * db)) + w * (db - da) / (da * db) + c * g * dk;
                    let [(l, _), (r, _)] = self.arms[i][a];
                    if let Arm::Free(j) = l {
                        sys.add(i, j, sig * 2.0 / (da * s) - w * db / (da * s));
                    }
                    if let Arm::Free(j) = r {
                        sys.add(i, j, sig * 2.0 / (db * s) + w * da / (db * s));
                    }
                }
                sys.add(i, i, diag);
            }
        }
        (f, sys)
    }

    /// Newton with backtracking on `‖F‖₂`, iterates kept inside the chart.
    fn solve(&self, mut v: Vec<f64>, fixed: &[f64], cfg: &ContinuationConfig) -> Result<(Vec<f64>, usize)> {
        let (vmin, vmax) = self.chart.v_range();
        // Discrete maximum principle: the solution lies between the extreme data and 0.
        let lo = fixed.iter().fold(0.0f64, |m, &x| m.min(x));
        let hi = fixed.iter().fold(0.0f64, |m, &x| m.max(x));
        let norm = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (mut f, mut sys) = self.assemble(&v, fixed, true);
        let mut fnorm = norm(&f);
        for iter in 1..=cfg.max_newton {
            let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
            let step = sys.take().expect("Jacobian assembled").solve(&rhs)?;
            let step_max = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = v.iter().zip(&step).map(|(x, s)| x + t * s).collect();
                if trial.iter().all(|&x| x > vmin && x < vmax && x >= lo && x <= hi) {
                    let (tf, _) = self.assemble(&trial, fixed, false);
                    let tn = norm(&tf);
                    if tn.is_finite() && (tn <= (1.0 - 1e-4 * t) * fnorm || t * step_max <= cfg.newton_tol) {
                        v = trial;
                        f = tf;
                        fnorm = tn;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    if step_max <= 1e-10 {
                        // Residual already at rounding level.
                        return Ok((v, iter));
                    }
                    return Err(Error::NewtonDivergence(format!(
                        "line search stalled at residual {fnorm:e} after {iter} iterations"
                    )));
                }
            }
            if t * step_max <= cfg.newton_tol || fnorm == 0.0 {
                return Ok((v, iter));
            }
            sys = self.assemble(&v, fixed, true).1;
        }
        Err(Error::NewtonDivergence(format!("Newton budget exhausted at residual {fnorm:e}")))
    }

    /// Solve at level `to` starting from the solution `v` at level `from`,
    /// inserting intermediate levels when Newton fails.
    fn reach(
        &self,
        v: Vec<f64>,
        weights: &[f64],
        from: f64,
        to: f64,
        cfg: &ContinuationConfig,
        depth: usize,
    ) -> Result<(Vec<f64>, usize)> {
        let fixed: Vec<f64> =
            weights.iter().map(|&w| if w == 0.0 { 0.0 } else { self.chart.coordinate(to * w) }).collect();
        match self.solve(v.clone(), &fixed, cfg) {
            Err(Error::NewtonDivergence(_)) if depth < MAX_SUBSTEPS => {
                let mid = if from > 0.0 { (from * to).sqrt() } else { 0.5 * to };
                let (w, a) = self.reach(v, weights, from, mid, cfg, depth + 1)?;
                let (w, b) = self.reach(w, weights, mid, to, cfg, depth + 1)?;
                Ok((w, a + b))
            }
            other => other,
        }
    }

    /// `Σ_edges ½(u_a − u_b)² h^{d−2} + Σ W(u) hᵈ` over the band.
    fn energy(&self, u: &[f64], in_band: &[bool]) -> f64 {
        let dom = self.dom;
        let h = dom.spacing();
        let hd = h.powi(dom.dim() as i32);
        let edge_w = h.powi(dom.dim() as i32 - 2);
        let p = self.chart.potential();
        let mut e = 0.0;
        for &k in dom.interior() {
            if !in_band[k] {
                continue;
            }
            e += p.w(u[k]) * hd;
            for (_, hi) in dom.axis_neighbors(k).into_iter().take(dom.dim()) {
                if let Some(j) = hi.filter(|&j| in_band[j]) {
                    e += 0.5 * (u[k] - u[j]).powi(2) * edge_w;
                }
            }
        }
        e
    }
}

/// Level continuation on one (possibly truncated) domain.
struct LevelRun {
    u: Vec<f64>,
    levels: Vec<LevelRecord>,
    stop: StopReason,
}

fn continuation(
    chart: &BlowupChart,
    dom: &GridDomain,
    weights: &[f64],
    band: &[bool],
    cfg: &BlowupConfig,
    truncation_radius: Option<f64>,
) -> Result<LevelRun> {
    let c = &cfg.continuation;
    let op = Transformed::new(chart, dom, cfg.boundary)?;
    let (cap_minus, cap_plus) = chart.level_caps();
    let mut cap = f64::INFINITY;
    for &w in weights {
        if w > 0.0 {
            cap = cap.min(cap_plus / w);
        } else if w < 0.0 {
            cap = cap.min(cap_minus / -w);
        }
    }
    let band_nodes: Vec<usize> = dom.interior().iter().copied().filter(|&k| band[k]).collect();
    let interior = dom.interior();
    let mut v = vec![0.0; interior.len()];
    let mut u = vec![f64::NAN; dom.len()];
    let mut prev: Option<Vec<f64>> = None;
    let mut levels = Vec::new();
    let schedule = c.levels(cap);
    let mut reached = 0.0;
    for (idx, &b) in schedule.iter().enumerate() {
        for k in 0..dom.len() {
            if dom.class(k).is_boundary() {
                u[k] = b * weights[k];
            }
        }
        let (sol, iters) = op.reach(v, weights, reached, b, c, 0)?;
        v = sol;
        reached = b;
        for (i, &k) in interior.iter().enumerate() {
            u[k] = chart.value(v[i]);
        }
        let now: Vec<f64> = band_nodes.iter().map(|&k| u[k]).collect();
        let delta = prev.as_ref().map(|p| p.iter().zip(&now).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
        levels.push(LevelRecord {
            boundary_level: b,
            interior_max_delta: delta,
            newton_iters: iters,
            energy: op.energy(&u, band),
            truncation_radius,
        });
        prev = Some(now);
        let stabilized = delta.is_some_and(|d| d <= c.tol);
        if stabilized || (idx + 1 == schedule.len() && b >= cap) {
            let stop = if stabilized { StopReason::Stabilized } else { StopReason::Cap };
            return Ok(LevelRun { u, levels, stop });
        }
    }
    Err(Error::NoStabilization(format!(
        "band change {:e} still above tol {:e} after {} levels",
        levels.last().and_then(|l| l.interior_max_delta).unwrap_or(f64::NAN),
        c.tol,
        levels.len()
    )))
}

fn band_mask(dom: &GridDomain, offset: f64, extra: impl Fn(usize) -> bool) -> Vec<bool> {
    let db = dom.dist_boundary();
    let lim = offset * (1.0 - 1e-12);
    (0..dom.len()).map(|k| dom.class(k) == NodeClass::Interior && db[k] >= lim && extra(k)).collect()
}

fn run(
    p: &Potential,
    dom: &GridDomain,
    cfg: &BlowupConfig,
    weights: &dyn Fn(&GridDomain) -> Result<Vec<f64>>,
) -> Result<(Field, ContinuationReport)> {
    let c = &cfg.continuation;
    c.validate()?;
    let mixed = {
        let w = weights(dom)?;
        w.iter().any(|&x| x > 0.0) && w.iter().any(|&x| x < 0.0)
    };
    let h0 = if mixed { signed_chart_energy(p, dom, c.chart_energy)? } else { c.chart_energy };
    let chart = BlowupChart::new(p, h0)?;
    let offset = c.band_offset.unwrap_or(5.0 * dom.spacing());
    let level_cap = {
        let w = weights(dom)?;
        let (lo, hi) = chart.level_caps();
        let mut cap = f64::INFINITY;
        if w.iter().any(|&x| x > 0.0) {
            cap = cap.min(hi);
        }
        if w.iter().any(|&x| x < 0.0) {
            cap = cap.min(lo);
        }
        cap
    };
    let report = |levels, stop, truncations| ContinuationReport {
        levels,
        stop_reason: stop,
        tol: c.tol,
        band_offset: offset,
        level_cap,
        chart_energy: h0,
        truncations,
    };

    let (Some(r0), Some(center)) = (dom.truncation_radius(), dom.shape().truncation_center()) else {
        let band = band_mask(dom, offset, |_| true);
        if !band.contains(&true) {
            return Err(Error::NoStabilization(format!("band offset {offset} leaves no interior nodes")));
        }
        let run = continuation(&chart, dom, &weights(dom)?, &band, cfg, None)?;
        let field = Field::banded(Arc::new(dom.clone()), run.u, offset, band);
        return Ok((field, report(run.levels, run.stop, Vec::new())));
    };

    // Exhaustion: values are monitored on |x − c| ≤ R₀ − δ across growing radii.
    let monitor_radius = r0 - offset;
    let mut previous: Option<Field> = None;
    let mut truncations = Vec::new();
    let mut radius = r0;
    for _ in 0..c.max_truncations {
        let d = if radius == r0 { dom.clone() } else { dom.with_truncation(radius)? };
        let to_trunc = distance_field(&d, Target::Truncation)?;
        let lim = offset * (1.0 - 1e-12);
        let band = band_mask(&d, offset, |k| to_trunc[k] >= lim);
        let monitor = band_mask(&d, offset, |k| {
            let x = d.point(k);
            (x[0] - center[0]).hypot(x[1] - center[1]) <= monitor_radius
        });
        if !monitor.contains(&true) {
            return Err(Error::NoStabilization(format!("band offset {offset} leaves no monitored nodes")));
        }
        let run = continuation(&chart, &d, &weights(&d)?, &band, cfg, Some(radius))?;
        let field = Field::banded(Arc::new(d), run.u, offset, monitor);
        let delta = previous.as_ref().and_then(|prev| field.max_difference(prev));
        truncations.push(TruncationRecord {
            radius,
            monitor_delta: delta,
            levels: run.levels.len(),
            newton_iters: run.levels.iter().map(|l| l.newton_iters).sum(),
            stop_reason: run.stop,
        });
        if delta.is_some_and(|x| x <= c.truncation_tol) {
            return Ok((field, report(run.levels, run.stop, truncations)));
        }
        previous = Some(field);
        radius *= c.truncation_growth;
    }
    Err(Error::NoStabilization(format!(
        "monitored values still change by {:e} (> {:e}) after {} truncation radii",
        truncations.last().and_then(|t| t.monitor_delta).unwrap_or(f64::NAN),
        c.truncation_tol,
        truncations.len()
    )))
}
