use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::error::{invalid, Error, Result};
use crate::geometry::{GridDomain, NodeClass};
use crate::linalg::SparseSystem;
use crate::potential::Potential;

/// Settings for [`solve_dirichlet_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirichletConfig {
    /// Bound on `‖Δ_h u − W'(u)‖∞` at interior nodes.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 100 }
    }
}

/// Convergence history of a Dirichlet solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletStats {
    pub iterations: usize,
    /// Final `‖Δ_h u − W'(u)‖∞`.
    pub residual: f64,
    /// Discrete energy before the first and after every accepted step.
    pub energy: Vec<f64>,
}

/// Five-point (three-point in 1-D) staircase stencils.
pub(crate) struct Staircase<'a> {
    pub(crate) dom: &'a GridDomain,
    /// Stencil neighbors of each interior node.
    pub(crate) nbrs: Vec<[usize; 4]>,
    pub(crate) arms: usize,
    pub(crate) inv_h2: f64,
}

impl<'a> Staircase<'a> {
    pub(crate) fn new(dom: &'a GridDomain) -> Result<Self> {
        let arms = 2 * dom.dim();
        let mut nbrs = Vec::with_capacity(dom.interior().len());
        for &k in dom.interior() {
            let mut out = [usize::MAX; 4];
            for (a, (lo, hi)) in dom.axis_neighbors(k).into_iter().take(dom.dim()).enumerate() {
                let (Some(lo), Some(hi)) = (lo, hi) else {
                    return Err(Error::DegenerateDomain(format!("interior node {k} lies on the grid edge")));
                };
                out[2 * a] = lo;
                out[2 * a + 1] = hi;
            }
            nbrs.push(out);
        }
        let h = dom.spacing();
        Ok(Self { dom, nbrs, arms, inv_h2: 1.0 / (h * h) })
    }

    /// `Δ_h u` at interior node number `i`.
    pub(crate) fn laplacian(&self, u: &[f64], i: usize) -> f64 {
        let k = self.dom.interior()[i];
        let s: f64 = self.nbrs[i][..self.arms].iter().map(|&j| u[j]).sum();
        (s - self.arms as f64 * u[k]) * self.inv_h2
    }

    /// Rounding level of `Δ_h u − W'(u)` at interior node number `i`.
    pub(crate) fn rounding(&self, p: &Potential, u: &[f64], i: usize) -> f64 {
        let k = self.dom.interior()[i];
        let s: f64 = self.nbrs[i][..self.arms].iter().map(|&j| u[j].abs()).sum();
        64.0 * f64::EPSILON * ((s + self.arms as f64 * u[k].abs()) * self.inv_h2 + p.dw(u[k]).abs())
    }
}

/// Solve `Δ_h u = W'(u)` with `u = g` on boundary nodes, to residual `tol`.
///
/// `g` holds one value per grid node; only boundary entries are read.
pub fn solve_dirichlet(p: &Potential, dom: &GridDomain, g: &[f64], tol: f64) -> Result<Field> {
    let cfg = DirichletConfig { tol, ..Default::default() };
    Ok(solve_dirichlet_with(p, dom, g, &cfg, None)?.0)
}

/// [`solve_dirichlet`] with explicit settings and an optional initial iterate
/// (one value per node; interior entries are used).
///
/// Damped Newton on the convex discrete energy
/// `Σ_edges ½(u_a − u_b)² h^{d−2} + Σ_interior W(u) h^d` with Armijo backtracking.
pub fn solve_dirichlet_with(
    p: &Potential,
    dom: &GridDomain,
    g: &[f64],
    cfg: &DirichletConfig,
    initial: Option<&[f64]>,
) -> Result<(Field, DirichletStats)> {
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(invalid(format!("tol must be positive, got {}", cfg.tol)));
    }
    if cfg.max_iter == 0 {
        return Err(invalid("max_iter must be at least 1"));
    }
    if g.len() != dom.len() {
        return Err(invalid(format!("boundary data has {} entries for {} nodes", g.len(), dom.len())));
    }
    let mut u = vec![f64::NAN; dom.len()];
    for k in 0..dom.len() {
        match dom.class(k) {
            NodeClass::Exterior => {}
            NodeClass::Interior => u[k] = initial.map_or(0.0, |x| x[k]),
            _ => u[k] = g[k],
        }
        if dom.class(k) != NodeClass::Exterior && !u[k].is_finite() {
            return Err(Error::NonFiniteData(format!("boundary or initial value {} at node {k}", u[k])));
        }
    }
    if let Some(x) = initial {
        if x.len() != dom.len() {
            return Err(invalid(format!("initial iterate has {} entries for {} nodes", x.len(), dom.len())));
        }
    }

    let st = Staircase::new(dom)?;
    let interior = dom.interior();
    let n = interior.len();
    let h = dom.spacing();
    let hd = h.powi(dom.dim() as i32);
    let edge_w = h.powi(dom.dim() as i32 - 2);

    let residual = |u: &[f64]| -> Vec<f64> { (0..n).map(|i| st.laplacian(u, i) - p.dw(u[interior[i]])).collect() };
    let energy = |u: &[f64]| -> f64 {
        let mut e = 0.0;
        for (i, &k) in interior.iter().enumerate() {
            e += p.w(u[k]) * hd;
            for &j in &st.nbrs[i][..st.arms] {
                if dom.unknown_index(j).is_none_or(|jj| jj > i) {
                    e += 0.5 * (u[k] - u[j]).powi(2) * edge_w;
                }
            }
        }
        e
    };
    // E(u + t s) − E(u), evaluated without cancellation.
    let energy_change = |u: &[f64], s: &[f64], t: f64| -> f64 {
        let mut de = 0.0;
        for (i, &k) in interior.iter().enumerate() {
            de += p.increment(u[k], t * s[i]) * hd;
            for &j in &st.nbrs[i][..st.arms] {
                let (d, delta) = match dom.unknown_index(j) {
                    None => (u[k] - u[j], s[i]),
                    Some(jj) if jj > i => (u[k] - u[j], s[i] - s[jj]),
                    Some(_) => continue,
                };
                de += t * delta * (d + 0.5 * t * delta) * edge_w;
            }
        }
        de
    };

    let mut history = vec![energy(&u)];
    let mut r = residual(&u);
    for iter in 0..=cfg.max_iter {
        let rinf = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !rinf.is_finite() {
            return Err(Error::NonFiniteData(format!("residual became {rinf} after {iter} iterations")));
        }
        // The residual cannot drop below its rounding level.
        let floor = (0..n).fold(0.0f64, |m, i| m.max(st.rounding(p, &u, i)));
        if rinf <= cfg.tol.max(floor) {
            let stats = DirichletStats { iterations: iter, residual: rinf, energy: history };
            return Ok((Field::from_values(Arc::new(dom.clone()), u)?, stats));
        }
        if iter == cfg.max_iter {
            break;
        }
        let mut sys = SparseSystem::new(n);
        for (i, &k) in interior.iter().enumerate() {
            sys.add(i, i, st.arms as f64 * st.inv_h2 + p.ddw(u[k]));
            for &j in &st.nbrs[i][..st.arms] {
                if let Some(jj) = dom.unknown_index(j) {
                    sys.add(i, jj, -st.inv_h2);
                }
            }
        }
        let s = sys.solve_spd(&r)?;
        let slope = -hd * r.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>();
        let mut t = 1.0;
        let accepted = loop {
            let de = energy_change(&u, &s, t);
            if de.is_finite() && de <= 1e-4 * t * slope {
                break Some(de);
            }
            t *= 0.5;
            if t < 1e-10 {
                break None;
            }
        };
        match accepted {
            Some(de) => {
                for (i, &k) in interior.iter().enumerate() {
                    u[k] += t * s[i];
                }
                history.push(history.last().unwrap() + de);
                r = residual(&u);
            }
            None => {
                return Err(Error::NewtonDivergence(format!(
                    "energy line search stalled at residual {rinf:e} (rounding level {floor:e})"
                )));
            }
        }
    }
    let rinf = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Err(Error::NewtonDivergence(format!("Newton budget of {} iterations exhausted at residual {rinf:e}", cfg.max_iter)))
}
