use std::sync::Arc;

use blowup_core::{
    annulus_barrier_with, annulus_dirichlet, ball_blowup, beta_halflengths, blowup_halflength, build_domain,
    comparison_check_with, decay_check, make_orbit, signed_bounds_check, solve_blowup, solve_dirichlet_with,
    solve_signed_blowup, whole_space_barrier, BlowupConfig, ComparisonTolerances, ContinuationReport, DirichletConfig,
    Field, GridDomain, NodeClass, OrbitSpec, Potential,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CheckKind, OrbitFamily, Problem, RadialKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{read_csv, Sink};

const FIELD_HEADER: [&str; 3] = ["x", "y", "u"];

/// `ode`: orbit samples `(x, u, u', H)` and the length-map tables.
pub fn ode(cfg: &RunConfig, sink: &mut Sink) -> CliResult<Value> {
    cfg.validate_ode()?;
    let p = cfg.potential()?;
    let o = &cfg.ode;
    let spec = match o.orbit {
        OrbitFamily::Alpha => OrbitSpec::Alpha { lambda: o.lambda },
        OrbitFamily::Beta => OrbitSpec::Beta { h: o.energy },
        OrbitFamily::Gamma => OrbitSpec::Gamma { sign: o.sign },
    };
    let orbit = make_orbit(&p, spec, o.tol)?;
    let (lo, hi) = orbit.domain();
    let (a, b) = match o.orbit {
        OrbitFamily::Gamma => (o.x_min.unwrap_or(0.0), o.x_max.unwrap_or(10.0)),
        _ => (o.x_min.unwrap_or(0.99 * lo), o.x_max.unwrap_or(0.99 * hi)),
    };
    let n = o.samples;
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        if !(x > lo && x < hi) {
            continue;
        }
        let (u, du) = orbit.eval_with_deriv(x)?;
        rows.push(vec![x, u, du, orbit.hamiltonian_at(&p, x)?]);
    }
    if rows.is_empty() {
        return Err(CliError::config(
            "ode.x_min",
            format!("sampled range [{a}, {b}] misses the orbit domain ({lo}, {hi})"),
        ));
    }
    sink.csv("orbit.csv", &["x", "u", "du", "H"], &rows)?;

    let mut halflength = Vec::new();
    for &lambda in &o.lambdas {
        halflength.push(json!({ "lambda": lambda, "length": blowup_halflength(&p, lambda, o.tol)? }));
    }
    let mut beta = Vec::new();
    for &h in &o.energies {
        let (minus, plus) = beta_halflengths(&p, h, o.tol)?;
        beta.push(json!({ "energy": h, "minus": minus, "plus": plus }));
    }
    let lengths = json!({
        "potential": p.id(),
        "orbit": spec,
        "domain": [lo, hi],
        "hamiltonian": orbit.hamiltonian(),
        "halflength": halflength,
        "beta_halflengths": beta,
    });
    sink.json("lengths.json", &lengths)?;
    Ok(json!({ "rows": rows.len() }))
}

#[derive(Serialize)]
struct RadialOutput<'a> {
    potential: String,
    kind: RadialKind,
    dim: usize,
    r_domain: (f64, f64),
    band_offset: f64,
    report: Option<&'a ContinuationReport>,
}

/// `radial`: profile `(r, ψ)` and its continuation report.
pub fn radial(cfg: &RunConfig, sink: &mut Sink) -> CliResult<Value> {
    cfg.validate_radial()?;
    let p = cfg.potential()?;
    let r = &cfg.radial;
    let grid = r.grid();
    let profile = match r.kind {
        RadialKind::Barrier => annulus_barrier_with(&p, r.dim, r.outer, r.eps, &grid)?,
        RadialKind::Ball => ball_blowup(&p, r.dim, r.radius, &grid)?,
        RadialKind::AnnulusDirichlet => annulus_dirichlet(&p, r.dim, r.outer, r.eps, r.boundary_level, &grid)?,
        RadialKind::WholeSpace => whole_space_barrier(&p, r.dim, r.lambda)?,
    };
    let rows: Vec<Vec<f64>> = match profile.nodes() {
        Some(nodes) => nodes.into_iter().map(|(r, u)| vec![r, u]).collect(),
        None => {
            let (lo, hi) = profile.r_domain();
            let top = hi.min(r.r_max);
            let mut rows = Vec::with_capacity(r.samples);
            for i in 0..r.samples {
                let x = lo + (top - lo) * i as f64 / r.samples as f64;
                rows.push(vec![x, profile.eval(x)?]);
            }
            rows
        }
    };
    sink.csv("radial.csv", &["r", "psi"], &rows)?;
    let out = RadialOutput {
        potential: p.id(),
        kind: r.kind,
        dim: r.dim,
        r_domain: profile.r_domain(),
        band_offset: profile.band_offset(),
        report: profile.report(),
    };
    sink.json("radial_report.json", &out)?;
    Ok(json!({ "rows": rows.len(), "stop_reason": profile.report().map(|r| r.stop_reason) }))
}

fn domain(cfg: &RunConfig) -> CliResult<GridDomain> {
    Ok(build_domain(cfg.domain.shape.clone(), cfg.domain.h, cfg.domain.labels.clone())?)
}

/// Rows `(x, y, u)` of every certified node in node order.
fn field_rows(f: &Field) -> Vec<Vec<f64>> {
    let dom = f.domain();
    (0..dom.len())
        .filter_map(|k| {
            let u = f.get(k)?;
            let x = dom.point(k);
            Some(vec![x[0], x[1], u])
        })
        .collect()
}

/// `solve`: field CSV and JSON report.
pub fn solve(cfg: &RunConfig, sink: &mut Sink) -> CliResult<Value> {
    cfg.validate_solve()?;
    let p = cfg.potential()?;
    let dom = domain(cfg)?;
    let s = &cfg.solve;
    let blowup = BlowupConfig { continuation: s.continuation.clone(), boundary: s.boundary };
    let (field, details) = match s.problem {
        Problem::Blowup => {
            let (f, rep) = solve_blowup(&p, &dom, s.sign, &blowup)?;
            (f, json!({ "continuation": rep }))
        }
        Problem::Signed => {
            let (f, rep) = solve_signed_blowup(&p, &dom, &blowup)?;
            (f, json!({ "continuation": rep }))
        }
        Problem::Dirichlet => {
            let g = vec![s.boundary_value; dom.len()];
            let dc = DirichletConfig { tol: s.dirichlet_tol, ..Default::default() };
            let (f, stats) = solve_dirichlet_with(&p, &dom, &g, &dc, None)?;
            (f, json!({ "dirichlet": stats }))
        }
    };
    let rows = field_rows(&field);
    sink.csv("field.csv", &FIELD_HEADER, &rows)?;
    let mut report = json!({
        "potential": p.id(),
        "problem": s.problem,
        "h": dom.spacing(),
        "nodes": dom.len(),
        "interior_nodes": dom.interior().len(),
        "certified_nodes": rows.len(),
        "band_offset": field.band_offset(),
    });
    report.as_object_mut().unwrap().extend(details.as_object().unwrap().clone());
    sink.json("report.json", &report)?;
    Ok(json!({ "certified_nodes": rows.len() }))
}

/// Rebuild a saved field on the configured grid.
fn load_field(dom: &Arc<GridDomain>, sink: &Sink, name: &std::path::Path) -> CliResult<Field> {
    let path = sink.resolve(name);
    let rows = read_csv(&path, &FIELD_HEADER)?;
    let mut values = vec![None; dom.len()];
    let tol = 1e-9 * dom.spacing();
    for (i, row) in rows.iter().enumerate() {
        let x = [row[0], row[1]];
        let k = dom.node_at(x).filter(|&k| {
            let y = dom.point(k);
            (x[0] - y[0]).abs() <= tol && (x[1] - y[1]).abs() <= tol && dom.class(k) != NodeClass::Exterior
        });
        let Some(k) = k else {
            return Err(CliError::io(
                &path,
                format!("row {} at ({}, {}) is not a node of the domain", i + 1, x[0], x[1]),
            ));
        };
        values[k] = Some(row[2]);
    }
    Ok(Field::from_partial(dom.clone(), values)?)
}

/// `check`: decay or signed bounds of a saved field, and optionally comparison
/// against a second field.
pub fn check(cfg: &RunConfig, sink: &mut Sink) -> CliResult<Value> {
    cfg.validate_check()?;
    let p: Potential = cfg.potential()?;
    let dom = Arc::new(domain(cfg)?);
    let c = &cfg.check;
    let field = load_field(&dom, sink, &c.field)?;
    let bounds = match c.kind {
        CheckKind::Decay => decay_check(&field, &p, &c.lambdas, c.slack)?,
        CheckKind::Bounds => signed_bounds_check(&field, &p, &c.lambdas, c.slack)?,
    };
    let mut passed = bounds.passed();
    let mut out = json!({ "potential": p.id(), "kind": c.kind, "bounds": bounds });
    if let Some(other) = &c.against {
        let upper = load_field(&dom, sink, other)?;
        let rep = comparison_check_with(&p, &dom, &field, &upper, ComparisonTolerances::default())?;
        passed &= rep.ordered;
        out["comparison"] = json!(rep);
    }
    out["passed"] = json!(passed);
    sink.json("check.json", &out)?;
    if !passed {
        return Err(CliError::CheckFailed(format!("check failed; see {}", sink.written().last().unwrap().display())));
    }
    Ok(json!({ "passed": true }))
}
