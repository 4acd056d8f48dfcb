//! Grid domains with labeled boundary parts.
//!
//! Nodes sit at `center + h·(i, j)`. A node is interior when the shape's
//! signed distance is negative there, and a boundary node when it lies
//! outside but has an interior 4-neighbor. Each interior–boundary link also
//! records where the true boundary cuts it, for cut-cell stencils.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ode_phase::Sign;

pub type Point = [f64; 2];

/// Signed distance callback: negative inside.
pub type SdfFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// A user domain given by a signed distance function and a bounding box.
#[derive(Clone)]
pub struct CustomShape {
    pub name: String,
    pub sdf: SdfFn,
    /// `[xmin, xmax, ymin, ymax]`, containing the closure of the domain.
    pub bbox: [f64; 4],
}

impl fmt::Debug for CustomShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomShape").field("name", &self.name).field("bbox", &self.bbox).finish()
    }
}

/// Domain geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeSpec {
    /// One-dimensional interval `(a, b)`.
    Interval {
        a: f64,
        b: f64,
    },
    Rectangle {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    },
    Disk {
        center: Point,
        radius: f64,
    },
    /// `inner < |x − center| < outer`; boundary components `[inner, outer]`.
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
    /// `|x − center| > radius`, truncated to `|x − center| < half_width`;
    /// boundary components `[circle, truncation]`.
    ExteriorDisk {
        center: Point,
        radius: f64,
        half_width: f64,
    },
    /// `(−w, w)²` without the closed quadrant `x ≥ 0, y ≥ 0`.
    LShape {
        half_width: f64,
    },
    #[serde(skip)]
    Custom(CustomShape),
}

impl ShapeSpec {
    fn dim(&self) -> usize {
        match self {
            ShapeSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(invalid(msg));
        match *self {
            ShapeSpec::Interval { a, b } if !(a < b && a.is_finite() && b.is_finite()) => {
                bad(format!("interval needs a < b, got ({a}, {b})"))
            }
            ShapeSpec::Rectangle { x0, x1, y0, y1 } if !(x0 < x1 && y0 < y1) => {
                bad("rectangle needs x0 < x1 and y0 < y1".into())
            }
            ShapeSpec::Disk { radius, .. } if !(radius > 0.0) => {
                bad(format!("disk radius must be positive, got {radius}"))
            }
            ShapeSpec::Annulus { inner, outer, .. } if !(inner > 0.0 && inner < outer) => {
                bad(format!("annulus needs 0 < inner < outer, got ({inner}, {outer})"))
            }
            ShapeSpec::ExteriorDisk { radius, half_width, .. } if !(radius > 0.0 && half_width > radius) => {
                bad(format!("exterior disk needs 0 < radius < half_width, got ({radius}, {half_width})"))
            }
            ShapeSpec::LShape { half_width } if !(half_width > 0.0) => {
                bad(format!("L-shape half width must be positive, got {half_width}"))
            }
            ShapeSpec::Custom(ref c) if !(c.bbox[0] < c.bbox[1] && c.bbox[2] <= c.bbox[3]) => {
                bad("custom shape needs a nonempty bounding box".into())
            }
            _ => Ok(()),
        }
    }

    /// Signed distance (sign exact; magnitude Euclidean for round shapes).
    pub fn sdf(&self, x: Point) -> f64 {
        match self {
            ShapeSpec::Interval { a, b } => (a - x[0]).max(x[0] - b),
            ShapeSpec::Rectangle { x0, x1, y0, y1 } => (x0 - x[0]).max(x[0] - x1).max(y0 - x[1]).max(x[1] - y1),
            ShapeSpec::Disk { center, radius } => dist(x, *center) - radius,
            ShapeSpec::Annulus { center, inner, outer } => {
                let rho = dist(x, *center);
                (inner - rho).max(rho - outer)
            }
            ShapeSpec::ExteriorDisk { center, radius, half_width } => {
                let rho = dist(x, *center);
                (radius - rho).max(rho - half_width)
            }
            ShapeSpec::LShape { half_width: w } => {
                let square = (x[0].abs() - w).max(x[1].abs() - w);
                square.max(x[0].min(x[1]))
            }
            ShapeSpec::Custom(c) => (c.sdf)(x),
        }
    }

    /// Distances to each boundary component, used to assign labels.
    fn component_distances(&self, x: Point) -> Vec<f64> {
        match self {
            ShapeSpec::Interval { a, b } => vec![(x[0] - a).abs(), (x[0] - b).abs()],
            ShapeSpec::Annulus { center, inner, outer } => {
                let rho = dist(x, *center);
                vec![(rho - inner).abs(), (rho - outer).abs()]
            }
            ShapeSpec::ExteriorDisk { center, radius, half_width } => {
                let rho = dist(x, *center);
                vec![(rho - radius).abs(), (rho - half_width).abs()]
            }
            _ => vec![0.0],
        }
    }

    /// Component index of the artificial truncation boundary, if any.
    fn truncation_component(&self) -> Option<usize> {
        matches!(self, ShapeSpec::ExteriorDisk { .. }).then_some(1)
    }

    /// Grid anchor and bounding box `[xmin, xmax, ymin, ymax]` of the closure.
    fn frame(&self) -> (Point, [f64; 4]) {
        match self {
            ShapeSpec::Interval { a, b } => ([0.5 * (a + b), 0.0], [*a, *b, 0.0, 0.0]),
            ShapeSpec::Rectangle { x0, x1, y0, y1 } => ([0.5 * (x0 + x1), 0.5 * (y0 + y1)], [*x0, *x1, *y0, *y1]),
            ShapeSpec::Disk { center, radius: r }
            | ShapeSpec::Annulus { center, outer: r, .. }
            | ShapeSpec::ExteriorDisk { center, half_width: r, .. } => {
                (*center, [center[0] - r, center[0] + r, center[1] - r, center[1] + r])
            }
            ShapeSpec::LShape { half_width: w } => ([0.0, 0.0], [-w, *w, -w, *w]),
            ShapeSpec::Custom(c) => ([0.5 * (c.bbox[0] + c.bbox[1]), 0.5 * (c.bbox[2] + c.bbox[3])], c.bbox),
        }
    }

    /// Center of the truncation ball of an exterior domain.
    pub fn truncation_center(&self) -> Option<Point> {
        match self {
            ShapeSpec::ExteriorDisk { center, .. } => Some(*center),
            _ => None,
        }
    }

    /// Truncation radius of an exterior domain.
    pub fn truncation_radius(&self) -> Option<f64> {
        match self {
            ShapeSpec::ExteriorDisk { half_width, .. } => Some(*half_width),
            _ => None,
        }
    }

    /// The same shape with a different truncation radius.
    pub fn with_truncation(&self, radius: f64) -> Result<Self> {
        match self {
            ShapeSpec::ExteriorDisk { center, radius: r, .. } => {
                let s = ShapeSpec::ExteriorDisk { center: *center, radius: *r, half_width: radius };
                s.validate()?;
                Ok(s)
            }
            _ => Err(invalid("only exterior domains have a truncation radius")),
        }
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Label callback for [`PartitionSpec::Custom`].
pub type LabelFn = Arc<dyn Fn(Point) -> Sign + Send + Sync>;

/// Assignment of boundary nodes to `A⁺` or `A⁻`.
#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "labels", rename_all = "kebab-case")]
pub enum PartitionSpec {
    #[default]
    AllPlus,
    AllMinus,
    /// One label per boundary component, in the shape's component order.
    Components(Vec<Sign>),
    #[serde(skip)]
    Custom(LabelFn),
}

impl fmt::Debug for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSpec::AllPlus => write!(f, "AllPlus"),
            PartitionSpec::AllMinus => write!(f, "AllMinus"),
            PartitionSpec::Components(c) => f.debug_tuple("Components").field(c).finish(),
            PartitionSpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Classification of a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeClass {
    Interior,
    BoundaryPlus,
    BoundaryMinus,
    Exterior,
}

impl NodeClass {
    pub fn is_boundary(self) -> bool {
        matches!(self, NodeClass::BoundaryPlus | NodeClass::BoundaryMinus)
    }

    pub fn label(self) -> Option<Sign> {
        match self {
            NodeClass::BoundaryPlus => Some(Sign::Plus),
            NodeClass::BoundaryMinus => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// Target sets for [`distance_field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Plus,
    Minus,
    /// All boundary nodes except those on an artificial truncation boundary.
    Boundary,
    /// Truncation boundary nodes only.
    Truncation,
}

/// An interior node next to a boundary node, with the cut position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLink {
    pub interior: usize,
    pub boundary: usize,
    /// Fraction of the link length from the interior node to the boundary, in `(0, 1]`.
    pub fraction: f64,
}

/// Discretized domain.
#[derive(Debug, Clone)]
pub struct GridDomain {
    shape: ShapeSpec,
    partition: PartitionSpec,
    dim: usize,
    h: f64,
    origin: Point,
    center: Point,
    offset: [i64; 2],
    nx: usize,
    ny: usize,
    class: Vec<NodeClass>,
    truncation: Vec<bool>,
    links: Vec<BoundaryLink>,
    unknown: Vec<Option<usize>>,
    interior: Vec<usize>,
    dist_boundary: Vec<f64>,
    dist_plus: Vec<f64>,
    dist_minus: Vec<f64>,
}

/// Smallest cut fraction kept, to avoid degenerate stencils.
const MIN_FRACTION: f64 = 1e-6;

/// Discretize `shape` at spacing `h` and label its boundary.
pub fn build_domain(shape: ShapeSpec, h: f64, labels: PartitionSpec) -> Result<GridDomain> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("grid spacing must be positive, got {h}")));
    }
    shape.validate()?;
    let dim = shape.dim();
    let (center, bbox) = shape.frame();
    let range = |lo: f64, hi: f64, c: f64| -> (i64, i64) {
        (((lo - c) / h).floor() as i64 - 1, ((hi - c) / h).ceil() as i64 + 1)
    };
    let (i0, i1) = range(bbox[0], bbox[1], center[0]);
    let (j0, j1) = if dim == 1 { (0, 0) } else { range(bbox[2], bbox[3], center[1]) };
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;
    if nx.saturating_mul(ny) > 50_000_000 {
        return Err(invalid(format!("grid of {nx}×{ny} nodes is too large")));
    }
    let origin = [center[0] + i0 as f64 * h, center[1] + j0 as f64 * h];
    let offset = [i0, j0];
    let point = |k: usize| node_point(center, offset, h, nx, k);
    let n = nx * ny;

    let inside: Vec<bool> = (0..n).map(|k| shape.sdf(point(k)) < 0.0).collect();
    let neighbors = |k: usize| -> Vec<usize> {
        let (i, j) = (k % nx, k / nx);
        let mut out = Vec::with_capacity(4);
        if i > 0 {
            out.push(k - 1);
        }
        if i + 1 < nx {
            out.push(k + 1);
        }
        if dim == 2 {
            if j > 0 {
                out.push(k - nx);
            }
            if j + 1 < ny {
                out.push(k + nx);
            }
        }
        out
    };

    let mut class = vec![NodeClass::Exterior; n];
    let mut is_boundary = vec![false; n];
    for k in 0..n {
        if inside[k] {
            class[k] = NodeClass::Interior;
        } else if neighbors(k).iter().any(|&m| inside[m]) {
            is_boundary[k] = true;
        }
    }
    let interior: Vec<usize> = (0..n).filter(|&k| inside[k]).collect();
    if interior.is_empty() {
        return Err(Error::DegenerateDomain(format!("no interior nodes at h = {h}")));
    }

    let trunc_comp = shape.truncation_component();
    let mut truncation = vec![false; n];
    let mut component = vec![usize::MAX; n];
    for k in (0..n).filter(|&k| is_boundary[k]) {
        let d = shape.component_distances(point(k));
        let c = (0..d.len()).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        component[k] = c;
        truncation[k] = Some(c) == trunc_comp;
    }
    let n_components = shape.component_distances(point(0)).len();
    let label_of = |k: usize| -> Result<Sign> {
        Ok(match &labels {
            PartitionSpec::AllPlus => Sign::Plus,
            PartitionSpec::AllMinus => Sign::Minus,
            PartitionSpec::Components(ls) => {
                if ls.len() != n_components {
                    return Err(Error::LabelError(format!(
                        "shape has {n_components} boundary components but {} labels were given",
                        ls.len()
                    )));
                }
                ls[component[k]]
            }
            PartitionSpec::Custom(f) => f(point(k)),
        })
    };
    for k in (0..n).filter(|&k| is_boundary[k]) {
        class[k] = match label_of(k)? {
            Sign::Plus => NodeClass::BoundaryPlus,
            Sign::Minus => NodeClass::BoundaryMinus,
        };
    }
    check_label_clusters(&class, &is_boundary, nx, ny)?;

    let mut links = Vec::new();
    for &k in &interior {
        for m in neighbors(k) {
            if is_boundary[m] {
                links.push(BoundaryLink {
                    interior: k,
                    boundary: m,
                    fraction: cut_fraction(&shape, point(k), point(m)),
                });
            }
        }
    }

    let mut unknown = vec![None; n];
    for (idx, &k) in interior.iter().enumerate() {
        unknown[k] = Some(idx);
    }

    let mut dom = GridDomain {
        shape,
        partition: labels,
        dim,
        h,
        origin,
        center,
        offset,
        nx,
        ny,
        class,
        truncation,
        links,
        unknown,
        interior,
        dist_boundary: Vec::new(),
        dist_plus: Vec::new(),
        dist_minus: Vec::new(),
    };
    dom.dist_boundary = distance_or_inf(&dom, Target::Boundary);
    dom.dist_plus = distance_or_inf(&dom, Target::Plus);
    dom.dist_minus = distance_or_inf(&dom, Target::Minus);
    Ok(dom)
}

/// Coordinates from integer offsets, so nodes on the anchor's axes are exact.
fn node_point(center: Point, offset: [i64; 2], h: f64, nx: usize, k: usize) -> Point {
    let i = offset[0] + (k % nx) as i64;
    let j = offset[1] + (k / nx) as i64;
    [center[0] + i as f64 * h, center[1] + j as f64 * h]
}

fn cut_fraction(shape: &ShapeSpec, inside: Point, outside: Point) -> f64 {
    let at = |t: f64| [inside[0] + t * (outside[0] - inside[0]), inside[1] + t * (outside[1] - inside[1])];
    if shape.sdf(outside) == 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shape.sdf(at(mid)) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).max(MIN_FRACTION)
}

/// Reject 8-connected clusters of boundary nodes carrying both labels.
fn check_label_clusters(class: &[NodeClass], is_boundary: &[bool], nx: usize, ny: usize) -> Result<()> {
    let mut seen = vec![false; class.len()];
    for start in 0..class.len() {
        if !is_boundary[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let first = class[start];
        while let Some(k) = stack.pop() {
            if class[k] != first {
                return Err(Error::LabelError(format!(
                    "a connected boundary component carries both labels (near node {k})"
                )));
            }
            let (i, j) = ((k % nx) as i64, (k / nx) as i64);
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                        continue;
                    }
                    let m = b as usize * nx + a as usize;
                    if is_boundary[m] && !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
        }
    }
    Ok(())
}

fn target_nodes(dom: &GridDomain, target: Target) -> Vec<usize> {
    (0..dom.class.len())
        .filter(|&k| match target {
            Target::Plus => dom.class[k] == NodeClass::BoundaryPlus,
            Target::Minus => dom.class[k] == NodeClass::BoundaryMinus,
            Target::Boundary => dom.class[k].is_boundary() && !dom.truncation[k],
            Target::Truncation => dom.truncation[k],
        })
        .collect()
}

fn distances_to(dom: &GridDomain, targets: &[usize]) -> Vec<f64> {
    let pts: Vec<Point> = targets.iter().map(|&k| dom.point(k)).collect();
    (0..dom.class.len())
        .map(|k| {
            if dom.class[k] == NodeClass::Exterior {
                return f64::INFINITY;
            }
            let x = dom.point(k);
            pts.iter().map(|p| (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).fold(f64::INFINITY, f64::min).sqrt()
        })
        .collect()
}

fn distance_or_inf(dom: &GridDomain, target: Target) -> Vec<f64> {
    distances_to(dom, &target_nodes(dom, target))
}

/// Euclidean distance from every non-exterior node to the nearest node of
/// `target` (exterior nodes get `+∞`).
pub fn distance_field(dom: &GridDomain, target: Target) -> Result<Vec<f64>> {
    let t = target_nodes(dom, target);
    if t.is_empty() {
        return Err(Error::EmptyTarget);
    }
    Ok(distances_to(dom, &t))
}

/// Serializable node classification for debugging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMask {
    pub h: f64,
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    pub truncation_radius: Option<f64>,
    /// One string per grid row (bottom row first): `.` exterior, `o` interior,
    /// `+`/`-` labeled boundary, `t` truncation boundary.
    pub rows: Vec<String>,
}

impl GridDomain {
    pub fn shape(&self) -> &ShapeSpec {
        &self.shape
    }

    pub fn partition(&self) -> &PartitionSpec {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    /// `(nx, ny)`; `ny = 1` for one-dimensional domains.
    pub fn extent(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn point(&self, k: usize) -> Point {
        node_point(self.center, self.offset, self.h, self.nx, k)
    }

    pub fn class(&self, k: usize) -> NodeClass {
        self.class[k]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    /// Whether boundary node `k` lies on the artificial truncation boundary.
    pub fn is_truncation(&self, k: usize) -> bool {
        self.truncation[k]
    }

    pub fn truncation_radius(&self) -> Option<f64> {
        self.shape.truncation_radius()
    }

    /// Interior nodes in increasing index order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Position of node `k` among the interior nodes.
    pub fn unknown_index(&self, k: usize) -> Option<usize> {
        self.unknown[k]
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.class[k].is_boundary()).collect()
    }

    pub fn links(&self) -> &[BoundaryLink] {
        &self.links
    }

    pub fn dist_boundary(&self) -> &[f64] {
        &self.dist_boundary
    }

    pub fn dist_plus(&self) -> &[f64] {
        &self.dist_plus
    }

    pub fn dist_minus(&self) -> &[f64] {
        &self.dist_minus
    }

    pub fn has_label(&self, s: Sign) -> bool {
        let c = match s {
            Sign::Plus => NodeClass::BoundaryPlus,
            Sign::Minus => NodeClass::BoundaryMinus,
        };
        self.class.contains(&c)
    }

    /// Stencil neighbors of node `k` along each axis: `[(left, right), (down, up)]`.
    pub(crate) fn axis_neighbors(&self, k: usize) -> [(Option<usize>, Option<usize>); 2] {
        let (i, j) = (k % self.nx, k / self.nx);
        let x = (i.checked_sub(1).map(|_| k - 1), (i + 1 < self.nx).then(|| k + 1));
        let y = if self.dim == 2 {
            (j.checked_sub(1).map(|_| k - self.nx), (j + 1 < self.ny).then(|| k + self.nx))
        } else {
            (None, None)
        };
        [x, y]
    }

    /// Node index nearest to `x`, if it lies on the grid.
    pub fn node_at(&self, x: Point) -> Option<usize> {
        let i = ((x[0] - self.origin[0]) / self.h).round();
        let j = if self.dim == 1 { 0.0 } else { ((x[1] - self.origin[1]) / self.h).round() };
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return None;
        }
        Some(j as usize * self.nx + i as usize)
    }

    /// Rebuild with another truncation radius (exterior domains only).
    pub fn with_truncation(&self, radius: f64) -> Result<GridDomain> {
        build_domain(self.shape.with_truncation(radius)?, self.h, self.partition.clone())
    }

    pub fn mask(&self) -> DomainMask {
        let rows = (0..self.ny)
            .map(|j| {
                (0..self.nx)
                    .map(|i| {
                        let k = j * self.nx + i;
                        match self.class[k] {
                            NodeClass::Exterior => '.',
                            NodeClass::Interior => 'o',
                            _ if self.truncation[k] => 't',
                            NodeClass::BoundaryPlus => '+',
                            NodeClass::BoundaryMinus => '-',
                        }
                    })
                    .collect()
            })
            .collect();
        DomainMask {
            h: self.h,
            origin: self.origin,
            nx: self.nx,
            ny: self.ny,
            truncation_radius: self.truncation_radius(),
            rows,
        }
    }
}
