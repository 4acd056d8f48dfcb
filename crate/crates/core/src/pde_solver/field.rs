use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{GridDomain, NodeClass, Point};

/// Nodal values on a grid domain.
///
/// Exterior nodes carry `NaN`. Boundary nodes carry the Dirichlet data of the
/// last solve. Blow-up solves certify only the band `dist_boundary ≥ δ`;
/// [`Field::get`] returns `None` elsewhere.
#[derive(Debug, Clone)]
pub struct Field {
    dom: Arc<GridDomain>,
    values: Vec<f64>,
    band_offset: f64,
    certified: Vec<bool>,
}

impl Field {
    /// Field certified at every interior and boundary node.
    pub fn from_values(dom: Arc<GridDomain>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != dom.len() {
            return Err(Error::NonFiniteData(format!("field has {} values for {} nodes", values.len(), dom.len())));
        }
        let mut certified = vec![false; dom.len()];
        for (k, v) in values.iter_mut().enumerate() {
            if dom.class(k) == NodeClass::Exterior {
                *v = f64::NAN;
            } else if !v.is_finite() {
                return Err(Error::NonFiniteData(format!("value {v} at node {k}")));
            } else {
                certified[k] = true;
            }
        }
        Ok(Self { dom, values, band_offset: 0.0, certified })
    }

    /// Sample `f` at every non-exterior node.
    pub fn from_fn(dom: Arc<GridDomain>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..dom.len())
            .map(|k| if dom.class(k) == NodeClass::Exterior { f64::NAN } else { f(dom.point(k)) })
            .collect();
        Self::from_values(dom, values)
    }

    /// Field certified exactly where `values` is `Some`, e.g. a field read back
    /// from its saved rows.
    pub fn from_partial(dom: Arc<GridDomain>, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != dom.len() {
            return Err(Error::NonFiniteData(format!("field has {} values for {} nodes", values.len(), dom.len())));
        }
        let certified: Vec<bool> = values.iter().map(Option::is_some).collect();
        let mut out = Vec::with_capacity(values.len());
        for (k, v) in values.into_iter().enumerate() {
            match v {
                Some(_) if dom.class(k) == NodeClass::Exterior => {
                    return Err(Error::NonFiniteData(format!("value given at exterior node {k}")));
                }
                Some(x) if !x.is_finite() => return Err(Error::NonFiniteData(format!("value {x} at node {k}"))),
                Some(x) => out.push(x),
                None => out.push(f64::NAN),
            }
        }
        Ok(Self { dom, values: out, band_offset: 0.0, certified })
    }

    pub(crate) fn banded(dom: Arc<GridDomain>, values: Vec<f64>, band_offset: f64, certified: Vec<bool>) -> Self {
        Self { dom, values, band_offset, certified }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.dom
    }

    pub fn domain_arc(&self) -> &Arc<GridDomain> {
        &self.dom
    }

    /// All nodal values, including uncertified ones.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn band_offset(&self) -> f64 {
        self.band_offset
    }

    pub fn is_certified(&self, k: usize) -> bool {
        self.certified[k]
    }

    /// Value at node `k` if it is certified.
    pub fn get(&self, k: usize) -> Option<f64> {
        self.certified[k].then(|| self.values[k])
    }

    /// Certified interior nodes in increasing index order.
    pub fn certified_interior(&self) -> Vec<usize> {
        self.dom.interior().iter().copied().filter(|&k| self.certified[k]).collect()
    }

    /// Certified value at the grid node nearest to `x`.
    pub fn value_at(&self, x: Point) -> Option<f64> {
        self.dom.node_at(x).and_then(|k| self.get(k))
    }

    /// Certified value at a node located exactly at `x`.
    pub(crate) fn value_at_node(&self, x: Point) -> Option<f64> {
        let k = self.dom.node_at(x)?;
        let y = self.dom.point(k);
        let tol = 1e-9 * self.dom.spacing();
        if (x[0] - y[0]).abs() > tol || (x[1] - y[1]).abs() > tol {
            return None;
        }
        self.get(k)
    }

    /// `(x, y, u)` for every certified interior node.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        self.certified_interior()
            .into_iter()
            .map(|k| {
                let x = self.dom.point(k);
                (x[0], x[1], self.values[k])
            })
            .collect()
    }

    /// Largest `|u − w|` over interior nodes certified in both fields at the same point.
    pub fn max_difference(&self, other: &Field) -> Option<f64> {
        let mut worst: Option<f64> = None;
        for k in self.certified_interior() {
            if let Some(w) = other.value_at_node(self.dom.point(k)) {
                let d = (self.values[k] - w).abs();
                worst = Some(worst.map_or(d, |m| m.max(d)));
            }
        }
        worst
    }
}
