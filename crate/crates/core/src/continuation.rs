//! Boundary-level continuation schedule and its per-level report.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Schedule and stopping parameters for `B → ∞` continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationConfig {
    /// First boundary level `B₀`.
    pub b0: f64,
    /// Ratio between consecutive levels.
    pub growth: f64,
    /// Maximum number of levels per truncation radius.
    pub max_levels: usize,
    /// Band offset δ as a distance; `None` means five grid cells.
    pub band_offset: Option<f64>,
    /// Stop once the band changes by at most this much between levels.
    pub tol: f64,
    /// Energy `h₀` of the bounded coordinate used by the solvers.
    pub chart_energy: f64,
    /// Newton stopping tolerance on the step size in the bounded coordinate.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Ratio between consecutive truncation radii on unbounded domains.
    pub truncation_growth: f64,
    pub max_truncations: usize,
    /// Stop exhaustion once the monitored values change by at most this much
    /// between consecutive truncation radii.
    pub truncation_tol: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            b0: 1.0,
            growth: 2.0,
            max_levels: 128,
            band_offset: None,
            tol: 1e-8,
            chart_energy: 1.0,
            newton_tol: 1e-13,
            max_newton: 200,
            truncation_growth: 1.5,
            max_truncations: 8,
            truncation_tol: 1e-3,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("b0", self.b0),
            ("tol", self.tol),
            ("chart_energy", self.chart_energy),
            ("newton_tol", self.newton_tol),
            ("truncation_tol", self.truncation_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(invalid(format!("growth must exceed 1, got {}", self.growth)));
        }
        if !(self.truncation_growth > 1.0 && self.truncation_growth.is_finite()) {
            return Err(invalid(format!("truncation_growth must exceed 1, got {}", self.truncation_growth)));
        }
        if self.max_levels == 0 || self.max_newton == 0 || self.max_truncations == 0 {
            return Err(invalid("level, Newton and truncation budgets must be at least 1"));
        }
        if let Some(d) = self.band_offset {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(invalid(format!("band_offset must be nonnegative, got {d}")));
            }
        }
        Ok(())
    }

    /// Boundary levels `B₀ g^k` up to `cap`, ending exactly at `cap` when it is reached.
    pub(crate) fn levels(&self, cap: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut b = self.b0;
        while out.len() < self.max_levels {
            if b >= cap {
                out.push(cap);
                break;
            }
            out.push(b);
            b *= self.growth;
        }
        out
    }
}

/// Why a continuation run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The band change fell below `tol`.
    Stabilized,
    /// The largest representable boundary level was reached first.
    Cap,
}

/// One continuation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub boundary_level: f64,
    /// Max change over the band against the previous level (absent at the first level).
    pub interior_max_delta: Option<f64>,
    pub newton_iters: usize,
    /// Discrete energy `Σ (½|∇u|² + W(u)) hᵈ` over band nodes.
    pub energy: f64,
    /// Truncation radius for exhausted unbounded domains.
    pub truncation_radius: Option<f64>,
}

/// Record of a continuation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub levels: Vec<LevelRecord>,
    pub stop_reason: StopReason,
    pub tol: f64,
    pub band_offset: f64,
    /// Largest boundary level the bounded coordinate can represent.
    pub level_cap: f64,
    /// Energy `h₀` of the bounded coordinate actually used.
    pub chart_energy: f64,
    /// One entry per truncation radius on unbounded domains; `levels` holds
    /// the run at the last radius.
    pub truncations: Vec<TruncationRecord>,
}

/// Continuation at one truncation radius of an unbounded domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub radius: f64,
    /// Max change of the monitored values against the previous radius.
    pub monitor_delta: Option<f64>,
    pub levels: usize,
    pub newton_iters: usize,
    pub stop_reason: StopReason,
}

impl ContinuationReport {
    pub fn final_delta(&self) -> Option<f64> {
        self.levels.last().and_then(|l| l.interior_max_delta)
    }

    pub fn total_newton_iters(&self) -> usize {
        if self.truncations.is_empty() {
            self.levels.iter().map(|l| l.newton_iters).sum()
        } else {
            self.truncations.iter().map(|t| t.newton_iters).sum()
        }
    }

    /// Monitored change between the last two truncation radii.
    pub fn truncation_delta(&self) -> Option<f64> {
        self.truncations.last().and_then(|t| t.monitor_delta)
    }
}
