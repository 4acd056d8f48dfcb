use std::path::{Path, PathBuf};

use blowup_core::{BoundaryMode, ContinuationConfig, PartitionSpec, Potential, RadialConfig, ShapeSpec, Sign};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

/// Everything a run reads: one TOML file, then `--set` and flag overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `power:<alpha>` or `cosh`.
    pub potential: String,
    pub output: OutputConfig,
    pub ode: OdeConfig,
    pub radial: RadialSection,
    pub domain: DomainConfig,
    pub solve: SolveConfig,
    pub check: CheckConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: "power:4".into(),
            output: OutputConfig::default(),
            ode: OdeConfig::default(),
            radial: RadialSection::default(),
            domain: DomainConfig::default(),
            solve: SolveConfig::default(),
            check: CheckConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; `--output-dir` and `BLOWUP_OUTPUT_DIR` take precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Prepended to every artifact file name.
    pub prefix: String,
    /// Also write whitespace-separated `.dat` files for gnuplot.
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitFamily {
    Alpha,
    Beta,
    Gamma,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeConfig {
    pub orbit: OrbitFamily,
    /// Minimum value of the α-orbit.
    pub lambda: f64,
    /// Energy of the β-orbit.
    pub energy: f64,
    /// Sign of the γ-orbit.
    pub sign: Sign,
    /// Rows at `x_min + (x_max − x_min)·i/samples`, `i = 0..=samples`, inside the orbit's domain.
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    pub tol: f64,
    /// Levels tabulated in the length-map JSON.
    pub lambdas: Vec<f64>,
    /// Energies tabulated in the length-map JSON.
    pub energies: Vec<f64>,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            orbit: OrbitFamily::Gamma,
            lambda: 1.0,
            energy: 1.0,
            sign: Sign::Plus,
            samples: 100,
            x_min: None,
            x_max: None,
            tol: 1e-12,
            lambdas: vec![-4.0, -1.0, -0.25, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
            energies: vec![0.25, 1.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RadialKind {
    /// Annulus barrier `1 < r < outer` blowing up at `r = 1`.
    Barrier,
    /// Blow-up solution in the ball of radius `radius`.
    Ball,
    /// Annulus Dirichlet problem with `u(1) = boundary_level`, `u(outer) = 0`.
    AnnulusDirichlet,
    /// Whole-space super/subsolution with `u(0) = lambda`.
    WholeSpace,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialSection {
    pub kind: RadialKind,
    pub dim: usize,
    pub outer: f64,
    pub eps: f64,
    pub radius: f64,
    pub lambda: f64,
    pub boundary_level: f64,
    /// Sample count for `whole-space` profiles.
    pub samples: usize,
    /// Sampling stops here for `whole-space` profiles defined on all of `[0, ∞)`.
    pub r_max: f64,
    pub cells: usize,
    pub grading: f64,
    pub continuation: ContinuationConfig,
}

impl Default for RadialSection {
    fn default() -> Self {
        let grid = RadialConfig::default();
        Self {
            kind: RadialKind::Barrier,
            dim: 2,
            outer: 4.0,
            eps: 0.5,
            radius: 1.0,
            lambda: 1.0,
            boundary_level: 1.0,
            samples: 200,
            r_max: 10.0,
            cells: grid.cells,
            grading: grid.grading,
            continuation: grid.continuation,
        }
    }
}

impl RadialSection {
    pub fn grid(&self) -> RadialConfig {
        RadialConfig { cells: self.cells, grading: self.grading, continuation: self.continuation.clone() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub h: f64,
    pub shape: ShapeSpec,
    pub labels: PartitionSpec,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { h: 0.05, shape: ShapeSpec::Disk { center: [0.0, 0.0], radius: 1.0 }, labels: PartitionSpec::AllPlus }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    /// Blow-up with one sign on the whole boundary.
    Blowup,
    /// Blow-up to `+∞` on `A⁺` and `−∞` on `A⁻`.
    Signed,
    /// Dirichlet problem with constant boundary data.
    Dirichlet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub problem: Problem,
    pub sign: Sign,
    /// Boundary data of the `dirichlet` problem.
    pub boundary_value: f64,
    /// Residual tolerance of the `dirichlet` problem.
    pub dirichlet_tol: f64,
    pub boundary: BoundaryMode,
    pub continuation: ContinuationConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            problem: Problem::Blowup,
            sign: Sign::Plus,
            boundary_value: 1.0,
            dirichlet_tol: 1e-10,
            boundary: BoundaryMode::CutCell,
            continuation: ContinuationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `|u| ≤ λ` away from the whole boundary.
    Decay,
    /// Signed bounds away from `A⁺` (λ > 0) and `A⁻` (λ < 0).
    Bounds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    /// Field CSV written by `solve`, relative to the output directory.
    pub field: PathBuf,
    /// Optional second field; checks `field ≤ against` by discrete comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub against: Option<PathBuf>,
    pub kind: CheckKind,
    pub lambdas: Vec<f64>,
    /// Grid slack; defaults to `4h²`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            field: PathBuf::from("field.csv"),
            against: None,
            kind: CheckKind::Decay,
            lambdas: vec![0.5, 1.0, 2.0, 4.0],
            slack: None,
        }
    }
}

/// Default configuration rendered as TOML, for `--help` and `blowup config`.
pub fn defaults_toml() -> String {
    toml::to_string(&RunConfig::default()).expect("default config serializes")
}

/// Read a config file into a TOML table (empty without a file).
pub fn read_table(path: Option<&Path>) -> CliResult<Table> {
    let Some(path) = path else {
        return Ok(Table::new());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.parse::<Table>().map_err(|e| {
        let key = e.span().map(|s| locate(&text, s.start)).unwrap_or_else(|| "<file>".into());
        CliError::config(key, e.message().to_string())
    })
}

/// `line L, column C` of a byte offset.
fn locate(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    format!("<file line {line}, column {col}>")
}

/// Insert `value` at the dotted `key`, creating tables on the way.
pub fn set_path(table: &mut Table, key: &str, value: Value) -> CliResult<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(key, "empty key segment"));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| CliError::config(key, format!("`{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Apply one `key=value` override; the value is parsed as TOML, or taken as a
/// string when it does not parse.
pub fn apply_assignment(table: &mut Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| CliError::config(assignment, "expected key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    set_path(table, key, value)
}

/// Deserialize the merged table, reporting the offending key on failure.
pub fn from_table(table: Table) -> CliResult<RunConfig> {
    let result: Result<RunConfig, _> = serde_path_to_error::deserialize(Value::Table(table));
    let cfg = result.map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.message().to_string();
        // Unknown fields are reported at their parent; append the field name.
        let key = match unknown_field(&message) {
            Some(field) if path == "." => field,
            Some(field) if !path.ends_with(&format!(".{field}")) && path != field => format!("{path}.{field}"),
            _ => path,
        };
        CliError::config(key, message)
    })?;
    Ok(cfg)
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

fn positive(key: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(key, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn potential(&self) -> CliResult<Potential> {
        Potential::from_id(&self.potential).map_err(|e| CliError::config("potential", e.to_string()))
    }

    pub fn validate_ode(&self) -> CliResult<()> {
        let o = &self.ode;
        positive("ode.tol", o.tol)?;
        match o.orbit {
            OrbitFamily::Alpha if !(o.lambda != 0.0 && o.lambda.is_finite()) => {
                return Err(CliError::config("ode.lambda", format!("must be nonzero, got {}", o.lambda)));
            }
            OrbitFamily::Beta => positive("ode.energy", o.energy)?,
            _ => {}
        }
        if o.samples == 0 {
            return Err(CliError::config("ode.samples", "must be at least 1"));
        }
        if let (Some(a), Some(b)) = (o.x_min, o.x_max) {
            if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
                return Err(CliError::config("ode.x_max", format!("must exceed x_min ({a}), got {b}")));
            }
        }
        if let Some(&l) = o.lambdas.iter().find(|l| !(**l != 0.0 && l.is_finite())) {
            return Err(CliError::config("ode.lambdas", format!("levels must be nonzero, got {l}")));
        }
        for &e in &o.energies {
            positive("ode.energies", e)?;
        }
        Ok(())
    }

    pub fn validate_radial(&self) -> CliResult<()> {
        let r = &self.radial;
        if r.dim == 0 {
            return Err(CliError::config("radial.dim", "must be at least 1"));
        }
        match r.kind {
            RadialKind::Barrier | RadialKind::AnnulusDirichlet => {
                if !(r.outer > 1.0 && r.outer.is_finite()) {
                    return Err(CliError::config("radial.outer", format!("must exceed 1, got {}", r.outer)));
                }
                if !(r.eps > 0.0 && r.eps <= 1.0) {
                    return Err(CliError::config("radial.eps", format!("must lie in (0, 1], got {}", r.eps)));
                }
                if r.kind == RadialKind::AnnulusDirichlet {
                    positive("radial.boundary_level", r.boundary_level)?;
                }
            }
            RadialKind::Ball => positive("radial.radius", r.radius)?,
            RadialKind::WholeSpace => {
                if !(r.lambda != 0.0 && r.lambda.is_finite()) {
                    return Err(CliError::config("radial.lambda", format!("must be nonzero, got {}", r.lambda)));
                }
                positive("radial.r_max", r.r_max)?;
                if r.samples == 0 {
                    return Err(CliError::config("radial.samples", "must be at least 1"));
                }
            }
        }
        if r.cells < 8 {
            return Err(CliError::config("radial.cells", format!("must be at least 8, got {}", r.cells)));
        }
        r.continuation.validate().map_err(|e| CliError::config("radial.continuation", e.to_string()))
    }

    pub fn validate_domain(&self) -> CliResult<()> {
        positive("domain.h", self.domain.h)
    }

    pub fn validate_solve(&self) -> CliResult<()> {
        self.validate_domain()?;
        let s = &self.solve;
        positive("solve.dirichlet_tol", s.dirichlet_tol)?;
        if !s.boundary_value.is_finite() {
            return Err(CliError::config("solve.boundary_value", "must be finite"));
        }
        s.continuation.validate().map_err(|e| CliError::config("solve.continuation", e.to_string()))
    }

    pub fn validate_check(&self) -> CliResult<()> {
        self.validate_domain()?;
        let c = &self.check;
        if c.lambdas.is_empty() {
            return Err(CliError::config("check.lambdas", "needs at least one level"));
        }
        for &l in &c.lambdas {
            let ok = match c.kind {
                CheckKind::Decay => l > 0.0 && l.is_finite(),
                CheckKind::Bounds => l != 0.0 && l.is_finite(),
            };
            if !ok {
                return Err(CliError::config("check.lambdas", format!("invalid level {l}")));
            }
        }
        if let Some(s) = c.slack {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(CliError::config("check.slack", format!("must be nonnegative, got {s}")));
            }
        }
        Ok(())
    }
}
