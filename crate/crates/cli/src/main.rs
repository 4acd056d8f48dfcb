//! `blowup`: orbits, radial barriers and blow-up solutions from the command line.
//!
//! Settings come from an optional TOML file (`--config`), then `--set key=value`
//! assignments, then the dedicated flags. Artifacts are written to the output
//! directory; a JSON summary goes to stdout and errors go to stderr as JSON.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use blowup_core::{BoundaryMode, Sign};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::json;
use toml::{Table, Value};

use config::{CheckKind, OrbitFamily, Problem, RadialKind, RunConfig};
use error::{CliError, CliResult};
use output::Sink;

#[derive(Parser, Debug)]
#[command(name = "blowup", version, about = "Boundary blow-up solutions of Δu = W'(u)")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override any configuration key, e.g. `--set solve.continuation.b0=2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory [default: output.dir, else the current directory].
    #[arg(long, global = true, env = "BLOWUP_OUTPUT_DIR", value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Potential id: `power:<alpha>` or `cosh` [default: power:4].
    #[arg(long, global = true)]
    potential: Option<String>,

    /// File name prefix for all artifacts [default: none].
    #[arg(long, global = true)]
    prefix: Option<String>,

    /// Also write gnuplot `.dat` files.
    #[arg(long, global = true)]
    gnuplot: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample an α, β or γ orbit and tabulate the length maps.
    Ode(OdeArgs),
    /// Radial barrier, ball or annulus profile with its continuation report.
    Radial(RadialArgs),
    /// Solve on a grid domain and write the field and report.
    Solve(SolveArgs),
    /// Check decay or signed bounds (and optionally comparison) of saved fields.
    Check(CheckArgs),
    /// Print the resolved configuration as TOML.
    Config,
}

#[derive(Args, Debug)]
struct OdeArgs {
    /// Orbit family [default: gamma].
    #[arg(long, value_enum)]
    orbit: Option<OrbitFamily>,
    /// Minimum value of the α-orbit [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Energy of the β-orbit [default: 1].
    #[arg(long)]
    energy: Option<f64>,
    /// Sign of the γ-orbit: plus or minus [default: plus].
    #[arg(long, value_parser = parse_sign)]
    sign: Option<Sign>,
    /// Number of sample intervals [default: 100].
    #[arg(long)]
    samples: Option<usize>,
    /// Left end of the sampled range [default: 0 for γ, 0.99·domain otherwise].
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    /// Right end of the sampled range [default: 10 for γ, 0.99·domain otherwise].
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    /// Quadrature and inversion tolerance [default: 1e-12].
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct RadialArgs {
    /// Profile kind [default: barrier].
    #[arg(long, value_enum)]
    kind: Option<RadialKind>,
    /// Space dimension [default: 2].
    #[arg(long)]
    dim: Option<usize>,
    /// Outer radius of annuli [default: 4].
    #[arg(long)]
    outer: Option<f64>,
    /// Barrier parameter ε in (0, 1] [default: 0.5].
    #[arg(long)]
    eps: Option<f64>,
    /// Ball radius [default: 1].
    #[arg(long)]
    radius: Option<f64>,
    /// Center value of whole-space profiles [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Inner boundary value of annulus Dirichlet problems [default: 1].
    #[arg(long)]
    boundary_level: Option<f64>,
    /// Radial grid cells [default: 400].
    #[arg(long)]
    cells: Option<usize>,
}

#[derive(Args, Debug)]
struct DomainArgs {
    /// Grid spacing [default: 0.05].
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// Shape as inline TOML, e.g. `{shape = "annulus", center = [0, 0], inner = 1, outer = 2}`
    /// [default: unit disk].
    #[arg(long)]
    shape: Option<String>,
    /// Boundary labels as inline TOML, e.g. `{kind = "components", labels = ["minus", "plus"]}`
    /// [default: all-plus].
    #[arg(long)]
    labels: Option<String>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// Problem [default: blowup].
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    /// Boundary sign of `blowup`: plus or minus [default: plus].
    #[arg(long, value_parser = parse_sign)]
    sign: Option<Sign>,
    /// Boundary value of `dirichlet` [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    boundary_value: Option<f64>,
    /// Boundary treatment: cut-cell or staircase [default: cut-cell].
    #[arg(long, value_parser = parse_mode)]
    boundary: Option<BoundaryMode>,
    /// First boundary level B₀ [default: 1].
    #[arg(long)]
    b0: Option<f64>,
    /// Ratio between boundary levels [default: 2].
    #[arg(long)]
    growth: Option<f64>,
    /// Level budget [default: 128].
    #[arg(long)]
    max_levels: Option<usize>,
    /// Band stabilization tolerance [default: 1e-8].
    #[arg(long)]
    tol: Option<f64>,
    /// Band offset δ [default: five grid cells].
    #[arg(long)]
    band_offset: Option<f64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// Field CSV to check [default: field.csv in the output directory].
    #[arg(long)]
    field: Option<PathBuf>,
    /// Second field; checks `field ≤ against` [default: none].
    #[arg(long)]
    against: Option<PathBuf>,
    /// Check kind [default: decay].
    #[arg(long, value_enum)]
    kind: Option<CheckKind>,
    /// Comma-separated levels λ [default: 0.5,1,2,4].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Option<Vec<f64>>,
    /// Grid slack [default: 4h²].
    #[arg(long)]
    slack: Option<f64>,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "plus" | "+" | "1" => Ok(Sign::Plus),
        "minus" | "-" | "-1" => Ok(Sign::Minus),
        _ => Err(format!("expected plus or minus, got `{s}`")),
    }
}

fn parse_mode(s: &str) -> Result<BoundaryMode, String> {
    match s {
        "cut-cell" => Ok(BoundaryMode::CutCell),
        "staircase" => Ok(BoundaryMode::Staircase),
        _ => Err(format!("expected cut-cell or staircase, got `{s}`")),
    }
}

/// Serialized form of a config enum value.
fn enum_value(v: impl serde::Serialize) -> Value {
    Value::try_from(v).expect("enum serializes")
}

/// Flag overrides as `(key, value)` pairs.
fn flag_overrides(cli: &Cli) -> CliResult<Vec<(&'static str, Value)>> {
    let mut out: Vec<(&'static str, Value)> = Vec::new();
    let mut put = |key: &'static str, v: Option<Value>| {
        if let Some(v) = v {
            out.push((key, v));
        }
    };
    put("potential", cli.potential.clone().map(Value::String));
    put("output.prefix", cli.prefix.clone().map(Value::String));
    put("output.gnuplot", cli.gnuplot.then_some(Value::Boolean(true)));
    let f = |x: Option<f64>| x.map(Value::Float);
    let n = |x: Option<usize>| x.map(|x| Value::Integer(x as i64));
    let inline = |key: &'static str, s: &Option<String>| -> CliResult<Option<Value>> {
        s.as_ref()
            .map(|s| {
                format!("v = {s}")
                    .parse::<Table>()
                    .map_err(|e| CliError::config(key, e.message().to_string()))
                    .map(|mut t| t.remove("v").unwrap())
            })
            .transpose()
    };
    match &cli.command {
        Command::Ode(a) => {
            put("ode.orbit", a.orbit.map(enum_value));
            put("ode.lambda", f(a.lambda));
            put("ode.energy", f(a.energy));
            put("ode.sign", a.sign.map(enum_value));
            put("ode.samples", n(a.samples));
            put("ode.x_min", f(a.x_min));
            put("ode.x_max", f(a.x_max));
            put("ode.tol", f(a.tol));
        }
        Command::Radial(a) => {
            put("radial.kind", a.kind.map(enum_value));
            put("radial.dim", n(a.dim));
            put("radial.outer", f(a.outer));
            put("radial.eps", f(a.eps));
            put("radial.radius", f(a.radius));
            put("radial.lambda", f(a.lambda));
            put("radial.boundary_level", f(a.boundary_level));
            put("radial.cells", n(a.cells));
        }
        Command::Solve(a) => {
            put("domain.h", f(a.domain.h));
            put("domain.shape", inline("domain.shape", &a.domain.shape)?);
            put("domain.labels", inline("domain.labels", &a.domain.labels)?);
            put("solve.problem", a.problem.map(enum_value));
            put("solve.sign", a.sign.map(enum_value));
            put("solve.boundary_value", f(a.boundary_value));
            put("solve.boundary", a.boundary.map(enum_value));
            put("solve.continuation.b0", f(a.b0));
            put("solve.continuation.growth", f(a.growth));
            put("solve.continuation.max_levels", n(a.max_levels));
            put("solve.continuation.tol", f(a.tol));
            put("solve.continuation.band_offset", f(a.band_offset));
        }
        Command::Check(a) => {
            put("domain.h", f(a.domain.h));
            put("domain.shape", inline("domain.shape", &a.domain.shape)?);
            put("domain.labels", inline("domain.labels", &a.domain.labels)?);
            put("check.field", a.field.as_ref().map(|p| Value::String(p.display().to_string())));
            put("check.against", a.against.as_ref().map(|p| Value::String(p.display().to_string())));
            put("check.kind", a.kind.map(enum_value));
            put("check.lambdas", a.lambdas.clone().map(|v| Value::Array(v.into_iter().map(Value::Float).collect())));
            put("check.slack", f(a.slack));
        }
        Command::Config => {}
    }
    Ok(out)
}

fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let mut table = config::read_table(cli.config.as_deref())?;
    for s in &cli.set {
        config::apply_assignment(&mut table, s)?;
    }
    for (key, value) in flag_overrides(cli)? {
        config::set_path(&mut table, key, value)?;
    }
    config::from_table(table)
}

fn run(cli: &Cli) -> CliResult<serde_json::Value> {
    let cfg = resolve(cli)?;
    if let Command::Config = cli.command {
        let text = toml::to_string(&cfg).map_err(|e| CliError::config("<config>", e.to_string()))?;
        let _ = write!(std::io::stdout(), "{text}");
        return Ok(serde_json::Value::Null);
    }
    let dir = cli.output_dir.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let mut sink = Sink::new(dir, cfg.output.prefix.clone(), cfg.output.gnuplot)?;
    let (name, details) = match &cli.command {
        Command::Ode(_) => ("ode", commands::ode(&cfg, &mut sink)?),
        Command::Radial(_) => ("radial", commands::radial(&cfg, &mut sink)?),
        Command::Solve(_) => ("solve", commands::solve(&cfg, &mut sink)?),
        Command::Check(_) => ("check", commands::check(&cfg, &mut sink)?),
        Command::Config => unreachable!(),
    };
    let files: Vec<String> = sink.written().iter().map(|p| p.display().to_string()).collect();
    Ok(json!({ "command": name, "outputs": files, "details": details }))
}

fn main() -> ExitCode {
    let command = Cli::command()
        .after_long_help(format!("Configuration keys and their defaults (TOML):\n\n{}", config::defaults_toml()));
    let cli = match command.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(std::io::stdout(), "{e}");
                return ExitCode::SUCCESS;
            }
            let err = CliError::Usage { message: e.render().to_string().trim().to_string() };
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(&cli) {
        Ok(serde_json::Value::Null) => ExitCode::SUCCESS,
        Ok(summary) => {
            let _ = writeln!(std::io::stdout(), "{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
