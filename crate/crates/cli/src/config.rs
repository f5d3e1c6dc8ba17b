//! Command-line parsing into a validated [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fraceq::fracops::{PowerSum, Term};
use fraceq::numerics::QuadratureConfig;
use fraceq::{DistributionModel, DistributionSpec};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Eqdist,
    Characterize,
    Taylor,
    Mvt,
    Order,
    Actuarial,
    Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything a campaign needs. Serialized verbatim into the report header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<DistributionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<DistributionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<DistributionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub severity: Option<DistributionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<PowerSum>,
    pub alphas: Vec<f64>,
    pub ns: Vec<u32>,
    pub grid: usize,
    /// Pass/fail gate applied to residuals, scaled by `max(1, |rhs|)`.
    pub tolerance: f64,
    pub quadrature: QuadratureConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    pub caputo: bool,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_GRID: usize = 30;
pub const MIN_GRID: usize = 8;
pub const DEFAULT_TOLERANCE: f64 = 1e-5;

#[derive(Parser, Debug)]
#[command(
    name = "fraceq",
    version,
    about = "Verification campaigns for fractional equilibrium distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Equilibrium survival on a grid: partial-moment route vs Weyl-integral route.
    Eqdist(Opts),
    /// Fixed-point test of the equilibrium density against the base density.
    Characterize(Opts),
    /// Fractional Taylor expansion of E[g(X)] with remainder.
    Taylor(Opts),
    /// Fractional mean value theorem for an ordered pair.
    Mvt(Opts),
    /// Survival bounded order check (informational).
    Order(Opts),
    /// Deductible mean value theorem and ratio independence.
    Actuarial(Opts),
    /// The full verification battery on the built-in catalog.
    Suite(Opts),
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Distribution as inline JSON or a path to a JSON file.
    #[arg(long)]
    dist: Option<String>,
    /// Smaller variable of an ordered pair (JSON or path).
    #[arg(long)]
    x: Option<String>,
    /// Larger variable of an ordered pair (JSON or path).
    #[arg(long)]
    y: Option<String>,
    /// Loss severity for deductible campaigns (JSON or path).
    #[arg(long)]
    severity: Option<String>,
    /// Test function as a JSON list of {"coef", "exp"} terms, or a path.
    #[arg(long)]
    g: Option<String>,
    /// Fractional orders, comma separated or repeated.
    #[arg(long = "alpha", value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Equilibrium or expansion orders, comma separated or repeated.
    #[arg(long = "n", value_delimiter = ',')]
    ns: Vec<u32>,
    /// Grid size (at least 8).
    #[arg(long)]
    grid: Option<usize>,
    /// Residual tolerance for pass/fail.
    #[arg(long = "tol")]
    tolerance: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    /// Use the Caputo form of the Taylor expansion.
    #[arg(long)]
    caputo: bool,
    /// Output file (json) or directory (csv). JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Parses arguments without the program name.
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args = std::iter::once("fraceq".to_string()).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let (command, opts) = match cli.command {
        Sub::Eqdist(o) => (Command::Eqdist, o),
        Sub::Characterize(o) => (Command::Characterize, o),
        Sub::Taylor(o) => (Command::Taylor, o),
        Sub::Mvt(o) => (Command::Mvt, o),
        Sub::Order(o) => (Command::Order, o),
        Sub::Actuarial(o) => (Command::Actuarial, o),
        Sub::Suite(o) => (Command::Suite, o),
    };
    build(command, opts)
}

fn build(command: Command, o: Opts) -> Result<RunConfig, CliError> {
    let mut quadrature = QuadratureConfig::default();
    if let Some(v) = o.abs_tol {
        quadrature.abs_tol = v;
    }
    if let Some(v) = o.rel_tol {
        quadrature.rel_tol = v;
    }
    quadrature
        .validate()
        .map_err(|e| CliError::Usage(format!("quadrature tolerances: {e}")))?;

    let tolerance = o.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {tolerance}")));
    }
    let grid = o.grid.unwrap_or(DEFAULT_GRID);
    if grid < MIN_GRID {
        return Err(CliError::Usage(format!(
            "--grid must be at least {MIN_GRID}, got {grid}"
        )));
    }
    if let Some(a) = o.alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(CliError::Usage(format!("--alpha values must be positive, got {a}")));
    }

    let alphas = if o.alphas.is_empty() {
        match command {
            Command::Order => vec![0.5, 1.0, 1.5, 2.0],
            _ => vec![0.5, 1.0],
        }
    } else {
        o.alphas
    };
    let ns = if o.ns.is_empty() {
        match command {
            Command::Taylor => vec![0, 1, 2],
            _ => vec![1, 2],
        }
    } else {
        o.ns
    };

    let dist = o.dist.as_deref().map(|s| load_model("--dist", s)).transpose()?;
    let x = o.x.as_deref().map(|s| load_model("--x", s)).transpose()?;
    let y = o.y.as_deref().map(|s| load_model("--y", s)).transpose()?;
    let severity = o.severity.as_deref().map(|s| load_model("--severity", s)).transpose()?;
    let mut g = o.g.as_deref().map(|s| load_json::<PowerSum>("--g", s)).transpose()?;

    let need = |present: bool, flag: &str| {
        if present {
            Ok(())
        } else {
            Err(CliError::Usage(format!("`{}` needs {flag}", name(command))))
        }
    };
    match command {
        Command::Eqdist | Command::Characterize => need(dist.is_some(), "--dist")?,
        Command::Taylor => {
            need(dist.is_some(), "--dist")?;
            need(g.is_some(), "--g")?;
        }
        Command::Mvt | Command::Order => {
            need(x.is_some(), "--x")?;
            need(y.is_some(), "--y")?;
        }
        Command::Actuarial => {
            need(severity.is_some(), "--severity")?;
            need(o.r.is_some() && o.s.is_some(), "--r and --s")?;
            if o.u.is_some() != o.v.is_some() {
                return Err(CliError::Usage("--u and --v go together".into()));
            }
        }
        Command::Suite => {}
    }
    if matches!(command, Command::Mvt | Command::Actuarial) && g.is_none() {
        g = Some(identity_power());
    }
    if o.format == Format::Csv {
        if !matches!(command, Command::Eqdist | Command::Characterize | Command::Mvt) {
            return Err(CliError::Usage(format!(
                "csv output is available for eqdist, characterize and mvt, not `{}`",
                name(command)
            )));
        }
        if o.out.is_none() {
            return Err(CliError::Usage("csv output needs --out <directory>".into()));
        }
    }

    Ok(RunConfig {
        command,
        dist,
        x,
        y,
        severity,
        g,
        alphas,
        ns,
        grid,
        tolerance,
        quadrature,
        r: o.r,
        s: o.s,
        u: o.u,
        v: o.v,
        caputo: o.caputo,
        format: o.format,
        out: o.out,
    })
}

pub fn name(command: Command) -> &'static str {
    match command {
        Command::Eqdist => "eqdist",
        Command::Characterize => "characterize",
        Command::Taylor => "taylor",
        Command::Mvt => "mvt",
        Command::Order => "order",
        Command::Actuarial => "actuarial",
        Command::Suite => "suite",
    }
}

/// Inline JSON when the argument opens with `{` or `[`, a file path otherwise.
fn load_json<T: DeserializeOwned>(flag: &str, arg: &str) -> Result<T, CliError> {
    let trimmed = arg.trim_start();
    let (text, origin) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        (arg.to_string(), "inline JSON".to_string())
    } else {
        let text = std::fs::read_to_string(arg).map_err(|e| CliError::Io(format!("{flag}: cannot read {arg}: {e}")))?;
        (text, arg.to_string())
    };
    serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "{flag}: malformed JSON in {origin} at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

fn load_model(flag: &str, arg: &str) -> Result<DistributionSpec, CliError> {
    let spec: DistributionSpec = load_json(flag, arg)?;
    DistributionModel::build(&spec).map_err(|e| CliError::Usage(format!("{flag}: {e}")))?;
    Ok(spec)
}

/// `x` as a one-term power sum, used by campaigns that default `g`.
pub fn identity_power() -> PowerSum {
    PowerSum::new([Term { coef: 1.0, exp: 1.0 }]).expect("x is a valid power sum")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eqdist_example() {
        let c = parse_args([
            "eqdist",
            "--dist",
            r#"{"kind":"exponential","params":{"lambda":1}}"#,
            "--alpha",
            "0.5",
            "--n",
            "2",
        ])
        .unwrap();
        assert_eq!(c.command, Command::Eqdist);
        assert_eq!(c.dist, Some(DistributionSpec::exponential(1.0)));
        assert_eq!(c.alphas, vec![0.5]);
        assert_eq!(c.ns, vec![2]);
        assert_eq!(c.grid, DEFAULT_GRID);
    }

    #[test]
    fn unknown_command_is_usage() {
        let e = parse_args(["frobnicate"]).unwrap_err();
        assert!(matches!(e, CliError::Usage(_)));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn suite_needs_nothing() {
        let c = parse_args(["suite"]).unwrap();
        assert_eq!(c.command, Command::Suite);
    }

    #[test]
    fn malformed_json_reports_location() {
        let e = parse_args([
            "eqdist",
            "--dist",
            "{\"kind\":\"exponential\",\n \"params\":{\"lambda\":}}",
        ])
        .unwrap_err();
        let CliError::Usage(msg) = &e else { panic!("{e:?}") };
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn invalid_parameters_and_flags() {
        let bad = r#"{"kind":"exponential","params":{"lambda":-1}}"#;
        assert!(matches!(parse_args(["eqdist", "--dist", bad]), Err(CliError::Usage(_))));
        let ok = r#"{"kind":"exponential","params":{"lambda":1}}"#;
        assert!(matches!(
            parse_args(["eqdist", "--dist", ok, "--grid", "7"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse_args(["eqdist", "--dist", ok, "--tol", "0"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse_args(["eqdist", "--dist", ok, "--abs-tol", "-1"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(parse_args(["eqdist"]), Err(CliError::Usage(_))));
        assert!(matches!(
            parse_args(["order", "--x", ok, "--format", "csv", "--out", "d"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            parse_args(["eqdist", "--dist", ok, "--format", "csv"]),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn missing_file_is_io() {
        let e = parse_args(["eqdist", "--dist", "/nonexistent/spec.json"]).unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }

    #[test]
    fn lists_and_defaults() {
        let ok = r#"{"kind":"exponential","params":{"lambda":1}}"#;
        let c = parse_args(["mvt", "--x", ok, "--y", ok, "--alpha", "0.5,1", "--alpha", "1.5"]).unwrap();
        assert_eq!(c.alphas, vec![0.5, 1.0, 1.5]);
        assert_eq!(c.g, Some(identity_power()));
        let c = parse_args(["taylor", "--dist", ok, "--g", r#"[{"coef":1,"exp":2}]"#]).unwrap();
        assert_eq!(c.ns, vec![0, 1, 2]);
    }
}
