//! Run configuration: TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use foliated_contact::tolerance::{Tolerances, DEFAULT_FLOW_STEP};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub tolerances: TolSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: Option<String>,
    pub file: Option<PathBuf>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub radius: Option<f64>,
    pub n: Option<usize>,
    pub h: Option<String>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Points per axis on every axis.
    pub points: Option<usize>,
    /// Points per axis, one entry per chart axis.
    pub per_axis: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TolSection {
    pub exact: Option<f64>,
    pub fd: Option<f64>,
    pub positivity: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub operation: Option<String>,
    pub checks: Option<Vec<String>>,
    pub kind: Option<String>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub seeds: Option<Vec<Vec<f64>>>,
    pub family: Option<String>,
    pub fd_derivative: Option<bool>,
    pub twist_radius: Option<f64>,
    pub leaf_t: Option<f64>,
    pub output: Option<String>,
    pub format: Option<String>,
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "json" | "structured" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(CliError::Config(format!("unknown format '{other}' (json or text)"))),
        }
    }
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub operation: String,
    pub model: ModelSection,
    pub grid: GridSection,
    pub tolerances: Tolerances,
    pub step: f64,
    pub t_end: Option<f64>,
    pub seeds: Option<Vec<Vec<f64>>>,
    pub checks: Option<Vec<String>>,
    pub kind: Option<String>,
    pub family: Option<String>,
    pub fd_derivative: bool,
    pub twist_radius: Option<f64>,
    pub leaf_t: Option<f64>,
    pub output: String,
    pub format: Format,
}

fn or<T>(cli: Option<T>, file: Option<T>) -> Option<T> {
    cli.or(file)
}

/// Command-line values that may override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: ModelSection,
    pub grid: Option<usize>,
    pub exact: Option<f64>,
    pub fd: Option<f64>,
    pub positivity: Option<f64>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub seeds: Option<Vec<Vec<f64>>>,
    pub checks: Option<Vec<String>>,
    pub kind: Option<String>,
    pub family: Option<String>,
    pub fd_derivative: Option<bool>,
    pub twist_radius: Option<f64>,
    pub leaf_t: Option<f64>,
    pub output: Option<String>,
    pub format: Option<String>,
}

pub fn resolve(operation: Option<&str>, file: FileConfig, cli: Overrides, base: Option<&Path>) -> Result<RunConfig, CliError> {
    let operation = match (operation, file.run.operation.as_deref()) {
        (Some(op), Some(f)) if op != f => {
            return Err(CliError::Config(format!("config operation '{f}' conflicts with subcommand '{op}'")))
        }
        (Some(op), _) => op.to_string(),
        (None, Some(f)) => f.to_string(),
        (None, None) => return Err(CliError::Config("no operation given (subcommand or run.operation)".into())),
    };
    let m = file.model;
    let c = cli.model;
    // form files named in a config are relative to the config
    let file_path = c.file.or_else(|| m.file.map(|p| match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    }));
    let model = ModelSection {
        name: or(c.name, m.name),
        file: file_path,
        p: or(c.p, m.p),
        q: or(c.q, m.q),
        r: or(c.r, m.r),
        radius: or(c.radius, m.radius),
        n: or(c.n, m.n),
        h: or(c.h, m.h),
        epsilon: or(c.epsilon, m.epsilon),
    };
    let grid = GridSection {
        points: or(cli.grid, file.grid.points),
        per_axis: if cli.grid.is_some() { None } else { file.grid.per_axis },
    };
    let d = Tolerances::default();
    let tolerances = Tolerances {
        exact: or(cli.exact, file.tolerances.exact).unwrap_or(d.exact),
        fd: or(cli.fd, file.tolerances.fd).unwrap_or(d.fd),
        positivity: or(cli.positivity, file.tolerances.positivity).unwrap_or(d.positivity),
    };
    for (name, v) in [("exact", tolerances.exact), ("fd", tolerances.fd), ("positivity", tolerances.positivity)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("tolerance '{name}' must be finite and nonnegative")));
        }
    }
    let r = file.run;
    let step = or(cli.step, r.step).unwrap_or(DEFAULT_FLOW_STEP);
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Config(format!("step must be positive, got {step}")));
    }
    let format = Format::parse(&or(cli.format, r.format).unwrap_or_else(|| "json".into()))?;
    Ok(RunConfig {
        operation,
        model,
        grid,
        tolerances,
        step,
        t_end: or(cli.t_end, r.t_end),
        seeds: or(cli.seeds, r.seeds),
        checks: or(cli.checks, r.checks),
        kind: or(cli.kind, r.kind),
        family: or(cli.family, r.family),
        fd_derivative: or(cli.fd_derivative, r.fd_derivative).unwrap_or(false),
        twist_radius: or(cli.twist_radius, r.twist_radius),
        leaf_t: or(cli.leaf_t, r.leaf_t),
        output: or(cli.output, r.output).unwrap_or_else(|| "-".into()),
        format,
    })
}
