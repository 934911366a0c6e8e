//! `folcon`: verify and construct foliated contact structures from the
//! command line.

mod commands;
mod config;
mod model;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use foliated_contact::Error;
use serde_json::{json, Value};

use config::{Format, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 1 for a geometric failure, 2 for bad input.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Degenerate { .. } | Error::RankDeficient { .. } | Error::NotCertified(_)) => 1,
            _ => 2,
        }
    }

    fn to_json(&self) -> Value {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => match e {
                Error::InvalidChart(_) => "invalid-chart",
                Error::ChartMismatch(_) => "chart-mismatch",
                Error::DegreeOverflow { .. } => "degree-overflow",
                Error::InvalidDegree { .. } => "invalid-degree",
                Error::OutOfDomain { .. } => "out-of-domain",
                Error::Arity { .. } => "arity",
                Error::GridTooLarge { .. } => "grid-too-large",
                Error::Degenerate { .. } => "degenerate",
                Error::RankDeficient { .. } => "rank-deficient",
                Error::NotCertified(_) => "not-certified",
                Error::ModelMismatch { .. } => "model-mismatch",
                Error::InvalidParameter(_) => "invalid-parameter",
                Error::Parse { .. } => "parse",
            },
        };
        let mut v = json!({ "kind": kind, "message": self.to_string() });
        match self {
            CliError::Core(Error::ModelMismatch { deviation, point }) => {
                v["deviation"] = json!(deviation);
                v["point"] = json!(point);
            }
            CliError::Core(Error::Degenerate { point, .. } | Error::RankDeficient { point, .. } | Error::OutOfDomain { point, .. }) => {
                v["point"] = json!(point);
            }
            _ => {}
        }
        v
    }
}

#[derive(Parser)]
#[command(name = "folcon", version, about = "Verify and construct foliated contact structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in model: t4, local, mapping-torus, overtwisted, standard-symplectic, symplectized-t4, divisor, file.
    #[arg(long)]
    model: Option<String>,
    /// TOML form file (implies --model file).
    #[arg(long)]
    form_file: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Outer radius of the local model.
    #[arg(long)]
    radius: Option<f64>,
    /// Complex dimension of the standard symplectic foliation.
    #[arg(long)]
    n: Option<usize>,
    /// Hamiltonian for the mapping torus, in x, y, z.
    #[arg(long)]
    h: Option<String>,
    /// Neck size of the divisor model.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    exact_tol: Option<f64>,
    #[arg(long)]
    fd_tol: Option<f64>,
    #[arg(long)]
    positivity: Option<f64>,
    /// Output file, `-` for stdout.
    #[arg(long, short)]
    output: Option<String>,
    /// json or text.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug, Default)]
struct Flow {
    /// Starting point, comma separated; repeatable.
    #[arg(long = "seed", value_parser = parse_point, allow_negative_numbers = true)]
    seeds: Vec<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// RK4 step.
    #[arg(long)]
    step: Option<f64>,
}

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("'{c}': {e}")))
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// Run grid checks on a model.
    Verify {
        #[command(flatten)]
        common: Common,
        /// contact, frobenius, parallel, symplectic or lie; repeatable.
        #[arg(long = "check")]
        checks: Vec<String>,
    },
    /// Solve for the transverse or Reeb field on a grid.
    Fields {
        #[command(flatten)]
        common: Common,
        /// transverse or reeb.
        #[arg(long)]
        kind: Option<String>,
        /// Write every sample as TSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Integrate the transverse field and measure how it carries ker alpha.
    Transport {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flow: Flow,
    },
    /// Flow conjugating a family of leafwise contact forms.
    Gray {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flow: Flow,
        /// rotating, constant or file.
        #[arg(long)]
        family: Option<String>,
        /// Differentiate the family in s by central differences.
        #[arg(long)]
        fd_derivative: bool,
    },
    /// Full Lutz twist along the core, then look for an overtwisted disk.
    Lutz {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        twist_radius: Option<f64>,
        /// Leaf on which to look for the disk.
        #[arg(long, allow_negative_numbers = true)]
        leaf_t: Option<f64>,
    },
    /// Glue two divisor models along the neck.
    Glue {
        #[command(flatten)]
        common: Common,
    },
    /// Run the operation named in the configuration file.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// List the built-in models.
    Models,
}

fn overrides(c: &Common) -> Overrides {
    let mut o = Overrides::default();
    o.model.name = c.model.clone().or_else(|| c.form_file.as_ref().map(|_| "file".into()));
    o.model.file = c.form_file.clone();
    o.model.p = c.p;
    o.model.q = c.q;
    o.model.r = c.r;
    o.model.radius = c.radius;
    o.model.n = c.n;
    o.model.h = c.h.clone();
    o.model.epsilon = c.epsilon;
    o.grid = c.grid;
    o.exact = c.exact_tol;
    o.fd = c.fd_tol;
    o.positivity = c.positivity;
    o.output = c.output.clone();
    o.format = c.format.clone();
    o
}

fn apply_flow(o: &mut Overrides, f: &Flow) {
    if !f.seeds.is_empty() {
        o.seeds = Some(f.seeds.clone());
    }
    o.t_end = f.t_end;
    o.step = f.step;
}

fn default_model(op: &str) -> &'static str {
    match op {
        "lutz" => "local",
        "glue" => "divisor",
        _ => "t4",
    }
}

fn execute(cfg: &RunConfig, dump: Option<&std::path::Path>) -> (Option<model::Descriptor>, Result<commands::Outcome, CliError>) {
    let op = cfg.operation.as_str();
    let mut spec = cfg.model.clone();
    if spec.name.is_none() && spec.file.is_none() {
        spec.name = Some(default_model(op).into());
    }
    let model = match model::build(&spec) {
        Ok(m) => m,
        Err(e) => return (None, Err(e)),
    };
    let descriptor = Some(model.descriptor.clone());
    let out = match op {
        "verify" => commands::verify(cfg, &model),
        "fields" => commands::fields(cfg, &model, dump),
        "transport" => commands::transport(cfg, &model),
        "gray" => commands::gray(cfg, &model),
        "lutz" => commands::lutz(cfg, &model),
        "glue" => commands::glue(cfg, (spec.name.as_deref() != Some("divisor")).then_some(&model)),
        other => Err(CliError::Config(format!(
            "unknown operation '{other}' (verify, fields, transport, gray, lutz, glue)"
        ))),
    };
    (descriptor, out)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    let scalar = |v: &Value| !v.is_array() && !v.is_object();
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().all(scalar) && a.len() <= 8 => {
            let items: Vec<String> = a.iter().map(Value::to_string).collect();
            out.push(format!("{prefix}: [{}]", items.join(", ")));
        }
        Value::Array(a) if a.len() <= 8 => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::Array(a) => out.push(format!("{prefix}: [{} items]", a.len())),
        _ => out.push(format!("{prefix}: {v}")),
    }
}

fn render(doc: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(doc).expect("document serialises") + "\n",
        Format::Text => {
            let mut lines = Vec::new();
            for key in ["operation", "passed", "exit_code", "model", "results", "error"] {
                if let Some(v) = doc.get(key) {
                    flatten(key, v, &mut lines);
                }
            }
            // the chart is summarised by its axis names
            if let Some(axes) = doc.pointer("/model/chart/axes").and_then(Value::as_array) {
                lines.retain(|l| !l.starts_with("model.chart."));
                let names: Vec<&str> = axes.iter().filter_map(|a| a["name"].as_str()).collect();
                lines.insert(3, format!("model.axes: {}", names.join(", ")));
            }
            lines.join("\n") + "\n"
        }
    }
}

fn emit(text: &str, output: &str) -> Result<(), CliError> {
    if output == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes()).map_err(|e| CliError::Config(format!("stdout: {e}")))
    } else {
        std::fs::write(output, text).map_err(|e| CliError::Config(format!("{output}: {e}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (op, common, mut o, dump) = match cli.command {
        Command::Models => {
            for name in model::MODEL_NAMES {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Verify { common, checks } => {
            let mut o = overrides(&common);
            if !checks.is_empty() {
                o.checks = Some(checks);
            }
            (Some("verify"), common, o, None)
        }
        Command::Fields { common, kind, dump } => {
            let mut o = overrides(&common);
            o.kind = kind;
            (Some("fields"), common, o, dump)
        }
        Command::Transport { common, flow } => {
            let mut o = overrides(&common);
            apply_flow(&mut o, &flow);
            (Some("transport"), common, o, None)
        }
        Command::Gray { common, flow, family, fd_derivative } => {
            let mut o = overrides(&common);
            apply_flow(&mut o, &flow);
            o.family = family;
            o.fd_derivative = fd_derivative.then_some(true);
            (Some("gray"), common, o, None)
        }
        Command::Lutz { common, twist_radius, leaf_t } => {
            let mut o = overrides(&common);
            o.twist_radius = twist_radius;
            o.leaf_t = leaf_t;
            (Some("lutz"), common, o, None)
        }
        Command::Glue { common } => {
            let o = overrides(&common);
            (Some("glue"), common, o, None)
        }
        Command::Run { common } => {
            let o = overrides(&common);
            (None, common, o, None)
        }
    };
    let file = match &common.config {
        Some(path) => config::load(path),
        None => Ok(Default::default()),
    };
    let base = common.config.as_ref().and_then(|p| p.parent().map(|d| d.to_path_buf()));
    let cfg = file.and_then(|f| config::resolve(op, f, std::mem::take(&mut o), base.as_deref()));
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("folcon: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let (descriptor, outcome) = execute(&cfg, dump.as_deref());
    let (passed, code, results, error) = match outcome {
        Ok(out) => (out.passed, if out.passed { 0 } else { 1 }, out.results, Value::Null),
        Err(e) => {
            eprintln!("folcon: {e}");
            (false, e.exit_code(), Value::Null, e.to_json())
        }
    };
    let doc = json!({
        "schema_version": 1,
        "operation": cfg.operation,
        "passed": passed,
        "exit_code": code,
        "config": serde_json::to_value(&cfg).expect("config serialises"),
        "model": descriptor,
        "results": results,
        "error": error,
    });
    if let Err(e) = emit(&render(&doc, cfg.format), &cfg.output) {
        eprintln!("folcon: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
