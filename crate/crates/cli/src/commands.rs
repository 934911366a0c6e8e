//! One runner per operation. Each returns a pass flag and a JSON result.

use std::io::Write;
use std::path::Path;

use foliated_contact::constructions::{
    detect_overtwisted_disk, divisor_connected_sum, divisor_local_model, lutz_profile, lutz_twist,
};
use foliated_contact::flows::{gray_flow, parallel_transport, ContactFamily};
use foliated_contact::foliated::{
    check_frobenius_with, solve_fields, verify_contact_foliation_with, verify_parallel_identity_with,
    verify_symplectic_foliation_with, verify_symplectic_lie_with, FieldKind, FoliatedContactPair,
};
use foliated_contact::forms::{AxisKind, AxisSamples, Chart, DifferentialForm, Grid};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::model::{self, Model, Structure};
use crate::CliError;

/// Largest accepted endpoint conjugation defect of the Gray flow.
pub const GRAY_DEFECT_TOL: f64 = 1e-3;

/// Field samples are listed inline up to this many grid points.
const INLINE_SAMPLES: usize = 4096;

pub struct Outcome {
    pub passed: bool,
    pub results: Value,
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serialises")
}

pub fn grid_for(cfg: &RunConfig, chart: &Chart) -> Result<Grid, CliError> {
    if let Some(per) = &cfg.grid.per_axis {
        if per.len() != chart.dim() {
            return Err(CliError::Config(format!(
                "grid.per_axis has {} entries for a {}-dimensional chart",
                per.len(),
                chart.dim()
            )));
        }
        return Ok(Grid {
            axes: per.iter().map(|&n| AxisSamples::Count { n }).collect(),
        });
    }
    Ok(match cfg.grid.points {
        Some(0) => return Err(CliError::Config("grid.points must be positive".into())),
        Some(n) => Grid::uniform(chart.dim(), n),
        None => Grid::default_for(chart),
    })
}

/// Midpoint of bounded axes, 0 on periodic ones.
pub fn default_seed(chart: &Chart) -> Vec<f64> {
    chart
        .axes()
        .iter()
        .map(|a| match a.kind {
            AxisKind::Bounded { lo, hi } => 0.5 * (lo + hi),
            AxisKind::Periodic { .. } => 0.0,
        })
        .collect()
}

fn contact(model: &Model, op: &str) -> Result<FoliatedContactPair, CliError> {
    match &model.structure {
        Structure::Contact(p) => Ok(p.clone()),
        other => Err(CliError::Config(format!(
            "{op} needs a contact foliation, model '{}' is a {}",
            model.descriptor.name,
            other.kind()
        ))),
    }
}

/// Certify a form-file pair before using it for a construction.
fn certified(pair: FoliatedContactPair) -> Result<FoliatedContactPair, CliError> {
    if pair.is_certified() {
        return Ok(pair);
    }
    let grid = Grid::default_for(pair.chart());
    Ok(pair.certify(&grid)?)
}

pub fn verify(cfg: &RunConfig, model: &Model) -> Result<Outcome, CliError> {
    let chart = model.structure.chart();
    let grid = grid_for(cfg, chart)?;
    let tol = &cfg.tolerances;
    let checks = cfg.checks.clone().unwrap_or_else(|| match model.structure {
        Structure::Contact(_) => vec!["contact".into(), "frobenius".into()],
        Structure::Symplectic(_) => vec!["symplectic".into(), "frobenius".into()],
        Structure::Leaf(_) => vec!["contact".into()],
    });
    let mut results = Vec::new();
    let mut all = true;
    for check in &checks {
        let (passed, report) = match (check.as_str(), &model.structure) {
            ("contact", Structure::Contact(p)) => {
                let r = verify_contact_foliation_with(p, &grid, tol)?;
                (r.passed, to_value(&r))
            }
            ("contact", Structure::Leaf(l)) => {
                let r = l.verify_with(&grid, tol)?;
                (r.passed, to_value(&r))
            }
            ("frobenius", Structure::Contact(p)) => {
                let r = check_frobenius_with(p.beta(), &grid, tol)?;
                (r.passed, to_value(&r))
            }
            ("frobenius", Structure::Symplectic(p)) => {
                let r = check_frobenius_with(p.beta(), &grid, tol)?;
                (r.passed, to_value(&r))
            }
            ("parallel", Structure::Contact(p)) => {
                let r = verify_parallel_identity_with(p, &grid, tol)?;
                (r.passed, to_value(&r))
            }
            ("symplectic", Structure::Symplectic(p)) => {
                let r = verify_symplectic_foliation_with(p, &grid, tol)?;
                (r.passed, to_value(&r))
            }
            ("lie", Structure::Symplectic(p)) => {
                let r = verify_symplectic_lie_with(p, &grid, tol)?;
                (r.passed, to_value(&r))
            }
            (c @ ("contact" | "frobenius" | "parallel" | "symplectic" | "lie"), s) => {
                return Err(CliError::Config(format!("check '{c}' does not apply to a {}", s.kind())))
            }
            (c, _) => {
                return Err(CliError::Config(format!(
                    "unknown check '{c}' (contact, frobenius, parallel, symplectic, lie)"
                )))
            }
        };
        all &= passed;
        results.push(json!({ "check": check, "passed": passed, "report": report }));
    }
    Ok(Outcome {
        passed: all,
        results: json!({ "grid": to_value(&grid), "checks": results }),
    })
}

fn field_kind(cfg: &RunConfig) -> Result<FieldKind, CliError> {
    match cfg.kind.as_deref().unwrap_or("transverse") {
        "transverse" | "t" => Ok(FieldKind::Transverse),
        "reeb" | "r" => Ok(FieldKind::Reeb),
        other => Err(CliError::Config(format!("unknown field kind '{other}' (transverse or reeb)"))),
    }
}

pub fn fields(cfg: &RunConfig, model: &Model, dump: Option<&Path>) -> Result<Outcome, CliError> {
    let pair = contact(model, "fields")?;
    let grid = grid_for(cfg, pair.chart())?;
    let kind = field_kind(cfg)?;
    let report = solve_fields(&pair, &grid, kind)?;
    let tol = cfg.tolerances.for_tier(report.tier);
    let passed = report.max_residual <= tol && report.max_duality_error <= tol && report.min_frame_det > 0.0;
    if let Some(path) = dump {
        write_dump(path, pair.chart(), &report)?;
    }
    let mut v = to_value(&report);
    if report.samples.len() > INLINE_SAMPLES {
        let obj = v.as_object_mut().expect("report is an object");
        obj.remove("samples");
        obj.insert("samples_omitted".into(), json!(report.samples.len()));
    }
    v["axes"] = json!(pair.chart().axis_names());
    Ok(Outcome { passed, results: v })
}

fn write_dump(path: &Path, chart: &Chart, report: &foliated_contact::foliated::FieldSolveReport) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Config(format!("{}: {e}", path.display()));
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let names = chart.axis_names();
    let mut header: Vec<String> = names.clone();
    header.extend(names.iter().map(|n| format!("v_{n}")));
    header.extend(["c", "residual", "condition", "frame_det"].map(String::from));
    writeln!(out, "{}", header.join("\t")).map_err(io)?;
    for s in &report.samples {
        let sol = &s.solution;
        let row: Vec<String> = sol
            .point
            .iter()
            .chain(&sol.vector)
            .chain([&sol.c, &sol.residual, &sol.condition, &s.frame_det])
            .map(|v| format!("{v:e}"))
            .collect();
        writeln!(out, "{}", row.join("\t")).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn seeds(cfg: &RunConfig, chart: &Chart, fallback: Vec<f64>) -> Result<Vec<Vec<f64>>, CliError> {
    let seeds = cfg.seeds.clone().unwrap_or_else(|| vec![fallback]);
    for s in &seeds {
        if s.len() != chart.dim() {
            return Err(CliError::Config(format!(
                "seed {s:?} has {} coordinates, chart has {}",
                s.len(),
                chart.dim()
            )));
        }
    }
    Ok(seeds)
}

pub fn transport(cfg: &RunConfig, model: &Model) -> Result<Outcome, CliError> {
    let pair = certified(contact(model, "transport")?)?;
    let t_end = cfg.t_end.unwrap_or(0.25);
    let mut runs = Vec::new();
    let mut worst = 0.0f64;
    for seed in seeds(cfg, pair.chart(), default_seed(pair.chart()))? {
        let (traj, report) = parallel_transport(&pair, &seed, t_end, cfg.step)?;
        worst = worst.max(report.max_defect);
        runs.push(json!({
            "seed": seed,
            "end": traj.end(),
            "end_time": traj.end_time(),
            "trajectory": to_value(&traj),
            "preservation": to_value(&report),
        }));
    }
    Ok(Outcome {
        passed: worst <= cfg.tolerances.fd,
        results: json!({ "t_end": t_end, "step": cfg.step, "max_defect": worst, "runs": runs }),
    })
}

pub fn gray(cfg: &RunConfig, model: &Model) -> Result<Outcome, CliError> {
    let kind = cfg
        .family
        .clone()
        .unwrap_or_else(|| if model.family.is_some() { "file".into() } else { "rotating".into() });
    let (family, fallback) = if kind == "file" {
        let coeffs = model
            .family
            .clone()
            .ok_or_else(|| CliError::Config("family 'file' needs a form file with a [family] table".into()))?;
        let pair = contact(model, "gray")?;
        let fam = ContactFamily::new(pair.beta().clone(), pair.orientation().clone(), coeffs)?;
        let seed = default_seed(pair.chart());
        (fam, seed)
    } else {
        if model.descriptor.name != "t4" {
            return Err(CliError::Config(format!(
                "family '{kind}' lives on the t4 model, not '{}'",
                model.descriptor.name
            )));
        }
        let par = |k: &str| model.descriptor.parameters.get(k).and_then(Value::as_f64).unwrap_or(0.0);
        (model::t4_family(&kind, par("p"), par("q"), par("r"))?, vec![0.1, 0.2, 0.3, 0.4])
    };
    let family = if cfg.fd_derivative {
        family.with_fd_derivative(cfg.step)
    } else {
        family
    };
    let seeds = seeds(cfg, family.chart(), fallback)?;
    let result = gray_flow(&family, &seeds, cfg.step)?;
    let states: Vec<Value> = result
        .states
        .iter()
        .map(|s| {
            json!({
                "seed": s.seed,
                "end": s.trajectory.end(),
                "g": s.g,
                "lambda": s.lambda,
                "lambda_consistency": s.lambda_consistency(),
                "max_beta_x": s.max_beta_x,
                "max_alpha_x": s.max_alpha_x,
                "max_residual": s.max_residual,
                "samples": s.trajectory.points.len(),
            })
        })
        .collect();
    let c = &result.conjugation;
    let passed = c.max_defect <= GRAY_DEFECT_TOL && c.max_beta_x <= cfg.tolerances.exact;
    Ok(Outcome {
        passed,
        results: json!({
            "family": kind,
            "alpha_dot": if cfg.fd_derivative { "finite-difference" } else { "exact" },
            "step": cfg.step,
            "defect_tolerance": GRAY_DEFECT_TOL,
            "conjugation": to_value(c),
            "states": states,
        }),
    })
}

/// Axis whose coordinate form is `beta`.
fn beta_axis(beta: &DifferentialForm) -> Option<usize> {
    let mut terms = beta.terms();
    let (idx, c) = terms.next()?;
    (terms.next().is_none() && c.as_const() == Some(1.0)).then_some(idx[0])
}

pub fn lutz(cfg: &RunConfig, model: &Model) -> Result<Outcome, CliError> {
    let pair = certified(contact(model, "lutz")?)?;
    let chart = pair.chart().clone();
    let r_axis = chart
        .axis_index("r")
        .ok_or_else(|| CliError::Config("lutz needs a chart with r, theta and z axes".into()))?;
    let (_, r_hi) = chart.axes()[r_axis].range();
    let radius = cfg.twist_radius.unwrap_or(r_hi);
    let profile = lutz_profile(radius)?;
    let twisted = lutz_twist(&pair, &profile)?;
    let n = 10_000;
    let min_term = (1..=n)
        .map(|k| profile.contact_term(radius * k as f64 / n as f64))
        .fold(f64::INFINITY, f64::min);
    let axis = beta_axis(pair.beta())
        .ok_or_else(|| CliError::Config("lutz needs beta to be a coordinate form".into()))?;
    let leaf_t = cfg.leaf_t.unwrap_or(default_seed(&chart)[axis]);
    let leaf = twisted.leaf(axis, leaf_t)?;
    let r_star = detect_overtwisted_disk(&leaf)?;
    let passed = r_star.is_some_and(|r| r > 0.0 && r < radius) && min_term > 0.0;
    Ok(Outcome {
        passed,
        results: json!({
            "twist_radius": radius,
            "r_match": profile.r_match(),
            "min_contact_term": min_term,
            "profile_samples": n,
            "certificate": to_value(&twisted.certificate()),
            "leaf_axis": chart.axis_names()[axis],
            "leaf_value": leaf_t,
            "r_star": r_star,
        }),
    })
}

pub fn glue(cfg: &RunConfig, model: Option<&Model>) -> Result<Outcome, CliError> {
    let eps = cfg.model.epsilon.unwrap_or(0.5);
    let side1 = divisor_local_model(eps)?;
    let side0 = match model {
        Some(m) => contact(m, "glue")?,
        None => side1.clone(),
    };
    let sum = divisor_connected_sum(&side0, &side1, eps)?;
    let r = &sum.report;
    let passed = r.f0_residual <= cfg.tolerances.exact && r.f1_residual <= cfg.tolerances.exact && r.region_contact.passed;
    Ok(Outcome {
        passed,
        results: json!({
            "region_chart": to_value(&**sum.region.chart()),
            "report": to_value(r),
        }),
    })
}
