//! Built-in models and form files.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use foliated_contact::constructions::{divisor_local_model, symplectize};
use foliated_contact::flows::ContactFamily;
use foliated_contact::foliated::{FoliatedContactPair, LeafContactForm, SymplecticFoliationPair};
use foliated_contact::forms::{parse_expr, Axis, Chart, DifferentialForm, Expr, ScalarField};
use foliated_contact::models::{
    box_leaf_chart, mapping_torus_model, overtwisted_model, standard_local_model_with_radius,
    standard_symplectic_foliation, t4_chart, t4_model, LOCAL_MODEL_RADIUS,
};
use serde::{Deserialize, Serialize};

use crate::config::ModelSection;
use crate::CliError;

pub const MODEL_NAMES: [&str; 8] = [
    "t4",
    "local",
    "mapping-torus",
    "overtwisted",
    "standard-symplectic",
    "symplectized-t4",
    "divisor",
    "file",
];

pub enum Structure {
    Contact(FoliatedContactPair),
    Symplectic(SymplecticFoliationPair),
    Leaf(LeafContactForm),
}

impl Structure {
    pub fn chart(&self) -> &Arc<Chart> {
        match self {
            Structure::Contact(p) => p.chart(),
            Structure::Symplectic(p) => p.chart(),
            Structure::Leaf(l) => l.chart(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Structure::Contact(_) => "contact-foliation",
            Structure::Symplectic(_) => "symplectic-foliation",
            Structure::Leaf(_) => "leaf-contact-form",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Descriptor {
    pub name: String,
    pub kind: &'static str,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub chart: Chart,
    pub certified: bool,
}

pub struct Model {
    pub structure: Structure,
    pub descriptor: Descriptor,
    /// Family of leafwise forms, when the form file supplies one.
    pub family: Option<Vec<Expr>>,
}

/// A coefficient written either as a number or as an expression string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub period: Option<f64>,
}

/// On-disk description of a structure on a coordinate chart.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFile {
    pub name: Option<String>,
    pub axes: Vec<AxisSpec>,
    /// Sign of the orientation volume form.
    #[serde(default = "one")]
    pub orientation: f64,
    #[serde(default)]
    pub beta: BTreeMap<String, Coeff>,
    #[serde(default)]
    pub alpha: BTreeMap<String, Coeff>,
    /// 2-form components keyed `"a^b"`.
    #[serde(default)]
    pub omega: BTreeMap<String, Coeff>,
    /// `alpha_s` components; `s` is available as a variable.
    #[serde(default)]
    pub family: BTreeMap<String, Coeff>,
}

fn one() -> f64 {
    1.0
}

fn coeff_expr(c: &Coeff, vars: &[String]) -> Result<Expr, CliError> {
    match c {
        Coeff::Number(v) => Ok(Expr::constant(*v)),
        Coeff::Text(src) => parse_expr(src, vars).map_err(CliError::Core),
    }
}

fn axis_index(chart: &Chart, name: &str, what: &str) -> Result<usize, CliError> {
    chart
        .axis_index(name.trim())
        .ok_or_else(|| CliError::Config(format!("{what}: unknown axis '{name}'")))
}

fn one_form(chart: &Arc<Chart>, map: &BTreeMap<String, Coeff>, vars: &[String], what: &str) -> Result<Vec<Expr>, CliError> {
    let mut coeffs = vec![Expr::zero(); chart.dim()];
    for (k, v) in map {
        let i = axis_index(chart, k, what)?;
        coeffs[i] = coeff_expr(v, vars)?;
    }
    Ok(coeffs)
}

impl FormFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn chart(&self) -> Result<Arc<Chart>, CliError> {
        let axes = self
            .axes
            .iter()
            .map(|a| match (a.lo, a.hi, a.period) {
                (Some(lo), Some(hi), None) => Ok(Axis::bounded(&a.name, lo, hi)),
                (None, None, Some(p)) => Ok(Axis::periodic(&a.name, p)),
                _ => Err(CliError::Config(format!(
                    "axis '{}' needs either lo and hi or period",
                    a.name
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Arc::new(Chart::new(axes)?))
    }

    pub fn build(&self) -> Result<Model, CliError> {
        let chart = self.chart()?;
        let vars = chart.axis_names();
        if !(self.orientation == 1.0 || self.orientation == -1.0) {
            return Err(CliError::Config("orientation must be 1 or -1".into()));
        }
        let vol = DifferentialForm::volume(chart.clone(), self.orientation);
        let has = |m: &BTreeMap<String, Coeff>| !m.is_empty();
        let structure = match (has(&self.beta), has(&self.alpha), has(&self.omega)) {
            (true, true, false) => {
                let beta = DifferentialForm::one_form(chart.clone(), one_form(&chart, &self.beta, &vars, "beta")?)?;
                let alpha = DifferentialForm::one_form(chart.clone(), one_form(&chart, &self.alpha, &vars, "alpha")?)?;
                Structure::Contact(FoliatedContactPair::new(beta, alpha, vol)?)
            }
            (true, false, true) => {
                let beta = DifferentialForm::one_form(chart.clone(), one_form(&chart, &self.beta, &vars, "beta")?)?;
                let mut terms = Vec::new();
                for (k, v) in &self.omega {
                    let parts: Vec<&str> = k.split('^').collect();
                    let [a, b] = parts[..] else {
                        return Err(CliError::Config(format!("omega key '{k}' must look like \"x^y\"")));
                    };
                    terms.push((vec![axis_index(&chart, a, "omega")?, axis_index(&chart, b, "omega")?], coeff_expr(v, &vars)?));
                }
                let omega = DifferentialForm::from_terms(chart.clone(), 2, terms)?;
                Structure::Symplectic(SymplecticFoliationPair::new(beta, omega)?)
            }
            (false, true, false) => {
                let alpha = DifferentialForm::one_form(chart.clone(), one_form(&chart, &self.alpha, &vars, "alpha")?)?;
                Structure::Leaf(LeafContactForm::new(alpha, vol)?)
            }
            _ => {
                return Err(CliError::Config(
                    "form file must give beta and alpha, beta and omega, or alpha alone".into(),
                ))
            }
        };
        let family = if self.family.is_empty() {
            None
        } else {
            let mut fvars = vars.clone();
            if fvars.iter().any(|v| v == "s") {
                return Err(CliError::Config("an axis named 's' clashes with the family parameter".into()));
            }
            fvars.push("s".into());
            Some(one_form(&chart, &self.family, &fvars, "family")?)
        };
        let descriptor = Descriptor {
            name: self.name.clone().unwrap_or_else(|| "file".into()),
            kind: structure.kind(),
            parameters: BTreeMap::new(),
            chart: (*chart).clone(),
            certified: false,
        };
        Ok(Model {
            structure,
            descriptor,
            family,
        })
    }
}

fn num(v: f64) -> serde_json::Value {
    serde_json::json!(v)
}

fn descriptor(name: &str, structure: &Structure, parameters: BTreeMap<String, serde_json::Value>) -> Descriptor {
    Descriptor {
        name: name.into(),
        kind: structure.kind(),
        parameters,
        chart: (**structure.chart()).clone(),
        certified: true,
    }
}

/// Resolve the model named in the configuration.
pub fn build(spec: &ModelSection) -> Result<Model, CliError> {
    let name = match (&spec.name, &spec.file) {
        (Some(n), _) => n.as_str(),
        (None, Some(_)) => "file",
        (None, None) => "t4",
    };
    let (p, q, r) = (spec.p.unwrap_or(0.0), spec.q.unwrap_or(0.0), spec.r.unwrap_or(0.0));
    let pqr = || BTreeMap::from([("p".into(), num(p)), ("q".into(), num(q)), ("r".into(), num(r))]);
    let (structure, params) = match name {
        "file" => {
            let path = spec
                .file
                .as_ref()
                .ok_or_else(|| CliError::Config("model 'file' needs a form file".into()))?;
            return FormFile::load(path)?.build();
        }
        "t4" => (Structure::Contact(t4_model(p, q, r)?), pqr()),
        "local" => {
            let radius = spec.radius.unwrap_or(LOCAL_MODEL_RADIUS);
            (
                Structure::Contact(standard_local_model_with_radius(radius)?),
                BTreeMap::from([("radius".into(), num(radius))]),
            )
        }
        "mapping-torus" => {
            let src = spec.h.clone().unwrap_or_else(|| "x^2 + 0.5*y*z".into());
            let chart = box_leaf_chart();
            let h = ScalarField::new(chart.clone(), parse_expr(&src, &chart.axis_names())?);
            (
                Structure::Contact(mapping_torus_model(&h)?),
                BTreeMap::from([("h".into(), serde_json::Value::String(src))]),
            )
        }
        "overtwisted" => (Structure::Leaf(overtwisted_model()?), BTreeMap::new()),
        "standard-symplectic" => {
            let n = spec.n.unwrap_or(1);
            (
                Structure::Symplectic(standard_symplectic_foliation(n)?),
                BTreeMap::from([("n".into(), serde_json::json!(n))]),
            )
        }
        "symplectized-t4" => (Structure::Symplectic(symplectize(&t4_model(p, q, r)?)?), pqr()),
        "divisor" => {
            let eps = spec.epsilon.unwrap_or(0.5);
            (
                Structure::Contact(divisor_local_model(eps)?),
                BTreeMap::from([("epsilon".into(), num(eps))]),
            )
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown model '{other}' (one of {})",
                MODEL_NAMES.join(", ")
            )))
        }
    };
    let descriptor = descriptor(name, &structure, params);
    Ok(Model {
        structure,
        descriptor,
        family: None,
    })
}

/// Family over the T^4 foliation with the given `beta` parameters.
pub fn t4_family(kind: &str, p: f64, q: f64, r: f64) -> Result<ContactFamily, CliError> {
    let chart = t4_chart();
    let beta = DifferentialForm::one_form(
        chart.clone(),
        vec![Expr::constant(-1.0), Expr::constant(p), Expr::constant(q), Expr::constant(r)],
    )?;
    // variables: t, x, y, z, s
    let phase = match kind {
        "rotating" => Expr::var(3).add(&Expr::var(4)).scale(TAU),
        "constant" => Expr::var(3).scale(TAU),
        other => {
            return Err(CliError::Config(format!(
                "unknown family '{other}' (rotating, constant or file)"
            )))
        }
    };
    let coeffs = vec![Expr::zero(), phase.sin(), phase.cos(), Expr::zero()];
    Ok(ContactFamily::new(beta, DifferentialForm::volume(chart.clone(), 1.0), coeffs)?)
}
