//! Problem files: a cone, a variable space and an objective given either by
//! catalog name or as an explicit table.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::cone::{Cone, ConeSpec};
use crate::error::{Error, Result};
use crate::gset::GValue;
use crate::linalg::Point;
use crate::oracle::TableEntry;
use crate::setfn::{CandidateSet, SetFunction, VarSpace};

/// Names accepted in `{"objective": {"catalog": …}}` and by the CLI.
pub const CATALOG: [(&str, &str); 4] = [
    ("hyperbola", "f(x) = (x, 1/x) + R²₊ for x > 0, empty otherwise; box [1e-4, 100]"),
    ("linear_vop", "f(x) = x + R²₊ on x ≥ 0, x₁ + x₂ ≥ 1; grid {0, 0.25, …, 2}²"),
    ("quadratic_cvp", "L(t, y, p) = (p², y²) on [0, 1] with x(0) = 0, x(1) = 1 (cvp command)"),
    ("scalar_identity", "f(x) = (x − 1)² + 2 + R₊ on [−3, 3], the case Z = R, C = R₊"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<TableEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<VarSpace>,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Vec<Point>>,
}

/// A loaded problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub function: SetFunction,
    /// Catalog parameters after defaults were applied.
    pub params: BTreeMap<String, f64>,
    pub candidate: Option<CandidateSet>,
}

impl ProblemSpec {
    pub fn catalog(name: &str) -> ProblemSpec {
        ProblemSpec {
            cone: None,
            space: None,
            objective: ObjectiveSpec { catalog: Some(name.to_string()), params: BTreeMap::new(), table: None },
            candidate: None,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        let o = &self.objective;
        let (name, function, params) = match (&o.catalog, &o.table) {
            (Some(name), None) => {
                let (f, params) = build_catalog(name, &o.params, self.space.clone())?;
                if let Some(spec) = &self.cone {
                    if spec.build()? != **f.cone() {
                        return Err(Error::IncompatibleCone);
                    }
                }
                (name.clone(), f, params)
            }
            (None, Some(table)) => {
                if !o.params.is_empty() {
                    return Err(Error::InvalidInput("params only apply to catalog objectives".into()));
                }
                let spec = self.cone.as_ref().ok_or_else(|| Error::InvalidInput("a table needs a cone".into()))?;
                (
                    String::from("table"),
                    build_table(Arc::new(spec.build()?), table, self.space.as_ref())?,
                    BTreeMap::new(),
                )
            }
            _ => return Err(Error::InvalidInput("objective needs exactly one of \"catalog\" and \"table\"".into())),
        };
        let candidate = match &self.candidate {
            Some(points) => Some(CandidateSet::new(points.clone())?),
            None => None,
        };
        Ok(Problem { name, function, params, candidate })
    }
}

fn build_table(cone: Arc<Cone>, table: &[TableEntry], space: Option<&VarSpace>) -> Result<SetFunction> {
    let points: Vec<Point> = table.iter().map(|e| e.x.clone()).collect();
    if let Some(s) = space {
        if *s != VarSpace::Grid(points.clone()) {
            return Err(Error::InvalidSpace("a table's space must be the grid of its points".into()));
        }
    }
    let values = table.iter().map(|e| GValue::new(cone.clone(), e.generators.clone())).collect::<Result<Vec<_>>>()?;
    SetFunction::table(points, values, cone)
}

fn build_catalog(
    name: &str,
    given: &BTreeMap<String, f64>,
    space: Option<VarSpace>,
) -> Result<(SetFunction, BTreeMap<String, f64>)> {
    let defaults: &[(&str, f64)] = match name {
        "hyperbola" => &[("lower", 1e-4), ("upper", 100.0)],
        "linear_vop" => &[("step", 0.25), ("extent", 2.0)],
        "scalar_identity" => &[("center", 1.0), ("offset", 2.0), ("lower", -3.0), ("upper", 3.0)],
        "quadratic_cvp" => {
            return Err(Error::InvalidInput(
                "quadratic_cvp is a calculus of variations problem; use the cvp command".into(),
            ))
        }
        other => return Err(Error::InvalidInput(format!("unknown catalog problem {other:?}"))),
    };
    for key in given.keys() {
        if !defaults.iter().any(|(k, _)| k == key) {
            return Err(Error::InvalidInput(format!("unknown parameter {key:?} for {name}")));
        }
    }
    let mut params: BTreeMap<String, f64> =
        defaults.iter().map(|(k, v)| (k.to_string(), given.get(*k).copied().unwrap_or(*v))).collect();
    let p = |k: &str| params[k];
    let f = match name {
        "hyperbola" => match space {
            Some(s) => catalog::hyperbola_on(s)?,
            None => catalog::hyperbola(p("lower"), p("upper"))?,
        },
        "linear_vop" => match space {
            Some(s) => catalog::linear_vop_on(s)?,
            None => {
                if !(p("step") > 0.0 && p("extent") >= 0.0) {
                    return Err(Error::InvalidInput("linear_vop needs step > 0 and extent ≥ 0".into()));
                }
                catalog::linear_vop(p("step"), p("extent"))?
            }
        },
        _ => match space {
            Some(s) => catalog::scalar_identity_on(p("center"), p("offset"), s)?,
            None => catalog::scalar_identity(p("center"), p("offset"), p("lower"), p("upper"))?,
        },
    };
    if let VarSpace::Box { lower, upper } = f.space() {
        if matches!(name, "hyperbola" | "scalar_identity") {
            params.insert("lower".into(), lower[0]);
            params.insert("upper".into(), upper[0]);
        }
    }
    Ok((f, params))
}

/// Reads a candidate list given either as a bare array of points or as an
/// object with a `"candidate"` field.
pub fn parse_candidate(text: &str) -> std::result::Result<Vec<Point>, serde_json::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Form {
        Bare(Vec<Point>),
        Wrapped { candidate: Vec<Point> },
    }
    Ok(match serde_json::from_str::<Form>(text)? {
        Form::Bare(p) | Form::Wrapped { candidate: p } => p,
    })
}
