//! Instance files: JSON with `"inf"`/`"-inf"` literals for extended reals.
//!
//! ```json
//! {
//!   "name": "touching-balls",
//!   "f": { "kind": "polyhedral", "pieces": [{ "slope": [0, 0], "intercept": 0 }],
//!          "domain": [{ "normal": [1, 1], "offset": 0 }] },
//!   "g": { "kind": "piecewise_min", "points": [[0, 0], [1, 0]] },
//!   "probes": [{ "point": [0, 0], "epsilon": 0.5 }],
//!   "params": { "splits": 32, "box_radius": 10 },
//!   "expected": { "equality": true }
//! }
//! ```
//!
//! Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};

use crate::calculus::{CheckParams, Probe};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::funcrep::{
    AffinePiece, ConvexPolyhedralFunction, Function, Grid, GridFunction, IndicatorSet,
    PiecewiseMinFunction,
};
use crate::polyhedron::{Halfspace, Polyhedron};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub name: String,
    pub f: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<ProbeSpec>,
    #[serde(default, skip_serializing_if = "ParamsSpec::is_empty")]
    pub params: ParamsSpec,
    /// Target (ε-)subgradient for `subdiff` and `witnesses`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xstar: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible: Option<FeasibleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Expected::is_empty")]
    pub expected: Expected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Polyhedral(PolyhedralSpec),
    /// Either explicit branches or the indicator of a finite point set.
    PiecewiseMin {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        branches: Option<Vec<PolyhedralSpec>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<Vec<f64>>>,
    },
    GridSamples { grid: Grid, values: Vec<ExtReal> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyhedralSpec {
    pub pieces: Vec<AffinePiece>,
    /// Halfspaces of the domain; omitted means the whole space.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub domain: Vec<Halfspace>,
    /// Needed only when neither pieces nor domain fix the dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub point: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl ParamsSpec {
    fn is_empty(&self) -> bool {
        *self == ParamsSpec::default()
    }

    /// `self` overridden field by field with `top`.
    pub fn merged(&self, top: &ParamsSpec) -> ParamsSpec {
        ParamsSpec {
            splits: top.splits.or(self.splits),
            box_radius: top.box_radius.or(self.box_radius),
            directions: top.directions.or(self.directions),
            tolerance: top.tolerance.or(self.tolerance),
        }
    }

    pub fn resolve(&self) -> Result<CheckParams> {
        let mut p = CheckParams::default();
        if let Some(s) = self.splits {
            p.splits = s;
        }
        if let Some(r) = self.box_radius {
            p.box_radius = r;
        }
        if let Some(d) = self.directions {
            p.directions = d;
        }
        if let Some(t) = self.tolerance {
            p.tolerance = t;
        }
        if p.splits == 0 || !(p.box_radius > 0.0) || !(p.tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "splits, box_radius and tolerance must be positive".into(),
            ));
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FeasibleSpec {
    Polyhedron(Vec<Halfspace>),
    Points(Vec<Vec<f64>>),
}

/// Expected verdicts; each one present is compared with the computed one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    /// Expected verdict of the envelope sum identity `co̅(f+g) = co̅f + co̅g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equality: Option<bool>,
    /// Unanimity of the four statements (implicitly `true`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_identity: Option<bool>,
}

impl Expected {
    fn is_empty(&self) -> bool {
        *self == Expected::default()
    }
}

/// Schema violation, with the position reported by the parser when known.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemaError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line > 0 {
            write!(f, "line {} column {}: {}", self.line, self.column, self.message)
        } else {
            write!(f, "{}", self.message)
        }
    }
}

fn field_error(message: impl Into<String>) -> SchemaError {
    SchemaError { line: 0, column: 0, message: message.into() }
}

impl Instance {
    /// Parses and validates; every structural problem is a [`SchemaError`].
    pub fn parse(text: &str) -> std::result::Result<Instance, SchemaError> {
        let inst: Instance = serde_json::from_str(text).map_err(|e| SchemaError {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances serialize")
    }

    fn validate(&self) -> std::result::Result<(), SchemaError> {
        let d = self.f.dim().map_err(|e| field_error(format!("f: {e}")))?;
        if !(1..=3).contains(&d) {
            return Err(field_error(format!("f: dimension {d} is outside 1..=3")));
        }
        if let Some(g) = &self.g {
            let dg = g.dim().map_err(|e| field_error(format!("g: {e}")))?;
            if dg != d {
                return Err(field_error(format!("g: dimension {dg} does not match f ({d})")));
            }
        }
        for (i, p) in self.probes.iter().enumerate() {
            if p.point.len() != d {
                return Err(field_error(format!("probes[{i}].point: expected {d} coordinates")));
            }
            if !(p.epsilon >= 0.0) || !p.epsilon.is_finite() {
                return Err(field_error(format!("probes[{i}].epsilon: must be finite and ≥ 0")));
            }
        }
        if let Some(x) = &self.xstar {
            if x.len() != d {
                return Err(field_error(format!("xstar: expected {d} coordinates")));
            }
        }
        match &self.feasible {
            Some(FeasibleSpec::Points(ps)) if ps.iter().any(|p| p.len() != d) => {
                return Err(field_error(format!("feasible.points: expected {d} coordinates")));
            }
            Some(FeasibleSpec::Polyhedron(hs)) if hs.iter().any(|h| h.normal.len() != d) => {
                return Err(field_error(format!("feasible.polyhedron: expected {d}-dimensional normals")));
            }
            _ => {}
        }
        for (label, grid) in [("dual_grid", &self.dual_grid), ("probe_grid", &self.probe_grid)] {
            if let Some(gr) = grid {
                gr.validate().map_err(|e| field_error(format!("{label}: {e}")))?;
                if gr.dim() != d {
                    return Err(field_error(format!("{label}: dimension {} does not match f ({d})", gr.dim())));
                }
            }
        }
        self.params.resolve().map_err(|e| field_error(format!("params: {e}")))?;
        self.f.build().map_err(|e| field_error(format!("f: {e}")))?;
        if let Some(g) = &self.g {
            g.build().map_err(|e| field_error(format!("g: {e}")))?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.f.dim().expect("validated")
    }

    pub fn probes(&self) -> Vec<Probe> {
        self.probes.iter().map(|p| Probe { point: p.point.clone(), epsilon: p.epsilon }).collect()
    }

    pub fn feasible_set(&self) -> Option<Result<IndicatorSet>> {
        let d = self.dim();
        self.feasible.as_ref().map(|f| match f {
            FeasibleSpec::Polyhedron(hs) => Polyhedron::new(d, hs.clone()).map(IndicatorSet::Polyhedron),
            FeasibleSpec::Points(ps) => Ok(IndicatorSet::Points(ps.clone())),
        })
    }
}

impl PolyhedralSpec {
    fn dim(&self) -> Result<usize> {
        self.dim
            .or_else(|| self.pieces.first().map(|p| p.slope.len()))
            .or_else(|| self.domain.first().map(|h| h.normal.len()))
            .ok_or_else(|| Error::InvalidArgument("cannot infer the dimension; set \"dim\"".into()))
    }

    fn build(&self) -> Result<ConvexPolyhedralFunction> {
        let d = self.dim()?;
        let domain = Polyhedron::new(d, self.domain.clone())?;
        ConvexPolyhedralFunction::new(self.pieces.clone(), domain)
    }
}

impl FunctionSpec {
    /// The file form of an already built function.
    pub fn from_function(f: &Function) -> FunctionSpec {
        fn spec(f: &ConvexPolyhedralFunction) -> PolyhedralSpec {
            PolyhedralSpec {
                pieces: f.pieces().to_vec(),
                domain: f.domain().halfspaces().to_vec(),
                dim: Some(f.dim()),
            }
        }
        match f {
            Function::Polyhedral(p) => FunctionSpec::Polyhedral(spec(p)),
            Function::PiecewiseMin(p) => FunctionSpec::PiecewiseMin {
                branches: Some(p.branches().iter().map(spec).collect()),
                points: None,
            },
            Function::Grid(g) => FunctionSpec::GridSamples { grid: g.grid().clone(), values: g.values().to_vec() },
        }
    }

    pub fn dim(&self) -> Result<usize> {
        match self {
            FunctionSpec::Polyhedral(p) => p.dim(),
            FunctionSpec::PiecewiseMin { branches: Some(bs), points: None } => bs
                .first()
                .ok_or_else(|| Error::InvalidArgument("at least one branch is required".into()))?
                .dim(),
            FunctionSpec::PiecewiseMin { branches: None, points: Some(ps) } => ps
                .first()
                .map(|p| p.len())
                .ok_or_else(|| Error::EmptyDomain("empty point set".into())),
            FunctionSpec::PiecewiseMin { .. } => Err(Error::InvalidArgument(
                "piecewise_min needs exactly one of \"branches\" or \"points\"".into(),
            )),
            FunctionSpec::GridSamples { grid, .. } => Ok(grid.dim()),
        }
    }

    pub fn build(&self) -> Result<Function> {
        Ok(match self {
            FunctionSpec::Polyhedral(p) => Function::Polyhedral(p.build()?),
            FunctionSpec::PiecewiseMin { branches: Some(bs), points: None } => {
                let branches = bs.iter().map(PolyhedralSpec::build).collect::<Result<Vec<_>>>()?;
                Function::PiecewiseMin(PiecewiseMinFunction::new(branches)?)
            }
            FunctionSpec::PiecewiseMin { branches: None, points: Some(ps) } => {
                Function::PiecewiseMin(PiecewiseMinFunction::point_indicator(ps)?)
            }
            FunctionSpec::PiecewiseMin { .. } => {
                return Err(Error::InvalidArgument(
                    "piecewise_min needs exactly one of \"branches\" or \"points\"".into(),
                ))
            }
            FunctionSpec::GridSamples { grid, values } => {
                Function::Grid(GridFunction::new(grid.clone(), values.clone())?)
            }
        })
    }
}
