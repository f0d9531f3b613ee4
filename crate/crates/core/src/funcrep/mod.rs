//! Function representations and the transforms between them: conjugation,
//! convex envelope, lsc hull, inf-convolution, indicators and affine
//! minorants.

pub mod grid;
pub mod piecewise;
pub mod polyhedral;

pub use grid::{Grid, GridFunction, GridTransform, SlopeRangeWarning};
pub use piecewise::PiecewiseMinFunction;
pub use polyhedral::{AffinePiece, ConvexPolyhedralFunction};

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::polyhedron::Polyhedron;

/// Any of the three representations.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Function {
    Polyhedral(ConvexPolyhedralFunction),
    PiecewiseMin(PiecewiseMinFunction),
    Grid(GridFunction),
}

impl Function {
    pub fn dim(&self) -> usize {
        match self {
            Function::Polyhedral(f) => f.dim(),
            Function::PiecewiseMin(f) => f.dim(),
            Function::Grid(f) => f.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        match self {
            Function::Polyhedral(f) => f.eval(x),
            Function::PiecewiseMin(f) => f.eval(x),
            Function::Grid(f) => f.eval(x),
        }
    }

    /// Exact polyhedral form, when the representation has one.
    pub fn as_piecewise(&self) -> Option<PiecewiseMinFunction> {
        match self {
            Function::Polyhedral(f) => Some(f.clone().into()),
            Function::PiecewiseMin(f) => Some(f.clone()),
            Function::Grid(_) => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Function::Polyhedral(_) => "polyhedral",
            Function::PiecewiseMin(_) => "piecewise_min",
            Function::Grid(_) => "grid_samples",
        }
    }
}

/// Representations with an exact polyhedral conjugate.
pub trait PolyhedralRep: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<ExtReal>;
    fn conjugate(&self) -> Result<ConvexPolyhedralFunction>;
}

impl PolyhedralRep for ConvexPolyhedralFunction {
    fn dim(&self) -> usize {
        ConvexPolyhedralFunction::dim(self)
    }

    fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        ConvexPolyhedralFunction::eval(self, x)
    }

    fn conjugate(&self) -> Result<ConvexPolyhedralFunction> {
        ConvexPolyhedralFunction::conjugate(self)
    }
}

impl PolyhedralRep for PiecewiseMinFunction {
    fn dim(&self) -> usize {
        PiecewiseMinFunction::dim(self)
    }

    fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        PiecewiseMinFunction::eval(self, x)
    }

    fn conjugate(&self) -> Result<ConvexPolyhedralFunction> {
        PiecewiseMinFunction::conjugate(self)
    }
}

/// Source set for [`build_indicator`].
#[derive(Clone, Debug, PartialEq)]
pub enum IndicatorSet {
    Polyhedron(Polyhedron),
    Points(Vec<Vec<f64>>),
}

/// `I_A`: a polyhedral indicator for a polyhedron, a piecewise minimum of
/// singleton indicators for a finite point set.
pub fn build_indicator(set: &IndicatorSet) -> Result<Function> {
    match set {
        IndicatorSet::Polyhedron(p) => {
            if p.is_empty() {
                return Err(Error::EmptyDomain("indicator of an empty polyhedron".into()));
            }
            Ok(Function::Polyhedral(ConvexPolyhedralFunction::indicator(p.clone())))
        }
        IndicatorSet::Points(points) => {
            if let Some(first) = points.first() {
                for p in points {
                    check_dim(first.len(), p.len())?;
                }
            }
            Ok(Function::PiecewiseMin(PiecewiseMinFunction::point_indicator(points)?))
        }
    }
}

/// Closed hull of `f□g` for polyhedral inputs, as `(f* + g*)*`.
pub fn inf_convolution_polyhedral(
    f: &ConvexPolyhedralFunction,
    g: &ConvexPolyhedralFunction,
) -> Result<ConvexPolyhedralFunction> {
    check_dim(f.dim(), g.dim())?;
    let sum = f.conjugate()?.add(&g.conjugate()?)?;
    if sum.domain().is_empty() {
        return Err(Error::ImproperFunction(
            "f* + g* is identically +inf, so the inf-convolution is -inf".into(),
        ));
    }
    let out = sum.conjugate()?;
    if out.domain().is_empty() {
        return Err(Error::ImproperFunction("inf-convolution has an empty domain".into()));
    }
    Ok(out)
}

/// `min_i f_i □ min_j g_j = min_{ij} f_i □ g_j`, each pair by
/// [`inf_convolution_polyhedral`] (closed hull per pair).
pub fn inf_convolution_piecewise(
    f: &PiecewiseMinFunction,
    g: &PiecewiseMinFunction,
) -> Result<PiecewiseMinFunction> {
    check_dim(f.dim(), g.dim())?;
    let mut branches = Vec::new();
    for a in f.branches().iter().filter(|b| b.is_proper()) {
        for b in g.branches().iter().filter(|b| b.is_proper()) {
            branches.push(inf_convolution_polyhedral(a, b)?);
        }
    }
    if branches.is_empty() {
        return Err(Error::ImproperFunction("no proper branch pair".into()));
    }
    PiecewiseMinFunction::new(branches)
}
