//! Convex relaxation of `min f(x) s.t. x ∈ F`: the optimal value equals the
//! minimum of `co̅(f + I_F)`, and the relaxation splits as `co̅f + I_{co̅F}`
//! only under extra conditions.

use serde::Serialize;

use crate::calculus::{check_regularization_equality, CheckParams, SumContext};
use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::funcrep::{
    build_indicator, Function, Grid, GridFunction, IndicatorSet, PiecewiseMinFunction,
};
use crate::polyhedron::TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct MinProblem {
    pub name: String,
    pub objective: Function,
    pub feasible: IndicatorSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxationReport {
    pub name: String,
    /// `inf {f(x) : x ∈ F}`.
    pub v_original: ExtReal,
    /// `inf co̅(f + I_F)`.
    pub v_relaxed: ExtReal,
    /// `co̅(f + I_F) = co̅f + I_{co̅F}`.
    pub decomposition_holds: bool,
    #[serde(serialize_with = "crate::ext_real::serialize_f64")]
    pub decomposition_residual: f64,
    /// Why the decomposition could not be formed, when it could not.
    pub decomposition_note: Option<String>,
    /// `v_original − v_relaxed`.
    #[serde(serialize_with = "crate::ext_real::serialize_f64")]
    pub gap: f64,
    pub value_identity: bool,
    pub tolerance: f64,
}

/// Solves the problem and its convex relaxation and checks the
/// decomposition.
///
/// Polyhedral objectives are handled exactly: one LP per branch for the
/// original value, one LP over the envelope for the relaxed value, and
/// mutual epigraph domination (plus a gap sweep over `probe_grid`) for the
/// decomposition. Grid objectives use the grid envelope through `dual`
/// (a default symmetric dual grid is built when `None`), and compare on the
/// objective's own nodes with tolerance `h·L`.
pub fn relax_and_compare(
    p: &MinProblem,
    probe_grid: &Grid,
    dual: Option<&Grid>,
    params: &CheckParams,
) -> Result<RelaxationReport> {
    match &p.objective {
        Function::Grid(f) => relax_grid(p, f, dual),
        other => {
            let f = other.as_piecewise().expect("polyhedral representations");
            relax_polyhedral(p, &f, probe_grid, params)
        }
    }
}

fn relax_polyhedral(
    p: &MinProblem,
    f: &PiecewiseMinFunction,
    probe_grid: &Grid,
    params: &CheckParams,
) -> Result<RelaxationReport> {
    let ind = build_indicator(&p.feasible)?
        .as_piecewise()
        .expect("indicators are polyhedral");
    check_dim(f.dim(), ind.dim())?;
    let h = f
        .add(&ind)
        .map_err(|_| Error::EmptyDomain("no feasible point has a finite objective".into()))?;
    let mut v_original = ExtReal::INFINITY;
    for b in h.branches() {
        v_original = v_original.min(b.minimize()?.0);
    }
    let env = h.envelope()?;
    let v_relaxed = env.minimize()?.0;

    let (holds, residual, note) = match SumContext::new(f, &ind)
        .and_then(|ctx| check_regularization_equality(&ctx, probe_grid, params))
    {
        Ok(s) => (s.holds, s.residual, None),
        Err(e @ Error::Hypothesis { .. }) => (false, f64::INFINITY, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let tol = 1e-9 * (1.0 + v_original.value().abs().min(1e300));
    Ok(finish(p, v_original, v_relaxed, holds, residual, note, tol))
}

fn finish(
    p: &MinProblem,
    v_original: ExtReal,
    v_relaxed: ExtReal,
    decomposition_holds: bool,
    decomposition_residual: f64,
    decomposition_note: Option<String>,
    tolerance: f64,
) -> RelaxationReport {
    let gap = if v_original == v_relaxed { 0.0 } else { v_original.value() - v_relaxed.value() };
    RelaxationReport {
        name: p.name.clone(),
        v_original,
        v_relaxed,
        decomposition_holds,
        decomposition_residual,
        decomposition_note,
        gap,
        value_identity: gap.abs() <= tolerance,
        tolerance,
    }
}

/// Largest finite difference between axis neighbors, divided by spacing.
fn grid_lipschitz(f: &GridFunction) -> f64 {
    let g = f.grid();
    let mut l: f64 = 0.0;
    for i in 0..g.len() {
        let idx = g.multi(i);
        for axis in 0..g.dim() {
            if idx[axis] + 1 < g.nodes[axis] {
                let mut j = idx.clone();
                j[axis] += 1;
                let (a, b) = (f.values()[i], f.values()[g.flat(&j)]);
                if a.is_finite() && b.is_finite() {
                    l = l.max((b.value() - a.value()).abs() / g.spacing(axis));
                }
            }
        }
    }
    l
}

/// Symmetric dual grid with an odd node count (so `0` is a node) covering
/// the slopes of `f`.
pub fn default_dual_grid(f: &GridFunction) -> Result<Grid> {
    let g = f.grid();
    let reach = 2.0 * grid_lipschitz(f) + 1.0;
    let nodes: Vec<usize> = g.nodes.iter().map(|n| 2 * n + 1).collect();
    Grid::new(vec![-reach; g.dim()], vec![reach; g.dim()], nodes)
}

fn relax_grid(p: &MinProblem, f: &GridFunction, dual: Option<&Grid>) -> Result<RelaxationReport> {
    let g = f.grid();
    let d = g.dim();
    let on_nodes: Vec<bool> = match &p.feasible {
        IndicatorSet::Polyhedron(poly) => {
            check_dim(d, poly.dim())?;
            (0..g.len()).map(|i| poly.contains(&g.point(i), TOL)).collect()
        }
        IndicatorSet::Points(points) => {
            let mut mask = vec![false; g.len()];
            for q in points {
                check_dim(d, q.len())?;
                let i = (0..g.len())
                    .find(|&i| crate::linalg::dist_inf(&g.point(i), q) <= 1e-9)
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("feasible point {q:?} is not a grid node"))
                    })?;
                mask[i] = true;
            }
            mask
        }
    };
    let restricted: Vec<ExtReal> = f
        .values()
        .iter()
        .zip(&on_nodes)
        .map(|(v, &inside)| if inside { *v } else { ExtReal::INFINITY })
        .collect();
    let h = GridFunction::new(g.clone(), restricted)?;
    if !h.is_proper() {
        return Err(Error::EmptyDomain("no feasible node has a finite objective".into()));
    }
    let v_original = h.min_value();
    let dual = match dual {
        Some(dg) => dg.clone(),
        None => default_dual_grid(f)?,
    };
    let env_h = h.envelope(&dual)?.function;
    let v_relaxed = env_h.min_value();

    // co̅F on the nodes: the closed convex hull of the feasible nodes, by
    // LP membership.
    let hull_points: Vec<Vec<f64>> =
        (0..g.len()).filter(|&i| on_nodes[i]).map(|i| g.point(i)).collect();
    let hull = crate::calculus::VSet::new(d, hull_points, Vec::new());
    let env_f = f.envelope(&dual)?.function;
    let tol = g.max_spacing() * grid_lipschitz(f).max(1.0) * 2.0;
    let mut residual: f64 = 0.0;
    for i in 0..g.len() {
        let in_hull = crate::calculus::SupportSet::distance_inf(&hull, &g.point(i))? <= 1e-9;
        let rhs = if in_hull { env_f.values()[i] } else { ExtReal::INFINITY };
        residual = residual.max(env_h.values()[i].gap(rhs));
    }
    Ok(finish(p, v_original, v_relaxed, residual <= tol, residual, None, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::{AffinePiece, ConvexPolyhedralFunction};
    use crate::polyhedron::Polyhedron;

    fn probe() -> Grid {
        Grid::uniform(1, -10.0, 10.0, 81).unwrap()
    }

    #[test]
    fn convex_quadratic_on_interval() {
        let g = Grid::uniform(1, -2.0, 2.0, 41).unwrap();
        let f = GridFunction::from_fn(g, |x| ExtReal::finite(x[0] * x[0])).unwrap();
        let p = MinProblem {
            name: "quadratic".into(),
            objective: Function::Grid(f),
            feasible: IndicatorSet::Polyhedron(Polyhedron::from_box(&[-1.0], &[1.0])),
        };
        let r = relax_and_compare(&p, &probe(), None, &CheckParams::default()).unwrap();
        assert_eq!(r.v_original, ExtReal::ZERO);
        assert!(r.value_identity && r.decomposition_holds, "{r:?}");
    }

    #[test]
    fn concave_tent_on_three_points() {
        let dom = Polyhedron::from_box(&[-2.0], &[2.0]);
        let f = PiecewiseMinFunction::new(vec![
            ConvexPolyhedralFunction::new(vec![AffinePiece::new(vec![1.0], 0.0)], dom.clone()).unwrap(),
            ConvexPolyhedralFunction::new(vec![AffinePiece::new(vec![-1.0], 0.0)], dom).unwrap(),
        ])
        .unwrap();
        let p = MinProblem {
            name: "tent".into(),
            objective: Function::PiecewiseMin(f),
            feasible: IndicatorSet::Points(vec![vec![-1.0], vec![0.0], vec![1.0]]),
        };
        let r = relax_and_compare(&p, &probe(), None, &CheckParams::default()).unwrap();
        assert!((r.v_original.value() + 1.0).abs() < 1e-12);
        assert!(r.value_identity && !r.decomposition_holds);
    }

    #[test]
    fn decomposition_fails_but_values_agree() {
        let f = PiecewiseMinFunction::point_indicator(&[vec![0.0], vec![1.0]]).unwrap();
        let p = MinProblem {
            name: "points".into(),
            objective: Function::PiecewiseMin(f),
            feasible: IndicatorSet::Points(vec![vec![0.0], vec![2.0]]),
        };
        let r = relax_and_compare(&p, &probe(), None, &CheckParams::default()).unwrap();
        assert_eq!(r.v_original, ExtReal::ZERO);
        assert!(r.value_identity && !r.decomposition_holds);
    }
}
