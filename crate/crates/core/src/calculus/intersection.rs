use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::polyhedron::{Halfspace, Polyhedron, TOL};

use super::qualif::max_common_slack;
use super::rules::{RuleDetail, RuleKind, RuleStatus};
use super::sets::set_compare;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectionReport {
    pub status: RuleStatus,
    /// `A ∩ int B ≠ ∅`.
    pub qualified: bool,
    /// `A ∩ B ≠ ∅` with strict rows honored.
    pub intersection_nonempty: bool,
}

/// `cl(A ∩ B) = cl A ∩ cl B` for sets given by strict and non-strict rows.
///
/// A nonempty set cut out by finitely many such rows has as closure the
/// system with every row made non-strict, so `cl(A ∩ B)` is that system
/// when `A ∩ B ≠ ∅` and empty otherwise. The two sides are compared with
/// [`set_compare`] (exact for H-represented sets).
pub fn check_intersection_closure(
    a: &Polyhedron,
    b: &Polyhedron,
    box_radius: f64,
    n_directions: usize,
    tol: f64,
) -> Result<IntersectionReport> {
    check_dim(a.dim(), b.dim())?;
    let d = a.dim();
    if !a.is_nonempty_strict() {
        return Err(Error::EmptyDomain("A is empty".into()));
    }
    if !b.is_nonempty_strict() {
        return Err(Error::EmptyDomain("B is empty".into()));
    }
    let joint = a.intersect(b)?;
    let nonempty = joint.is_nonempty_strict();
    let cl_of_intersection = if nonempty { joint.closure() } else { Polyhedron::empty(d) };
    let intersection_of_cl = a.closure().intersect(&b.closure())?;
    let rep = set_compare(&cl_of_intersection, &intersection_of_cl, box_radius, n_directions, tol)?;

    // A ∩ int B: strict rows of A and every row of B need positive slack.
    let rows: Vec<(&Halfspace, bool)> = a
        .halfspaces()
        .iter()
        .map(|h| (h, h.strict))
        .chain(b.halfspaces().iter().map(|h| (h, true)))
        .collect();
    let qualified = matches!(max_common_slack(d, &rows)?, Some(t) if t > TOL);

    let residual = rep.residual();
    Ok(IntersectionReport {
        status: RuleStatus {
            rule: RuleKind::IntersectionClosure,
            holds: residual <= tol,
            residual,
            tolerance: tol,
            detail: RuleDetail::Sets(rep),
        },
        qualified,
        intersection_nonempty: nonempty,
    })
}
