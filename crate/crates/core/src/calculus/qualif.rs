use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::funcrep::ConvexPolyhedralFunction;
use crate::lp::{Cmp, Lp, LpOutcome};
use crate::polyhedron::{Halfspace, Polyhedron, TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Qualification {
    /// One function is finite (hence continuous) on a neighborhood of a
    /// point in the other's domain.
    ContinuityPoint,
    /// The relative interiors of the domains intersect.
    RiOverlap,
    None,
}

/// Largest common slack `t ≤ 1` of the rows flagged `true`, with the other
/// rows imposed non-strictly; `None` if the system is infeasible.
pub(crate) fn max_common_slack(dim: usize, rows: &[(&Halfspace, bool)]) -> Result<Option<f64>> {
    let mut lp = Lp::new();
    let x = lp.free_vars(dim);
    let t = lp.var(-1.0, f64::NEG_INFINITY, 1.0);
    for (h, slack) in rows {
        let mut terms: Vec<(usize, f64)> = h.normal.iter().enumerate().map(|(i, &c)| (x + i, c)).collect();
        if *slack {
            terms.push((t, 1.0));
        }
        lp.constraint(&terms, Cmp::Le, h.offset);
    }
    Ok(match lp.solve()? {
        LpOutcome::Optimal { objective, .. } => Some(-objective),
        _ => None,
    })
}

fn interior_meets(a: &Polyhedron, b: &Polyhedron) -> Result<bool> {
    let rows: Vec<(&Halfspace, bool)> = a
        .halfspaces()
        .iter()
        .map(|h| (h, true))
        .chain(b.halfspaces().iter().map(|h| (h, false)))
        .collect();
    Ok(matches!(max_common_slack(a.dim(), &rows)?, Some(t) if t > TOL))
}

/// Which qualification condition, if any, the domains of a convex pair
/// satisfy; decided by slack-maximizing LPs.
pub fn qualification_check(
    f: &ConvexPolyhedralFunction,
    g: &ConvexPolyhedralFunction,
) -> Result<Qualification> {
    check_dim(f.dim(), g.dim())?;
    let (a, b) = (f.domain(), g.domain());
    if a.is_empty() || b.is_empty() {
        return Ok(Qualification::None);
    }
    if interior_meets(a, b)? || interior_meets(b, a)? {
        return Ok(Qualification::ContinuityPoint);
    }
    let ea = a.implicit_equalities();
    let eb = b.implicit_equalities();
    // Implicit equalities hold with equality on their own domain, so they
    // are imposed in both directions; every other row gets the slack.
    let mut reversed = Vec::new();
    let mut rows: Vec<(&Halfspace, bool)> = Vec::new();
    for (h, &eq) in a.halfspaces().iter().zip(&ea).chain(b.halfspaces().iter().zip(&eb)) {
        rows.push((h, !eq));
        if eq {
            reversed.push(Halfspace {
                normal: h.normal.iter().map(|v| -v).collect(),
                offset: -h.offset,
                strict: false,
            });
        }
    }
    rows.extend(reversed.iter().map(|h| (h, false)));
    Ok(match max_common_slack(f.dim(), &rows)? {
        Some(t) if t > TOL => Qualification::RiOverlap,
        _ => Qualification::None,
    })
}
