use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::funcrep::ConvexPolyhedralFunction;
use crate::lp::{Cmp, Lp, LpOutcome};
use crate::subdiff::eps_subdiff_set;

use super::sets::{set_compare, SetCompareReport, SupportSet, UnionSet, VSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusReport {
    pub radius: f64,
    /// Active patterns realized somewhere in the ball.
    pub patterns: usize,
    /// `∪_{‖x−z‖∞ ≤ r} ∂f(x)` against `∂f(z)`.
    pub compare: SetCompareReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuterLimitReport {
    pub per_radius: Vec<RadiusReport>,
    /// The intersection over all radii (the union at the smallest radius,
    /// since the unions are nested) against `∂f(z)`.
    pub limit: SetCompareReport,
    pub equal: bool,
}

/// `∩_r cl ∪_{x ∈ z + rB∞} ∂f(x)` compared with `∂f(z)`.
///
/// For polyhedral `f`, `∂f(x) = conv{a_i : i ∈ I(x)} + cone{c_j : j ∈ J(x)}`
/// with `I`, `J` the active pieces and tight domain rows. By Carathéodory
/// the union over the ball is the union of `conv{a_i}_I + cone{c_j}_J` over
/// patterns with `|I| ≥ 1`, `|I| + |J| ≤ d + 1` that are simultaneously
/// active at some point of the ball; each pattern is one LP feasibility
/// test. `radii` must be decreasing.
pub fn outer_limit_subdiff(
    f: &ConvexPolyhedralFunction,
    z: &[f64],
    radii: &[f64],
    box_radius: f64,
    n_directions: usize,
    tol: f64,
) -> Result<OuterLimitReport> {
    let d = f.dim();
    check_dim(d, z.len())?;
    if !f.eval(z)?.is_finite() {
        return Err(Error::Domain(format!("{z:?} is not in dom f")));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("radii must be positive and decreasing".into()));
    }
    let at_z = eps_subdiff_set(f, z, 0.0)?;
    let mut per_radius = Vec::with_capacity(radii.len());
    let mut last = None;
    for &r in radii {
        let union = ball_union(f, z, r)?;
        let compare = set_compare(&union, &at_z, box_radius, n_directions, tol)?;
        per_radius.push(RadiusReport { radius: r, patterns: union.len(), compare: compare.clone() });
        last = Some(compare);
    }
    let limit = last.expect("radii is nonempty");
    let equal = limit.containment_ab && limit.containment_ba;
    Ok(OuterLimitReport { per_radius, limit, equal })
}

fn ball_union(f: &ConvexPolyhedralFunction, z: &[f64], r: f64) -> Result<UnionSet> {
    let d = f.dim();
    let m = f.pieces().len();
    let rows = f.domain().halfspaces().len();
    let mut parts: Vec<Box<dyn SupportSet>> = Vec::new();
    for pieces in subsets(m, 1, d + 1) {
        for tight in subsets(rows, 0, d + 1 - pieces.len()) {
            if pattern_feasible(f, z, r, &pieces, &tight)? {
                let points = pieces.iter().map(|&i| f.pieces()[i].slope.clone()).collect();
                let rays = tight.iter().map(|&j| f.domain().halfspaces()[j].normal.clone()).collect();
                parts.push(Box::new(VSet::new(d, points, rays)));
            }
        }
    }
    Ok(UnionSet::new(d, parts))
}

/// Is there `x` with `‖x − z‖∞ ≤ r`, `x ∈ dom f`, every piece in `pieces`
/// attaining the maximum and every row in `tight` holding with equality?
fn pattern_feasible(
    f: &ConvexPolyhedralFunction,
    z: &[f64],
    r: f64,
    pieces: &[usize],
    tight: &[usize],
) -> Result<bool> {
    let d = f.dim();
    let mut lp = Lp::new();
    for &zi in z {
        lp.var(0.0, zi - r, zi + r);
    }
    f.domain().add_rows(&mut lp, 0);
    for &j in tight {
        let h = &f.domain().halfspaces()[j];
        lp.dense(0, &h.normal, Cmp::Eq, h.offset);
    }
    let lead = &f.pieces()[pieces[0]];
    for &i in &pieces[1..] {
        let p = &f.pieces()[i];
        let diff: Vec<f64> = (0..d).map(|k| p.slope[k] - lead.slope[k]).collect();
        lp.dense(0, &diff, Cmp::Eq, lead.intercept - p.intercept);
    }
    for (k, q) in f.pieces().iter().enumerate() {
        if pieces.contains(&k) {
            continue;
        }
        // q(x) ≤ lead(x)
        let diff: Vec<f64> = (0..d).map(|i| q.slope[i] - lead.slope[i]).collect();
        lp.dense(0, &diff, Cmp::Le, lead.intercept - q.intercept);
    }
    Ok(matches!(lp.solve()?, LpOutcome::Optimal { .. }))
}

/// All index subsets of `0..n` with size in `lo..=hi`, in lexicographic
/// order.
fn subsets(n: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, lo: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() >= lo {
            out.push(cur.clone());
        }
        if cur.len() == hi {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, lo, hi, cur, out);
            cur.pop();
        }
    }
    rec(0, n, lo, hi, &mut cur, &mut out);
    out
}
