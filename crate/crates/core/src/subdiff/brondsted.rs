use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::funcrep::ConvexPolyhedralFunction;
use crate::linalg::{dist_inf, dot, norm1, sub};
use crate::lp::{Cmp, Lp, LpOutcome};

use super::eps::fenchel_gap;

/// Exact subgradient `zstar ∈ ∂f(z)` near an approximate one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BRWitness {
    pub z: Vec<f64>,
    pub zstar: Vec<f64>,
    /// `‖z − x‖₁`.
    pub norm_primal: f64,
    /// `‖zstar − xstar‖∞`.
    pub norm_dual: f64,
    /// `f(z) + f*(zstar) − ⟨zstar, z⟩`, zero for an exact subgradient.
    pub residual: f64,
}

/// Moves an `ε`-subgradient `xstar` at `x` to an exact subgradient at a
/// nearby point, with `‖z − x‖₁ ≤ √ε` and `‖zstar − xstar‖∞ ≤ √ε`.
///
/// `z` minimizes `f(y) − ⟨xstar, y⟩ + √ε‖y − x‖₁` (one LP over the
/// epigraph); `zstar` is the point of `∂f(z)` closest to `xstar` in the
/// max norm (a second LP over the active pieces and tight domain rows).
pub fn brondsted_rockafellar(
    f: &ConvexPolyhedralFunction,
    x: &[f64],
    xstar: &[f64],
    epsilon: f64,
) -> Result<BRWitness> {
    let d = f.dim();
    check_dim(d, x.len())?;
    check_dim(d, xstar.len())?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let gap = fenchel_gap(f, x, xstar)?;
    if gap.value() > epsilon * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::NotEpsSubgradient { gap: gap.value(), epsilon });
    }
    let root = epsilon.sqrt();

    let mut lp = Lp::new();
    let (y, t) = f.add_epigraph(&mut lp);
    lp.set_objective(t, 1.0);
    for (i, &s) in xstar.iter().enumerate() {
        lp.set_objective(y + i, -s);
    }
    for i in 0..d {
        let u = lp.var(root, 0.0, f64::INFINITY);
        lp.constraint(&[(u, 1.0), (y + i, -1.0)], Cmp::Ge, -x[i]);
        lp.constraint(&[(u, 1.0), (y + i, 1.0)], Cmp::Ge, x[i]);
    }
    let z = match lp.solve()? {
        LpOutcome::Optimal { x: sol, .. } => sol[y..y + d].to_vec(),
        LpOutcome::Unbounded => {
            return Err(Error::Unbounded("f − ⟨x*, ·⟩ has no affine minorant".into()))
        }
        LpOutcome::Infeasible => return Err(Error::Lp("epigraph program infeasible".into())),
    };

    let mut zstar = closest_subgradient(f, &z, xstar, 1e-9)?;
    if zstar.as_ref().map_or(true, |s| dist_inf(s, xstar) > root) {
        zstar = closest_subgradient(f, &z, xstar, 1e-7)?;
    }
    let zstar = zstar.ok_or_else(|| Error::Lp("no subgradient found at the minimizer".into()))?;
    let residual = fenchel_gap(f, &z, &zstar)?.value();
    Ok(BRWitness {
        norm_primal: norm1(&sub(&z, x)),
        norm_dual: dist_inf(&zstar, xstar),
        z,
        zstar,
        residual,
    })
}

/// `argmin {‖s − target‖∞ : s ∈ ∂f(z)}` with `∂f(z)` written as
/// `conv{a_i : i active} + cone{c_j : j tight}`.
pub fn closest_subgradient(
    f: &ConvexPolyhedralFunction,
    z: &[f64],
    target: &[f64],
    tol: f64,
) -> Result<Option<Vec<f64>>> {
    let d = f.dim();
    let (active, tight) = f.active_sets(z, tol);
    if active.is_empty() {
        return Ok(None);
    }
    let mut lp = Lp::new();
    let w = lp.var(1.0, 0.0, f64::INFINITY);
    let lam: Vec<usize> = active.iter().map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect();
    let mu: Vec<usize> = tight.iter().map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect();
    let sum: Vec<(usize, f64)> = lam.iter().map(|&l| (l, 1.0)).collect();
    lp.constraint(&sum, Cmp::Eq, 1.0);
    for k in 0..d {
        // s_k = Σ λ_i a_ik + Σ μ_j c_jk, and |s_k − target_k| ≤ w.
        let mut terms: Vec<(usize, f64)> = Vec::new();
        for (&i, &l) in active.iter().zip(&lam) {
            terms.push((l, f.pieces()[i].slope[k]));
        }
        for (&j, &m) in tight.iter().zip(&mu) {
            terms.push((m, f.domain().halfspaces()[j].normal[k]));
        }
        let mut upper = terms.clone();
        upper.push((w, -1.0));
        lp.constraint(&upper, Cmp::Le, target[k]);
        let mut lower = terms;
        lower.push((w, 1.0));
        lp.constraint(&lower, Cmp::Ge, target[k]);
    }
    let sol = match lp.solve()? {
        LpOutcome::Optimal { x, .. } => x,
        _ => return Ok(None),
    };
    let mut s = vec![0.0; d];
    for (&i, &l) in active.iter().zip(&lam) {
        for k in 0..d {
            s[k] += sol[l] * f.pieces()[i].slope[k];
        }
    }
    for (&j, &m) in tight.iter().zip(&mu) {
        for k in 0..d {
            s[k] += sol[m] * f.domain().halfspaces()[j].normal[k];
        }
    }
    Ok(Some(s))
}

/// Sanity check used by tests and reports: `xstar` is a subgradient at `z`
/// iff the Fenchel gap vanishes.
pub fn is_subgradient(f: &ConvexPolyhedralFunction, z: &[f64], s: &[f64], tol: f64) -> Result<bool> {
    let g = fenchel_gap(f, z, s)?;
    Ok(g.is_finite() && g.value() <= tol * (1.0 + dot(s, z).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::AffinePiece;
    use crate::polyhedron::Polyhedron;

    fn abs() -> ConvexPolyhedralFunction {
        ConvexPolyhedralFunction::new(
            vec![AffinePiece::new(vec![1.0], 0.0), AffinePiece::new(vec![-1.0], 0.0)],
            Polyhedron::whole_space(1),
        )
        .unwrap()
    }

    fn check(w: &BRWitness, eps: f64) {
        assert!(w.norm_primal <= eps.sqrt() + 1e-12);
        assert!(w.norm_dual <= eps.sqrt() + 1e-12);
        assert!(w.residual.abs() <= 1e-9);
    }

    #[test]
    fn abs_example() {
        let w = brondsted_rockafellar(&abs(), &[1.0], &[0.5], 0.5).unwrap();
        check(&w, 0.5);
        assert!(w.zstar[0] >= 0.5 - 1e-12 && w.zstar[0] <= 1.0 + 1e-12);
    }

    #[test]
    fn exact_subgradient_stays_put() {
        let w = brondsted_rockafellar(&abs(), &[1.0], &[1.0], 1e-8).unwrap();
        assert!((w.z[0] - 1.0).abs() < 1e-12 && (w.zstar[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_indicator_normal_cone() {
        let f = ConvexPolyhedralFunction::indicator(Polyhedron::from_box(&[-1.0], &[1.0]));
        let w = brondsted_rockafellar(&f, &[0.0], &[2.0], 2.0).unwrap();
        check(&w, 2.0);
        assert!((w.z[0] - 1.0).abs() < 1e-9);
        assert!(w.zstar[0] >= 0.0);
    }

    #[test]
    fn precondition() {
        assert!(matches!(
            brondsted_rockafellar(&abs(), &[1.0], &[-1.0], 0.5),
            Err(Error::NotEpsSubgradient { .. })
        ));
        assert!(is_subgradient(&abs(), &[0.0], &[0.3], 1e-9).unwrap());
    }
}
