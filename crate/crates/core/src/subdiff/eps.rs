use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::funcrep::{ConvexPolyhedralFunction, PolyhedralRep};
use crate::linalg::{dot, sub};
use crate::lp::{LpOutcome, Lp};
use crate::polyhedron::{Halfspace, Polyhedron};

/// `∂_ε f(x) = {s : f*(s) − ⟨s, x⟩ ≤ ε − f(x)}`, one row per piece of `f*`
/// plus the rows of `dom f*`. Empty (canonical) when `f(x) = +∞` or
/// `ε < 0`.
pub fn eps_subdiff_set<F: PolyhedralRep + ?Sized>(f: &F, x: &[f64], epsilon: f64) -> Result<Polyhedron> {
    check_dim(f.dim(), x.len())?;
    let d = f.dim();
    let fx = f.eval(x)?;
    if epsilon < 0.0 || !fx.is_finite() {
        return Ok(Polyhedron::empty(d));
    }
    let conj = f.conjugate()?;
    Ok(eps_subdiff_from_conjugate(&conj, x, fx.value(), epsilon))
}

/// Same set, given `f*` and `f(x)` already.
pub fn eps_subdiff_from_conjugate(
    conj: &ConvexPolyhedralFunction,
    x: &[f64],
    fx: f64,
    epsilon: f64,
) -> Polyhedron {
    let mut hs: Vec<Halfspace> = conj
        .pieces()
        .iter()
        .map(|p| Halfspace::new(sub(&p.slope, x), eps_offset(epsilon, fx, p.intercept)))
        .collect();
    hs.extend(conj.domain().halfspaces().iter().cloned());
    Polyhedron::new(conj.dim(), hs).expect("rows share the dual dimension")
}

/// `ε_f(x) = f(x) − f**(x)`: the smallest `ε` with `∂_ε f(x) ≠ ∅`.
///
/// `+∞` when `f` has no affine minorant. Gaps below `1e−9·(1 + |f(x)|)`
/// are reported as exactly zero.
pub fn eps_threshold<F: PolyhedralRep + ?Sized>(f: &F, x: &[f64]) -> Result<ExtReal> {
    check_dim(f.dim(), x.len())?;
    let fx = f
        .eval(x)?
        .as_finite()
        .ok_or_else(|| Error::Domain(format!("f is +inf at {x:?}")))?;
    let conj = f.conjugate()?;
    if conj.domain().is_empty() {
        return Ok(ExtReal::INFINITY);
    }
    let env = conj.conjugate()?;
    let env_x = env.eval(x)?;
    let gap = match env_x.as_finite() {
        Some(v) => snap_zero(fx - v, fx),
        None => return Err(Error::Domain(format!("{x:?} lies outside dom f**"))),
    };
    debug_assert!({
        let def = threshold_from_conjugate(&conj, x, fx)?;
        (def.value() - gap).abs() <= 1e-7 * (1.0 + fx.abs())
    });
    Ok(ExtReal::finite(gap))
}

/// The definition itself: `inf_s f(x) + f*(s) − ⟨s, x⟩`, solved as one LP
/// over `epi f*`.
pub fn eps_threshold_definitional<F: PolyhedralRep + ?Sized>(f: &F, x: &[f64]) -> Result<ExtReal> {
    check_dim(f.dim(), x.len())?;
    let fx = f
        .eval(x)?
        .as_finite()
        .ok_or_else(|| Error::Domain(format!("f is +inf at {x:?}")))?;
    threshold_from_conjugate(&f.conjugate()?, x, fx)
}

fn threshold_from_conjugate(conj: &ConvexPolyhedralFunction, x: &[f64], fx: f64) -> Result<ExtReal> {
    let mut lp = Lp::new();
    let (s, t) = conj.add_epigraph(&mut lp);
    lp.set_objective(t, 1.0);
    for (i, &xi) in x.iter().enumerate() {
        lp.set_objective(s + i, -xi);
    }
    match lp.solve()? {
        LpOutcome::Optimal { objective, .. } => Ok(ExtReal::finite(snap_zero(fx + objective, fx))),
        LpOutcome::Infeasible => Ok(ExtReal::INFINITY),
        LpOutcome::Unbounded => Err(Error::Domain(format!("{x:?} lies outside dom f**"))),
    }
}

/// `ε − f(x) − q`, snapped to zero when it is rounding noise. At `s = x`
/// the row reads `0 ≤ offset`, and a stray `−1e−16` would empty the set.
pub(crate) fn eps_offset(epsilon: f64, fx: f64, intercept: f64) -> f64 {
    snap_zero(epsilon - fx - intercept, fx.abs() + intercept.abs())
}

pub(crate) fn snap_zero(gap: f64, fx: f64) -> f64 {
    if gap.abs() <= 1e-9 * (1.0 + fx.abs()) {
        0.0
    } else {
        gap
    }
}

/// `f(x) + f*(s) − ⟨s, x⟩` with `f*(s)` from one LP; `+∞` off the domains.
pub fn fenchel_gap(f: &ConvexPolyhedralFunction, x: &[f64], s: &[f64]) -> Result<ExtReal> {
    let fx = f.eval(x)?;
    let cs = f.conjugate_value(s)?;
    Ok(fx + cs + (-dot(s, x)))
}
