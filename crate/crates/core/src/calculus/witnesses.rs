use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::funcrep::{AffinePiece, ConvexPolyhedralFunction};
use crate::linalg::{dot, norm_inf, sub};
use crate::lp::{Cmp, Lp, LpOutcome};
use crate::polyhedron::{Halfspace, Polyhedron};
use crate::subdiff::{brondsted_rockafellar, fenchel_gap};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessRow {
    pub n: usize,
    pub eps_n: f64,
    pub x_n: Vec<f64>,
    pub y_n: Vec<f64>,
    pub xstar_n: Vec<f64>,
    pub ystar_n: Vec<f64>,
    /// `‖x_n* + y_n* − x*‖∞`.
    pub dual_residual: f64,
    /// `⟨x_n*, x_n − x⟩`.
    pub pairing_f: f64,
    /// `⟨y_n*, y_n − x⟩`.
    pub pairing_g: f64,
    /// `f(x_n) − f(x)`.
    pub value_gap_f: f64,
    /// `g(y_n) − g(x)`.
    pub value_gap_g: f64,
    /// `ε_n² + ε_n(2 + ε_n² + ‖x*‖∞)`.
    pub bound: f64,
    /// `‖r_n‖∞` from the split `x* = u_n* + v_n* + r_n`.
    pub split_residual: f64,
}

impl WitnessRow {
    /// Largest of the five quantities that must tend to zero.
    pub fn max_column(&self) -> f64 {
        [self.dual_residual, self.pairing_f, self.pairing_g, self.value_gap_f, self.value_gap_g]
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn within_bound(&self) -> bool {
        self.dual_residual <= self.bound * (1.0 + 1e-9) + 1e-12
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessTable {
    pub rows: Vec<WitnessRow>,
}

/// `φ(y, z) = f(y) + g(z)` on `R^d × R^d`.
pub fn product_function(
    f: &ConvexPolyhedralFunction,
    g: &ConvexPolyhedralFunction,
) -> Result<ConvexPolyhedralFunction> {
    let d = f.dim();
    check_dim(d, g.dim())?;
    let mut pieces = Vec::with_capacity(f.pieces().len() * g.pieces().len());
    for p in f.pieces() {
        for q in g.pieces() {
            let mut slope = p.slope.clone();
            slope.extend_from_slice(&q.slope);
            pieces.push(AffinePiece::new(slope, p.intercept + q.intercept));
        }
    }
    let mut rows = Vec::new();
    for h in f.domain().halfspaces() {
        let mut n = h.normal.clone();
        n.resize(2 * d, 0.0);
        rows.push(Halfspace::new(n, h.offset));
    }
    for h in g.domain().halfspaces() {
        let mut n = vec![0.0; d];
        n.extend_from_slice(&h.normal);
        rows.push(Halfspace::new(n, h.offset));
    }
    ConvexPolyhedralFunction::new(pieces, Polyhedron::new(2 * d, rows)?)
}

/// Adds `s ∈ ∂_e f(x)` through the pieces and domain of `f*`, with the
/// budget as variable `e`.
fn constrain_eps_subgradient(lp: &mut Lp, conj: &ConvexPolyhedralFunction, x: &[f64], fx: f64, s: usize, e: usize) {
    for p in conj.pieces() {
        let mut terms: Vec<(usize, f64)> =
            (0..x.len()).map(|k| (s + k, p.slope[k] - x[k])).collect();
        terms.push((e, -1.0));
        lp.constraint(&terms, Cmp::Le, -fx - p.intercept);
    }
    conj.domain().add_rows(lp, s);
}

/// Splits `x* = u + v + r` with `u ∈ ∂_e f(x)`, `v ∈ ∂_e g(x)` and minimal
/// `‖r‖∞`; among the minimal splits, prefers the smallest budget use.
fn split(
    conj_f: &ConvexPolyhedralFunction,
    conj_g: &ConvexPolyhedralFunction,
    x: &[f64],
    fx: f64,
    gx: f64,
    xstar: &[f64],
    budget: f64,
) -> Result<Option<(Vec<f64>, Vec<f64>, f64)>> {
    let d = x.len();
    let build = |w_cap: Option<f64>| -> (Lp, usize, usize, usize, usize, usize) {
        let mut lp = Lp::new();
        let u = lp.free_vars(d);
        let v = lp.free_vars(d);
        let e1 = lp.var(0.0, 0.0, budget);
        let e2 = lp.var(0.0, 0.0, budget);
        let w = lp.var(0.0, 0.0, w_cap.unwrap_or(f64::INFINITY));
        constrain_eps_subgradient(&mut lp, conj_f, x, fx, u, e1);
        constrain_eps_subgradient(&mut lp, conj_g, x, gx, v, e2);
        for k in 0..d {
            // |x*_k − u_k − v_k| ≤ w
            lp.constraint(&[(u + k, 1.0), (v + k, 1.0), (w, 1.0)], Cmp::Ge, xstar[k]);
            lp.constraint(&[(u + k, 1.0), (v + k, 1.0), (w, -1.0)], Cmp::Le, xstar[k]);
        }
        (lp, u, v, e1, e2, w)
    };
    let (mut lp, _, _, _, _, w) = build(None);
    lp.set_objective(w, 1.0);
    let wmin = match lp.solve()? {
        LpOutcome::Optimal { objective, .. } => objective,
        _ => return Ok(None),
    };
    let (mut lp, u, v, e1, e2, w) = build(Some(wmin + 1e-12 * (1.0 + norm_inf(xstar))));
    lp.set_objective(e1, 1.0);
    lp.set_objective(e2, 1.0);
    match lp.solve()? {
        LpOutcome::Optimal { x: sol, .. } => {
            Ok(Some((sol[u..u + d].to_vec(), sol[v..v + d].to_vec(), sol[w])))
        }
        _ => Ok(None),
    }
}

/// Witness sequences for `x* ∈ ∂(f+g)(x)`: for `ε_n = 2^{-n}`, split `x*`
/// into `ε_n²/2`-subgradients of `f` and `g` at `x` up to `‖r_n‖∞ ≤ ε_n²`,
/// then apply the Brøndsted–Rockafellar step with `ε_n²` to
/// `φ(y, z) = f(y) + g(z)` in the product space.
pub fn sequential_witnesses(
    f: &ConvexPolyhedralFunction,
    g: &ConvexPolyhedralFunction,
    x: &[f64],
    xstar: &[f64],
    n_max: usize,
) -> Result<WitnessTable> {
    let d = f.dim();
    check_dim(d, g.dim())?;
    check_dim(d, x.len())?;
    check_dim(d, xstar.len())?;
    let fx = f.eval(x)?.as_finite().ok_or_else(|| Error::Domain(format!("f is +inf at {x:?}")))?;
    let gx = g.eval(x)?.as_finite().ok_or_else(|| Error::Domain(format!("g is +inf at {x:?}")))?;
    let sum = f.add(g)?;
    let gap = fenchel_gap(&sum, x, xstar)?;
    if gap.value() > 1e-9 * (1.0 + norm_inf(xstar)) {
        return Err(Error::NotEpsSubgradient { gap: gap.value(), epsilon: 0.0 });
    }
    let conj_f = f.conjugate()?;
    let conj_g = g.conjugate()?;
    let phi = product_function(f, g)?;
    let mut xx = x.to_vec();
    xx.extend_from_slice(x);
    let xstar_norm = norm_inf(xstar);

    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let eps_n = 0.5f64.powi(n as i32);
        let e2 = eps_n * eps_n;
        let (u, v, r) = split(&conj_f, &conj_g, x, fx, gx, xstar, e2 / 2.0)?.ok_or_else(|| {
            Error::Scope(format!("n = {n}: no split of x* into eps-subgradients"))
        })?;
        if r > e2 {
            return Err(Error::Scope(format!(
                "n = {n}: split residual {r:e} exceeds eps_n^2 = {e2:e}"
            )));
        }
        let mut uv = u.clone();
        uv.extend_from_slice(&v);
        let w = brondsted_rockafellar(&phi, &xx, &uv, e2)?;
        let x_n = w.z[..d].to_vec();
        let y_n = w.z[d..].to_vec();
        let xs = w.zstar[..d].to_vec();
        let ys = w.zstar[d..].to_vec();
        let total: Vec<f64> = xs.iter().zip(&ys).map(|(a, b)| a + b).collect();
        rows.push(WitnessRow {
            n,
            eps_n,
            dual_residual: norm_inf(&sub(&total, xstar)),
            pairing_f: dot(&xs, &sub(&x_n, x)),
            pairing_g: dot(&ys, &sub(&y_n, x)),
            value_gap_f: f.eval(&x_n)?.value() - fx,
            value_gap_g: g.eval(&y_n)?.value() - gx,
            bound: e2 + eps_n * (2.0 + e2 + xstar_norm),
            split_residual: r,
            x_n,
            y_n,
            xstar_n: xs,
            ystar_n: ys,
        });
    }
    Ok(WitnessTable { rows })
}
