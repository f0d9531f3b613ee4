use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::ext_real::ExtReal;
use crate::lp::{Cmp, Lp, LpOutcome};
use crate::polyhedron::{Halfspace, Polyhedron};

/// A closed convex set (or a finite union of them) known through its
/// support function on boxes.
pub trait SupportSet: Sync {
    fn dim(&self) -> usize;

    /// `sup {⟨u, s⟩ : s ∈ S, ‖s‖∞ ≤ r}`, `−∞` when that is empty.
    fn support_in_box(&self, u: &[f64], r: f64) -> Result<ExtReal>;

    /// `min {‖s − p‖∞ : s ∈ S}`, `+∞` for the empty set.
    fn distance_inf(&self, p: &[f64]) -> Result<f64>;

    /// H-representation, when the set is a single polyhedron given that way.
    fn halfspaces(&self) -> Option<&[Halfspace]> {
        None
    }

    /// Vertices of `S ∩ [−r, r]^d`, when cheaply available.
    fn box_vertices(&self, _r: f64) -> Option<Vec<Vec<f64>>> {
        None
    }
}

impl SupportSet for Polyhedron {
    fn dim(&self) -> usize {
        Polyhedron::dim(self)
    }

    fn support_in_box(&self, u: &[f64], r: f64) -> Result<ExtReal> {
        check_dim(self.dim(), u.len())?;
        Ok(Polyhedron::support_in_box(self, u, r))
    }

    fn distance_inf(&self, p: &[f64]) -> Result<f64> {
        check_dim(self.dim(), p.len())?;
        if self.is_canonical_empty() {
            return Ok(f64::INFINITY);
        }
        let mut lp = Lp::new();
        let s = lp.free_vars(self.dim());
        self.add_rows(&mut lp, s);
        distance_lp(lp, s, p)
    }

    fn halfspaces(&self) -> Option<&[Halfspace]> {
        Some(Polyhedron::halfspaces(self))
    }

    fn box_vertices(&self, r: f64) -> Option<Vec<Vec<f64>>> {
        let d = self.dim();
        let boxed = self.intersect(&Polyhedron::from_box(&vec![-r; d], &vec![r; d])).ok()?;
        if boxed.is_empty() {
            return Some(Vec::new());
        }
        Some(boxed.vrep().vertices.clone())
    }
}

/// `min w` with `|s_k − p_k| ≤ w`, given an LP whose variables `s..s+d`
/// already describe the set.
fn distance_lp(mut lp: Lp, s: usize, p: &[f64]) -> Result<f64> {
    let w = lp.var(1.0, 0.0, f64::INFINITY);
    for (k, &pk) in p.iter().enumerate() {
        lp.constraint(&[(s + k, 1.0), (w, -1.0)], Cmp::Le, pk);
        lp.constraint(&[(s + k, 1.0), (w, 1.0)], Cmp::Ge, pk);
    }
    Ok(match lp.solve()? {
        LpOutcome::Optimal { objective, .. } => objective,
        _ => f64::INFINITY,
    })
}

/// Projection onto the first `dim` coordinates of a polyhedron in a
/// larger space; closed because projections of polyhedra are polyhedra.
#[derive(Clone, Debug)]
pub struct LiftedSet {
    dim: usize,
    lifted: Polyhedron,
}

impl LiftedSet {
    pub fn new(dim: usize, lifted: Polyhedron) -> LiftedSet {
        assert!(lifted.dim() >= dim);
        LiftedSet { dim, lifted }
    }

    pub fn lifted(&self) -> &Polyhedron {
        &self.lifted
    }
}

impl SupportSet for LiftedSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support_in_box(&self, u: &[f64], r: f64) -> Result<ExtReal> {
        check_dim(self.dim, u.len())?;
        if self.lifted.is_canonical_empty() {
            return Ok(ExtReal::NEG_INFINITY);
        }
        let mut lp = Lp::new();
        for &ui in u {
            lp.var(-ui, -r, r);
        }
        let extra = self.lifted.dim() - self.dim;
        if extra > 0 {
            lp.free_vars(extra);
        }
        self.lifted.add_rows(&mut lp, 0);
        Ok(match lp.solve()? {
            LpOutcome::Optimal { objective, .. } => ExtReal::finite(-objective),
            LpOutcome::Unbounded => ExtReal::INFINITY,
            LpOutcome::Infeasible => ExtReal::NEG_INFINITY,
        })
    }

    fn distance_inf(&self, p: &[f64]) -> Result<f64> {
        check_dim(self.dim, p.len())?;
        if self.lifted.is_canonical_empty() {
            return Ok(f64::INFINITY);
        }
        let mut lp = Lp::new();
        let s = lp.free_vars(self.lifted.dim());
        self.lifted.add_rows(&mut lp, s);
        distance_lp(lp, s, p)
    }
}

/// `conv(points) + cone(rays)`; empty when there are no points.
#[derive(Clone, Debug, PartialEq)]
pub struct VSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    rays: Vec<Vec<f64>>,
}

impl VSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, rays: Vec<Vec<f64>>) -> VSet {
        VSet { dim, points, rays }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn rays(&self) -> &[Vec<f64>] {
        &self.rays
    }

    /// Variables `s` (first `dim`), then the λ and μ weights.
    fn program(&self) -> (Lp, usize) {
        let mut lp = Lp::new();
        let s = lp.free_vars(self.dim);
        let lam: Vec<usize> = self.points.iter().map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect();
        let mu: Vec<usize> = self.rays.iter().map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect();
        let sum: Vec<(usize, f64)> = lam.iter().map(|&l| (l, 1.0)).collect();
        lp.constraint(&sum, Cmp::Eq, 1.0);
        for k in 0..self.dim {
            let mut terms = vec![(s + k, -1.0)];
            terms.extend(lam.iter().zip(&self.points).map(|(&l, p)| (l, p[k])));
            terms.extend(mu.iter().zip(&self.rays).map(|(&m, r)| (m, r[k])));
            lp.constraint(&terms, Cmp::Eq, 0.0);
        }
        (lp, s)
    }
}

impl SupportSet for VSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support_in_box(&self, u: &[f64], r: f64) -> Result<ExtReal> {
        check_dim(self.dim, u.len())?;
        if self.points.is_empty() {
            return Ok(ExtReal::NEG_INFINITY);
        }
        let (mut lp, s) = self.program();
        for (k, &uk) in u.iter().enumerate() {
            lp.set_objective(s + k, -uk);
            lp.constraint(&[(s + k, 1.0)], Cmp::Le, r);
            lp.constraint(&[(s + k, 1.0)], Cmp::Ge, -r);
        }
        Ok(match lp.solve()? {
            LpOutcome::Optimal { objective, .. } => ExtReal::finite(-objective),
            LpOutcome::Unbounded => ExtReal::INFINITY,
            LpOutcome::Infeasible => ExtReal::NEG_INFINITY,
        })
    }

    fn distance_inf(&self, p: &[f64]) -> Result<f64> {
        check_dim(self.dim, p.len())?;
        if self.points.is_empty() {
            return Ok(f64::INFINITY);
        }
        let (lp, s) = self.program();
        distance_lp(lp, s, p)
    }
}

/// Finite union; its support function is the pointwise maximum.
pub struct UnionSet {
    dim: usize,
    parts: Vec<Box<dyn SupportSet>>,
}

impl UnionSet {
    pub fn new(dim: usize, parts: Vec<Box<dyn SupportSet>>) -> UnionSet {
        UnionSet { dim, parts }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

impl SupportSet for UnionSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support_in_box(&self, u: &[f64], r: f64) -> Result<ExtReal> {
        let mut best = ExtReal::NEG_INFINITY;
        for p in &self.parts {
            best = best.max(p.support_in_box(u, r)?);
        }
        Ok(best)
    }

    fn distance_inf(&self, p: &[f64]) -> Result<f64> {
        let mut best = f64::INFINITY;
        for part in &self.parts {
            best = best.min(part.distance_inf(p)?);
        }
        Ok(best)
    }
}

/// Quasi-uniform unit directions: `±1` in one dimension, equally spaced
/// angles in two, a Fibonacci lattice on the sphere in three.
pub fn sample_directions(dim: usize, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n.max(4))
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n.max(4) as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let n = n.max(8);
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    let mut v = vec![rho * a.cos(), rho * a.sin(), z];
                    v.resize(dim, 0.0);
                    v
                })
                .collect()
        }
    }
}

/// Default direction count per dimension.
pub fn default_directions(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 64,
        _ => 256,
    }
}

/// Outcome of comparing `A ∩ [−R,R]^d` with `B ∩ [−R,R]^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetCompareReport {
    /// Largest support-function gap over the tested directions.
    #[serde(serialize_with = "crate::ext_real::serialize_f64")]
    pub hausdorff_truncated: f64,
    pub box_radius: f64,
    pub directions_tested: usize,
    pub containment_ab: bool,
    pub containment_ba: bool,
    /// How far the truncated `A` sticks out of `B` (0 when contained).
    #[serde(serialize_with = "crate::ext_real::serialize_f64")]
    pub excess_ab: f64,
    #[serde(serialize_with = "crate::ext_real::serialize_f64")]
    pub excess_ba: f64,
}

impl SetCompareReport {
    pub fn residual(&self) -> f64 {
        self.excess_ab.max(self.excess_ba)
    }
}

/// Compares two sets inside the box `[−R, R]^d`.
///
/// Support gaps are measured along `n_directions` sampled directions, the
/// coordinate axes and every facet normal of either side. Containment
/// `A ⊂ B` is exact when `B` has an H-representation (facet supports) or
/// when the vertices of the truncated `A` are available (vertex distance to
/// `B`, exact for convex `B`); otherwise it falls back to the sampled
/// support gaps. `tol` is absolute.
pub fn set_compare(
    a: &dyn SupportSet,
    b: &dyn SupportSet,
    box_radius: f64,
    n_directions: usize,
    tol: f64,
) -> Result<SetCompareReport> {
    let d = a.dim();
    check_dim(d, b.dim())?;
    let r = box_radius;
    let mut dirs = sample_directions(d, n_directions);
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = sign;
            dirs.push(e);
        }
    }
    for side in [a.halfspaces(), b.halfspaces()].into_iter().flatten() {
        for h in side.iter().filter(|h| !h.is_trivial()) {
            dirs.push(h.normal.clone());
        }
    }

    let mut hausdorff: f64 = 0.0;
    let mut sampled_ab: f64 = 0.0;
    let mut sampled_ba: f64 = 0.0;
    for u in &dirs {
        let ha = a.support_in_box(u, r)?;
        let hb = b.support_in_box(u, r)?;
        let gap = match (ha.is_neg_inf(), hb.is_neg_inf()) {
            (true, true) => 0.0,
            (true, false) | (false, true) => f64::INFINITY,
            _ => (ha.value() - hb.value()).abs(),
        };
        hausdorff = hausdorff.max(gap);
        sampled_ab = sampled_ab.max(excess(ha, hb));
        sampled_ba = sampled_ba.max(excess(hb, ha));
    }

    let excess_ab = containment_excess(a, b, r, sampled_ab)?;
    let excess_ba = containment_excess(b, a, r, sampled_ba)?;
    Ok(SetCompareReport {
        hausdorff_truncated: hausdorff,
        box_radius,
        directions_tested: dirs.len(),
        containment_ab: excess_ab <= tol,
        containment_ba: excess_ba <= tol,
        excess_ab,
        excess_ba,
    })
}

/// `(h_A − h_B)⁺` with `h = −∞` for empty truncations.
fn excess(ha: ExtReal, hb: ExtReal) -> f64 {
    if ha.is_neg_inf() {
        0.0
    } else if hb.is_neg_inf() {
        f64::INFINITY
    } else {
        (ha.value() - hb.value()).max(0.0)
    }
}

fn containment_excess(a: &dyn SupportSet, b: &dyn SupportSet, r: f64, sampled: f64) -> Result<f64> {
    if let Some(rows) = b.halfspaces() {
        let mut worst: f64 = 0.0;
        for h in rows {
            let ha = a.support_in_box(&h.normal, r)?;
            if ha.is_neg_inf() {
                return Ok(0.0);
            }
            worst = worst.max(ha.value() - h.offset);
        }
        return Ok(worst);
    }
    if let Some(vertices) = a.box_vertices(r) {
        let mut worst: f64 = 0.0;
        for v in &vertices {
            worst = worst.max(b.distance_inf(v)?);
        }
        return Ok(worst);
    }
    Ok(sampled)
}
