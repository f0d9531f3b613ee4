use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::linalg::dot;
use crate::lp::{Cmp, Lp, LpOutcome};
use crate::polyhedron::{Halfspace, Polyhedron, TOL};

/// `x ↦ ⟨slope, x⟩ + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinePiece {
    pub slope: Vec<f64>,
    pub intercept: f64,
}

impl AffinePiece {
    pub fn new(slope: Vec<f64>, intercept: f64) -> AffinePiece {
        AffinePiece { slope, intercept }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.slope, x) + self.intercept
    }

    fn approx_eq(&self, other: &AffinePiece, tol: f64) -> bool {
        (self.intercept - other.intercept).abs() <= tol
            && self
                .slope
                .iter()
                .zip(&other.slope)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

pub(crate) fn push_piece(pieces: &mut Vec<AffinePiece>, p: AffinePiece) {
    if !pieces.iter().any(|q| q.approx_eq(&p, 1e-10)) {
        pieces.push(p);
    }
}

/// `f(x) = max_i ⟨a_i, x⟩ + b_i` on a closed polyhedral domain, `+∞` outside.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexPolyhedralFunction {
    dim: usize,
    pieces: Vec<AffinePiece>,
    domain: Polyhedron,
}

impl ConvexPolyhedralFunction {
    pub fn new(pieces: Vec<AffinePiece>, domain: Polyhedron) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidArgument("at least one affine piece is required".into()));
        }
        let dim = domain.dim();
        for p in &pieces {
            check_dim(dim, p.slope.len())?;
            if !p.intercept.is_finite() || p.slope.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("affine pieces must be finite".into()));
            }
        }
        if domain.has_strict() {
            return Err(Error::InvalidArgument(
                "domains of polyhedral functions must be closed".into(),
            ));
        }
        Ok(ConvexPolyhedralFunction { dim, pieces, domain })
    }

    /// Indicator function of a closed polyhedron.
    pub fn indicator(domain: Polyhedron) -> Self {
        let dim = domain.dim();
        ConvexPolyhedralFunction {
            dim,
            pieces: vec![AffinePiece::new(vec![0.0; dim], 0.0)],
            domain: domain.closure(),
        }
    }

    pub fn affine(slope: Vec<f64>, intercept: f64) -> Self {
        let dim = slope.len();
        ConvexPolyhedralFunction {
            dim,
            pieces: vec![AffinePiece::new(slope, intercept)],
            domain: Polyhedron::whole_space(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain(&self) -> &Polyhedron {
        &self.domain
    }

    /// Member of Γ₀ iff the domain is nonempty.
    pub fn is_proper(&self) -> bool {
        !self.domain.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim, x.len())?;
        if !self.domain.contains(x, TOL) {
            return Ok(ExtReal::INFINITY);
        }
        Ok(ExtReal::finite(self.max_piece(x)))
    }

    /// Maximum over pieces, ignoring the domain.
    pub fn max_piece(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Epigraph `{(x, t) : ⟨a_i, x⟩ + b_i ≤ t, x ∈ dom}` in `R^{d+1}`.
    pub fn epigraph(&self) -> Polyhedron {
        let mut hs = Vec::with_capacity(self.pieces.len() + self.domain.halfspaces().len());
        for p in &self.pieces {
            let mut n = p.slope.clone();
            n.push(-1.0);
            hs.push(Halfspace::new(n, -p.intercept));
        }
        for h in self.domain.halfspaces() {
            let mut n = h.normal.clone();
            n.push(0.0);
            hs.push(Halfspace::new(n, h.offset));
        }
        Polyhedron::new(self.dim + 1, hs).expect("epigraph rows have matching dimension")
    }

    /// Adds variables `x` (d free) and `t` (free) constrained to the
    /// epigraph; returns `(first x index, t index)`.
    pub(crate) fn add_epigraph(&self, lp: &mut Lp) -> (usize, usize) {
        let x = lp.free_vars(self.dim);
        let t = lp.free_var(0.0);
        self.constrain_epigraph(lp, x, t);
        (x, t)
    }

    pub(crate) fn constrain_epigraph(&self, lp: &mut Lp, x: usize, t: usize) {
        for p in &self.pieces {
            let mut terms: Vec<(usize, f64)> =
                p.slope.iter().enumerate().map(|(i, &a)| (x + i, a)).collect();
            terms.push((t, -1.0));
            lp.constraint(&terms, Cmp::Le, -p.intercept);
        }
        self.domain.add_rows(lp, x);
    }

    /// Conjugate through the epigraph V-representation: every epigraph
    /// vertex `(x_v, t_v)` gives the piece `s ↦ ⟨x_v, s⟩ − t_v`, every ray
    /// `(r_x, r_t)` the domain halfspace `⟨r_x, s⟩ ≤ r_t`.
    pub fn conjugate(&self) -> Result<ConvexPolyhedralFunction> {
        let epi = self.epigraph();
        let v = epi.vrep();
        if v.vertices.is_empty() {
            return Err(Error::ImproperFunction("empty domain (function is identically +inf)".into()));
        }
        let mut pieces = Vec::with_capacity(v.vertices.len());
        for p in &v.vertices {
            push_piece(
                &mut pieces,
                AffinePiece::new(p[..self.dim].to_vec(), -p[self.dim]),
            );
        }
        let mut hs = Vec::new();
        for r in &v.rays {
            let rx = &r[..self.dim];
            if rx.iter().all(|c| c.abs() <= 1e-12) {
                continue;
            }
            hs.push(Halfspace::new(rx.to_vec(), r[self.dim]));
        }
        let domain = Polyhedron::new(self.dim, hs)?;
        ConvexPolyhedralFunction::new(pieces, domain)
    }

    /// Closed convex hull; for this representation the function itself,
    /// returned in the canonical form produced by double conjugation.
    pub fn envelope(&self) -> Result<ConvexPolyhedralFunction> {
        self.conjugate()?.conjugate()
    }

    /// Pointwise sum; the domain is the intersection (possibly empty).
    pub fn add(&self, other: &ConvexPolyhedralFunction) -> Result<ConvexPolyhedralFunction> {
        check_dim(self.dim, other.dim)?;
        let mut pieces = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for p in &self.pieces {
            for q in &other.pieces {
                push_piece(
                    &mut pieces,
                    AffinePiece::new(
                        p.slope.iter().zip(&q.slope).map(|(a, b)| a + b).collect(),
                        p.intercept + q.intercept,
                    ),
                );
            }
        }
        let domain = self.domain.intersect(&other.domain)?;
        ConvexPolyhedralFunction::new(pieces, domain)
    }

    /// `f(·) − ⟨s, ·⟩`.
    pub fn tilt(&self, s: &[f64]) -> ConvexPolyhedralFunction {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                AffinePiece::new(
                    p.slope.iter().zip(s).map(|(a, b)| a - b).collect(),
                    p.intercept,
                )
            })
            .collect();
        ConvexPolyhedralFunction { dim: self.dim, pieces, domain: self.domain.clone() }
    }

    /// `inf f` with a minimizer when attained: `+∞` for an empty domain,
    /// `−∞` when unbounded below.
    pub fn minimize(&self) -> Result<(ExtReal, Option<Vec<f64>>)> {
        let mut lp = Lp::new();
        let (x, t) = self.add_epigraph(&mut lp);
        lp.set_objective(t, 1.0);
        match lp.solve()? {
            LpOutcome::Optimal { x: sol, objective } => {
                Ok((ExtReal::finite(objective), Some(sol[x..x + self.dim].to_vec())))
            }
            LpOutcome::Infeasible => Ok((ExtReal::INFINITY, None)),
            LpOutcome::Unbounded => Ok((ExtReal::NEG_INFINITY, None)),
        }
    }

    /// `f*(s) = sup_x ⟨s, x⟩ − f(x)` by one LP over the epigraph; does not
    /// build the conjugate representation.
    pub fn conjugate_value(&self, s: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim, s.len())?;
        let (v, _) = self.tilt(s).minimize()?;
        Ok(-v)
    }

    /// Largest amount by which `self` exceeds `other` at the vertices of
    /// `epi other`; `+∞` if a ray of `epi other` leaves `epi self`. Zero
    /// (up to rounding) exactly when `self ≤ other` everywhere.
    pub fn excess_over(&self, other: &ConvexPolyhedralFunction) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        let epi_other = other.epigraph();
        let v = epi_other.vrep();
        if v.vertices.is_empty() {
            return Ok(0.0);
        }
        let epi_self = self.epigraph();
        for r in &v.rays {
            if epi_self.halfspaces().iter().any(|h| dot(&h.normal, r) > 1e-9) {
                return Ok(f64::INFINITY);
            }
        }
        let mut worst: f64 = f64::NEG_INFINITY;
        for p in &v.vertices {
            let val = self.eval(&p[..self.dim])?;
            let gap = val.gap(ExtReal::finite(p[self.dim]));
            worst = worst.max(gap);
        }
        Ok(worst)
    }

    /// Equality as functions, decided by mutual epigraph containment.
    pub fn equivalent(&self, other: &ConvexPolyhedralFunction, tol: f64) -> Result<bool> {
        Ok(self.excess_over(other)? <= tol && other.excess_over(self)? <= tol)
    }

    /// Affine minorant witness: the first piece.
    pub fn affine_minorant(&self) -> Option<AffinePiece> {
        self.is_proper().then(|| self.pieces[0].clone())
    }

    /// Every piece active at `x` (within `tol`) and every domain row tight at
    /// `x`; `∂f(x) = conv{a_i : active} + cone{c_j : tight}`.
    pub fn active_sets(&self, x: &[f64], tol: f64) -> (Vec<usize>, Vec<usize>) {
        let m = self.max_piece(x);
        let scale = 1.0 + m.abs();
        let pieces = (0..self.pieces.len())
            .filter(|&i| self.pieces[i].eval(x) >= m - tol * scale)
            .collect();
        let rows = (0..self.domain.halfspaces().len())
            .filter(|&j| self.domain.halfspaces()[j].excess(x).abs() <= tol * scale)
            .collect();
        (pieces, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: f64, hi: f64) -> Polyhedron {
        Polyhedron::from_box(&[lo], &[hi])
    }

    #[test]
    fn eval_examples() {
        let ind = ConvexPolyhedralFunction::indicator(interval(-1.0, 1.0));
        assert_eq!(ind.eval(&[0.0]).unwrap(), ExtReal::ZERO);
        assert_eq!(ind.eval(&[2.0]).unwrap(), ExtReal::INFINITY);
        let f = ConvexPolyhedralFunction::new(
            vec![AffinePiece::new(vec![1.0], 0.0), AffinePiece::new(vec![2.0], -1.0)],
            Polyhedron::whole_space(1),
        )
        .unwrap();
        assert_eq!(f.eval(&[2.0]).unwrap(), ExtReal::finite(3.0));
        assert!(matches!(f.eval(&[1.0, 2.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn conjugate_of_interval_indicator_is_abs() {
        let c = ConvexPolyhedralFunction::indicator(interval(-1.0, 1.0)).conjugate().unwrap();
        assert!(c.domain().halfspaces().is_empty());
        let mut slopes: Vec<(f64, f64)> =
            c.pieces().iter().map(|p| (p.slope[0], p.intercept)).collect();
        slopes.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(slopes, vec![(-1.0, 0.0), (1.0, 0.0)]);
    }

    #[test]
    fn conjugate_of_abs_is_interval_indicator() {
        let abs = ConvexPolyhedralFunction::new(
            vec![AffinePiece::new(vec![1.0], 0.0), AffinePiece::new(vec![-1.0], 0.0)],
            Polyhedron::whole_space(1),
        )
        .unwrap();
        let c = abs.conjugate().unwrap();
        assert_eq!(c.eval(&[0.5]).unwrap(), ExtReal::ZERO);
        assert_eq!(c.eval(&[1.5]).unwrap(), ExtReal::INFINITY);
        assert!(c.equivalent(&ConvexPolyhedralFunction::indicator(interval(-1.0, 1.0)), 1e-9).unwrap());
        assert_eq!(abs.conjugate_value(&[0.3]).unwrap(), ExtReal::ZERO);
        assert_eq!(abs.conjugate_value(&[1.3]).unwrap(), ExtReal::INFINITY);
    }

    #[test]
    fn affine_function_has_point_conjugate() {
        let f = ConvexPolyhedralFunction::affine(vec![2.0, -1.0], 3.0);
        let c = f.conjugate().unwrap();
        assert!((c.eval(&[2.0, -1.0]).unwrap().value() + 3.0).abs() < 1e-12);
        assert_eq!(c.eval(&[2.0, 0.0]).unwrap(), ExtReal::INFINITY);
        assert!(c.conjugate().unwrap().equivalent(&f, 1e-9).unwrap());
    }

    #[test]
    fn excess_detects_domination() {
        let abs = ConvexPolyhedralFunction::new(
            vec![AffinePiece::new(vec![1.0], 0.0), AffinePiece::new(vec![-1.0], 0.0)],
            Polyhedron::whole_space(1),
        )
        .unwrap();
        let ind = ConvexPolyhedralFunction::indicator(interval(-1.0, 1.0));
        // |x| ≤ I_[-1,1] fails at ±1 by 1; I ≤ |x| fails on rays.
        assert!((abs.excess_over(&ind).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(ind.excess_over(&abs).unwrap(), f64::INFINITY);
    }
}
