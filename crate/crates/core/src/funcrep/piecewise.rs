use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::ext_real::ExtReal;
use crate::polyhedron::Polyhedron;

use super::polyhedral::{push_piece, AffinePiece, ConvexPolyhedralFunction};

/// Pointwise minimum of convex polyhedral branches; generally nonconvex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseMinFunction {
    dim: usize,
    branches: Vec<ConvexPolyhedralFunction>,
}

impl From<ConvexPolyhedralFunction> for PiecewiseMinFunction {
    fn from(f: ConvexPolyhedralFunction) -> Self {
        PiecewiseMinFunction { dim: f.dim(), branches: vec![f] }
    }
}

impl PiecewiseMinFunction {
    pub fn new(branches: Vec<ConvexPolyhedralFunction>) -> Result<Self> {
        let dim = branches
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one branch is required".into()))?
            .dim();
        for b in &branches {
            check_dim(dim, b.dim())?;
        }
        Ok(PiecewiseMinFunction { dim, branches })
    }

    /// Indicator of a finite point set, one singleton branch per point.
    pub fn point_indicator(points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDomain("empty point set".into()));
        }
        let branches = points
            .iter()
            .map(|p| ConvexPolyhedralFunction::indicator(Polyhedron::point(p)))
            .collect();
        PiecewiseMinFunction::new(branches)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branches(&self) -> &[ConvexPolyhedralFunction] {
        &self.branches
    }

    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim, x.len())?;
        let mut best = ExtReal::INFINITY;
        for b in &self.branches {
            best = best.min(b.eval(x)?);
        }
        Ok(best)
    }

    pub fn is_proper(&self) -> bool {
        self.branches.iter().any(|b| b.is_proper())
    }

    /// `(min_i f_i)* = max_i f_i*`: union of the branch conjugates' pieces
    /// over the intersection of their domains. The result has an empty
    /// domain exactly when the function has no affine minorant.
    pub fn conjugate(&self) -> Result<ConvexPolyhedralFunction> {
        let mut pieces: Vec<AffinePiece> = Vec::new();
        let mut domain = Polyhedron::whole_space(self.dim);
        let mut any = false;
        for b in self.branches.iter().filter(|b| b.is_proper()) {
            let c = b.conjugate()?;
            for p in c.pieces() {
                push_piece(&mut pieces, p.clone());
            }
            domain = domain.intersect(c.domain())?;
            any = true;
        }
        if !any {
            return Err(Error::ImproperFunction("every branch has an empty domain".into()));
        }
        ConvexPolyhedralFunction::new(pieces, domain)
    }

    /// Closed convex hull `f**`.
    pub fn envelope(&self) -> Result<ConvexPolyhedralFunction> {
        let c = self.conjugate()?;
        if c.domain().is_empty() {
            return Err(Error::EnvelopeImproper);
        }
        c.conjugate()
    }

    /// Witness `(a, b)` with `⟨a, x⟩ + b ≤ f(x)`: a minimizer `a` of `f*`
    /// (any point of `dom f*` works) and `b = −f*(a)`.
    pub fn affine_minorant(&self) -> Result<Option<AffinePiece>> {
        if self.branches.len() == 1 {
            return Ok(self.branches[0].affine_minorant());
        }
        let c = self.conjugate()?;
        if c.domain().is_empty() {
            return Ok(None);
        }
        let (value, arg) = c.minimize()?;
        let (v, a) = match (value.as_finite(), arg) {
            (Some(v), Some(a)) => (v, a),
            // f* unbounded below means f ≡ +∞ somewhere it must not be; fall
            // back to any point of the domain.
            _ => {
                let a = c.domain().vrep().vertices[0].clone();
                let v = c.eval(&a)?.value();
                (v, a)
            }
        };
        Ok(Some(AffinePiece::new(a, -v)))
    }

    /// `min_i f_i + min_j g_j = min_{ij} (f_i + g_j)`, pruning pairs with
    /// disjoint domains.
    pub fn add(&self, other: &PiecewiseMinFunction) -> Result<PiecewiseMinFunction> {
        check_dim(self.dim, other.dim)?;
        let mut branches = Vec::new();
        for f in &self.branches {
            for g in &other.branches {
                let s = f.add(g)?;
                if s.is_proper() {
                    branches.push(s);
                }
            }
        }
        if branches.is_empty() {
            return Err(Error::EmptyDomain("dom f ∩ dom g is empty".into()));
        }
        PiecewiseMinFunction::new(branches)
    }

    /// Union of branch domains, as a list of polyhedra.
    pub fn domains(&self) -> Vec<&Polyhedron> {
        self.branches.iter().map(|b| b.domain()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_indicator_conjugate() {
        let f = PiecewiseMinFunction::point_indicator(&[vec![0.0], vec![2.0]]).unwrap();
        let c = f.conjugate().unwrap();
        for s in [-1.5, 0.0, 0.7, 3.0] {
            let expected = f64::max(0.0, 2.0 * s);
            assert!((c.eval(&[s]).unwrap().value() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_of_two_points_is_segment() {
        let f = PiecewiseMinFunction::point_indicator(&[vec![0.0], vec![1.0]]).unwrap();
        let env = f.envelope().unwrap();
        let seg = ConvexPolyhedralFunction::indicator(Polyhedron::from_box(&[0.0], &[1.0]));
        assert!(env.equivalent(&seg, 1e-9).unwrap());
    }

    #[test]
    fn concave_tent_envelope_is_constant() {
        // -|x| on [-1, 1] as the minimum of x and -x restricted to [-1, 1].
        let dom = Polyhedron::from_box(&[-1.0], &[1.0]);
        let f = PiecewiseMinFunction::new(vec![
            ConvexPolyhedralFunction::new(vec![AffinePiece::new(vec![1.0], 0.0)], dom.clone()).unwrap(),
            ConvexPolyhedralFunction::new(vec![AffinePiece::new(vec![-1.0], 0.0)], dom.clone()).unwrap(),
        ])
        .unwrap();
        let env = f.envelope().unwrap();
        for x in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            assert!((env.eval(&[x]).unwrap().value() + 1.0).abs() < 1e-12);
        }
        assert_eq!(env.eval(&[1.1]).unwrap(), ExtReal::INFINITY);
    }

    #[test]
    fn missing_minorant() {
        // min(x, -x) on the whole line has no affine minorant.
        let f = PiecewiseMinFunction::new(vec![
            ConvexPolyhedralFunction::affine(vec![1.0], 0.0),
            ConvexPolyhedralFunction::affine(vec![-1.0], 0.0),
        ])
        .unwrap();
        assert_eq!(f.affine_minorant().unwrap(), None);
        assert_eq!(f.envelope(), Err(Error::EnvelopeImproper));
    }
}
