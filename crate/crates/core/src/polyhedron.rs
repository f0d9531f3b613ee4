//! Polyhedra in H-representation with a lazily computed V-representation.

use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dd;
use crate::error::{check_dim, Result};
use crate::ext_real::ExtReal;
use crate::linalg::{dot, norm2};
use crate::lp::{Cmp, Lp, LpOutcome};

/// Default tolerance for membership and comparison of polyhedral objects.
pub const TOL: f64 = 1e-9;

/// `⟨normal, x⟩ ≤ offset`, or `<` when `strict`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    #[serde(default)]
    pub strict: bool,
}

impl Halfspace {
    /// Builds a non-strict halfspace with the normal scaled to unit ℓ2 norm.
    pub fn new(normal: Vec<f64>, offset: f64) -> Halfspace {
        Halfspace { normal, offset, strict: false }.normalized()
    }

    pub fn strict(normal: Vec<f64>, offset: f64) -> Halfspace {
        Halfspace { normal, offset, strict: true }.normalized()
    }

    pub fn normalized(&self) -> Halfspace {
        let n = norm2(&self.normal);
        if n <= 1e-12 {
            // Trivial constraint 0 ≤ offset: keep only its truth value.
            let holds = if self.strict { self.offset > 0.0 } else { self.offset >= 0.0 };
            return Halfspace {
                normal: vec![0.0; self.normal.len()],
                offset: if holds { 0.0 } else { -1.0 },
                strict: false,
            };
        }
        Halfspace {
            normal: self.normal.iter().map(|v| v / n).collect(),
            offset: self.offset / n,
            strict: self.strict,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.normal.iter().all(|v| *v == 0.0)
    }

    /// `⟨normal, x⟩ − offset`; non-positive inside the closed halfspace.
    pub fn excess(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn closure(&self) -> Halfspace {
        Halfspace { strict: false, ..self.clone() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VRep {
    pub vertices: Vec<Vec<f64>>,
    pub rays: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Polyhedron {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    #[serde(skip)]
    vrep: OnceLock<VRep>,
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.halfspaces == other.halfspaces
    }
}

impl Polyhedron {
    /// Normalizes every halfspace and drops trivially satisfied ones. An
    /// infeasible trivial row collapses the result to the canonical empty
    /// polyhedron.
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Polyhedron> {
        let mut kept = Vec::with_capacity(halfspaces.len());
        for h in halfspaces {
            check_dim(dim, h.normal.len())?;
            let h = h.normalized();
            if h.is_trivial() {
                if h.offset < 0.0 {
                    return Ok(Polyhedron::empty(dim));
                }
                continue;
            }
            if !kept.contains(&h) {
                kept.push(h);
            }
        }
        Ok(Polyhedron { dim, halfspaces: kept, vrep: OnceLock::new() })
    }

    pub fn whole_space(dim: usize) -> Polyhedron {
        Polyhedron { dim, halfspaces: Vec::new(), vrep: OnceLock::new() }
    }

    /// The canonical empty polyhedron `{x : 0 ≤ −1}`.
    pub fn empty(dim: usize) -> Polyhedron {
        Polyhedron {
            dim,
            halfspaces: vec![Halfspace { normal: vec![0.0; dim], offset: -1.0, strict: false }],
            vrep: OnceLock::new(),
        }
    }

    pub fn from_box(lower: &[f64], upper: &[f64]) -> Polyhedron {
        let d = lower.len();
        let mut hs = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            hs.push(Halfspace::new(e.clone(), upper[i]));
            e[i] = -1.0;
            hs.push(Halfspace::new(e, -lower[i]));
        }
        Polyhedron::new(d, hs).expect("box dimensions agree")
    }

    /// The singleton `{p}`.
    pub fn point(p: &[f64]) -> Polyhedron {
        Polyhedron::from_box(p, p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn is_canonical_empty(&self) -> bool {
        self.halfspaces.iter().any(|h| h.is_trivial() && h.offset < 0.0)
    }

    pub fn has_strict(&self) -> bool {
        self.halfspaces.iter().any(|h| h.strict)
    }

    pub fn closure(&self) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            halfspaces: self.halfspaces.iter().map(Halfspace::closure).collect(),
            vrep: OnceLock::new(),
        }
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        check_dim(self.dim, other.dim)?;
        let mut hs = self.halfspaces.clone();
        hs.extend(other.halfspaces.iter().cloned());
        Polyhedron::new(self.dim, hs)
    }

    /// Membership in the closure, with tolerance `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.excess(x) <= tol)
    }

    /// Membership honoring strict halfspaces (exact comparison).
    pub fn contains_strict(&self, x: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| {
            let e = h.excess(x);
            if h.strict {
                e < 0.0
            } else {
                e <= 0.0
            }
        })
    }

    /// Appends `⟨normal, x⟩ ≤ offset` rows over the variables starting at
    /// `first` (closure semantics).
    pub fn add_rows(&self, lp: &mut Lp, first: usize) {
        for h in &self.halfspaces {
            lp.dense(first, &h.normal, Cmp::Le, h.offset);
        }
    }

    pub fn is_empty(&self) -> bool {
        if self.is_canonical_empty() {
            return true;
        }
        let mut lp = Lp::new();
        let x = lp.free_vars(self.dim);
        self.add_rows(&mut lp, x);
        !matches!(lp.solve(), Ok(LpOutcome::Optimal { .. }))
    }

    /// Largest `t ≤ 1` such that some point satisfies every selected row with
    /// slack `t` and the remaining rows non-strictly; `None` when infeasible.
    pub(crate) fn max_slack(&self, slack_on: impl Fn(&Halfspace) -> bool) -> Option<f64> {
        let mut lp = Lp::new();
        let x = lp.free_vars(self.dim);
        let t = lp.var(-1.0, f64::NEG_INFINITY, 1.0);
        for h in &self.halfspaces {
            let mut terms: Vec<(usize, f64)> =
                h.normal.iter().enumerate().map(|(i, &c)| (x + i, c)).collect();
            if slack_on(h) {
                terms.push((t, 1.0));
            }
            lp.constraint(&terms, Cmp::Le, h.offset);
        }
        match lp.solve() {
            Ok(LpOutcome::Optimal { objective, .. }) => Some(-objective),
            _ => None,
        }
    }

    /// Whether the set, with strict halfspaces honored, is nonempty.
    pub fn is_nonempty_strict(&self) -> bool {
        if !self.has_strict() {
            return !self.is_empty();
        }
        matches!(self.max_slack(|h| h.strict), Some(t) if t > TOL)
    }

    /// Whether the closed polyhedron has nonempty interior.
    pub fn has_interior(&self) -> bool {
        matches!(self.max_slack(|_| true), Some(t) if t > TOL)
    }

    /// Rows that hold with equality on the whole closed polyhedron.
    pub fn implicit_equalities(&self) -> Vec<bool> {
        self.halfspaces
            .iter()
            .map(|h| {
                let mut lp = Lp::new();
                let x = lp.free_vars(self.dim);
                for (i, &c) in h.normal.iter().enumerate() {
                    lp.set_objective(x + i, c);
                }
                self.add_rows(&mut lp, x);
                match lp.solve() {
                    Ok(LpOutcome::Optimal { objective, .. }) => h.offset - objective <= TOL,
                    _ => false,
                }
            })
            .collect()
    }

    /// `sup {⟨u, x⟩ : x ∈ P}`, `−∞` for the empty set.
    pub fn support(&self, u: &[f64]) -> ExtReal {
        self.support_with_bounds(u, f64::INFINITY)
    }

    /// Support function of `P ∩ [−r, r]^d`.
    pub fn support_in_box(&self, u: &[f64], r: f64) -> ExtReal {
        self.support_with_bounds(u, r)
    }

    fn support_with_bounds(&self, u: &[f64], r: f64) -> ExtReal {
        if self.is_canonical_empty() {
            return ExtReal::NEG_INFINITY;
        }
        let mut lp = Lp::new();
        for &ui in u {
            lp.var(-ui, -r, r);
        }
        self.add_rows(&mut lp, 0);
        match lp.solve() {
            Ok(LpOutcome::Optimal { objective, .. }) => ExtReal::finite(-objective),
            Ok(LpOutcome::Unbounded) => ExtReal::INFINITY,
            _ => ExtReal::NEG_INFINITY,
        }
    }

    /// V-representation of the closure, computed once by double description.
    pub fn vrep(&self) -> &VRep {
        self.vrep.get_or_init(|| {
            if self.is_canonical_empty() {
                VRep::default()
            } else {
                dd::enumerate(self.dim, &self.halfspaces)
            }
        })
    }

    /// Checks the cached V-representation against the halfspaces: every
    /// vertex satisfies all rows and every ray is a recession direction.
    pub fn vrep_consistent(&self, tol: f64) -> bool {
        let v = self.vrep();
        v.vertices.iter().all(|p| self.contains(p, tol))
            && v.rays
                .iter()
                .all(|r| self.halfspaces.iter().all(|h| dot(&h.normal, r) <= tol))
    }

    /// CSV export: normal components, offset, strict flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let cols: Vec<String> = (0..self.dim).map(|i| format!("c{i}")).collect();
        let _ = writeln!(out, "{},offset,strict", cols.join(","));
        for h in &self.halfspaces {
            let normal: Vec<String> = h.normal.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{},{},{}", normal.join(","), h.offset, h.strict);
        }
        out
    }
}
